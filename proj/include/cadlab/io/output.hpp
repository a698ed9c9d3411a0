#ifndef CADLAB_IO_OUTPUT_HPP
#define CADLAB_IO_OUTPUT_HPP

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <openssl/evp.h>
#include <unistd.h>

#include <json.hpp>

#include "cadlab/errors.hpp"

namespace cadlab::io {

inline constexpr const char* kToolVersion = "cadlab 0.1.0";

inline std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

// UTC ISO-8601 timestamp. SOURCE_DATE_EPOCH, when set, pins the clock so
// reruns produce identical manifests.
inline std::string timestamp_now() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch != '\0') {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Collects a command's outputs in a hidden staging directory under out_dir
// and moves them into place only on commit(). An uncommitted stage is
// removed on destruction, so failed runs leave no partial outputs.
class OutputStage {
 public:
  explicit OutputStage(std::filesystem::path out_dir) : out_dir_(std::move(out_dir)) {
    std::filesystem::create_directories(out_dir_);
    staging_ = out_dir_ / (".cadlab-staging-" + std::to_string(::getpid()));
    std::filesystem::remove_all(staging_);
    std::filesystem::create_directories(staging_);
  }
  OutputStage(const OutputStage&) = delete;
  OutputStage& operator=(const OutputStage&) = delete;

  ~OutputStage() {
    std::error_code ec;
    std::filesystem::remove_all(staging_, ec);
  }

  void write(const std::string& name, std::string_view contents) {
    std::ofstream out(staging_ / name, std::ios::binary | std::ios::trunc);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("failed to write " + (staging_ / name).string());
    files_.push_back(name);
  }

  const std::vector<std::string>& files() const noexcept { return files_; }
  const std::filesystem::path& out_dir() const noexcept { return out_dir_; }

  // Renames every staged file into out_dir in write order, then removes
  // the stage. Write the manifest last so it lands last.
  void commit() {
    for (const auto& f : files_) std::filesystem::rename(staging_ / f, out_dir_ / f);
    std::filesystem::remove_all(staging_);
    committed_ = true;
  }

 private:
  std::filesystem::path out_dir_;
  std::filesystem::path staging_;
  std::vector<std::string> files_;
  bool committed_ = false;
};

struct RunManifest {
  std::string command;
  std::string config_digest;
  std::uint64_t master_seed = 0;
  nlohmann::json spec_summary;
  nlohmann::json inputs = nlohmann::json::array();
  std::string started_at;
  std::string finished_at;
  std::vector<std::string> outputs;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["config_digest"] = config_digest;
    j["master_seed"] = master_seed;
    j["spec"] = spec_summary;
    j["inputs"] = inputs;
    j["tool_version"] = kToolVersion;
    j["started_at"] = started_at;
    j["finished_at"] = finished_at;
    j["outputs"] = outputs;
    return j;
  }
};

}  // namespace cadlab::io

#endif  // CADLAB_IO_OUTPUT_HPP
