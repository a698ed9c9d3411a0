#ifndef CADLAB_IO_JSON_HPP
#define CADLAB_IO_JSON_HPP

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "cadlab/ecf.hpp"
#include "cadlab/errors.hpp"
#include "cadlab/feature_model.hpp"
#include "cadlab/fisher.hpp"
#include "cadlab/ood_eval.hpp"

namespace cadlab::io {

using nlohmann::json;

// Validation failure tied to a location in a config file. what() reads
// "<source>:<line>: <message>" when the line is known.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& message)
      : ValidationError(format(source, line, message)), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& source, std::size_t line, const std::string& msg) {
    std::ostringstream os;
    os << source;
    if (line > 0) os << ':' << line;
    os << ": " << msg;
    return os.str();
  }
  std::size_t line_;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

namespace detail {

inline std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Line of the first occurrence of "key" in the raw text, 0 if not found.
inline std::size_t line_of_key(std::string_view text, std::string_view key) {
  const std::string quoted = "\"" + std::string(key) + "\"";
  const auto pos = text.find(quoted);
  return pos == std::string_view::npos ? 0 : line_of_offset(text, pos);
}

inline json parse_text(std::string_view text, const std::string& source) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t byte = e.byte == 0 ? 0 : e.byte - 1;
    throw ParseError(source, line_of_offset(text, byte), e.what());
  }
}

inline Eigen::VectorXd to_vector(const json& j) {
  if (!j.is_array()) throw ValidationError("expected an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ValidationError("expected an array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

inline json from_vector(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Eigen::MatrixXd to_matrix(const json& j) {
  if (!j.is_array() || j.empty()) throw ValidationError("expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto row = to_vector(j[static_cast<std::size_t>(r)]);
    if (row.size() != cols) throw ValidationError("ragged matrix rows");
    m.row(r) = row.transpose();
  }
  return m;
}

inline json from_matrix(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(from_vector(m.row(r).transpose()));
  return a;
}

// Runs fn(); rewraps any ValidationError as a ParseError pointing at `key`.
template <typename Fn>
auto at_key(std::string_view text, const std::string& source, std::string_view key, Fn&& fn) {
  try {
    return fn();
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(source, line_of_key(text, key), std::string(key) + ": " + e.what());
  }
}

}  // namespace detail

// ---- FeatureSpec ----------------------------------------------------------

inline constexpr const char* kSpecKeys[] = {"d_edited",      "d_unedited",     "d_correlated",
                                            "mu_edited",     "mu_unedited",    "mu_correlated",
                                            "var_edited",    "var_unedited",   "var_correlated"};

inline json to_json(const FeatureSpec& s) {
  json j;  // nlohmann keeps keys sorted, so output order is fixed
  j["d_edited"] = s.d_edited;
  j["d_unedited"] = s.d_unedited;
  j["d_correlated"] = s.d_correlated;
  j["mu_edited"] = detail::from_vector(s.mu_edited);
  j["mu_unedited"] = detail::from_vector(s.mu_unedited);
  j["mu_correlated"] = detail::from_vector(s.mu_correlated);
  j["var_edited"] = detail::from_vector(s.var_edited);
  j["var_unedited"] = detail::from_vector(s.var_unedited);
  j["var_correlated"] = detail::from_vector(s.var_correlated);
  return j;
}

inline FeatureSpec parse_feature_spec(std::string_view text, const std::string& source = "<spec>") {
  const json j = detail::parse_text(text, source);
  if (!j.is_object()) throw ParseError(source, 1, "feature spec must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(kSpecKeys), std::end(kSpecKeys), key) == std::end(kSpecKeys)) {
      throw ParseError(source, detail::line_of_key(text, key), "unknown key \"" + key + "\"");
    }
  }
  for (const char* key : kSpecKeys) {
    if (!j.contains(key)) throw ParseError(source, 0, std::string("missing key \"") + key + "\"");
  }
  auto count = [&](const char* key) {
    return detail::at_key(text, source, key, [&] {
      const json& v = j.at(key);
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        throw ValidationError("expected a nonnegative integer");
      }
      return v.get<std::size_t>();
    });
  };
  auto vec = [&](const char* key) {
    return detail::at_key(text, source, key, [&] { return detail::to_vector(j.at(key)); });
  };
  FeatureSpec s;
  s.d_edited = count("d_edited");
  s.d_unedited = count("d_unedited");
  s.d_correlated = count("d_correlated");
  s.mu_edited = vec("mu_edited");
  s.mu_unedited = vec("mu_unedited");
  s.mu_correlated = vec("mu_correlated");
  s.var_edited = vec("var_edited");
  s.var_unedited = vec("var_unedited");
  s.var_correlated = vec("var_correlated");
  try {
    validate(s);
  } catch (const ValidationError& e) {
    // Messages start with the offending field name.
    const std::string msg = e.what();
    std::size_t line = 0;
    for (const char* key : kSpecKeys) {
      if (msg.rfind(key, 0) == 0) line = detail::line_of_key(text, key);
    }
    throw ParseError(source, line, msg);
  }
  return s;
}

inline FeatureSpec load_feature_spec(const std::string& path) {
  return parse_feature_spec(read_file(path), path);
}

// ---- TrainConfig + experiment settings -------------------------------------

struct ExperimentConfig {
  TrainConfig train;
  ExperimentSettings settings;
  bool seed_given = false;
};

inline constexpr const char* kConfigKeys[] = {
    "alpha",   "beta",   "learning_rate",    "epochs",  "batch_pairs",        "seed",
    "d_repr",  "identity_encoder", "n_pairs", "alignment_noise_sd", "n_eval"};

// Missing keys keep their defaults (alpha 1.6, beta 0.1, learning_rate 1e-3,
// epochs 100, batch_pairs 32).
inline ExperimentConfig parse_experiment_config(std::string_view text,
                                                const std::string& source = "<config>") {
  const json j = detail::parse_text(text, source);
  if (!j.is_object()) throw ParseError(source, 1, "config must be a JSON object");
  ExperimentConfig c;
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(kConfigKeys), std::end(kConfigKeys), key) == std::end(kConfigKeys)) {
      throw ParseError(source, detail::line_of_key(text, key), "unknown key \"" + key + "\"");
    }
    detail::at_key(text, source, key, [&] {
      auto real = [&] {
        if (!value.is_number()) throw ValidationError("expected a number");
        return value.get<double>();
      };
      auto count = [&] {
        if (!value.is_number_integer() || value.get<long long>() < 0) {
          throw ValidationError("expected a nonnegative integer");
        }
        return value.get<std::size_t>();
      };
      if (key == "alpha") c.train.alpha = real();
      else if (key == "beta") c.train.beta = real();
      else if (key == "learning_rate") c.train.learning_rate = real();
      else if (key == "epochs") c.train.epochs = count();
      else if (key == "batch_pairs") c.train.batch_pairs = count();
      else if (key == "seed") { c.train.seed = value.get<std::uint64_t>(); c.seed_given = true; }
      else if (key == "d_repr") c.train.d_repr = count();
      else if (key == "identity_encoder") {
        if (!value.is_boolean()) throw ValidationError("expected true or false");
        c.train.identity_encoder = value.get<bool>();
      }
      else if (key == "n_pairs") c.settings.n_pairs = count();
      else if (key == "alignment_noise_sd") c.settings.alignment_noise_sd = real();
      else if (key == "n_eval") c.settings.n_eval = count();
      return 0;
    });
  }
  auto check = [&](const char* key, bool ok, const char* msg) {
    if (!ok) throw ParseError(source, detail::line_of_key(text, key), std::string(key) + " " + msg);
  };
  check("alpha", c.train.alpha >= 0.0 && std::isfinite(c.train.alpha), "must be >= 0");
  check("beta", c.train.beta >= 0.0 && std::isfinite(c.train.beta), "must be >= 0");
  check("learning_rate", c.train.learning_rate > 0.0 && std::isfinite(c.train.learning_rate),
        "must be > 0");
  check("batch_pairs", c.train.batch_pairs >= 1, "must be >= 1");
  check("n_pairs", c.settings.n_pairs >= 1, "must be >= 1");
  check("alignment_noise_sd",
        c.settings.alignment_noise_sd >= 0.0 && std::isfinite(c.settings.alignment_noise_sd),
        "must be >= 0");
  check("n_eval", c.settings.n_eval >= 2 && c.settings.n_eval % 2 == 0,
        "must be an even count >= 2");
  return c;
}

inline json to_json(const ExperimentConfig& c) {
  json j;
  j["alpha"] = c.train.alpha;
  j["beta"] = c.train.beta;
  j["learning_rate"] = c.train.learning_rate;
  j["epochs"] = c.train.epochs;
  j["batch_pairs"] = c.train.batch_pairs;
  j["seed"] = c.train.seed;
  j["d_repr"] = c.train.d_repr;
  j["identity_encoder"] = c.train.identity_encoder;
  j["n_pairs"] = c.settings.n_pairs;
  j["alignment_noise_sd"] = c.settings.alignment_noise_sd;
  j["n_eval"] = c.settings.n_eval;
  return j;
}

// ---- classifiers and models -----------------------------------------------

inline json to_json(const LinearClassifier& c) {
  json j;
  j["block_dims"] = {c.dims().edited, c.dims().unedited, c.dims().correlated};
  j["weights"] = detail::from_vector(c.weights());
  return j;
}

inline LinearClassifier classifier_from_json(const json& j) {
  const auto& d = j.at("block_dims");
  if (!d.is_array() || d.size() != 3) throw ValidationError("block_dims must have 3 entries");
  const BlockDims dims{d[0].get<std::size_t>(), d[1].get<std::size_t>(), d[2].get<std::size_t>()};
  return LinearClassifier(detail::to_vector(j.at("weights")), dims);
}

// {d_repr, encoder (row-major nested rows), classifier, bias}
inline json to_json(const ModelParams& p) {
  json j;
  j["d_repr"] = p.d_repr();
  j["encoder"] = detail::from_matrix(p.encoder);
  j["classifier"] = detail::from_matrix(p.classifier);
  j["bias"] = detail::from_vector(p.bias);
  return j;
}

inline ModelParams model_from_json(const json& j) {
  ModelParams p;
  p.encoder = detail::to_matrix(j.at("encoder"));
  p.classifier = detail::to_matrix(j.at("classifier"));
  const auto b = detail::to_vector(j.at("bias"));
  if (b.size() != 2) throw ValidationError("bias must have 2 entries");
  p.bias = b;
  if (j.at("d_repr").get<std::size_t>() != p.d_repr()) {
    throw ValidationError("d_repr does not match encoder rows");
  }
  validate(p);
  return p;
}

}  // namespace cadlab::io

#endif  // CADLAB_IO_JSON_HPP
