#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cadlab/cli.hpp"

namespace cadlab {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    root_ = fs::temp_directory_path() / (std::string("cadlab_cli_") + info->name());
    fs::remove_all(root_);
    fs::create_directories(root_);
    ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  }
  void TearDown() override { ::unsetenv("SOURCE_DATE_EPOCH"); }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "cadlab");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    err_.str("");
    return cli::run(static_cast<int>(argv.size()), argv.data(), err_);
  }

  std::string write(const std::string& name, const std::string& text) {
    const auto p = root_ / name;
    std::ofstream(p) << text;
    return p.string();
  }

  std::string out(const std::string& sub) const { return (root_ / sub).string(); }

  static std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(io::read_file(p.string()));
    std::string line;
    while (std::getline(in, line)) rows.push_back(io::split(line));
    return rows;
  }

  static std::vector<std::string> listing(const fs::path& dir) {
    std::vector<std::string> names;
    if (!fs::exists(dir)) return names;
    for (const auto& e : fs::directory_iterator(dir)) names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    return names;
  }

  static bool same_files(const fs::path& a, const fs::path& b) {
    if (listing(a) != listing(b)) return false;
    for (const auto& f : listing(a)) {
      if (io::read_file((a / f).string()) != io::read_file((b / f).string())) return false;
    }
    return true;
  }

  fs::path root_;
  std::ostringstream err_;
};

constexpr const char* kQuickConfig =
    R"({"learning_rate": 0.05, "epochs": 20, "n_pairs": 200, "n_eval": 2000})";

TEST_F(CliTest, AnalyzeReference) {
  ASSERT_EQ(run({"--preset", "reference", "--out-dir", out("a"), "analyze"}), 0) << err_.str();
  const auto rows = read_csv(root_ / "a" / "analysis.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0][0], "spec_id");
  EXPECT_EQ(rows[1], (std::vector<std::string>{"reference", "1.00000", "1.00000", "1.00000",
                                               "0.81650", "0.70711", "0.50000", "0.86603"}));
  EXPECT_EQ(listing(root_ / "a"), (std::vector<std::string>{"analysis.csv", "manifest.json",
                                                            "phi_cad.json", "phi_ori.json",
                                                            "phi_rob.json"}));
  const auto manifest = io::json::parse(io::read_file((root_ / "a" / "manifest.json").string()));
  EXPECT_EQ(manifest["command"], "analyze");
  EXPECT_EQ(manifest["started_at"], "2023-11-14T22:13:20Z");
  EXPECT_EQ(manifest["tool_version"], io::kToolVersion);
  EXPECT_EQ(manifest["config_digest"].get<std::string>().size(), 64u);
}

TEST_F(CliTest, AnalyzeWithoutSpuriousSignal) {
  const std::string spec = write("nospur.json", R"({
  "d_edited": 1, "d_unedited": 1, "d_correlated": 1,
  "mu_edited": [1], "mu_unedited": [1], "mu_correlated": [0],
  "var_edited": [1], "var_unedited": [1], "var_correlated": [1]
})");
  ASSERT_EQ(run({"--out-dir", out("a"), "analyze", "--spec", spec}), 0) << err_.str();
  const auto rows = read_csv(root_ / "a" / "analysis.csv");
  EXPECT_EQ(rows[1][0], "nospur");
  EXPECT_EQ(rows[1][4], "1.00000");
  EXPECT_EQ(rows[1][6], "1.00000");
}

TEST_F(CliTest, InvalidSpecExitsTwoWithoutOutputs) {
  const std::string spec = write("bad.json", R"({
  "d_edited": 1, "d_unedited": 1, "d_correlated": 1,
  "mu_edited": [1], "mu_unedited": [1], "mu_correlated": [1],
  "var_edited": [1], "var_unedited": [-1], "var_correlated": [1]
})");
  EXPECT_EQ(run({"--out-dir", out("a"), "analyze", "--spec", spec}), 2);
  EXPECT_NE(err_.str().find("bad.json:4"), std::string::npos) << err_.str();
  EXPECT_NE(err_.str().find("var_unedited"), std::string::npos);
  EXPECT_TRUE(listing(root_ / "a").empty());
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}), 2);
  EXPECT_EQ(run({"analyze"}), 2);
  EXPECT_EQ(run({"--preset", "nope", "analyze"}), 2);
  EXPECT_EQ(run({"--preset", "reference", "ablate", "--shift", "tilt"}), 2);
  EXPECT_EQ(run({"--preset", "reference", "simulate", "--n", "7"}), 2);
}

TEST_F(CliTest, SimulateMatchesClosedForms) {
  ASSERT_EQ(run({"--preset", "hard", "--out-dir", out("s"), "simulate", "--noise", "0",
                 "--noise", "1"}),
            0)
      << err_.str();
  const auto rows = read_csv(root_ / "s" / "simulate.csv");
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[1][0], "ori");
  EXPECT_EQ(rows[1][1], "nan");
  EXPECT_LE(std::stod(rows[1][3]), 0.02);
  EXPECT_EQ(rows[2][0], "cad");
  EXPECT_LE(std::stod(rows[2][3]), 0.02);
  // More alignment noise moves CAD further from its closed form.
  EXPECT_GT(std::stod(rows[3][3]), std::stod(rows[2][3]));

  ASSERT_EQ(run({"--preset", "hard", "--out-dir", out("s2"), "simulate", "--noise", "0",
                 "--noise", "1"}),
            0);
  EXPECT_TRUE(same_files(root_ / "s", root_ / "s2"));
}

TEST_F(CliTest, SimulateExportsData) {
  ASSERT_EQ(run({"--preset", "reference", "--out-dir", out("s"), "simulate", "--n", "100",
                 "--export-data"}),
            0);
  const auto names = listing(root_ / "s");
  EXPECT_NE(std::find(names.begin(), names.end(), "data_cad_0.csv"), names.end());
  const auto back = io::parse_dataset_csv(io::read_file((root_ / "s" / "data_cad_0.csv").string()), 3);
  EXPECT_EQ(back.size(), 100u);
}

TEST_F(CliTest, TrainWritesModelAndIsDeterministic) {
  const auto cfg = write("cfg.json", kQuickConfig);
  ASSERT_EQ(run({"--preset", "reference", "--seed", "3", "--out-dir", out("t"), "train",
                 "--config", cfg}),
            0)
      << err_.str();
  EXPECT_EQ(listing(root_ / "t"),
            (std::vector<std::string>{"decision.json", "history.csv", "manifest.json",
                                      "model.json", "ood.csv"}));
  const auto hist = read_csv(root_ / "t" / "history.csv");
  ASSERT_EQ(hist.size(), 21u);
  EXPECT_LT(std::stod(hist.back()[4]), std::stod(hist[1][4]));
  EXPECT_GT(std::stod(hist.back()[5]), 0.7);
  const auto ood = read_csv(root_ / "t" / "ood.csv");
  ASSERT_EQ(ood.size(), 4u);
  EXPECT_EQ(ood[1][0], kInDistribution);
  EXPECT_EQ(ood[2][0], "FLIP_CORRELATED");

  ASSERT_EQ(run({"--preset", "reference", "--seed", "3", "--out-dir", out("t2"), "train",
                 "--config", cfg}),
            0);
  EXPECT_TRUE(same_files(root_ / "t", root_ / "t2"));
}

TEST_F(CliTest, TrainManifestRecordsDefaults) {
  const auto cfg = write("cfg.json", R"({"epochs": 1, "n_pairs": 10, "n_eval": 10})");
  ASSERT_EQ(run({"--preset", "reference", "--seed", "5", "--out-dir", out("t"), "train",
                 "--config", cfg}),
            0)
      << err_.str();
  const auto m = io::json::parse(io::read_file((root_ / "t" / "manifest.json").string()));
  EXPECT_EQ(m["config"]["alpha"], 1.6);
  EXPECT_EQ(m["config"]["beta"], 0.1);
  EXPECT_EQ(m["config"]["learning_rate"], 1e-3);
  EXPECT_EQ(m["config"]["batch_pairs"], 32);
  EXPECT_EQ(m["config"]["seed"], 5);
  EXPECT_EQ(m["master_seed"], 5);
  EXPECT_EQ(m["config_digest"], io::sha256_hex(io::read_file(cfg)));
  EXPECT_EQ(m["inputs"].size(), 2u);
}

TEST_F(CliTest, DivergenceExitsThreeWithoutOutputs) {
  const auto cfg = write("cfg.json", R"({"learning_rate": 1e8, "epochs": 20, "n_pairs": 64})");
  EXPECT_EQ(run({"--preset", "hard", "--out-dir", out("t"), "train", "--config", cfg}), 3);
  EXPECT_NE(err_.str().find("epoch"), std::string::npos) << err_.str();
  EXPECT_NE(err_.str().find("learning_rate"), std::string::npos);
  EXPECT_TRUE(listing(root_ / "t").empty());
}

TEST_F(CliTest, AblateProducesFourRowsPerSeed) {
  const auto cfg = write("cfg.json", kQuickConfig);
  ASSERT_EQ(run({"--preset", "hard", "--out-dir", out("ab"), "ablate", "--config", cfg,
                 "--seeds", "2"}),
            0)
      << err_.str();
  const auto rows = read_csv(root_ / "ab" / "ablation.csv");
  ASSERT_EQ(rows.size(), 1u + 2u * 4u);
  EXPECT_EQ(rows[1][0], "ECF");
  EXPECT_EQ(rows[4][0], "CAD_only");
  const auto summary = read_csv(root_ / "ab" / "ablation_summary.csv");
  EXPECT_EQ(summary.size(), 5u);
  const auto m = io::json::parse(io::read_file((root_ / "ab" / "manifest.json").string()));
  std::vector<std::string> outputs = m["outputs"].get<std::vector<std::string>>();
  std::sort(outputs.begin(), outputs.end());
  EXPECT_EQ(outputs, listing(root_ / "ab"));
}

TEST_F(CliTest, EfficiencyShapeAndDeterminism) {
  const auto cfg = write("cfg.json", R"({"learning_rate": 0.05, "epochs": 5, "n_eval": 1000})");
  const std::vector<std::string> args = {"--preset", "reference", "efficiency", "--config", cfg,
                                         "--sizes", "10,20,30", "--seeds", "2"};
  auto with_out = [&](const std::string& d) {
    auto a = args;
    a.insert(a.begin(), {"--out-dir", out(d)});
    return a;
  };
  ASSERT_EQ(run(with_out("e")), 0) << err_.str();
  const auto rows = read_csv(root_ / "e" / "efficiency.csv");
  ASSERT_EQ(rows.size(), 1u + 3u * 2u * 2u);
  EXPECT_EQ(rows[0][1], "pairs");
  ASSERT_EQ(run(with_out("e2")), 0);
  EXPECT_TRUE(same_files(root_ / "e", root_ / "e2"));
}

}  // namespace
}  // namespace cadlab
