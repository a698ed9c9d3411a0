#ifndef CADLAB_CLI_HPP
#define CADLAB_CLI_HPP

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cadlab/ecf.hpp"
#include "cadlab/errors.hpp"
#include "cadlab/feature_model.hpp"
#include "cadlab/fisher.hpp"
#include "cadlab/io/csv.hpp"
#include "cadlab/io/json.hpp"
#include "cadlab/io/output.hpp"
#include "cadlab/ood_eval.hpp"
#include "cadlab/presets.hpp"

namespace cadlab::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kInvalidInput = 2, kDiverged = 3 };

struct GlobalOptions {
  Seed seed = 0;
  std::string out_dir = ".";
  std::string preset;
};

// A resolved feature spec together with the bytes it came from.
struct SpecSource {
  FeatureSpec spec;
  std::string id;
  std::string bytes;
  std::string origin;
};

inline SpecSource resolve_spec(const GlobalOptions& g, const std::string& spec_file) {
  if (!spec_file.empty() && !g.preset.empty()) {
    throw ValidationError("give either --spec or --preset, not both");
  }
  SpecSource s;
  if (!spec_file.empty()) {
    s.bytes = io::read_file(spec_file);
    s.spec = io::parse_feature_spec(s.bytes, spec_file);
    s.id = std::filesystem::path(spec_file).stem().string();
    s.origin = spec_file;
  } else if (!g.preset.empty()) {
    s.spec = presets::by_name(g.preset);
    s.bytes = io::to_json(s.spec).dump(2) + "\n";
    s.id = g.preset;
    s.origin = "preset:" + g.preset;
  } else {
    throw ValidationError("no feature spec: pass --spec FILE or --preset reference|hard");
  }
  return s;
}

struct ConfigSource {
  io::ExperimentConfig config;
  std::string bytes;
  std::string origin;
};

// Without a file every field keeps its default; the training seed falls
// back to the master seed when the config does not set one.
inline ConfigSource resolve_config(const GlobalOptions& g, const std::string& config_file) {
  ConfigSource c;
  if (!config_file.empty()) {
    c.bytes = io::read_file(config_file);
    c.config = io::parse_experiment_config(c.bytes, config_file);
    c.origin = config_file;
  } else {
    c.bytes = "{}";
    c.config = io::parse_experiment_config(c.bytes, "<defaults>");
    c.origin = "defaults";
  }
  if (!c.config.seed_given) c.config.train.seed = g.seed;
  return c;
}

class Run {
 public:
  Run(std::string command, const GlobalOptions& g)
      : stage_(g.out_dir) {
    manifest_.command = std::move(command);
    manifest_.master_seed = g.seed;
    manifest_.started_at = io::timestamp_now();
  }

  void add_input(const std::string& role, const std::string& origin, const std::string& bytes) {
    manifest_.inputs.push_back({{"role", role}, {"source", origin}, {"sha256", io::sha256_hex(bytes)}});
  }
  void set_config_digest(const std::string& bytes) { manifest_.config_digest = io::sha256_hex(bytes); }
  void set_spec(const SpecSource& s) {
    manifest_.spec_summary = io::to_json(s.spec);
    manifest_.spec_summary["id"] = s.id;
  }
  void set_config(const io::ExperimentConfig& c) { config_ = io::to_json(c); }

  void write(const std::string& name, const std::string& contents) { stage_.write(name, contents); }

  void finish() {
    manifest_.outputs = stage_.files();
    manifest_.outputs.push_back("manifest.json");
    manifest_.finished_at = io::timestamp_now();
    auto j = manifest_.to_json();
    if (!config_.is_null()) j["config"] = config_;
    stage_.write("manifest.json", j.dump(2) + "\n");
    stage_.commit();
  }

 private:
  io::OutputStage stage_;
  io::RunManifest manifest_;
  nlohmann::json config_;
};

inline std::vector<Seed> seed_list(Seed master, std::size_t count) {
  std::vector<Seed> seeds;
  seeds.reserve(count);
  for (std::size_t i = 0; i < count; ++i) seeds.push_back(derive_seed(master, i));
  return seeds;
}

inline OODShift parse_shift(const std::string& s) {
  if (s == "flip") return OODShift::flip();
  if (s == "zero") return OODShift::zero();
  if (s.rfind("scale:", 0) == 0) {
    try {
      return OODShift::scale(std::stod(s.substr(6)));
    } catch (const std::exception&) {
    }
  }
  throw ValidationError("bad shift \"" + s + "\" (expected flip, zero or scale:K)");
}

// Seed means per (variant[, pairs]) key in first-appearance order.
inline std::string summary_csv(std::span<const TableRow> rows, bool with_pairs) {
  struct Acc {
    std::string variant, shift;
    std::size_t pairs = 0;
    std::vector<double> acc;
    double e = 0, u = 0, r = 0, ratio = 0;
  };
  std::vector<Acc> groups;
  for (const auto& row : rows) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Acc& a) {
      return a.variant == row.variant && a.shift == row.shift && (!with_pairs || a.pairs == row.pairs);
    });
    if (it == groups.end()) {
      groups.push_back({row.variant, row.shift, row.pairs, {}, 0, 0, 0, 0});
      it = std::prev(groups.end());
    }
    it->acc.push_back(row.report.accuracy());
    it->e += row.profile.norm_e;
    it->u += row.profile.norm_u;
    it->r += row.profile.norm_r;
    it->ratio += row.profile.unedited_ratio();
  }
  std::vector<std::string> header = {"variant"};
  if (with_pairs) header.push_back("pairs");
  for (const char* c : {"shift", "n_seeds", "mean_accuracy", "sd_accuracy", "mean_norm_e",
                        "mean_norm_u", "mean_norm_r", "mean_ratio_u_e"}) {
    header.push_back(c);
  }
  io::CsvWriter w(header);
  for (const auto& g : groups) {
    const double k = static_cast<double>(g.acc.size());
    double mean = 0.0;
    for (double a : g.acc) mean += a;
    mean /= k;
    double var = 0.0;
    for (double a : g.acc) var += (a - mean) * (a - mean);
    const double sd = g.acc.size() > 1 ? std::sqrt(var / (k - 1.0)) : 0.0;
    std::vector<std::string> cells = {g.variant};
    if (with_pairs) cells.push_back(std::to_string(g.pairs));
    for (auto& c : std::vector<std::string>{g.shift, std::to_string(g.acc.size()), io::fixed5(mean),
                                            io::fixed5(sd), io::fixed5(g.e / k), io::fixed5(g.u / k),
                                            io::fixed5(g.r / k), io::fixed5(g.ratio / k)}) {
      cells.push_back(std::move(c));
    }
    w.row(cells);
  }
  return w.str();
}

// ---- analyze ------------------------------------------------------------------

inline void cmd_analyze(const GlobalOptions& g, const std::string& spec_file) {
  const SpecSource src = resolve_spec(g, spec_file);
  const FeatureSpec& spec = src.spec;
  const auto ori = closed_form_ori(spec);
  const auto cad = closed_form_cad(spec);
  const auto rob = closed_form_rob(spec);
  const auto n = block_norms(ori);
  double lambda = std::nan("");
  double cos_i = std::nan("");
  try {
    lambda = optimal_lambda(spec);
    cos_i = cosine_interpolated(spec);
  } catch (const DomainError&) {
    // Phi_ori == Phi_CAD: lambda is immaterial, reported as nan.
  }
  io::CsvWriter csv({"spec_id", "norm_e", "norm_u", "norm_r", "cos_ori", "cos_cad", "lambda_star",
                     "cos_interp"});
  csv.row({src.id, io::fixed5(n.edited), io::fixed5(n.unedited), io::fixed5(n.correlated),
           io::fixed5(cosine_to_robust(ori, spec)), io::fixed5(cosine_to_robust(cad, spec)),
           io::fixed5(lambda), io::fixed5(cos_i)});

  Run run("analyze", g);
  run.add_input("spec", src.origin, src.bytes);
  run.set_config_digest(src.bytes);
  run.set_spec(src);
  run.write("analysis.csv", csv.str());
  run.write("phi_ori.json", io::to_json(ori).dump(2) + "\n");
  run.write("phi_cad.json", io::to_json(cad).dump(2) + "\n");
  run.write("phi_rob.json", io::to_json(rob).dump(2) + "\n");
  run.finish();
}

// ---- simulate -----------------------------------------------------------------

struct SimulateOptions {
  std::string spec_file;
  std::size_t n = 200000;
  std::vector<double> noise = {0.0};
  bool export_data = false;
};

inline double relative_l2(const LinearClassifier& fit, const LinearClassifier& ref) {
  return (fit.weights() - ref.weights()).norm() / ref.weights().norm();
}

// Original-only fit on n samples; CAD fit on n/2 pairs (n sentences) per
// noise level. All noise levels reuse the same paired-data seed.
inline void cmd_simulate(const GlobalOptions& g, const SimulateOptions& o) {
  const SpecSource src = resolve_spec(g, o.spec_file);
  const FeatureSpec& spec = src.spec;
  if (o.n < 4 || o.n % 2 != 0) throw ValidationError("--n must be an even count >= 4");
  for (double s : o.noise) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ValidationError("--noise values must be >= 0");
  }
  const auto ori_ref = closed_form_ori(spec);
  const auto cad_ref = closed_form_cad(spec);

  Run run("simulate", g);
  run.add_input("spec", src.origin, src.bytes);
  run.set_config_digest(src.bytes);
  run.set_spec(src);

  io::CsvWriter csv({"classifier", "noise_sd", "n", "rel_l2_error", "cos_to_rob",
                     "cos_closed_form", "delta_cos", "norm_e", "norm_u", "norm_r"});
  auto emit = [&](const char* name, double noise, const LinearClassifier& fit,
                  const LinearClassifier& ref) {
    const auto nb = block_norms(fit);
    const double c = cosine_to_robust(fit, spec);
    const double cref = cosine_to_robust(ref, spec);
    csv.row({name, io::fixed5(noise), std::to_string(o.n), io::fixed5(relative_l2(fit, ref)),
             io::fixed5(c), io::fixed5(cref), io::fixed5(c - cref), io::fixed5(nb.edited),
             io::fixed5(nb.unedited), io::fixed5(nb.correlated)});
  };

  const auto originals = sample_dataset(spec, o.n, derive_seed(g.seed, streams::kTrainData, 0));
  const auto fit_ori = fld_fit(originals, spec.dims());
  emit("ori", std::nan(""), fit_ori, ori_ref);
  run.write("fld_ori.json", io::to_json(fit_ori).dump(2) + "\n");
  if (o.export_data) run.write("data_original.csv", io::dataset_csv(originals, spec.dims()));

  for (std::size_t k = 0; k < o.noise.size(); ++k) {
    const auto paired = make_paired_dataset(spec, o.n / 2, o.noise[k],
                                            derive_seed(g.seed, streams::kTrainData, 1));
    const auto pooled = paired.pooled();
    const auto fit_cad = fld_fit(pooled, spec.dims());
    emit("cad", o.noise[k], fit_cad, cad_ref);
    run.write("fld_cad_" + std::to_string(k) + ".json", io::to_json(fit_cad).dump(2) + "\n");
    if (o.export_data) {
      run.write("data_cad_" + std::to_string(k) + ".csv", io::dataset_csv(pooled, spec.dims()));
    }
  }
  run.write("simulate.csv", csv.str());
  run.finish();
}

// ---- train --------------------------------------------------------------------

inline void cmd_train(const GlobalOptions& g, const std::string& spec_file,
                      const std::string& config_file) {
  const SpecSource src = resolve_spec(g, spec_file);
  const ConfigSource cfg = resolve_config(g, config_file);
  const auto& settings = cfg.config.settings;
  const auto paired = make_paired_dataset(src.spec, settings.n_pairs, settings.alignment_noise_sd,
                                          derive_seed(g.seed, streams::kTrainData));
  const auto result = train_ecf(paired, cfg.config.train);

  const OODShift shifts[] = {OODShift::flip(), OODShift::zero()};
  const auto reports = ood_suite(result.params, src.spec, shifts, settings.n_eval,
                                 derive_seed(g.seed, streams::kEvalData));
  io::CsvWriter ood({"environment", "n", "accuracy", "err_p2n", "err_n2p"});
  for (const auto& r : reports) {
    ood.row({r.environment, std::to_string(r.n), io::fixed5(r.accuracy()),
             std::to_string(r.errors_pos_to_neg), std::to_string(r.errors_neg_to_pos)});
  }

  Run run("train", g);
  run.add_input("spec", src.origin, src.bytes);
  run.add_input("config", cfg.origin, cfg.bytes);
  run.set_config_digest(cfg.bytes);
  run.set_spec(src);
  run.set_config(cfg.config);
  run.write("model.json", io::to_json(result.params).dump(2) + "\n");
  run.write("history.csv", io::history_csv(result.history));
  run.write("decision.json",
            io::to_json(effective_linear_map(result.params, src.spec.dims())).dump(2) + "\n");
  run.write("ood.csv", ood.str());
  run.finish();
}

// ---- ablate -------------------------------------------------------------------

inline void cmd_ablate(const GlobalOptions& g, const std::string& spec_file,
                       const std::string& config_file, std::size_t n_seeds,
                       const std::string& shift_name) {
  const SpecSource src = resolve_spec(g, spec_file);
  const ConfigSource cfg = resolve_config(g, config_file);
  if (n_seeds < 1) throw ValidationError("--seeds must be >= 1");
  const OODShift shift = parse_shift(shift_name);
  const auto& settings = cfg.config.settings;
  const auto paired = make_paired_dataset(src.spec, settings.n_pairs, settings.alignment_noise_sd,
                                          derive_seed(g.seed, streams::kTrainData));
  const auto seeds = seed_list(g.seed, n_seeds);
  const auto rows = ablation_grid(paired, cfg.config.train, make_ood_spec(src.spec, shift), seeds,
                                  settings.n_eval, shift.name());

  Run run("ablate", g);
  run.add_input("spec", src.origin, src.bytes);
  run.add_input("config", cfg.origin, cfg.bytes);
  run.set_config_digest(cfg.bytes);
  run.set_spec(src);
  run.set_config(cfg.config);
  run.write("ablation.csv", io::table_csv(rows, false));
  run.write("ablation_summary.csv", summary_csv(rows, false));
  run.finish();
}

// ---- efficiency ---------------------------------------------------------------

inline void cmd_efficiency(const GlobalOptions& g, const std::string& spec_file,
                           const std::string& config_file, const std::vector<std::size_t>& sizes,
                           std::size_t n_seeds) {
  const SpecSource src = resolve_spec(g, spec_file);
  const ConfigSource cfg = resolve_config(g, config_file);
  if (n_seeds < 1) throw ValidationError("--seeds must be >= 1");
  if (sizes.empty()) throw ValidationError("--sizes must list at least one pair count");
  const auto seeds = seed_list(g.seed, n_seeds);
  const auto rows =
      data_efficiency_curve(src.spec, sizes, cfg.config.train, cfg.config.settings, seeds);

  Run run("efficiency", g);
  run.add_input("spec", src.origin, src.bytes);
  run.add_input("config", cfg.origin, cfg.bytes);
  run.set_config_digest(cfg.bytes);
  run.set_spec(src);
  run.set_config(cfg.config);
  run.write("efficiency.csv", io::table_csv(rows, true));
  run.write("efficiency_summary.csv", summary_csv(rows, true));
  run.finish();
}

// ---- entry point --------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& err = std::cerr) {
  CLI::App app{"Synthetic counterfactual-augmentation laboratory"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--out-dir", g.out_dir, "Output directory");
  app.add_option("--preset", g.preset, "Built-in feature spec (reference, hard)");

  std::string spec_file;
  std::string config_file;

  auto* analyze = app.add_subcommand("analyze", "Closed-form classifiers, cosines and lambda*");
  analyze->add_option("--spec", spec_file, "Feature spec JSON");

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo Fisher fits vs closed forms");
  simulate->add_option("--spec", sim.spec_file, "Feature spec JSON");
  simulate->add_option("--n", sim.n, "Original-only sample count (CAD uses n/2 pairs)");
  simulate->add_option("--noise", sim.noise, "Alignment noise sd (repeatable)");
  simulate->add_flag("--export-data", sim.export_data, "Also write the generated datasets");

  auto* train = app.add_subcommand("train", "Train the ECF model");
  train->add_option("--spec", spec_file, "Feature spec JSON");
  train->add_option("--config", config_file, "Train config JSON");

  std::size_t n_seeds = 10;
  std::string shift = "flip";
  auto* ablate = app.add_subcommand("ablate", "ECF / no_IRM / no_OCD / CAD_only grid");
  ablate->add_option("--spec", spec_file, "Feature spec JSON");
  ablate->add_option("--config", config_file, "Train config JSON");
  ablate->add_option("--seeds", n_seeds, "Number of seeds");
  ablate->add_option("--shift", shift, "OOD shift: flip, zero, scale:K");

  std::vector<std::size_t> sizes = {25, 50, 100, 200};
  auto* efficiency = app.add_subcommand("efficiency", "CAD pairs vs original-only data curve");
  efficiency->add_option("--spec", spec_file, "Feature spec JSON");
  efficiency->add_option("--config", config_file, "Train config JSON");
  efficiency->add_option("--sizes", sizes, "Pair counts")->delimiter(',');
  efficiency->add_option("--seeds", n_seeds, "Number of seeds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidInput;
  }

  try {
    if (*analyze) cmd_analyze(g, spec_file);
    else if (*simulate) cmd_simulate(g, sim);
    else if (*train) cmd_train(g, spec_file, config_file);
    else if (*ablate) cmd_ablate(g, spec_file, config_file, n_seeds, shift);
    else if (*efficiency) cmd_efficiency(g, spec_file, config_file, sizes, n_seeds);
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kDiverged;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}

}  // namespace cadlab::cli

#endif  // CADLAB_CLI_HPP
