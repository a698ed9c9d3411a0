#ifndef CADLAB_OOD_EVAL_HPP
#define CADLAB_OOD_EVAL_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cadlab/ecf.hpp"
#include "cadlab/feature_model.hpp"
#include "cadlab/fisher.hpp"
#include "cadlab/random.hpp"

namespace cadlab {

// Accuracy plus the P->N / N->P error split (gold positive predicted
// negative, and the reverse).
struct EvalReport {
  std::string environment;
  std::size_t n = 0;
  std::size_t correct = 0;
  std::size_t errors_pos_to_neg = 0;
  std::size_t errors_neg_to_pos = 0;

  double accuracy() const noexcept {
    return n == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n);
  }
};

namespace detail {

template <typename Predict>
EvalReport tally(std::span<const Sample> samples, std::string environment, Predict&& predict) {
  if (samples.empty()) throw ValidationError("evaluate: empty sample list");
  EvalReport r;
  r.environment = std::move(environment);
  r.n = samples.size();
  for (const auto& s : samples) {
    const Label pred = predict(s.features);
    if (pred == s.label) {
      ++r.correct;
    } else if (s.label == Label::kPositive) {
      ++r.errors_pos_to_neg;
    } else {
      ++r.errors_neg_to_pos;
    }
  }
  return r;
}

}  // namespace detail

// Linear decision: positive iff w.x >= 0 (exact zero goes to positive).
inline EvalReport evaluate(const LinearClassifier& decision, std::span<const Sample> samples,
                           std::string environment = "ID") {
  const auto dim = static_cast<Eigen::Index>(decision.dims().total());
  return detail::tally(samples, std::move(environment), [&](const Eigen::VectorXd& x) {
    if (x.size() != dim) {
      throw ValidationError("evaluate: sample length " + std::to_string(x.size()) +
                            " != classifier length " + std::to_string(dim));
    }
    return decision.score(x) >= 0.0 ? Label::kPositive : Label::kNegative;
  });
}

// Model decision: argmax probability, ties to positive.
inline EvalReport evaluate(const ModelParams& model, std::span<const Sample> samples,
                           std::string environment = "ID") {
  return detail::tally(samples, std::move(environment),
                       [&](const Eigen::VectorXd& x) { return predict_label(model, x); });
}

inline constexpr const char* kInDistribution = "IN_DISTRIBUTION";

// Baseline on the unshifted spec followed by one report per shift. Each
// dataset is fresh: baseline seed derive_seed(seed, kEvalData), shift i
// seed derive_seed(seed, kShiftData, i).
template <typename Decision>
std::vector<EvalReport> ood_suite(const Decision& decision, const FeatureSpec& spec,
                                  std::span<const OODShift> shifts, std::size_t n, Seed seed) {
  std::vector<EvalReport> out;
  out.reserve(shifts.size() + 1);
  const auto base = sample_dataset(spec, n, derive_seed(seed, streams::kEvalData));
  out.push_back(evaluate(decision, base, kInDistribution));
  for (std::size_t i = 0; i < shifts.size(); ++i) {
    auto data = sample_dataset(make_ood_spec(spec, shifts[i]), n,
                               derive_seed(seed, streams::kShiftData, i));
    for (auto& s : data) s.environment = Environment::kOod;
    out.push_back(evaluate(decision, data, shifts[i].name()));
  }
  return out;
}

struct MyopiaProfile {
  double norm_e = 0.0;
  double norm_u = 0.0;
  double norm_r = 0.0;
  double cos_ori_form = 0.0;
  double cos_cad_form = 0.0;

  // |Phi_u| / |Phi_e|
  double unedited_ratio() const noexcept { return norm_u / norm_e; }
};

inline MyopiaProfile myopia_profile(const LinearClassifier& decision) {
  const BlockNorms n = block_norms(decision);
  return {n.edited, n.unedited, n.correlated, cos_ori_formula(n.edited, n.unedited, n.correlated),
          cos_cad_formula(n.edited, n.unedited)};
}

// Data-generation knobs shared by the training experiments.
struct ExperimentSettings {
  std::size_t n_pairs = 1000;
  double alignment_noise_sd = 0.5;
  std::size_t n_eval = 20000;
};

struct TableRow {
  std::string variant;
  std::string shift;
  std::size_t pairs = 0;
  Seed seed = 0;
  EvalReport report;
  MyopiaProfile profile;
};

namespace detail {

inline TableRow model_row(std::string variant, const ModelParams& model, const BlockDims& dims,
                          std::span<const Sample> eval, const std::string& shift,
                          std::size_t pairs, Seed seed) {
  TableRow row;
  row.variant = std::move(variant);
  row.shift = shift;
  row.pairs = pairs;
  row.seed = seed;
  row.report = evaluate(model, eval, shift);
  row.profile = myopia_profile(effective_linear_map(model, dims));
  return row;
}

}  // namespace detail

struct AblationVariant {
  const char* name;
  bool irm;
  bool ocd;
};

inline constexpr AblationVariant kAblationVariants[] = {
    {"ECF", true, true},
    {"no_IRM", false, true},
    {"no_OCD", true, false},
    {"CAD_only", false, false},
};

// Trains full ECF, alpha = 0, beta = 0 and alpha = beta = 0 on the same
// paired data for every seed (seed becomes TrainConfig::seed) and evaluates
// each on a fresh OOD dataset drawn from ood_spec with seed
// derive_seed(seed, kEvalData). Rows are ordered seed-major, variants in
// kAblationVariants order.
inline std::vector<TableRow> ablation_grid(const PairedDataset& paired, const TrainConfig& config,
                                           const FeatureSpec& ood_spec,
                                           std::span<const Seed> seeds, std::size_t n_eval,
                                           const std::string& shift_name) {
  if (!(ood_spec.dims() == paired.spec.dims())) {
    throw ValidationError("ablation_grid: OOD spec block dims differ from training spec");
  }
  std::vector<TableRow> rows;
  rows.reserve(seeds.size() * std::size(kAblationVariants));
  for (const Seed seed : seeds) {
    auto eval = sample_dataset(ood_spec, n_eval, derive_seed(seed, streams::kEvalData));
    for (auto& s : eval) s.environment = Environment::kOod;
    for (const auto& v : kAblationVariants) {
      TrainConfig c = config;
      c.seed = seed;
      if (!v.irm) c.alpha = 0.0;
      if (!v.ocd) c.beta = 0.0;
      const auto trained = train_ecf(paired, c);
      rows.push_back(detail::model_row(v.name, trained.params, paired.spec.dims(), eval,
                                       shift_name, paired.size(), seed));
    }
  }
  return rows;
}

// For each size m and seed: (a) config-weighted training on m CAD pairs,
// (b) cross-entropy-only training on 2m original sentences. Both evaluated
// under FLIP_CORRELATED. Per-seed data comes from derive_seed(seed,
// kTrainData, m); the OOD set from derive_seed(seed, kEvalData).
inline std::vector<TableRow> data_efficiency_curve(const FeatureSpec& spec,
                                                   std::span<const std::size_t> pair_counts,
                                                   const TrainConfig& config,
                                                   const ExperimentSettings& settings,
                                                   std::span<const Seed> seeds) {
  if (pair_counts.empty()) throw ValidationError("data_efficiency_curve: no pair counts");
  const OODShift shift = OODShift::flip();
  const FeatureSpec ood = make_ood_spec(spec, shift);
  std::vector<TableRow> rows;
  rows.reserve(pair_counts.size() * seeds.size() * 2);
  for (const std::size_t m : pair_counts) {
    if (m == 0) throw ValidationError("data_efficiency_curve: pair count must be >= 1");
    for (const Seed seed : seeds) {
      auto eval = sample_dataset(ood, settings.n_eval, derive_seed(seed, streams::kEvalData));
      for (auto& s : eval) s.environment = Environment::kOod;
      const Seed data_seed = derive_seed(seed, streams::kTrainData, m);
      TrainConfig c = config;
      c.seed = seed;

      const auto paired = make_paired_dataset(spec, m, settings.alignment_noise_sd, data_seed);
      const auto cad = train_ecf(paired, c);
      rows.push_back(
          detail::model_row("CAD", cad.params, spec.dims(), eval, shift.name(), m, seed));

      const auto originals = sample_dataset(spec, 2 * m, data_seed);
      TrainConfig erm = c;
      erm.alpha = 0.0;
      erm.beta = 0.0;
      const auto ori = train_erm(originals, erm);
      rows.push_back(
          detail::model_row("original", ori.params, spec.dims(), eval, shift.name(), m, seed));
    }
  }
  return rows;
}

}  // namespace cadlab

#endif  // CADLAB_OOD_EVAL_HPP
