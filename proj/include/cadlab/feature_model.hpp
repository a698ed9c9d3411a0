#ifndef CADLAB_FEATURE_MODEL_HPP
#define CADLAB_FEATURE_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "cadlab/errors.hpp"
#include "cadlab/random.hpp"

namespace cadlab {

// Sizes of the three feature blocks. Feature vectors are always laid out
// as [edited | unedited | correlated].
struct BlockDims {
  std::size_t edited = 0;
  std::size_t unedited = 0;
  std::size_t correlated = 0;

  constexpr std::size_t causal() const noexcept { return edited + unedited; }
  constexpr std::size_t total() const noexcept { return edited + unedited + correlated; }
  constexpr std::size_t edited_offset() const noexcept { return 0; }
  constexpr std::size_t unedited_offset() const noexcept { return edited; }
  constexpr std::size_t correlated_offset() const noexcept { return edited + unedited; }

  friend constexpr bool operator==(const BlockDims&, const BlockDims&) = default;
};

enum class Label : int { kNegative = -1, kPositive = 1 };

constexpr double sign(Label y) noexcept { return y == Label::kPositive ? 1.0 : -1.0; }
constexpr Label flipped(Label y) noexcept {
  return y == Label::kPositive ? Label::kNegative : Label::kPositive;
}
// Row of the label-vector matrix: 0 = negative class, 1 = positive class.
constexpr int class_index(Label y) noexcept { return y == Label::kPositive ? 1 : 0; }
constexpr Label label_from_index(int k) noexcept { return k == 1 ? Label::kPositive : Label::kNegative; }

enum class Environment { kOriginal, kEdited, kOod };

inline const char* to_string(Environment env) noexcept {
  switch (env) {
    case Environment::kOriginal: return "ORIGINAL";
    case Environment::kEdited: return "EDITED";
    case Environment::kOod: return "OOD";
  }
  return "?";
}

// Gaussian generative law of the three blocks. Covariances are diagonal and
// stored as variance vectors.
struct FeatureSpec {
  std::size_t d_edited = 0;
  std::size_t d_unedited = 0;
  std::size_t d_correlated = 0;
  Eigen::VectorXd mu_edited;
  Eigen::VectorXd mu_unedited;
  Eigen::VectorXd mu_correlated;
  Eigen::VectorXd var_edited;
  Eigen::VectorXd var_unedited;
  Eigen::VectorXd var_correlated;

  BlockDims dims() const noexcept { return {d_edited, d_unedited, d_correlated}; }
  std::size_t total_dim() const noexcept { return d_edited + d_unedited + d_correlated; }
};

inline bool operator==(const FeatureSpec& a, const FeatureSpec& b) {
  return a.dims() == b.dims() && a.mu_edited == b.mu_edited && a.mu_unedited == b.mu_unedited &&
         a.mu_correlated == b.mu_correlated && a.var_edited == b.var_edited &&
         a.var_unedited == b.var_unedited && a.var_correlated == b.var_correlated;
}

namespace detail {

inline void check_block(const char* name, std::size_t dim, const Eigen::VectorXd& mu,
                        const Eigen::VectorXd& var) {
  const std::string block(name);
  if (static_cast<std::size_t>(mu.size()) != dim) {
    throw ValidationError("mu_" + block + " has length " + std::to_string(mu.size()) +
                          ", expected d_" + block + " = " + std::to_string(dim));
  }
  if (static_cast<std::size_t>(var.size()) != dim) {
    throw ValidationError("var_" + block + " has length " + std::to_string(var.size()) +
                          ", expected d_" + block + " = " + std::to_string(dim));
  }
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    if (!std::isfinite(mu[i])) {
      throw ValidationError("mu_" + block + "[" + std::to_string(i) + "] is not finite");
    }
    if (!std::isfinite(var[i]) || !(var[i] > 0.0)) {
      throw ValidationError("var_" + block + "[" + std::to_string(i) +
                            "] must be a finite value > 0");
    }
  }
}

}  // namespace detail

inline void validate(const FeatureSpec& spec) {
  if (spec.d_edited + spec.d_unedited < 1) {
    throw ValidationError("d_edited + d_unedited must be at least 1");
  }
  detail::check_block("edited", spec.d_edited, spec.mu_edited, spec.var_edited);
  detail::check_block("unedited", spec.d_unedited, spec.mu_unedited, spec.var_unedited);
  detail::check_block("correlated", spec.d_correlated, spec.mu_correlated, spec.var_correlated);
}

// Builds a spec with constant mean/variance per block.
inline FeatureSpec uniform_spec(BlockDims dims, double mu_e, double mu_u, double mu_r,
                                double var = 1.0) {
  FeatureSpec s;
  s.d_edited = dims.edited;
  s.d_unedited = dims.unedited;
  s.d_correlated = dims.correlated;
  s.mu_edited = Eigen::VectorXd::Constant(dims.edited, mu_e);
  s.mu_unedited = Eigen::VectorXd::Constant(dims.unedited, mu_u);
  s.mu_correlated = Eigen::VectorXd::Constant(dims.correlated, mu_r);
  s.var_edited = Eigen::VectorXd::Constant(dims.edited, var);
  s.var_unedited = Eigen::VectorXd::Constant(dims.unedited, var);
  s.var_correlated = Eigen::VectorXd::Constant(dims.correlated, var);
  return s;
}

struct Sample {
  Eigen::VectorXd features;
  Label label = Label::kPositive;
  std::optional<std::size_t> pair_id;
  Environment environment = Environment::kOriginal;
};

struct CounterfactualPair {
  Sample original;
  Sample edited;
};

struct PairedDataset {
  std::vector<CounterfactualPair> pairs;
  FeatureSpec spec;
  Seed seed = 0;

  std::size_t size() const noexcept { return pairs.size(); }

  // All 2N sentences, original then edited for each pair.
  std::vector<Sample> pooled() const {
    std::vector<Sample> out;
    out.reserve(2 * pairs.size());
    for (const auto& p : pairs) {
      out.push_back(p.original);
      out.push_back(p.edited);
    }
    return out;
  }
  std::vector<Sample> originals() const {
    std::vector<Sample> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(p.original);
    return out;
  }
  std::vector<Sample> editeds() const {
    std::vector<Sample> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(p.edited);
    return out;
  }
};

// Samples are generated in fixed-size chunks, chunk c drawing from an engine
// seeded with derive_seed(seed, streams::kSampleChunks, c). Output therefore
// does not depend on how chunks are scheduled.
inline constexpr std::size_t kSampleChunkSize = 1024;

namespace detail {

template <typename URBG>
void draw_block(URBG& rng, std::normal_distribution<double>& normal, double y,
                const Eigen::VectorXd& mu, const Eigen::VectorXd& var, Eigen::VectorXd& out,
                std::size_t offset) {
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    out[static_cast<Eigen::Index>(offset) + i] = y * mu[i] + std::sqrt(var[i]) * normal(rng);
  }
}

// Labels alternate +1, -1, +1, ... so any even prefix is balanced.
inline std::vector<Sample> sample_alternating(const FeatureSpec& spec, std::size_t n, Seed seed,
                                              Environment env) {
  const BlockDims dims = spec.dims();
  const auto dim = static_cast<Eigen::Index>(dims.total());
  std::vector<Sample> out(n);
  const std::size_t chunks = (n + kSampleChunkSize - 1) / kSampleChunkSize;
  for (std::size_t c = 0; c < chunks; ++c) {
    Engine rng(derive_seed(seed, streams::kSampleChunks, c));
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t end = std::min(n, (c + 1) * kSampleChunkSize);
    for (std::size_t i = c * kSampleChunkSize; i < end; ++i) {
      Sample& s = out[i];
      s.label = (i % 2 == 0) ? Label::kPositive : Label::kNegative;
      s.environment = env;
      s.features.resize(dim);
      const double y = sign(s.label);
      draw_block(rng, normal, y, spec.mu_edited, spec.var_edited, s.features, dims.edited_offset());
      draw_block(rng, normal, y, spec.mu_unedited, spec.var_unedited, s.features,
                 dims.unedited_offset());
      draw_block(rng, normal, y, spec.mu_correlated, spec.var_correlated, s.features,
                 dims.correlated_offset());
    }
  }
  return out;
}

}  // namespace detail

// n class-balanced ORIGINAL samples; block b of a label-y sample is drawn
// from N(y * mu_b, diag(var_b)).
inline std::vector<Sample> sample_dataset(const FeatureSpec& spec, std::size_t n, Seed seed) {
  validate(spec);
  if (n == 0) throw ValidationError("sample_dataset: n must be at least 1");
  if (n % 2 != 0) {
    throw ValidationError("sample_dataset: n = " + std::to_string(n) +
                          " is odd; class balance needs an even count");
  }
  return detail::sample_alternating(spec, n, seed, Environment::kOriginal);
}

// Counterfactual edit of an ORIGINAL sample: label flipped, edited block
// negated, unedited block copied, correlated block copied plus
// N(0, alignment_noise_sd^2) noise per entry. The edited sample inherits
// the original's pair_id.
template <typename URBG>
Sample augment_counterfactual(const Sample& original, const BlockDims& dims,
                              double alignment_noise_sd, URBG& rng) {
  if (original.environment != Environment::kOriginal) {
    throw ValidationError(std::string("augment_counterfactual: sample environment is ") +
                          to_string(original.environment) + ", expected ORIGINAL");
  }
  if (static_cast<std::size_t>(original.features.size()) != dims.total()) {
    throw ValidationError("augment_counterfactual: feature length " +
                          std::to_string(original.features.size()) + " != block total " +
                          std::to_string(dims.total()));
  }
  if (!(alignment_noise_sd >= 0.0) || !std::isfinite(alignment_noise_sd)) {
    throw ValidationError("augment_counterfactual: alignment_noise_sd must be finite and >= 0");
  }
  Sample edited = original;
  edited.label = flipped(original.label);
  edited.environment = Environment::kEdited;
  const auto e0 = static_cast<Eigen::Index>(dims.edited_offset());
  const auto ne = static_cast<Eigen::Index>(dims.edited);
  edited.features.segment(e0, ne) = -original.features.segment(e0, ne);
  if (alignment_noise_sd > 0.0) {
    std::normal_distribution<double> normal(0.0, alignment_noise_sd);
    const auto r0 = static_cast<Eigen::Index>(dims.correlated_offset());
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(dims.correlated); ++i) {
      edited.features[r0 + i] += normal(rng);
    }
  }
  return edited;
}

inline Sample augment_counterfactual(const Sample& original, const BlockDims& dims,
                                     double alignment_noise_sd, Seed seed) {
  Engine rng(seed);
  return augment_counterfactual(original, dims, alignment_noise_sd, rng);
}

// n_pairs originals (alternating labels, so the pooled 2N sentences are
// always balanced) each paired with its counterfactual edit.
inline PairedDataset make_paired_dataset(const FeatureSpec& spec, std::size_t n_pairs,
                                         double alignment_noise_sd, Seed seed) {
  validate(spec);
  if (n_pairs == 0) throw ValidationError("make_paired_dataset: n_pairs must be at least 1");
  PairedDataset data;
  data.spec = spec;
  data.seed = seed;
  auto originals = detail::sample_alternating(spec, n_pairs, derive_seed(seed, streams::kOriginals),
                                              Environment::kOriginal);
  const BlockDims dims = spec.dims();
  data.pairs.reserve(n_pairs);
  const std::size_t chunks = (n_pairs + kSampleChunkSize - 1) / kSampleChunkSize;
  for (std::size_t c = 0; c < chunks; ++c) {
    Engine rng(derive_seed(seed, streams::kAlignmentNoise, c));
    const std::size_t end = std::min(n_pairs, (c + 1) * kSampleChunkSize);
    for (std::size_t i = c * kSampleChunkSize; i < end; ++i) {
      Sample& orig = originals[i];
      orig.pair_id = i;
      Sample edited = augment_counterfactual(orig, dims, alignment_noise_sd, rng);
      data.pairs.push_back({std::move(orig), std::move(edited)});
    }
  }
  return data;
}

// Shift of the correlated-block mean; causal blocks and all variances are
// left untouched.
struct OODShift {
  enum class Kind { kFlip, kScale, kZero };
  Kind kind = Kind::kFlip;
  double factor = 1.0;

  static OODShift flip() { return {Kind::kFlip, -1.0}; }
  static OODShift scale(double k) { return {Kind::kScale, k}; }
  static OODShift zero() { return {Kind::kZero, 0.0}; }

  std::string name() const {
    switch (kind) {
      case Kind::kFlip: return "FLIP_CORRELATED";
      case Kind::kZero: return "ZERO_CORRELATED";
      case Kind::kScale: {
        std::string k = std::to_string(factor);
        k.erase(k.find_last_not_of('0') + 1);
        if (!k.empty() && k.back() == '.') k += '0';
        return "SCALE_CORRELATED(" + k + ")";
      }
    }
    return "?";
  }
};

inline FeatureSpec make_ood_spec(const FeatureSpec& spec, const OODShift& shift) {
  FeatureSpec out = spec;
  switch (shift.kind) {
    case OODShift::Kind::kFlip: out.mu_correlated = -spec.mu_correlated; break;
    case OODShift::Kind::kScale: out.mu_correlated = shift.factor * spec.mu_correlated; break;
    case OODShift::Kind::kZero: out.mu_correlated.setZero(); break;
  }
  return out;
}

// Class-asymmetric shift: samples of `shifted_class` draw their correlated
// block with the sign of mu_correlated reversed; the other class is drawn
// from `spec` unchanged. Used for the error-type breakdown.
inline std::vector<Sample> sample_asymmetric_ood(const FeatureSpec& spec, std::size_t n, Seed seed,
                                                 Label shifted_class) {
  auto base = sample_dataset(spec, n, seed);
  const BlockDims dims = spec.dims();
  const auto r0 = static_cast<Eigen::Index>(dims.correlated_offset());
  const auto nr = static_cast<Eigen::Index>(dims.correlated);
  for (auto& s : base) {
    s.environment = Environment::kOod;
    if (s.label == shifted_class) {
      // x = y mu + noise  ->  -y mu + noise
      s.features.segment(r0, nr) -= 2.0 * sign(s.label) * spec.mu_correlated;
    }
  }
  return base;
}

}  // namespace cadlab

#endif  // CADLAB_FEATURE_MODEL_HPP
