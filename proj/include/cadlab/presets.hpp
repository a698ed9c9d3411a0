#ifndef CADLAB_PRESETS_HPP
#define CADLAB_PRESETS_HPP

#include <random>
#include <string>
#include <string_view>

#include "cadlab/errors.hpp"
#include "cadlab/feature_model.hpp"
#include "cadlab/random.hpp"

namespace cadlab::presets {

// Dims 1/1/1, every mean 1, every variance 1.
inline FeatureSpec reference() { return uniform_spec({1, 1, 1}, 1.0, 1.0, 1.0, 1.0); }

inline constexpr Seed kHardSeed = 20230601;

// Dims 4/4/8, unit variances. Means are drawn uniform in [0.2, 0.8] from
// mt19937_64(kHardSeed), edited block first, then unedited, then correlated.
inline FeatureSpec hard() {
  FeatureSpec s = uniform_spec({4, 4, 8}, 0.0, 0.0, 0.0, 1.0);
  Engine rng(kHardSeed);
  std::uniform_real_distribution<double> mean(0.2, 0.8);
  for (Eigen::Index i = 0; i < s.mu_edited.size(); ++i) s.mu_edited[i] = mean(rng);
  for (Eigen::Index i = 0; i < s.mu_unedited.size(); ++i) s.mu_unedited[i] = mean(rng);
  for (Eigen::Index i = 0; i < s.mu_correlated.size(); ++i) s.mu_correlated[i] = mean(rng);
  return s;
}

inline constexpr std::string_view kNames[] = {"reference", "hard"};

inline FeatureSpec by_name(std::string_view name) {
  if (name == "reference") return reference();
  if (name == "hard") return hard();
  throw ValidationError("unknown preset \"" + std::string(name) +
                        "\" (expected reference or hard)");
}

}  // namespace cadlab::presets

#endif  // CADLAB_PRESETS_HPP
