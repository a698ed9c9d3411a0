#include <gtest/gtest.h>

#include <cmath>

#include "cadlab/feature_model.hpp"
#include "test_util.hpp"

namespace cadlab {
namespace {

Eigen::VectorXd class_mean(std::span<const Sample> samples, Label y, std::size_t offset,
                           std::size_t n) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  std::size_t count = 0;
  for (const auto& s : samples) {
    if (s.label != y) continue;
    sum += s.features.segment(static_cast<Eigen::Index>(offset), static_cast<Eigen::Index>(n));
    ++count;
  }
  return sum / static_cast<double>(count);
}

TEST(SampleDataset, BalancedAndTagged) {
  const auto spec = uniform_spec({2, 1, 3}, 1.0, 0.5, 0.25);
  const auto data = sample_dataset(spec, 10, 7);
  ASSERT_EQ(data.size(), 10u);
  std::size_t pos = 0;
  for (const auto& s : data) {
    EXPECT_EQ(s.features.size(), 6);
    EXPECT_EQ(s.environment, Environment::kOriginal);
    EXPECT_FALSE(s.pair_id.has_value());
    if (s.label == Label::kPositive) ++pos;
  }
  EXPECT_EQ(pos, 5u);
}

TEST(SampleDataset, ZeroMeanSpecHasIndistinguishableClasses) {
  const auto spec = uniform_spec({1, 1, 1}, 0.0, 0.0, 0.0);
  const std::size_t n = 100000;
  const auto data = sample_dataset(spec, n, 11);
  const double bound = 3.0 / std::sqrt(n / 2.0);
  const auto pos = class_mean(data, Label::kPositive, 0, 3);
  const auto neg = class_mean(data, Label::kNegative, 0, 3);
  for (Eigen::Index i = 0; i < 3; ++i) {
    EXPECT_LT(std::abs(pos[i]), bound);
    EXPECT_LT(std::abs(neg[i]), bound);
  }
}

TEST(SampleDataset, EditedMeanMatchesSpec) {
  const auto spec = uniform_spec({1, 1, 1}, 1.0, 1.0, 1.0);
  const auto data = sample_dataset(spec, 200000, 3);
  const double m = class_mean(data, Label::kPositive, 0, 1)[0];
  EXPECT_GE(m, 0.99);
  EXPECT_LE(m, 1.01);
}

TEST(SampleDataset, BlockMeansWithinThreeSigma) {
  const auto spec = presets::hard();
  const std::size_t n = 100000;
  const auto data = sample_dataset(spec, n, 5);
  const Eigen::VectorXd mu = (Eigen::VectorXd(16) << spec.mu_edited, spec.mu_unedited,
                              spec.mu_correlated).finished();
  const double bound = 3.0 / std::sqrt(n / 2.0);  // unit variances
  for (Label y : {Label::kPositive, Label::kNegative}) {
    const auto m = class_mean(data, y, 0, 16);
    for (Eigen::Index i = 0; i < 16; ++i) EXPECT_LT(std::abs(m[i] - sign(y) * mu[i]), bound) << i;
  }
}

TEST(SampleDataset, Deterministic) {
  const auto spec = uniform_spec({1, 2, 1}, 1.0, 1.0, 1.0);
  const auto a = sample_dataset(spec, 5000, 42);
  const auto b = sample_dataset(spec, 5000, 42);
  const auto c = sample_dataset(spec, 5000, 43);
  ASSERT_EQ(a.size(), b.size());
  bool any_diff = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].features, b[i].features);
    EXPECT_EQ(a[i].label, b[i].label);
    any_diff |= a[i].features != c[i].features;
  }
  EXPECT_TRUE(any_diff);
}

TEST(SampleDataset, PrefixStableAcrossSizes) {
  // Chunk seeds depend only on the chunk index, not on n.
  const auto spec = uniform_spec({1, 1, 1}, 1.0, 1.0, 1.0);
  const auto small = sample_dataset(spec, 2000, 9);
  const auto large = sample_dataset(spec, 5000, 9);
  for (std::size_t i = 0; i < small.size(); ++i) EXPECT_EQ(small[i].features, large[i].features);
}

TEST(SampleDataset, Errors) {
  const auto spec = uniform_spec({1, 1, 1}, 1.0, 1.0, 1.0);
  EXPECT_THROW(sample_dataset(spec, 7, 0), ValidationError);
  EXPECT_THROW(sample_dataset(spec, 0, 0), ValidationError);

  auto bad = spec;
  bad.var_unedited[0] = 0.0;
  EXPECT_THROW(sample_dataset(bad, 10, 0), ValidationError);
  bad = spec;
  bad.mu_correlated.resize(2);
  EXPECT_THROW(sample_dataset(bad, 10, 0), ValidationError);
  EXPECT_THROW(validate(uniform_spec({0, 0, 3}, 1.0, 1.0, 1.0)), ValidationError);
  EXPECT_NO_THROW(validate(uniform_spec({0, 1, 0}, 1.0, 1.0, 1.0)));
}

TEST(Augment, NegatesEditedBlockOnly) {
  Sample s;
  s.features = Eigen::Vector3d(2, 3, 5);
  s.label = Label::kPositive;
  const auto e = augment_counterfactual(s, BlockDims{1, 1, 1}, 0.0, Seed{1});
  EXPECT_EQ(e.features, Eigen::Vector3d(-2, 3, 5));
  EXPECT_EQ(e.label, Label::kNegative);
  EXPECT_EQ(e.environment, Environment::kEdited);
}

TEST(Augment, EmptyEditedBlockOnlyFlipsLabel) {
  Sample s;
  s.features = Eigen::Vector2d(3, 5);
  s.label = Label::kNegative;
  const auto e = augment_counterfactual(s, BlockDims{0, 1, 1}, 0.0, Seed{1});
  EXPECT_EQ(e.features, s.features);
  EXPECT_EQ(e.label, Label::kPositive);
}

TEST(Augment, RejectsEditedInput) {
  Sample s;
  s.features = Eigen::Vector3d(1, 1, 1);
  s.environment = Environment::kEdited;
  EXPECT_THROW(augment_counterfactual(s, BlockDims{1, 1, 1}, 0.0, Seed{1}), ValidationError);
  s.environment = Environment::kOriginal;
  EXPECT_THROW(augment_counterfactual(s, BlockDims{1, 1, 1}, -1.0, Seed{1}), ValidationError);
  EXPECT_THROW(augment_counterfactual(s, BlockDims{2, 1, 1}, 0.0, Seed{1}), ValidationError);
}

TEST(Augment, NoiseTouchesOnlyCorrelatedBlock) {
  Sample s;
  s.features = Eigen::VectorXd::LinSpaced(6, 1.0, 6.0);
  const auto e = augment_counterfactual(s, BlockDims{2, 2, 2}, 0.5, Seed{3});
  EXPECT_EQ(e.features.head(2), -s.features.head(2));
  EXPECT_EQ(e.features.segment(2, 2), s.features.segment(2, 2));
  EXPECT_NE(e.features.tail(2), s.features.tail(2));
}

TEST(PairedDataset, SinglePairDiffersOnlyInEditedSignAndLabel) {
  const auto spec = uniform_spec({2, 2, 2}, 1.0, 1.0, 1.0);
  const auto d = make_paired_dataset(spec, 1, 0.0, 5);
  ASSERT_EQ(d.size(), 1u);
  const auto& p = d.pairs[0];
  EXPECT_EQ(p.edited.features.head(2), -p.original.features.head(2));
  EXPECT_EQ(p.edited.features.tail(4), p.original.features.tail(4));
  EXPECT_EQ(p.edited.label, flipped(p.original.label));
  EXPECT_EQ(p.original.pair_id, std::optional<std::size_t>(0));
  EXPECT_EQ(p.edited.pair_id, p.original.pair_id);
}

TEST(PairedDataset, AlignmentInvariantOverRandomSpecs) {
  Engine rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const auto spec = testing::random_spec(rng);
    const auto dims = spec.dims();
    const auto d = make_paired_dataset(spec, 57, 0.0, trial);
    std::size_t pos = 0;
    for (const auto& p : d.pairs) {
      const auto ne = static_cast<Eigen::Index>(dims.edited);
      const auto nrest = static_cast<Eigen::Index>(dims.unedited + dims.correlated);
      ASSERT_EQ(p.edited.features.head(ne), -p.original.features.head(ne));
      ASSERT_EQ(p.edited.features.tail(nrest), p.original.features.tail(nrest));
      ASSERT_NE(p.edited.label, p.original.label);
      pos += (p.original.label == Label::kPositive) + (p.edited.label == Label::kPositive);
    }
    EXPECT_EQ(pos, d.size());  // pooled data is exactly balanced
  }
}

double correlated_mean_gap(const PairedDataset& d) {
  const auto pooled = d.pooled();
  const auto dims = d.spec.dims();
  return (class_mean(pooled, Label::kPositive, dims.correlated_offset(), dims.correlated) -
          class_mean(pooled, Label::kNegative, dims.correlated_offset(), dims.correlated))
      .norm();
}

TEST(PairedDataset, CorrelatedClassGapVanishesWithoutNoise) {
  const auto spec = uniform_spec({1, 1, 1}, 1.0, 1.0, 1.0);
  const auto clean = make_paired_dataset(spec, 100000, 0.0, 21);
  const auto noisy = make_paired_dataset(spec, 100000, 0.5, 21);
  const double gap_clean = correlated_mean_gap(clean);
  EXPECT_LE(gap_clean, 0.02);
  EXPECT_GT(correlated_mean_gap(noisy), gap_clean);

  const auto pooled = clean.pooled();
  const double edited_gap = class_mean(pooled, Label::kPositive, 0, 1)[0] -
                            class_mean(pooled, Label::kNegative, 0, 1)[0];
  EXPECT_NEAR(edited_gap, 2.0, 0.02);
}

TEST(PairedDataset, Deterministic) {
  const auto spec = uniform_spec({1, 1, 2}, 1.0, 1.0, 1.0);
  const auto a = make_paired_dataset(spec, 3000, 0.3, 8);
  const auto b = make_paired_dataset(spec, 3000, 0.3, 8);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.pairs[i].original.features, b.pairs[i].original.features);
    EXPECT_EQ(a.pairs[i].edited.features, b.pairs[i].edited.features);
  }
  EXPECT_THROW(make_paired_dataset(spec, 0, 0.0, 1), ValidationError);
}

TEST(OodSpec, Shifts) {
  auto spec = uniform_spec({1, 1, 1}, 1.0, 1.0, 1.0);
  EXPECT_EQ(make_ood_spec(spec, OODShift::flip()).mu_correlated, Eigen::VectorXd::Constant(1, -1.0));
  EXPECT_EQ(make_ood_spec(spec, OODShift::zero()).mu_correlated, Eigen::VectorXd::Zero(1));
  EXPECT_EQ(make_ood_spec(spec, OODShift::scale(1.0)), spec);
  EXPECT_EQ(make_ood_spec(spec, OODShift::scale(2.5)).mu_correlated, Eigen::VectorXd::Constant(1, 2.5));
  EXPECT_EQ(OODShift::scale(0.5).name(), "SCALE_CORRELATED(0.5)");
  EXPECT_EQ(OODShift::flip().name(), "FLIP_CORRELATED");
}

TEST(OodSpec, NeverTouchesCausalBlocksOrVariances) {
  Engine rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto spec = testing::random_spec(rng);
    for (const auto& shift : {OODShift::flip(), OODShift::zero(), OODShift::scale(-3.0)}) {
      const auto s = make_ood_spec(spec, shift);
      EXPECT_EQ(s.mu_edited, spec.mu_edited);
      EXPECT_EQ(s.mu_unedited, spec.mu_unedited);
      EXPECT_EQ(s.var_edited, spec.var_edited);
      EXPECT_EQ(s.var_unedited, spec.var_unedited);
      EXPECT_EQ(s.var_correlated, spec.var_correlated);
      EXPECT_EQ(s.dims(), spec.dims());
    }
  }
}

TEST(OodSpec, AsymmetricShiftMovesOneClass) {
  const auto spec = uniform_spec({1, 1, 1}, 1.0, 1.0, 2.0);
  const auto data = sample_asymmetric_ood(spec, 40000, 3, Label::kPositive);
  const double pos = class_mean(data, Label::kPositive, 2, 1)[0];
  const double neg = class_mean(data, Label::kNegative, 2, 1)[0];
  EXPECT_NEAR(pos, -2.0, 0.05);
  EXPECT_NEAR(neg, -2.0, 0.05);
}

TEST(Seeds, DerivationIsCounterBased) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(7, 3, 4), derive_seed(derive_seed(7, 3), 4));
  static_assert(derive_seed(0, 0) == splitmix64(0 ^ splitmix64(0)));
}

}  // namespace
}  // namespace cadlab
