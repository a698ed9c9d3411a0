#ifndef CADLAB_FISHER_HPP
#define CADLAB_FISHER_HPP

#include <cmath>
#include <limits>
#include <span>
#include <string>

#include <Eigen/Core>

#include "cadlab/errors.hpp"
#include "cadlab/feature_model.hpp"

namespace cadlab {

// Linear decision vector over [edited | unedited | correlated] features.
class LinearClassifier {
 public:
  LinearClassifier() = default;
  LinearClassifier(Eigen::VectorXd weights, BlockDims dims)
      : weights_(std::move(weights)), dims_(dims) {
    if (static_cast<std::size_t>(weights_.size()) != dims_.total()) {
      throw ValidationError("LinearClassifier: weight length " + std::to_string(weights_.size()) +
                            " != block total " + std::to_string(dims_.total()));
    }
  }

  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  const BlockDims& dims() const noexcept { return dims_; }

  auto edited() const { return weights_.segment(idx(dims_.edited_offset()), idx(dims_.edited)); }
  auto unedited() const {
    return weights_.segment(idx(dims_.unedited_offset()), idx(dims_.unedited));
  }
  auto correlated() const {
    return weights_.segment(idx(dims_.correlated_offset()), idx(dims_.correlated));
  }
  // Phi_c: edited and unedited blocks together.
  auto causal() const { return weights_.head(idx(dims_.causal())); }

  double score(const Eigen::VectorXd& x) const { return weights_.dot(x); }

 private:
  static Eigen::Index idx(std::size_t n) { return static_cast<Eigen::Index>(n); }

  Eigen::VectorXd weights_;
  BlockDims dims_;
};

struct BlockNorms {
  double edited = 0.0;
  double unedited = 0.0;
  double correlated = 0.0;
};

inline BlockNorms block_norms(const LinearClassifier& c) {
  return {c.edited().norm(), c.unedited().norm(), c.correlated().norm()};
}

// Fisher discriminant from labeled samples:
//   Phi = S_w^{-1} (mean+ - mean-),  S_w = diag(Sigma+) + diag(Sigma-)
// with unbiased per-class sample variances.
inline LinearClassifier fld_fit(std::span<const Sample> samples, const BlockDims& dims) {
  const auto dim = static_cast<Eigen::Index>(dims.total());
  Eigen::VectorXd sum_pos = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd sum_neg = Eigen::VectorXd::Zero(dim);
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  for (const auto& s : samples) {
    if (s.features.size() != dim) {
      throw ValidationError("fld_fit: sample feature length " + std::to_string(s.features.size()) +
                            " != " + std::to_string(dim));
    }
    if (s.label == Label::kPositive) {
      sum_pos += s.features;
      ++n_pos;
    } else {
      sum_neg += s.features;
      ++n_neg;
    }
  }
  if (n_pos < 2 || n_neg < 2) {
    throw InsufficientDataError("fld_fit: need >= 2 samples per label, got " +
                                std::to_string(n_pos) + " positive and " + std::to_string(n_neg) +
                                " negative");
  }
  const Eigen::VectorXd mean_pos = sum_pos / static_cast<double>(n_pos);
  const Eigen::VectorXd mean_neg = sum_neg / static_cast<double>(n_neg);

  Eigen::VectorXd ss_pos = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd ss_neg = Eigen::VectorXd::Zero(dim);
  for (const auto& s : samples) {
    if (s.label == Label::kPositive) {
      ss_pos += (s.features - mean_pos).cwiseAbs2();
    } else {
      ss_neg += (s.features - mean_neg).cwiseAbs2();
    }
  }
  const Eigen::VectorXd scatter =
      ss_pos / static_cast<double>(n_pos - 1) + ss_neg / static_cast<double>(n_neg - 1);
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (scatter[i] == 0.0) {
      throw SingularityError("fld_fit: within-class scatter is zero in dimension " +
                                 std::to_string(i),
                             static_cast<std::size_t>(i));
    }
  }
  return LinearClassifier((mean_pos - mean_neg).cwiseQuotient(scatter), dims);
}

namespace detail {

inline Eigen::VectorXd concat(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                              const Eigen::VectorXd& c) {
  Eigen::VectorXd out(a.size() + b.size() + c.size());
  out << a, b, c;
  return out;
}

}  // namespace detail

// Phi_ori = [mu_e/var_e, mu_u/var_u, mu_r/var_r]
inline LinearClassifier closed_form_ori(const FeatureSpec& spec) {
  validate(spec);
  return LinearClassifier(detail::concat(spec.mu_edited.cwiseQuotient(spec.var_edited),
                                         spec.mu_unedited.cwiseQuotient(spec.var_unedited),
                                         spec.mu_correlated.cwiseQuotient(spec.var_correlated)),
                          spec.dims());
}

// Phi_CAD = [mu_e/var_e, 0, 0]
inline LinearClassifier closed_form_cad(const FeatureSpec& spec) {
  validate(spec);
  return LinearClassifier(detail::concat(spec.mu_edited.cwiseQuotient(spec.var_edited),
                                         Eigen::VectorXd::Zero(spec.mu_unedited.size()),
                                         Eigen::VectorXd::Zero(spec.mu_correlated.size())),
                          spec.dims());
}

// Phi_rob = [mu_e/var_e, mu_u/var_u, 0]
inline LinearClassifier closed_form_rob(const FeatureSpec& spec) {
  validate(spec);
  return LinearClassifier(detail::concat(spec.mu_edited.cwiseQuotient(spec.var_edited),
                                         spec.mu_unedited.cwiseQuotient(spec.var_unedited),
                                         Eigen::VectorXd::Zero(spec.mu_correlated.size())),
                          spec.dims());
}

inline double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) {
    throw ValidationError("cosine_similarity: length mismatch");
  }
  const double na2 = a.squaredNorm();
  const double nb2 = b.squaredNorm();
  if (na2 == 0.0 || nb2 == 0.0) {
    throw DomainError("cosine similarity is undefined for a zero-norm vector");
  }
  // sqrt(x * x) == x in IEEE arithmetic, so cos(v, v) is exactly 1.
  return a.dot(b) / std::sqrt(na2 * nb2);
}

inline double cosine_to_robust(const LinearClassifier& classifier, const FeatureSpec& spec) {
  const LinearClassifier rob = closed_form_rob(spec);
  if (!(classifier.dims() == rob.dims())) {
    throw ValidationError("cosine_to_robust: classifier block dims do not match the spec");
  }
  return cosine_similarity(classifier.weights(), rob.weights());
}

// cos(theta_ori) = 1 / sqrt(1 + |Phi_r|^2 / (|Phi_e|^2 + |Phi_u|^2))
inline double cos_ori_formula(double norm_e, double norm_u, double norm_r) {
  const double causal2 = norm_e * norm_e + norm_u * norm_u;
  if (causal2 == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return 1.0 / std::sqrt(1.0 + norm_r * norm_r / causal2);
}

// cos(theta_CAD) = 1 / sqrt(1 + |Phi_u|^2 / |Phi_e|^2)
inline double cos_cad_formula(double norm_e, double norm_u) {
  if (norm_e == 0.0) {
    return norm_u == 0.0 ? std::numeric_limits<double>::quiet_NaN() : 0.0;
  }
  return 1.0 / std::sqrt(1.0 + (norm_u * norm_u) / (norm_e * norm_e));
}

// lambda * phi_ori + (1 - lambda) * phi_cad
inline LinearClassifier interpolate(const LinearClassifier& phi_ori, const LinearClassifier& phi_cad,
                                    double lambda) {
  if (!(phi_ori.dims() == phi_cad.dims())) {
    throw ValidationError("interpolate: block dims differ");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw DomainError("interpolate: lambda = " + std::to_string(lambda) + " is outside [0, 1]");
  }
  return LinearClassifier(lambda * phi_ori.weights() + (1.0 - lambda) * phi_cad.weights(),
                          phi_ori.dims());
}

namespace detail {

struct SquaredNorms {
  double e, u, r;
};

inline SquaredNorms closed_form_squared_norms(const FeatureSpec& spec) {
  const LinearClassifier ori = closed_form_ori(spec);
  const SquaredNorms n{ori.edited().squaredNorm(), ori.unedited().squaredNorm(),
                       ori.correlated().squaredNorm()};
  if (n.u + n.r == 0.0) {
    throw DomainError(
        "optimal lambda undefined: |Phi_u| = |Phi_r| = 0, so Phi_ori equals Phi_CAD");
  }
  return n;
}

}  // namespace detail

// lambda* = |Phi_u|^2 / (|Phi_u|^2 + |Phi_r|^2)
inline double optimal_lambda(const FeatureSpec& spec) {
  const auto n = detail::closed_form_squared_norms(spec);
  return n.u / (n.u + n.r);
}

// Closed-form cosine between Phi_I(lambda*) and Phi_rob:
//   (|e|^2 + |u|^4/(|u|^2+|r|^2))
//   / ( sqrt(|e|^2+|u|^2) * sqrt(|e|^2 + (|u|^6 + |u|^4 |r|^2)/(|u|^2+|r|^2)^2) )
// where |x| are the closed-form block norms.
inline double cosine_interpolated(const FeatureSpec& spec) {
  const auto n = detail::closed_form_squared_norms(spec);
  const double ur = n.u + n.r;
  const double u4 = n.u * n.u;
  const double num = n.e + u4 / ur;
  const double den = std::sqrt(n.e + n.u) * std::sqrt(n.e + (u4 * n.u + u4 * n.r) / (ur * ur));
  return num / den;
}

// Correlated-block component of the CAD discriminant when pair correlated
// features are misaligned by a class-sum difference delta_hr over n samples:
//   (2 (diag(mu_r mu_r^T) + Sigma_r))^{-1} * delta_hr / (2n)
inline Eigen::VectorXd misaligned_cad_block(const FeatureSpec& spec, const Eigen::VectorXd& delta_hr,
                                            std::size_t n) {
  validate(spec);
  if (static_cast<std::size_t>(delta_hr.size()) != spec.d_correlated) {
    throw ValidationError("misaligned_cad_block: delta_hr has length " +
                          std::to_string(delta_hr.size()) + ", expected d_correlated = " +
                          std::to_string(spec.d_correlated));
  }
  if (n == 0) throw ValidationError("misaligned_cad_block: n must be at least 1");
  const Eigen::VectorXd scatter =
      2.0 * (spec.mu_correlated.cwiseAbs2() + spec.var_correlated);
  return (delta_hr / (2.0 * static_cast<double>(n))).cwiseQuotient(scatter);
}

}  // namespace cadlab

#endif  // CADLAB_FISHER_HPP
