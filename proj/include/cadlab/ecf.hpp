#ifndef CADLAB_ECF_HPP
#define CADLAB_ECF_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cadlab/errors.hpp"
#include "cadlab/feature_model.hpp"
#include "cadlab/fisher.hpp"
#include "cadlab/random.hpp"

namespace cadlab {

// Linear encoder h = W x followed by a fully connected layer whose rows are
// the label vectors: logits z = C h + b. Row 0 is the negative class, row 1
// the positive class.
struct ModelParams {
  Eigen::MatrixXd encoder;     // d_repr x D
  Eigen::MatrixXd classifier;  // 2 x d_repr
  Eigen::Vector2d bias = Eigen::Vector2d::Zero();

  std::size_t d_repr() const noexcept { return static_cast<std::size_t>(encoder.rows()); }
  std::size_t input_dim() const noexcept { return static_cast<std::size_t>(encoder.cols()); }

  static ModelParams zeros_like(const ModelParams& p) {
    ModelParams g;
    g.encoder = Eigen::MatrixXd::Zero(p.encoder.rows(), p.encoder.cols());
    g.classifier = Eigen::MatrixXd::Zero(p.classifier.rows(), p.classifier.cols());
    g.bias.setZero();
    return g;
  }
};

inline void validate(const ModelParams& p) {
  if (p.encoder.rows() < 1) throw ValidationError("ModelParams: d_repr must be at least 1");
  if (p.classifier.rows() != 2 || p.classifier.cols() != p.encoder.rows()) {
    throw ValidationError("ModelParams: classifier must be 2 x d_repr");
  }
  if (!p.encoder.allFinite() || !p.classifier.allFinite() || !p.bias.allFinite()) {
    throw ValidationError("ModelParams: non-finite entry");
  }
}

struct TrainConfig {
  double alpha = 1.6;  // IRM weight
  double beta = 0.1;   // OCD weight
  double learning_rate = 1e-3;
  std::size_t epochs = 100;
  std::size_t batch_pairs = 32;
  Seed seed = 0;
  std::size_t d_repr = 0;  // 0 selects the input dimension D
  bool identity_encoder = false;
};

inline void validate(const TrainConfig& c) {
  if (!(c.alpha >= 0.0) || !std::isfinite(c.alpha)) throw ValidationError("alpha must be >= 0");
  if (!(c.beta >= 0.0) || !std::isfinite(c.beta)) throw ValidationError("beta must be >= 0");
  if (!(c.learning_rate > 0.0) || !std::isfinite(c.learning_rate)) {
    throw ValidationError("learning_rate must be > 0");
  }
  if (c.batch_pairs < 1) throw ValidationError("batch_pairs must be at least 1");
}

struct EpochRecord {
  std::size_t epoch = 0;
  double prediction_loss = 0.0;
  double irm_penalty = 0.0;
  double ocd_penalty = 0.0;
  double total_loss = 0.0;
  double train_accuracy = 0.0;
};

using TrainHistory = std::vector<EpochRecord>;

struct LossComponents {
  double prediction = 0.0;
  double irm = 0.0;
  double ocd = 0.0;
  double total = 0.0;
};

namespace detail {

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct Batch {
  Eigen::MatrixXd features;  // D x n
  std::vector<int> gold;     // class index per column
};

inline Batch make_batch(std::span<const Sample> samples, std::size_t input_dim) {
  Batch b;
  b.features.resize(static_cast<Eigen::Index>(input_dim), static_cast<Eigen::Index>(samples.size()));
  b.gold.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& x = samples[i].features;
    if (static_cast<std::size_t>(x.size()) != input_dim) {
      throw ValidationError("sample feature length " + std::to_string(x.size()) +
                            " != model input dimension " + std::to_string(input_dim));
    }
    if (!x.allFinite()) throw ValidationError("sample features contain a non-finite value");
    b.features.col(static_cast<Eigen::Index>(i)) = x;
    b.gold.push_back(class_index(samples[i].label));
  }
  return b;
}

struct Forward {
  Eigen::MatrixXd hidden;  // d_repr x n
  Eigen::MatrixXd logits;  // 2 x n
  Eigen::MatrixXd probs;   // 2 x n
  Eigen::VectorXd log_norm;  // log-sum-exp per column
};

inline Forward forward(const ModelParams& p, const Eigen::MatrixXd& x) {
  Forward f;
  f.hidden = p.encoder * x;
  f.logits = (p.classifier * f.hidden).colwise() + p.bias;
  const Eigen::Index n = x.cols();
  f.probs.resize(2, n);
  f.log_norm.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double z0 = f.logits(0, i);
    const double z1 = f.logits(1, i);
    const double m = std::max(z0, z1);
    const double e0 = std::exp(z0 - m);
    const double e1 = std::exp(z1 - m);
    const double s = e0 + e1;
    f.probs(0, i) = e0 / s;
    f.probs(1, i) = e1 / s;
    f.log_norm[i] = m + std::log(s);
  }
  return f;
}

// Pushes dL/dlogits back through z = C W x + b into `grad`.
inline void backprop(const ModelParams& p, const Eigen::MatrixXd& x, const Forward& f,
                     const Eigen::MatrixXd& dlogits, ModelParams& grad) {
  grad.classifier.noalias() += dlogits * f.hidden.transpose();
  grad.bias += dlogits.rowwise().sum();
  const Eigen::MatrixXd dhidden = p.classifier.transpose() * dlogits;
  grad.encoder.noalias() += dhidden * x.transpose();
}

inline double prediction_loss_impl(const ModelParams& p, const Batch& b, ModelParams* grad,
                                   double weight) {
  const Eigen::Index n = b.features.cols();
  const Forward f = forward(p, b.features);
  CompensatedSum loss;
  for (Eigen::Index i = 0; i < n; ++i) {
    loss.add(f.log_norm[i] - f.logits(b.gold[static_cast<std::size_t>(i)], i));
  }
  if (grad != nullptr) {
    Eigen::MatrixXd dz = f.probs;
    for (Eigen::Index i = 0; i < n; ++i) dz(b.gold[static_cast<std::size_t>(i)], i) -= 1.0;
    dz *= weight / static_cast<double>(n);
    backprop(p, b.features, f, dz, *grad);
  }
  return loss.value() / static_cast<double>(n);
}

// d/domega of the mean cross-entropy of softmax(omega * z) at omega = 1:
//   mean_i (sum_k p_ik z_ik - z_i,gold)
inline double irm_slope_impl(const ModelParams& p, const Batch& b, ModelParams* grad,
                             double weight) {
  const Eigen::Index n = b.features.cols();
  const Forward f = forward(p, b.features);
  Eigen::VectorXd expected(n);
  CompensatedSum slope;
  for (Eigen::Index i = 0; i < n; ++i) {
    expected[i] = f.probs(0, i) * f.logits(0, i) + f.probs(1, i) * f.logits(1, i);
    slope.add(expected[i] - f.logits(b.gold[static_cast<std::size_t>(i)], i));
  }
  const double g = slope.value() / static_cast<double>(n);
  if (grad != nullptr) {
    // d(g^2)/dz_ki = 2 g / n * (p_ki (1 + z_ki - zbar_i) - [k == gold_i])
    Eigen::MatrixXd dz(2, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index k = 0; k < 2; ++k) {
        dz(k, i) = f.probs(k, i) * (1.0 + f.logits(k, i) - expected[i]);
      }
      dz(b.gold[static_cast<std::size_t>(i)], i) -= 1.0;
    }
    dz *= weight * 2.0 * g / static_cast<double>(n);
    backprop(p, b.features, f, dz, *grad);
  }
  return g;
}

inline double irm_penalty_impl(const ModelParams& p, std::span<const Batch> envs,
                               ModelParams* grad, double weight) {
  if (envs.size() < 2) {
    throw ValidationError("irm_penalty: needs at least 2 environments, got " +
                          std::to_string(envs.size()));
  }
  double penalty = 0.0;
  for (const auto& e : envs) {
    if (e.features.cols() == 0) throw ValidationError("irm_penalty: empty environment");
    const double g = irm_slope_impl(p, e, grad, weight);
    penalty += g * g;
  }
  return penalty;
}

inline double ocd_penalty_impl(const ModelParams& p, const Batch& originals, const Batch& editeds,
                               ModelParams* grad, double weight) {
  const Eigen::Index n = originals.features.cols();
  if (n == 0) throw ValidationError("ocd_penalty: empty pair list");
  const Eigen::Index r = p.classifier.cols();
  const Eigen::VectorXd row_norm = p.classifier.rowwise().norm();
  for (Eigen::Index k = 0; k < 2; ++k) {
    if (row_norm[k] == 0.0) {
      throw DomainError("ocd_penalty: label vector " + std::to_string(k) +
                        " has zero norm; orthogonal projection undefined");
    }
  }
  const Eigen::MatrixXd unit = row_norm.cwiseInverse().asDiagonal() * p.classifier;  // 2 x r
  const Eigen::MatrixXd h = p.encoder * originals.features;
  const Eigen::MatrixXd hs = p.encoder * editeds.features;

  Eigen::MatrixXd dh;
  Eigen::MatrixXd dhs;
  Eigen::MatrixXd dunit;
  if (grad != nullptr) {
    dh = Eigen::MatrixXd::Zero(r, n);
    dhs = Eigen::MatrixXd::Zero(r, n);
    dunit = Eigen::MatrixXd::Zero(2, r);
  }
  const double scale = 2.0 * weight / static_cast<double>(n);
  CompensatedSum total;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = originals.gold[static_cast<std::size_t>(i)];
    const int ys = editeds.gold[static_cast<std::size_t>(i)];
    if (y == ys) throw ValidationError("ocd_penalty: pair members must have opposite labels");
    const Eigen::VectorXd u = unit.row(y).transpose();
    const Eigen::VectorXd us = unit.row(ys).transpose();
    const double a = h.col(i).dot(u);
    const double as = hs.col(i).dot(us);
    const Eigen::VectorXd diff = (h.col(i) - a * u) - (hs.col(i) - as * us);
    total.add(diff.squaredNorm());
    if (grad != nullptr) {
      // perp = (I - u u^T) h: dperp/dh = I - u u^T, dperp/du = -(h.u) I - u h^T
      const Eigen::VectorXd g = scale * diff;
      dh.col(i) += g - u * u.dot(g);
      dhs.col(i) -= g - us * us.dot(g);
      dunit.row(y) += (-u.dot(g) * h.col(i) - a * g).transpose();
      dunit.row(ys) -= (-us.dot(g) * hs.col(i) - as * g).transpose();
    }
  }
  if (grad != nullptr) {
    grad->encoder.noalias() += dh * originals.features.transpose();
    grad->encoder.noalias() += dhs * editeds.features.transpose();
    for (Eigen::Index k = 0; k < 2; ++k) {
      const Eigen::RowVectorXd uk = unit.row(k);
      const Eigen::RowVectorXd du = dunit.row(k);
      grad->classifier.row(k) += (du - du.dot(uk) * uk) / row_norm[k];
    }
  }
  return total.value() / static_cast<double>(n);
}

struct PairBatches {
  Batch pooled;
  Batch originals;
  Batch editeds;
};

inline PairBatches make_pair_batches(std::span<const CounterfactualPair> pairs,
                                     std::size_t input_dim) {
  std::vector<Sample> pooled, originals, editeds;
  pooled.reserve(2 * pairs.size());
  originals.reserve(pairs.size());
  editeds.reserve(pairs.size());
  for (const auto& pr : pairs) {
    pooled.push_back(pr.original);
    pooled.push_back(pr.edited);
    originals.push_back(pr.original);
    editeds.push_back(pr.edited);
  }
  return {make_batch(pooled, input_dim), make_batch(originals, input_dim),
          make_batch(editeds, input_dim)};
}

inline LossComponents total_loss_impl(const ModelParams& p, const PairBatches& b,
                                      const TrainConfig& config, ModelParams* grad) {
  if (b.originals.features.cols() == 0) throw ValidationError("total_loss: empty batch");
  LossComponents c;
  c.prediction = prediction_loss_impl(p, b.pooled, grad, 1.0);
  const Batch envs[] = {b.originals, b.editeds};
  c.irm = irm_penalty_impl(p, envs, config.alpha != 0.0 ? grad : nullptr, config.alpha);
  c.ocd = ocd_penalty_impl(p, b.originals, b.editeds, config.beta != 0.0 ? grad : nullptr,
                           config.beta);
  c.total = c.prediction + config.alpha * c.irm + config.beta * c.ocd;
  return c;
}

}  // namespace detail

inline Eigen::Vector2d logits(const ModelParams& params, const Eigen::VectorXd& features) {
  if (static_cast<std::size_t>(features.size()) != params.input_dim()) {
    throw ValidationError("feature length " + std::to_string(features.size()) +
                          " != model input dimension " + std::to_string(params.input_dim()));
  }
  if (!features.allFinite()) throw ValidationError("features contain a non-finite value");
  return params.classifier * (params.encoder * features) + params.bias;
}

inline Eigen::Vector2d softmax(const Eigen::Vector2d& z) {
  const double m = z.maxCoeff();
  Eigen::Vector2d e((z.array() - m).exp());
  return e / e.sum();
}

inline Eigen::Vector2d predict_proba(const ModelParams& params, const Eigen::VectorXd& features) {
  return softmax(logits(params, features));
}

// Mean cross-entropy of predict_proba against gold labels.
inline double prediction_loss(const ModelParams& params, std::span<const Sample> batch) {
  if (batch.empty()) throw ValidationError("prediction_loss: empty batch");
  return detail::prediction_loss_impl(params, detail::make_batch(batch, params.input_dim()),
                                      nullptr, 1.0);
}

inline ModelParams prediction_loss_gradient(const ModelParams& params,
                                            std::span<const Sample> batch) {
  if (batch.empty()) throw ValidationError("prediction_loss: empty batch");
  ModelParams g = ModelParams::zeros_like(params);
  detail::prediction_loss_impl(params, detail::make_batch(batch, params.input_dim()), &g, 1.0);
  return g;
}

// dR_e(omega * M)/domega at omega = 1 for a single environment.
inline double irm_slope(const ModelParams& params, std::span<const Sample> env) {
  if (env.empty()) throw ValidationError("irm_slope: empty environment");
  return detail::irm_slope_impl(params, detail::make_batch(env, params.input_dim()), nullptr, 1.0);
}

namespace detail {
inline std::vector<Batch> make_env_batches(std::span<const std::vector<Sample>> envs,
                                           std::size_t input_dim) {
  std::vector<Batch> out;
  out.reserve(envs.size());
  for (const auto& e : envs) out.push_back(make_batch(e, input_dim));
  return out;
}
}  // namespace detail

// Sum over environments of the squared omega-slope.
inline double irm_penalty(const ModelParams& params, std::span<const std::vector<Sample>> envs) {
  const auto batches = detail::make_env_batches(envs, params.input_dim());
  return detail::irm_penalty_impl(params, batches, nullptr, 1.0);
}

inline ModelParams irm_penalty_gradient(const ModelParams& params,
                                        std::span<const std::vector<Sample>> envs) {
  const auto batches = detail::make_env_batches(envs, params.input_dim());
  ModelParams g = ModelParams::zeros_like(params);
  detail::irm_penalty_impl(params, batches, &g, 1.0);
  return g;
}

// Mean over pairs of |h_perpY - h*_perpY*|^2 where each representation is
// projected off the unit label vector of its own gold class.
inline double ocd_penalty(const ModelParams& params, std::span<const CounterfactualPair> pairs) {
  const auto b = detail::make_pair_batches(pairs, params.input_dim());
  return detail::ocd_penalty_impl(params, b.originals, b.editeds, nullptr, 1.0);
}

inline ModelParams ocd_penalty_gradient(const ModelParams& params,
                                        std::span<const CounterfactualPair> pairs) {
  const auto b = detail::make_pair_batches(pairs, params.input_dim());
  ModelParams g = ModelParams::zeros_like(params);
  detail::ocd_penalty_impl(params, b.originals, b.editeds, &g, 1.0);
  return g;
}

// L = L_P(all 2B sentences) + alpha * L_IRM({originals}, {editeds}) + beta * L_OCD(pairs)
inline LossComponents total_loss(const ModelParams& params,
                                 std::span<const CounterfactualPair> batch_pairs,
                                 const TrainConfig& config) {
  if (batch_pairs.empty()) throw ValidationError("total_loss: empty batch");
  return detail::total_loss_impl(
      params, detail::make_pair_batches(batch_pairs, params.input_dim()), config, nullptr);
}

inline LossComponents total_loss_gradient(const ModelParams& params,
                                          std::span<const CounterfactualPair> batch_pairs,
                                          const TrainConfig& config, ModelParams& grad) {
  if (batch_pairs.empty()) throw ValidationError("total_loss: empty batch");
  grad = ModelParams::zeros_like(params);
  return detail::total_loss_impl(
      params, detail::make_pair_batches(batch_pairs, params.input_dim()), config, &grad);
}

// Decision vector (c_+ - c_-) W over input features.
inline LinearClassifier effective_linear_map(const ModelParams& params, const BlockDims& dims) {
  if (params.input_dim() != dims.total()) {
    throw ValidationError("effective_linear_map: model input dimension " +
                          std::to_string(params.input_dim()) + " != block total " +
                          std::to_string(dims.total()));
  }
  const Eigen::RowVectorXd diff = params.classifier.row(1) - params.classifier.row(0);
  return LinearClassifier((diff * params.encoder).transpose(), dims);
}

// Entries uniform in [-0.05, 0.05]. With identity_encoder the encoder is I_D.
inline ModelParams init_params(std::size_t input_dim, const TrainConfig& config) {
  const std::size_t d_repr =
      config.identity_encoder ? input_dim : (config.d_repr == 0 ? input_dim : config.d_repr);
  if (config.identity_encoder && config.d_repr != 0 && config.d_repr != input_dim) {
    throw ValidationError("identity_encoder requires d_repr = D (" + std::to_string(input_dim) +
                          ")");
  }
  Engine rng(derive_seed(config.seed, streams::kInit));
  std::uniform_real_distribution<double> uni(-0.05, 0.05);
  const auto r = static_cast<Eigen::Index>(d_repr);
  const auto d = static_cast<Eigen::Index>(input_dim);
  ModelParams p;
  if (config.identity_encoder) {
    p.encoder = Eigen::MatrixXd::Identity(r, d);
  } else {
    p.encoder.resize(r, d);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < d; ++j) p.encoder(i, j) = uni(rng);
  }
  p.classifier.resize(2, r);
  for (Eigen::Index k = 0; k < 2; ++k)
    for (Eigen::Index j = 0; j < r; ++j) p.classifier(k, j) = uni(rng);
  p.bias[0] = uni(rng);
  p.bias[1] = uni(rng);
  return p;
}

inline Label predict_label(const ModelParams& params, const Eigen::VectorXd& features) {
  const Eigen::Vector2d z = logits(params, features);
  // Ties go to the positive class.
  return z[1] >= z[0] ? Label::kPositive : Label::kNegative;
}

namespace detail {

inline double batch_accuracy(const ModelParams& p, const Batch& b) {
  const Eigen::MatrixXd z = (p.classifier * (p.encoder * b.features)).colwise() + p.bias;
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < z.cols(); ++i) {
    const int pred = z(1, i) >= z(0, i) ? 1 : 0;
    if (pred == b.gold[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(z.cols());
}

inline void apply_step(ModelParams& p, const ModelParams& g, const TrainConfig& config) {
  if (!config.identity_encoder) p.encoder -= config.learning_rate * g.encoder;
  p.classifier -= config.learning_rate * g.classifier;
  p.bias -= config.learning_rate * g.bias;
}

[[noreturn]] inline void diverged(std::size_t epoch, const TrainConfig& config) {
  std::ostringstream msg;
  msg << "training diverged: non-finite loss at epoch " << epoch << " (learning_rate "
      << config.learning_rate << ")";
  throw DivergenceError(msg.str(), epoch, config.learning_rate);
}

inline bool finite(const ModelParams& p) {
  return p.encoder.allFinite() && p.classifier.allFinite() && p.bias.allFinite();
}

}  // namespace detail

struct TrainResult {
  ModelParams params;
  TrainHistory history;
};

// Minibatch gradient descent on total_loss. Pair order is reshuffled every
// epoch from a stream derived from config.seed; history records the full
// training-set losses after each epoch.
inline TrainResult train_ecf(const PairedDataset& data, const TrainConfig& config) {
  validate(config);
  if (data.pairs.empty()) throw ValidationError("train_ecf: empty paired dataset");
  const std::size_t dim = data.spec.total_dim();
  TrainResult result;
  result.params = init_params(dim, config);
  const auto full = detail::make_pair_batches(data.pairs, dim);

  std::vector<std::size_t> order(data.pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Engine shuffle_rng(derive_seed(config.seed, streams::kShuffle));
  std::vector<CounterfactualPair> batch;
  ModelParams grad = ModelParams::zeros_like(result.params);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_pairs) {
      const std::size_t end = std::min(order.size(), start + config.batch_pairs);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(data.pairs[order[i]]);
      const auto loss = total_loss_gradient(result.params, batch, config, grad);
      if (!std::isfinite(loss.total)) detail::diverged(epoch, config);
      detail::apply_step(result.params, grad, config);
      if (!detail::finite(result.params)) detail::diverged(epoch, config);
    }
    const auto c = detail::total_loss_impl(result.params, full, config, nullptr);
    if (!std::isfinite(c.total)) detail::diverged(epoch, config);
    result.history.push_back({epoch, c.prediction, c.irm, c.ocd, c.total,
                              detail::batch_accuracy(result.params, full.pooled)});
  }
  return result;
}

// Plain cross-entropy training on unpaired samples (no environments, no
// pairs, so alpha and beta do not apply). Minibatches hold
// 2 * batch_pairs sentences so step counts match train_ecf on the same
// number of sentences.
inline TrainResult train_erm(std::span<const Sample> samples, const TrainConfig& config) {
  validate(config);
  if (samples.empty()) throw ValidationError("train_erm: empty dataset");
  const std::size_t dim = static_cast<std::size_t>(samples.front().features.size());
  TrainResult result;
  result.params = init_params(dim, config);
  const auto full = detail::make_batch(samples, dim);

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Engine shuffle_rng(derive_seed(config.seed, streams::kShuffle));
  const std::size_t batch_size = 2 * config.batch_pairs;
  std::vector<Sample> batch;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t end = std::min(order.size(), start + batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(samples[order[i]]);
      ModelParams grad = ModelParams::zeros_like(result.params);
      const double loss = detail::prediction_loss_impl(
          result.params, detail::make_batch(batch, dim), &grad, 1.0);
      if (!std::isfinite(loss)) detail::diverged(epoch, config);
      detail::apply_step(result.params, grad, config);
      if (!detail::finite(result.params)) detail::diverged(epoch, config);
    }
    const double lp = detail::prediction_loss_impl(result.params, full, nullptr, 1.0);
    if (!std::isfinite(lp)) detail::diverged(epoch, config);
    result.history.push_back({epoch, lp, 0.0, 0.0, lp, detail::batch_accuracy(result.params, full)});
  }
  return result;
}

}  // namespace cadlab

#endif  // CADLAB_ECF_HPP
