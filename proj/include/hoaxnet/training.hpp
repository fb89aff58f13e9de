#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hoaxnet/checkpoint.hpp"
#include "hoaxnet/numerics.hpp"
#include "hoaxnet/rng.hpp"
#include "hoaxnet/textpipe.hpp"

namespace hoaxnet {

inline constexpr double kBceEpsilon = 1e-7;

// -y log(p) - (1-y) log(1-p) with p clamped to [eps, 1-eps].
inline double bce_loss(double p, int y) {
  const double pc = std::clamp(p, kBceEpsilon, 1.0 - kBceEpsilon);
  return y == 1 ? -std::log(pc) : -std::log(1.0 - pc);
}

// Batch-mean binary cross-entropy of a B x 1 probability column. Entries
// outside the clamp range receive no gradient.
template <typename Scalar>
Tensor<Scalar> binary_cross_entropy(const Tensor<Scalar>& p, std::span<const int> labels) {
  if (p.cols() != 1 || p.rows() != static_cast<Index>(labels.size())) {
    throw ShapeError("binary_cross_entropy: " + p.shape_str() + " probabilities for " +
                     std::to_string(labels.size()) + " labels");
  }
  const double n = static_cast<double>(labels.size());
  double total = 0.0;
  for (Index i = 0; i < p.rows(); ++i) total += bce_loss(static_cast<double>(p.value()(i, 0)), labels[i]);
  Matrix<Scalar> out(1, 1);
  out(0, 0) = static_cast<Scalar>(total / n);
  std::vector<int> y(labels.begin(), labels.end());
  return Tensor<Scalar>::from_op(std::move(out), {p}, [y = std::move(y), n](auto& self) {
    auto& parent = self.parent(0);
    Matrix<Scalar> g = Matrix<Scalar>::Zero(parent.value.rows(), 1);
    for (Index i = 0; i < g.rows(); ++i) {
      const double pi = static_cast<double>(parent.value(i, 0));
      if (pi < kBceEpsilon || pi > 1.0 - kBceEpsilon) continue;
      const double d = y[static_cast<std::size_t>(i)] == 1 ? -1.0 / pi : 1.0 / (1.0 - pi);
      g(i, 0) = static_cast<Scalar>(d / n * static_cast<double>(self.grad(0, 0)));
    }
    parent.add_grad(g);
  });
}

// v' = momentum * v - lr * g;  w' = w + v'.
template <typename W, typename G, typename V>
void sgd_momentum_step(Eigen::MatrixBase<W>& w, const Eigen::MatrixBase<G>& g,
                       Eigen::MatrixBase<V>& velocity, double lr, double momentum) {
  using S = typename W::Scalar;
  velocity = static_cast<S>(momentum) * velocity - static_cast<S>(lr) * g;
  w += velocity;
}

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam; t counts steps from 1.
template <typename W, typename G, typename M, typename V>
void adam_step(Eigen::MatrixBase<W>& w, const Eigen::MatrixBase<G>& g, Eigen::MatrixBase<M>& m,
               Eigen::MatrixBase<V>& v, long t, double lr, const AdamConfig& cfg = {}) {
  if (t < 1) throw std::invalid_argument("adam_step: t must be at least 1");
  using S = typename W::Scalar;
  m = static_cast<S>(cfg.beta1) * m + static_cast<S>(1.0 - cfg.beta1) * g;
  v = static_cast<S>(cfg.beta2) * v + static_cast<S>(1.0 - cfg.beta2) * g.cwiseProduct(g);
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  w.array() -= static_cast<S>(lr) * (m.array() / static_cast<S>(c1)) /
               ((v.array() / static_cast<S>(c2)).sqrt() + static_cast<S>(cfg.eps));
}

enum class OptimizerKind { sgd_momentum, adam };

OptimizerKind parse_optimizer(std::string_view name);
std::string_view optimizer_name(OptimizerKind kind);

struct Hyperparameters {
  OptimizerKind optimizer = OptimizerKind::sgd_momentum;
  double learning_rate = 0.1;
  double momentum = 0.9;
  int batch_size = 32;
  // Gradients are rescaled to this global L2 norm when they exceed it; 0
  // disables clipping.
  double clip_norm = 5.0;

  void validate() const;
  // Defaults used for each architecture when nothing is configured.
  static Hyperparameters defaults(Architecture arch);
};

// Stateful optimizer over a fixed parameter list.
class Optimizer {
 public:
  Optimizer(std::vector<Tensor<float>> params, const Hyperparameters& hp);
  void zero_grad();
  void step();

 private:
  std::vector<Tensor<float>> params_;
  Hyperparameters hp_;
  std::vector<Matrix<float>> first_, second_;
  long t_ = 0;
};

struct SplitIndices {
  std::vector<std::size_t> fit;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

// Seeded shuffle; test = floor(30%) of n, validation = floor(30%) of the
// remaining training part, fit = the rest.
SplitIndices holdout_split(std::size_t n, std::uint64_t seed);

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double validation_loss = 0.0;
  double validation_accuracy = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  int stopped_epoch = 0;
  int best_epoch = 0;
  double best_validation_accuracy = 0.0;
  bool early_stopped = false;

  // One line per epoch.
  std::string log() const;
  // key=value summary.
  std::string summary() const;
};

struct TrainOptions {
  int max_epochs = 20;
  int patience = 2;
  std::uint64_t seed = 1;
  // Called after each epoch; used for progress output.
  std::function<void(const EpochStats&)> on_epoch;
};

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mini-batch training with per-epoch shuffling and early stopping on
// validation accuracy. Parameters of the best epoch are restored on return.
TrainReport train(Model& model, std::span<const EncodedArticle> fit,
                  std::span<const EncodedArticle> validation, const Hyperparameters& hp,
                  const TrainOptions& options);

struct Predictions {
  std::vector<double> p_true;
  std::vector<int> labels;  // argmax
  double loss = 0.0;
};

// Inference in batches of `batch_size`.
Predictions predict(const Model& model, std::span<const EncodedArticle> data,
                    int batch_size = 64);

std::vector<EncodedArticle> select(std::span<const EncodedArticle> data,
                                   std::span<const std::size_t> indices);

}  // namespace hoaxnet
