#include "hoaxnet/training.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace hoaxnet {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd_momentum" || name == "sgd") return OptimizerKind::sgd_momentum;
  if (name == "adam") return OptimizerKind::adam;
  throw std::invalid_argument("unknown optimizer '" + std::string(name) +
                              "' (expected sgd_momentum or adam)");
}

std::string_view optimizer_name(OptimizerKind kind) {
  return kind == OptimizerKind::adam ? "adam" : "sgd_momentum";
}

void Hyperparameters::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must be in [0, 1)");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be positive");
  if (!(clip_norm >= 0.0)) throw std::invalid_argument("clip_norm must be non-negative");
}

Hyperparameters Hyperparameters::defaults(Architecture arch) {
  Hyperparameters hp;
  switch (arch) {
    case Architecture::lstm:
      hp.learning_rate = 0.264;
      hp.momentum = 0.082;
      break;
    case Architecture::cnn:
      hp.learning_rate = 0.240;
      hp.momentum = 0.303;
      break;
    case Architecture::transformer:
      hp.optimizer = OptimizerKind::adam;
      hp.learning_rate = 1e-3;
      hp.momentum = 0.0;
      break;
  }
  return hp;
}

// ---------------------------------------------------------------------------

Optimizer::Optimizer(std::vector<Tensor<float>> params, const Hyperparameters& hp)
    : params_(std::move(params)), hp_(hp) {
  hp_.validate();
  for (const auto& p : params_) {
    first_.push_back(Matrix<float>::Zero(p.rows(), p.cols()));
    if (hp_.optimizer == OptimizerKind::adam) second_.push_back(Matrix<float>::Zero(p.rows(), p.cols()));
  }
}

void Optimizer::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

void Optimizer::step() {
  ++t_;
  float scale = 1.0f;
  if (hp_.clip_norm > 0.0) {
    double sq = 0.0;
    for (const auto& p : params_) {
      if (p.has_grad()) sq += static_cast<double>(p.grad().squaredNorm());
    }
    const double norm = std::sqrt(sq);
    if (norm > hp_.clip_norm) scale = static_cast<float>(hp_.clip_norm / norm);
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i];
    if (!p.has_grad()) continue;
    auto& w = p.mutable_value();
    const Matrix<float> g = scale == 1.0f ? p.grad() : (p.grad() * scale).eval();
    if (hp_.optimizer == OptimizerKind::adam) {
      adam_step(w, g, first_[i], second_[i], t_, hp_.learning_rate);
    } else {
      sgd_momentum_step(w, g, first_[i], hp_.learning_rate, hp_.momentum);
    }
  }
}

// ---------------------------------------------------------------------------

SplitIndices holdout_split(std::size_t n, std::uint64_t seed) {
  if (n < 10) throw std::invalid_argument("holdout_split: need at least 10 items, got " + std::to_string(n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  const std::size_t n_test = n * 3 / 10;
  const std::size_t n_train = n - n_test;
  const std::size_t n_val = n_train * 3 / 10;
  SplitIndices s;
  s.fit.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train - n_val));
  s.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train - n_val),
                      order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return s;
}

std::vector<EncodedArticle> select(std::span<const EncodedArticle> data,
                                   std::span<const std::size_t> indices) {
  std::vector<EncodedArticle> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(data[i]);
  return out;
}

// ---------------------------------------------------------------------------

std::string TrainReport::log() const {
  std::ostringstream out;
  for (const auto& e : epochs) {
    out << "epoch=" << e.epoch << " train_loss=" << fmt(e.train_loss)
        << " train_accuracy=" << fmt(e.train_accuracy) << " validation_loss=" << fmt(e.validation_loss)
        << " validation_accuracy=" << fmt(e.validation_accuracy) << '\n';
  }
  return out.str();
}

std::string TrainReport::summary() const {
  std::ostringstream out;
  out << "epochs_run=" << epochs.size() << '\n'
      << "stopped_epoch=" << stopped_epoch << '\n'
      << "early_stopped=" << (early_stopped ? "true" : "false") << '\n'
      << "best_epoch=" << best_epoch << '\n'
      << "best_validation_accuracy=" << fmt(best_validation_accuracy) << '\n';
  if (!epochs.empty()) {
    const auto& last = epochs.back();
    out << "final_train_loss=" << fmt(last.train_loss) << '\n'
        << "final_train_accuracy=" << fmt(last.train_accuracy) << '\n'
        << "final_validation_loss=" << fmt(last.validation_loss) << '\n'
        << "final_validation_accuracy=" << fmt(last.validation_accuracy) << '\n';
  }
  return out.str();
}

Predictions predict(const Model& model, std::span<const EncodedArticle> data, int batch_size) {
  Predictions out;
  out.p_true.reserve(data.size());
  out.labels.reserve(data.size());
  double loss = 0.0;
  Rng unused(0);
  for (std::size_t start = 0; start < data.size(); start += static_cast<std::size_t>(batch_size)) {
    const std::size_t n = std::min(static_cast<std::size_t>(batch_size), data.size() - start);
    const auto probs = model.forward(data.subspan(start, n), false, unused);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& row = probs.value().row(static_cast<Index>(i));
      Index arg = 0;
      row.maxCoeff(&arg);
      out.p_true.push_back(static_cast<double>(row(1)));
      out.labels.push_back(static_cast<int>(arg));
      loss += bce_loss(static_cast<double>(row(1)), data[start + i].label);
    }
  }
  out.loss = data.empty() ? 0.0 : loss / static_cast<double>(data.size());
  return out;
}

TrainReport train(Model& model, std::span<const EncodedArticle> fit,
                  std::span<const EncodedArticle> validation, const Hyperparameters& hp,
                  const TrainOptions& options) {
  if (fit.empty()) throw std::invalid_argument("train: empty fit set");
  if (validation.empty()) throw std::invalid_argument("train: empty validation set");
  if (options.max_epochs < 1) throw std::invalid_argument("train: max_epochs must be positive");
  if (options.patience < 1) throw std::invalid_argument("train: patience must be positive");
  hp.validate();

  const auto named = model.parameters();
  std::vector<Tensor<float>> params;
  params.reserve(named.size());
  for (const auto& p : named) params.push_back(p.tensor);
  Optimizer optimizer(params, hp);

  Rng shuffle_rng(options.seed);
  Rng dropout_rng = shuffle_rng.fork(0xd50u);

  auto snapshot = [&] {
    std::vector<Matrix<float>> values;
    values.reserve(params.size());
    for (const auto& p : params) values.push_back(p.value());
    return values;
  };
  auto best = snapshot();

  TrainReport report;
  std::vector<std::size_t> order(fit.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<EncodedArticle> batch;
  std::vector<int> labels;
  int since_best = 0;
  bool have_best = false;

  for (int epoch = 1; epoch <= options.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(hp.batch_size)) {
      const std::size_t n = std::min(static_cast<std::size_t>(hp.batch_size), order.size() - start);
      batch.clear();
      labels.clear();
      for (std::size_t i = 0; i < n; ++i) {
        batch.push_back(fit[order[start + i]]);
        labels.push_back(batch.back().label);
      }
      const auto probs = model.forward(batch, true, dropout_rng);
      const auto loss = binary_cross_entropy(slice_cols(probs, 1, 1), labels);
      const double value = static_cast<double>(loss.item());
      if (!std::isfinite(value)) {
        throw DivergenceError("training diverged at epoch " + std::to_string(epoch) +
                              ": non-finite loss");
      }
      optimizer.zero_grad();
      backward(loss);
      optimizer.step();
      loss_sum += value * static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto& row = probs.value().row(static_cast<Index>(i));
        if ((row(1) > row(0) ? 1 : 0) == labels[i]) ++correct;
      }
    }

    const auto val = predict(model, validation, 64);
    std::size_t val_correct = 0;
    for (std::size_t i = 0; i < validation.size(); ++i) {
      if (val.labels[i] == validation[i].label) ++val_correct;
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(fit.size());
    stats.train_accuracy = static_cast<double>(correct) / static_cast<double>(fit.size());
    stats.validation_loss = val.loss;
    stats.validation_accuracy = static_cast<double>(val_correct) / static_cast<double>(validation.size());
    if (!std::isfinite(stats.validation_loss)) {
      throw DivergenceError("training diverged at epoch " + std::to_string(epoch) +
                            ": non-finite validation loss");
    }
    report.epochs.push_back(stats);
    report.stopped_epoch = epoch;
    if (options.on_epoch) options.on_epoch(stats);

    if (!have_best || stats.validation_accuracy > report.best_validation_accuracy) {
      have_best = true;
      report.best_validation_accuracy = stats.validation_accuracy;
      report.best_epoch = epoch;
      best = snapshot();
      since_best = 0;
    } else if (++since_best >= options.patience) {
      report.early_stopped = true;
      break;
    }
  }

  for (std::size_t i = 0; i < params.size(); ++i) params[i].mutable_value() = best[i];
  return report;
}

}  // namespace hoaxnet
