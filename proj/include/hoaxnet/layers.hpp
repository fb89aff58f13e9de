#pragma once

// Trainable layers and the two-branch (title / body) classifiers.

#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hoaxnet/model_spec.hpp"
#include "hoaxnet/numerics.hpp"
#include "hoaxnet/rng.hpp"
#include "hoaxnet/textpipe.hpp"

namespace hoaxnet {

template <typename Scalar>
struct NamedTensor {
  std::string name;
  Tensor<Scalar> tensor;
};

// Glorot/Xavier uniform in +-sqrt(6 / (fan_in + fan_out)).
template <typename Scalar>
Matrix<Scalar> glorot_uniform(Index rows, Index cols, Index fan_in, Index fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Matrix<Scalar> m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<Scalar>(rng.uniform(-limit, limit));
  return m;
}

// ---------------------------------------------------------------------------
// Parameter blocks

template <typename Scalar>
struct DenseParams {
  Tensor<Scalar> weight;  // out x in
  Tensor<Scalar> bias;    // 1 x out
  Activation activation = Activation::identity;

  Index in_features() const { return weight.cols(); }
  Index out_features() const { return weight.rows(); }

  static DenseParams init(Index in, Index out, Activation act, Rng& rng) {
    return {Tensor<Scalar>::parameter(glorot_uniform<Scalar>(out, in, in, out, rng)),
            Tensor<Scalar>::parameter(Matrix<Scalar>::Zero(1, out)), act};
  }
};

// Gate blocks are stacked in the order input, forget, candidate, output.
template <typename Scalar>
struct LstmParams {
  Tensor<Scalar> input_weight;   // 4H x M
  Tensor<Scalar> hidden_weight;  // 4H x H
  Tensor<Scalar> bias;           // 1 x 4H

  Index units() const { return hidden_weight.cols(); }
  Index input_width() const { return input_weight.cols(); }

  static LstmParams init(Index input_width, Index units, Rng& rng) {
    return {Tensor<Scalar>::parameter(
                glorot_uniform<Scalar>(4 * units, input_width, input_width, 4 * units, rng)),
            Tensor<Scalar>::parameter(glorot_uniform<Scalar>(4 * units, units, units, 4 * units, rng)),
            Tensor<Scalar>::parameter(forget_bias(units))};
  }

  // Forget-gate bias starts at 1 so early gradients reach distant steps.
  static Matrix<Scalar> forget_bias(Index units) {
    Matrix<Scalar> b = Matrix<Scalar>::Zero(1, 4 * units);
    b.middleCols(units, units).setOnes();
    return b;
  }
};

// F filters of width w over M channels, flattened to F x (w*M) with the
// window position as the slow index.
template <typename Scalar>
struct ConvParams {
  Tensor<Scalar> weight;  // F x (w*M)
  Tensor<Scalar> bias;    // 1 x F
  Index width = 1;

  Index filters() const { return weight.rows(); }
  Index channels() const { return weight.cols() / width; }

  static ConvParams init(Index channels, Index width, Index filters, Rng& rng) {
    return {Tensor<Scalar>::parameter(
                glorot_uniform<Scalar>(filters, width * channels, width * channels, filters, rng)),
            Tensor<Scalar>::parameter(Matrix<Scalar>::Zero(1, filters)), width};
  }
};

// ---------------------------------------------------------------------------
// Layer functions

// Rows of a frozen table; ids outside [0, V) throw std::out_of_range.
template <typename Scalar>
Tensor<Scalar> embedding_forward(std::span<const std::int32_t> ids, const Tensor<Scalar>& table) {
  return gather_rows(table, ids);
}

template <typename Scalar>
Tensor<Scalar> dense_forward(const Tensor<Scalar>& x, const DenseParams<Scalar>& p) {
  if (x.cols() != p.in_features()) {
    throw ShapeError("dense: input " + x.shape_str() + " does not match weight " +
                     p.weight.shape_str());
  }
  return elementwise(add_row(matmul_transposed(x, p.weight), p.bias), p.activation);
}

template <typename Scalar>
struct LstmState {
  Tensor<Scalar> hidden;
  Tensor<Scalar> cell;
};

// One step for a batch of rows: x is B x M, h and c are B x H.
template <typename Scalar>
LstmState<Scalar> lstm_step(const Tensor<Scalar>& x, const Tensor<Scalar>& h,
                            const Tensor<Scalar>& c, const LstmParams<Scalar>& p) {
  const Index units = p.units();
  if (x.cols() != p.input_width() || h.cols() != units || c.cols() != units ||
      h.rows() != x.rows() || c.rows() != x.rows()) {
    throw ShapeError("lstm_step: inputs " + x.shape_str() + "/" + h.shape_str() + "/" +
                     c.shape_str() + " do not match " + std::to_string(units) + " units");
  }
  const auto gates = add_row(
      add(matmul_transposed(x, p.input_weight), matmul_transposed(h, p.hidden_weight)), p.bias);
  const auto i = sigmoid(slice_cols(gates, 0, units));
  const auto f = sigmoid(slice_cols(gates, units, units));
  const auto g = tanh(slice_cols(gates, 2 * units, units));
  const auto o = sigmoid(slice_cols(gates, 3 * units, units));
  auto next_c = add(mul(f, c), mul(i, g));
  auto next_h = mul(o, tanh(next_c));
  return {std::move(next_h), std::move(next_c)};
}

// Final state after running over `steps` (each B x M) in order, from zeros.
template <typename Scalar>
Tensor<Scalar> lstm_final_hidden(const std::vector<Tensor<Scalar>>& steps,
                                 const LstmParams<Scalar>& p, bool reverse) {
  if (steps.empty()) throw ShapeError("lstm: empty sequence");
  const Index batch = steps.front().rows();
  LstmState<Scalar> state{Tensor<Scalar>::constant(Matrix<Scalar>::Zero(batch, p.units())),
                          Tensor<Scalar>::constant(Matrix<Scalar>::Zero(batch, p.units()))};
  const std::size_t n = steps.size();
  for (std::size_t t = 0; t < n; ++t) {
    const auto& x = steps[reverse ? n - 1 - t : t];
    state = lstm_step(x, state.hidden, state.cell, p);
  }
  return state.hidden;
}

// Concatenated final forward and backward hidden states: B x 2H.
template <typename Scalar>
Tensor<Scalar> bilstm_forward(const std::vector<Tensor<Scalar>>& steps,
                              const LstmParams<Scalar>& forward,
                              const LstmParams<Scalar>& backward) {
  return concat_cols<Scalar>({lstm_final_hidden(steps, forward, false),
                              lstm_final_hidden(steps, backward, true)});
}

// Single sequence l x M -> 1 x 2H.
template <typename Scalar>
Tensor<Scalar> bilstm_forward(const Tensor<Scalar>& sequence, const LstmParams<Scalar>& forward,
                              const LstmParams<Scalar>& backward) {
  if (sequence.rows() < 1) throw ShapeError("bilstm: empty sequence");
  std::vector<Tensor<Scalar>> steps;
  steps.reserve(static_cast<std::size_t>(sequence.rows()));
  for (Index t = 0; t < sequence.rows(); ++t) steps.push_back(slice_rows(sequence, t, 1));
  return bilstm_forward(steps, forward, backward);
}

// Valid cross-correlation along the length axis. `sequence` holds
// consecutive segments of segment_rows rows each (one per batch item); the
// result holds (segment_rows - w + 1) rows per segment.
template <typename Scalar>
Tensor<Scalar> conv1d_forward(const Tensor<Scalar>& sequence, const ConvParams<Scalar>& p,
                              Index segment_rows) {
  if (sequence.cols() != p.channels()) {
    throw ShapeError("conv1d: input " + sequence.shape_str() + " has " +
                     std::to_string(sequence.cols()) + " channels, filters expect " +
                     std::to_string(p.channels()));
  }
  return add_row(matmul_transposed(unfold_rows(sequence, p.width, segment_rows), p.weight), p.bias);
}

template <typename Scalar>
Tensor<Scalar> conv1d_forward(const Tensor<Scalar>& sequence, const ConvParams<Scalar>& p) {
  return conv1d_forward(sequence, p, sequence.rows());
}

template <typename Scalar>
Tensor<Scalar> maxpool1d(const Tensor<Scalar>& x, Index window) {
  return maxpool_rows(x, window, x.rows());
}

// Inverted dropout.
template <typename Scalar>
Tensor<Scalar> dropout(const Tensor<Scalar>& x, double rate, bool training, Rng& rng) {
  if (!training || rate <= 0.0) return x;
  if (rate >= 1.0) throw std::invalid_argument("dropout: rate must be below 1");
  const auto keep_scale = static_cast<Scalar>(1.0 / (1.0 - rate));
  Matrix<Scalar> mask(x.rows(), x.cols());
  for (Index i = 0; i < mask.size(); ++i) {
    mask.data()[i] = rng.uniform() < rate ? Scalar(0) : keep_scale;
  }
  return mul(x, Tensor<Scalar>::constant(std::move(mask)));
}

// ---------------------------------------------------------------------------
// Classifier interface

template <typename Scalar>
class Classifier {
 public:
  virtual ~Classifier() = default;

  // B x n_classes class probabilities; column 1 is P(true).
  virtual Tensor<Scalar> forward(std::span<const EncodedArticle> batch, bool training,
                                 Rng& rng) const = 0;
  // Trainable tensors.
  virtual std::vector<NamedTensor<Scalar>> parameters() const = 0;
  // Everything a checkpoint must hold, trainable or not.
  virtual std::vector<NamedTensor<Scalar>> state() const { return parameters(); }
  virtual const ModelSpec& spec() const = 0;

  Tensor<Scalar> forward(std::span<const EncodedArticle> batch) const {
    Rng unused(0);
    return forward(batch, false, unused);
  }
};

// Title and body branches over a shared frozen embedding table. Each branch
// is a BiLSTM (lstm) or Conv1D + ReLU + max-pool (cnn) followed by a ReLU
// dense layer; branch outputs are concatenated and classified by a
// dense + softmax head.
template <typename Scalar>
class TwoBranchModel final : public Classifier<Scalar> {
 public:
  TwoBranchModel(ModelSpec spec, Matrix<Scalar> embedding, Rng& rng)
      : spec_(std::move(spec)), embedding_(Tensor<Scalar>::constant(std::move(embedding))) {
    spec_.validate();
    if (spec_.architecture == Architecture::transformer) {
      throw std::invalid_argument("two-branch model: architecture must be lstm or cnn");
    }
    spec_.vocab_size = static_cast<int>(embedding_.rows());
    spec_.embedding_dim = static_cast<int>(embedding_.cols());
    const Index m = embedding_.cols();
    if (spec_.architecture == Architecture::lstm) {
      title_fwd_ = LstmParams<Scalar>::init(m, spec_.title_units, rng);
      title_bwd_ = LstmParams<Scalar>::init(m, spec_.title_units, rng);
      body_fwd_ = LstmParams<Scalar>::init(m, spec_.body_units, rng);
      body_bwd_ = LstmParams<Scalar>::init(m, spec_.body_units, rng);
      title_dense_ = DenseParams<Scalar>::init(2 * spec_.title_units, spec_.title_dense,
                                               Activation::relu, rng);
      body_dense_ = DenseParams<Scalar>::init(2 * spec_.body_units, spec_.body_dense,
                                              Activation::relu, rng);
    } else {
      if (spec_.title_len < spec_.kernel_width || spec_.body_len < spec_.kernel_width) {
        throw std::invalid_argument("cnn: sequence lengths must be at least the kernel width");
      }
      title_conv_ = ConvParams<Scalar>::init(m, spec_.kernel_width, spec_.title_filters, rng);
      body_conv_ = ConvParams<Scalar>::init(m, spec_.kernel_width, spec_.body_filters, rng);
      title_dense_ = DenseParams<Scalar>::init(pooled_rows(spec_.title_len) * spec_.title_filters,
                                               spec_.title_dense, Activation::relu, rng);
      body_dense_ = DenseParams<Scalar>::init(pooled_rows(spec_.body_len) * spec_.body_filters,
                                              spec_.body_dense, Activation::relu, rng);
    }
    head_ = DenseParams<Scalar>::init(spec_.title_dense + spec_.body_dense, spec_.n_classes,
                                      Activation::identity, rng);
  }

  Tensor<Scalar> forward(std::span<const EncodedArticle> batch, bool training,
                         Rng& rng) const override {
    if (batch.empty()) throw std::invalid_argument("forward: empty batch");
    auto title = branch(batch, true, training, rng);
    auto body = branch(batch, false, training, rng);
    auto merged = dropout(concat_cols<Scalar>({title, body}), spec_.dropout_merge, training, rng);
    return softmax(dense_forward(merged, head_), 1);
  }

  std::vector<NamedTensor<Scalar>> parameters() const override {
    std::vector<NamedTensor<Scalar>> out;
    auto lstm = [&](const std::string& prefix, const LstmParams<Scalar>& p) {
      out.push_back({prefix + ".input_weight", p.input_weight});
      out.push_back({prefix + ".hidden_weight", p.hidden_weight});
      out.push_back({prefix + ".bias", p.bias});
    };
    auto dense = [&](const std::string& prefix, const DenseParams<Scalar>& p) {
      out.push_back({prefix + ".weight", p.weight});
      out.push_back({prefix + ".bias", p.bias});
    };
    if (spec_.architecture == Architecture::lstm) {
      lstm("title.lstm_fwd", title_fwd_);
      lstm("title.lstm_bwd", title_bwd_);
      lstm("body.lstm_fwd", body_fwd_);
      lstm("body.lstm_bwd", body_bwd_);
    } else {
      out.push_back({"title.conv.weight", title_conv_.weight});
      out.push_back({"title.conv.bias", title_conv_.bias});
      out.push_back({"body.conv.weight", body_conv_.weight});
      out.push_back({"body.conv.bias", body_conv_.bias});
    }
    dense("title.dense", title_dense_);
    dense("body.dense", body_dense_);
    dense("head", head_);
    return out;
  }

  std::vector<NamedTensor<Scalar>> state() const override {
    auto out = parameters();
    out.insert(out.begin(), {"embedding", embedding_});
    return out;
  }

  const ModelSpec& spec() const override { return spec_; }
  const Tensor<Scalar>& embedding() const { return embedding_; }

 private:
  Index pooled_rows(Index len) const {
    const Index conv_rows = len - spec_.kernel_width + 1;
    return (conv_rows + spec_.pool_window - 1) / spec_.pool_window;
  }

  Tensor<Scalar> branch(std::span<const EncodedArticle> batch, bool is_title, bool training,
                        Rng& rng) const {
    const Index len = is_title ? spec_.title_len : spec_.body_len;
    const Index b = static_cast<Index>(batch.size());
    auto ids_of = [&](const EncodedArticle& a) -> const std::vector<std::int32_t>& {
      const auto& ids = is_title ? a.title_ids : a.body_ids;
      if (static_cast<Index>(ids.size()) != len) {
        throw ShapeError("article '" + a.id + "': expected " + std::to_string(len) + " ids, got " +
                         std::to_string(ids.size()));
      }
      return ids;
    };
    Tensor<Scalar> features;
    if (spec_.architecture == Architecture::lstm) {
      std::vector<Tensor<Scalar>> steps;
      steps.reserve(static_cast<std::size_t>(len));
      std::vector<std::int32_t> column(static_cast<std::size_t>(b));
      for (Index t = 0; t < len; ++t) {
        for (Index i = 0; i < b; ++i) column[i] = ids_of(batch[i])[t];
        steps.push_back(embedding_forward<Scalar>(column, embedding_));
      }
      features = is_title ? bilstm_forward(steps, title_fwd_, title_bwd_)
                          : bilstm_forward(steps, body_fwd_, body_bwd_);
    } else {
      std::vector<std::int32_t> all;
      all.reserve(static_cast<std::size_t>(b * len));
      for (const auto& a : batch) {
        const auto& ids = ids_of(a);
        all.insert(all.end(), ids.begin(), ids.end());
      }
      const auto& conv = is_title ? title_conv_ : body_conv_;
      auto maps = relu(conv1d_forward(embedding_forward<Scalar>(all, embedding_), conv, len));
      auto pooled = maxpool_rows(maps, spec_.pool_window, len - spec_.kernel_width + 1);
      features = reshape(pooled, b, pooled.size() / b);
    }
    features = dropout(features, spec_.dropout_branch, training, rng);
    return dense_forward(features, is_title ? title_dense_ : body_dense_);
  }

  ModelSpec spec_;
  Tensor<Scalar> embedding_;
  LstmParams<Scalar> title_fwd_, title_bwd_, body_fwd_, body_bwd_;
  ConvParams<Scalar> title_conv_, body_conv_;
  DenseParams<Scalar> title_dense_, body_dense_, head_;
};

template <typename Scalar>
std::unique_ptr<Classifier<Scalar>> build_two_branch_model(const ModelSpec& spec,
                                                           Matrix<Scalar> embedding, Rng& rng) {
  if (spec.architecture != Architecture::lstm && spec.architecture != Architecture::cnn) {
    throw std::invalid_argument("build_two_branch_model: architecture '" +
                                std::string(architecture_name(spec.architecture)) +
                                "' is not a two-branch model");
  }
  return std::make_unique<TwoBranchModel<Scalar>>(spec, std::move(embedding), rng);
}

}  // namespace hoaxnet
