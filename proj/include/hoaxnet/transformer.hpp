#pragma once

// Scaled dot-product attention, multi-head attention, post-norm encoder
// blocks and the encoder-stack sequence classifier.

#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hoaxnet/layers.hpp"

namespace hoaxnet {

template <typename Scalar>
struct AttentionParams {
  // Per-head projections stacked side by side: head i owns columns
  // [i*d_k, (i+1)*d_k) of query/key/value.
  Tensor<Scalar> query;   // d_model x (h*d_k)
  Tensor<Scalar> key;     // d_model x (h*d_k)
  Tensor<Scalar> value;   // d_model x (h*d_k)
  Tensor<Scalar> output;  // (h*d_k) x d_model
  Index heads = 1;
  Index key_dim = 1;

  Index model_dim() const { return query.rows(); }

  static AttentionParams init(Index d_model, Index heads, Index key_dim, Rng& rng) {
    const Index width = heads * key_dim;
    auto proj = [&] {
      return Tensor<Scalar>::parameter(glorot_uniform<Scalar>(d_model, width, d_model, width, rng));
    };
    AttentionParams p;
    p.query = proj();
    p.key = proj();
    p.value = proj();
    p.output = Tensor<Scalar>::parameter(glorot_uniform<Scalar>(width, d_model, width, d_model, rng));
    p.heads = heads;
    p.key_dim = key_dim;
    return p;
  }
};

template <typename Scalar>
struct EncoderBlockParams {
  AttentionParams<Scalar> attention;
  Tensor<Scalar> norm1_gain, norm1_bias;
  Tensor<Scalar> norm2_gain, norm2_bias;
  DenseParams<Scalar> ff_in;   // d_model -> d_ff, relu
  DenseParams<Scalar> ff_out;  // d_ff -> d_model, linear

  static EncoderBlockParams init(Index d_model, Index heads, Index key_dim, Index d_ff, Rng& rng) {
    EncoderBlockParams p;
    p.attention = AttentionParams<Scalar>::init(d_model, heads, key_dim, rng);
    p.norm1_gain = Tensor<Scalar>::parameter(Matrix<Scalar>::Ones(1, d_model));
    p.norm1_bias = Tensor<Scalar>::parameter(Matrix<Scalar>::Zero(1, d_model));
    p.norm2_gain = Tensor<Scalar>::parameter(Matrix<Scalar>::Ones(1, d_model));
    p.norm2_bias = Tensor<Scalar>::parameter(Matrix<Scalar>::Zero(1, d_model));
    p.ff_in = DenseParams<Scalar>::init(d_model, d_ff, Activation::relu, rng);
    p.ff_out = DenseParams<Scalar>::init(d_ff, d_model, Activation::identity, rng);
    return p;
  }
};

template <typename Scalar>
struct EncoderStack {
  Tensor<Scalar> token_embedding;     // V x d_model
  Tensor<Scalar> position_embedding;  // max_len x d_model
  std::vector<EncoderBlockParams<Scalar>> blocks;
  DenseParams<Scalar> head;  // d_model -> n_classes, sigmoid

  static EncoderStack init(const ModelSpec& spec, Rng& rng) {
    EncoderStack s;
    auto table = [&](Index rows) {
      Matrix<Scalar> m(rows, spec.d_model);
      for (Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<Scalar>(0.1 * rng.normal());
      return Tensor<Scalar>::parameter(std::move(m));
    };
    s.token_embedding = table(spec.vocab_size);
    s.position_embedding = table(spec.max_len);
    for (int b = 0; b < spec.n_blocks; ++b) {
      s.blocks.push_back(
          EncoderBlockParams<Scalar>::init(spec.d_model, spec.heads, spec.d_k, spec.d_ff, rng));
    }
    s.head = DenseParams<Scalar>::init(spec.d_model, spec.n_classes, Activation::sigmoid, rng);
    return s;
  }
};

// Row-softmax of Q K^T / sqrt(d_k).
template <typename Scalar>
Tensor<Scalar> attention_weights(const Tensor<Scalar>& q, const Tensor<Scalar>& k) {
  if (q.cols() != k.cols()) {
    throw ShapeError("attention: query " + q.shape_str() + " and key " + k.shape_str() +
                     " widths differ");
  }
  const auto inv_sqrt = static_cast<Scalar>(1.0 / std::sqrt(static_cast<double>(q.cols())));
  return softmax(scale(matmul_transposed(q, k), inv_sqrt), 1);
}

// softmax(Q K^T / sqrt(d_k)) V.
template <typename Scalar>
Tensor<Scalar> scaled_dot_attention(const Tensor<Scalar>& q, const Tensor<Scalar>& k,
                                    const Tensor<Scalar>& v) {
  if (q.rows() != k.rows() || k.rows() != v.rows()) {
    throw ShapeError("attention: row counts differ, Q " + q.shape_str() + " K " + k.shape_str() +
                     " V " + v.shape_str());
  }
  return matmul(attention_weights(q, k), v);
}

// x holds consecutive sequences of `seq_len` rows; attention stays within
// each sequence.
template <typename Scalar>
Tensor<Scalar> multi_head_attention(const Tensor<Scalar>& x, const AttentionParams<Scalar>& p,
                                    Index seq_len) {
  if (x.cols() != p.model_dim()) {
    throw ShapeError("multi_head_attention: input " + x.shape_str() + " does not match d_model " +
                     std::to_string(p.model_dim()));
  }
  if (seq_len < 1 || x.rows() % seq_len != 0) {
    throw ShapeError("multi_head_attention: " + x.shape_str() + " is not a whole number of " +
                     std::to_string(seq_len) + "-row sequences");
  }
  const auto q = matmul(x, p.query);
  const auto k = matmul(x, p.key);
  const auto v = matmul(x, p.value);
  const Index sequences = x.rows() / seq_len;
  std::vector<Tensor<Scalar>> rows;
  rows.reserve(static_cast<std::size_t>(sequences));
  for (Index s = 0; s < sequences; ++s) {
    const auto qs = slice_rows(q, s * seq_len, seq_len);
    const auto ks = slice_rows(k, s * seq_len, seq_len);
    const auto vs = slice_rows(v, s * seq_len, seq_len);
    std::vector<Tensor<Scalar>> heads;
    heads.reserve(static_cast<std::size_t>(p.heads));
    for (Index h = 0; h < p.heads; ++h) {
      heads.push_back(scaled_dot_attention(slice_cols(qs, h * p.key_dim, p.key_dim),
                                           slice_cols(ks, h * p.key_dim, p.key_dim),
                                           slice_cols(vs, h * p.key_dim, p.key_dim)));
    }
    rows.push_back(p.heads == 1 ? heads.front() : concat_cols(heads));
  }
  const auto concatenated = sequences == 1 ? rows.front() : concat_rows(rows);
  return matmul(concatenated, p.output);
}

template <typename Scalar>
Tensor<Scalar> multi_head_attention(const Tensor<Scalar>& x, const AttentionParams<Scalar>& p) {
  return multi_head_attention(x, p, x.rows());
}

// Post-norm block: Y = LN(X + MHA(X)); out = LN(Y + FFN(Y)).
template <typename Scalar>
Tensor<Scalar> encoder_block(const Tensor<Scalar>& x, const EncoderBlockParams<Scalar>& p,
                             Index seq_len) {
  const auto y = layer_norm(add(x, multi_head_attention(x, p.attention, seq_len)), p.norm1_gain,
                            p.norm1_bias);
  const auto ff = dense_forward(dense_forward(y, p.ff_in), p.ff_out);
  return layer_norm(add(y, ff), p.norm2_gain, p.norm2_bias);
}

template <typename Scalar>
Tensor<Scalar> encoder_block(const Tensor<Scalar>& x, const EncoderBlockParams<Scalar>& p) {
  return encoder_block(x, p, x.rows());
}

// Class probabilities for a batch of equal-length id sequences, using the
// first ([CLS]) position of the last block.
template <typename Scalar>
Tensor<Scalar> classify_batch(const std::vector<std::span<const std::int32_t>>& sequences,
                              const EncoderStack<Scalar>& stack, double cls_dropout = 0.0,
                              bool training = false, Rng* rng = nullptr) {
  if (sequences.empty()) throw std::invalid_argument("classify: empty batch");
  const Index n = static_cast<Index>(sequences.front().size());
  if (n < 1) throw ShapeError("classify: empty sequence");
  if (n > stack.position_embedding.rows()) {
    throw ShapeError("classify: sequence of " + std::to_string(n) +
                     " ids exceeds the positional table of " +
                     std::to_string(stack.position_embedding.rows()));
  }
  std::vector<std::int32_t> ids, positions, cls_rows;
  ids.reserve(sequences.size() * static_cast<std::size_t>(n));
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    if (static_cast<Index>(sequences[s].size()) != n) {
      throw ShapeError("classify: sequences in a batch must share one length");
    }
    ids.insert(ids.end(), sequences[s].begin(), sequences[s].end());
    for (Index i = 0; i < n; ++i) positions.push_back(static_cast<std::int32_t>(i));
    cls_rows.push_back(static_cast<std::int32_t>(s * static_cast<std::size_t>(n)));
  }
  auto x = add(gather_rows(stack.token_embedding, std::span<const std::int32_t>(ids)),
               gather_rows(stack.position_embedding, std::span<const std::int32_t>(positions)));
  for (const auto& block : stack.blocks) x = encoder_block(x, block, n);
  auto cls = gather_rows(x, std::span<const std::int32_t>(cls_rows));
  if (training && rng != nullptr) cls = dropout(cls, cls_dropout, true, *rng);
  return softmax(dense_forward(cls, stack.head), 1);
}

// Single sequence -> 1 x n_classes.
template <typename Scalar>
Tensor<Scalar> classify(std::span<const std::int32_t> ids, const EncoderStack<Scalar>& stack) {
  return classify_batch<Scalar>({ids}, stack);
}

template <typename Scalar>
class TransformerClassifier final : public Classifier<Scalar> {
 public:
  TransformerClassifier(ModelSpec spec, Rng& rng) : spec_(std::move(spec)) {
    spec_.validate();
    if (spec_.vocab_size < 4) throw std::invalid_argument("transformer: vocab_size must be set");
    stack_ = EncoderStack<Scalar>::init(spec_, rng);
  }

  Tensor<Scalar> forward(std::span<const EncodedArticle> batch, bool training,
                         Rng& rng) const override {
    std::vector<std::span<const std::int32_t>> seqs;
    seqs.reserve(batch.size());
    for (const auto& a : batch) {
      if (static_cast<int>(a.pair_ids.size()) != spec_.max_len) {
        throw ShapeError("article '" + a.id + "': expected " + std::to_string(spec_.max_len) +
                         " wordpiece ids, got " + std::to_string(a.pair_ids.size()));
      }
      seqs.emplace_back(a.pair_ids);
    }
    return classify_batch(seqs, stack_, spec_.dropout_merge, training, &rng);
  }

  std::vector<NamedTensor<Scalar>> parameters() const override {
    std::vector<NamedTensor<Scalar>> out{{"token_embedding", stack_.token_embedding},
                                         {"position_embedding", stack_.position_embedding}};
    for (std::size_t b = 0; b < stack_.blocks.size(); ++b) {
      const auto& blk = stack_.blocks[b];
      const std::string p = "block" + std::to_string(b) + ".";
      out.push_back({p + "attention.query", blk.attention.query});
      out.push_back({p + "attention.key", blk.attention.key});
      out.push_back({p + "attention.value", blk.attention.value});
      out.push_back({p + "attention.output", blk.attention.output});
      out.push_back({p + "norm1.gain", blk.norm1_gain});
      out.push_back({p + "norm1.bias", blk.norm1_bias});
      out.push_back({p + "norm2.gain", blk.norm2_gain});
      out.push_back({p + "norm2.bias", blk.norm2_bias});
      out.push_back({p + "ff_in.weight", blk.ff_in.weight});
      out.push_back({p + "ff_in.bias", blk.ff_in.bias});
      out.push_back({p + "ff_out.weight", blk.ff_out.weight});
      out.push_back({p + "ff_out.bias", blk.ff_out.bias});
    }
    out.push_back({"head.weight", stack_.head.weight});
    out.push_back({"head.bias", stack_.head.bias});
    return out;
  }

  const ModelSpec& spec() const override { return spec_; }
  const EncoderStack<Scalar>& stack() const { return stack_; }
  EncoderStack<Scalar>& stack() { return stack_; }

 private:
  ModelSpec spec_;
  EncoderStack<Scalar> stack_;
};

}  // namespace hoaxnet
