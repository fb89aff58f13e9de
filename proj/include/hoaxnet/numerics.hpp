#pragma once

// Dense row-major tensors with a reverse-mode gradient tape.
//
// A Tensor is a shared handle onto a graph node. Operations on tensors that
// require gradients record their parents and a backward closure; calling
// backward() on a scalar walks the recorded graph in reverse topological
// order and accumulates partial derivatives into every node that requires
// them. Every tensor is stored as a 2-D row-major Eigen matrix: vectors are
// 1xN rows and scalars are 1x1.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace hoaxnet {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline std::string shape_string(Index rows, Index cols) {
  return "[" + std::to_string(rows) + "x" + std::to_string(cols) + "]";
}

enum class Activation { identity, sigmoid, tanh, relu };

namespace detail {

template <typename Scalar>
struct Node {
  Matrix<Scalar> value;
  Matrix<Scalar> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  void ensure_grad() {
    if (grad.size() == 0) grad = Matrix<Scalar>::Zero(value.rows(), value.cols());
  }

  template <typename Derived>
  void add_grad(const Eigen::MatrixBase<Derived>& g) {
    if (!requires_grad) return;
    if (grad.size() == 0) {
      grad = g;
    } else {
      grad += g;
    }
  }

  Node& parent(std::size_t i) { return *parents[i]; }
};

}  // namespace detail

template <typename Scalar>
class Tensor {
 public:
  using MatrixType = Matrix<Scalar>;
  using NodeType = detail::Node<Scalar>;
  using BackwardFn = std::function<void(NodeType&)>;

  Tensor() = default;

  static Tensor constant(MatrixType value) { return make(std::move(value), false); }
  static Tensor parameter(MatrixType value) { return make(std::move(value), true); }

  static Tensor scalar(Scalar v) {
    MatrixType m(1, 1);
    m(0, 0) = v;
    return constant(std::move(m));
  }

  // A row vector (1xN) from a list of values.
  static Tensor row(std::initializer_list<Scalar> values, bool requires_grad = false) {
    MatrixType m(1, static_cast<Index>(values.size()));
    Index i = 0;
    for (Scalar v : values) m(0, i++) = v;
    return make(std::move(m), requires_grad);
  }

  // Result of an operation. Parents and the closure are kept only when some
  // parent requires a gradient.
  static Tensor from_op(MatrixType value, std::initializer_list<Tensor> parents, BackwardFn fn) {
    return from_op(std::move(value), std::vector<Tensor>(parents), std::move(fn));
  }

  static Tensor from_op(MatrixType value, const std::vector<Tensor>& parents, BackwardFn fn) {
    Tensor out = make(std::move(value), false);
    bool any = false;
    for (const auto& p : parents) any = any || p.requires_grad();
    if (any) {
      out.node_->requires_grad = true;
      out.node_->parents.reserve(parents.size());
      for (const auto& p : parents) out.node_->parents.push_back(p.node_);
      out.node_->backward = std::move(fn);
    }
    return out;
  }

  bool defined() const { return static_cast<bool>(node_); }
  Index rows() const { return node_->value.rows(); }
  Index cols() const { return node_->value.cols(); }
  Index size() const { return node_->value.size(); }
  std::vector<Index> shape() const { return {rows(), cols()}; }
  std::string shape_str() const { return shape_string(rows(), cols()); }

  const MatrixType& value() const { return node_->value; }
  // Direct write access for optimizers and checkpoint loading.
  MatrixType& mutable_value() const { return node_->value; }
  Scalar item() const {
    if (size() != 1) throw ShapeError("item() on non-scalar tensor " + shape_str());
    return node_->value(0, 0);
  }

  bool requires_grad() const { return node_ && node_->requires_grad; }
  bool has_grad() const { return node_->grad.size() != 0; }
  // Zero-filled when nothing has been accumulated yet.
  const MatrixType& grad() const {
    node_->ensure_grad();
    return node_->grad;
  }
  void zero_grad() const { node_->grad.resize(0, 0); }

  // Detached copy holding the same values.
  Tensor detach() const { return constant(node_->value); }

  const std::shared_ptr<NodeType>& node() const { return node_; }

 private:
  static Tensor make(MatrixType value, bool requires_grad) {
    Tensor t;
    t.node_ = std::make_shared<NodeType>();
    t.node_->value = std::move(value);
    t.node_->requires_grad = requires_grad;
    return t;
  }

  std::shared_ptr<NodeType> node_;
};

// ---------------------------------------------------------------------------
// Backward pass.

template <typename Scalar>
void backward(const Tensor<Scalar>& loss) {
  if (loss.rows() != 1 || loss.cols() != 1) {
    throw ShapeError("backward() needs a scalar loss, got " + loss.shape_str());
  }
  using NodeType = detail::Node<Scalar>;
  NodeType* root = loss.node().get();
  if (!root->requires_grad) return;

  // Iterative post-order DFS; reversing it gives a topological order.
  std::vector<NodeType*> order;
  std::unordered_set<NodeType*> visited;
  std::vector<std::pair<NodeType*, std::size_t>> stack;
  stack.emplace_back(root, 0);
  visited.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      NodeType* p = node->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root->ensure_grad();
  root->grad(0, 0) += Scalar(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    NodeType* node = *it;
    if (node->backward && node->grad.size() != 0) node->backward(*node);
  }
}

// ---------------------------------------------------------------------------
// Linear algebra.

template <typename Scalar>
Tensor<Scalar> matmul(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner extents differ, " + a.shape_str() + " x " + b.shape_str());
  }
  return Tensor<Scalar>::from_op(a.value() * b.value(), {a, b}, [](auto& self) {
    auto& pa = self.parent(0);
    auto& pb = self.parent(1);
    if (pa.requires_grad) pa.add_grad(self.grad * pb.value.transpose());
    if (pb.requires_grad) pb.add_grad(pa.value.transpose() * self.grad);
  });
}

// a * b^T without materializing the transpose.
template <typename Scalar>
Tensor<Scalar> matmul_transposed(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul_transposed: inner extents differ, " + a.shape_str() + " x " +
                     b.shape_str() + "^T");
  }
  return Tensor<Scalar>::from_op(a.value() * b.value().transpose(), {a, b}, [](auto& self) {
    auto& pa = self.parent(0);
    auto& pb = self.parent(1);
    if (pa.requires_grad) pa.add_grad(self.grad * pb.value);
    if (pb.requires_grad) pb.add_grad(self.grad.transpose() * pa.value);
  });
}

template <typename Scalar>
Tensor<Scalar> transpose(const Tensor<Scalar>& a) {
  return Tensor<Scalar>::from_op(a.value().transpose(), {a}, [](auto& self) {
    self.parent(0).add_grad(self.grad.transpose());
  });
}

// ---------------------------------------------------------------------------
// Elementwise arithmetic.

namespace detail {
template <typename Scalar>
void require_same_shape(const char* op, const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shapes differ, " + a.shape_str() + " vs " + b.shape_str());
  }
}
}  // namespace detail

template <typename Scalar>
Tensor<Scalar> add(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  detail::require_same_shape("add", a, b);
  return Tensor<Scalar>::from_op(a.value() + b.value(), {a, b}, [](auto& self) {
    self.parent(0).add_grad(self.grad);
    self.parent(1).add_grad(self.grad);
  });
}

template <typename Scalar>
Tensor<Scalar> sub(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  detail::require_same_shape("sub", a, b);
  return Tensor<Scalar>::from_op(a.value() - b.value(), {a, b}, [](auto& self) {
    self.parent(0).add_grad(self.grad);
    self.parent(1).add_grad(-self.grad);
  });
}

// Hadamard product.
template <typename Scalar>
Tensor<Scalar> mul(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  detail::require_same_shape("mul", a, b);
  return Tensor<Scalar>::from_op(a.value().cwiseProduct(b.value()), {a, b}, [](auto& self) {
    auto& pa = self.parent(0);
    auto& pb = self.parent(1);
    if (pa.requires_grad) pa.add_grad(self.grad.cwiseProduct(pb.value));
    if (pb.requires_grad) pb.add_grad(self.grad.cwiseProduct(pa.value));
  });
}

template <typename Scalar>
Tensor<Scalar> scale(const Tensor<Scalar>& a, Scalar factor) {
  return Tensor<Scalar>::from_op(a.value() * factor, {a}, [factor](auto& self) {
    self.parent(0).add_grad(self.grad * factor);
  });
}

// Adds a 1xN row to every row of an MxN tensor.
template <typename Scalar>
Tensor<Scalar> add_row(const Tensor<Scalar>& a, const Tensor<Scalar>& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw ShapeError("add_row: cannot broadcast " + row.shape_str() + " onto " + a.shape_str());
  }
  Matrix<Scalar> out = a.value().rowwise() + row.value().row(0);
  return Tensor<Scalar>::from_op(std::move(out), {a, row}, [](auto& self) {
    self.parent(0).add_grad(self.grad);
    auto& pr = self.parent(1);
    if (pr.requires_grad) pr.add_grad(self.grad.colwise().sum());
  });
}

inline const char* activation_name(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    case Activation::relu: return "relu";
  }
  return "?";
}

template <typename Scalar>
Tensor<Scalar> elementwise(const Tensor<Scalar>& x, Activation fn) {
  Matrix<Scalar> y;
  switch (fn) {
    case Activation::identity:
      return x;
    case Activation::sigmoid:
      y = x.value().unaryExpr([](Scalar v) { return Scalar(1) / (Scalar(1) + std::exp(-v)); });
      break;
    case Activation::tanh:
      y = x.value().array().tanh().matrix();
      break;
    case Activation::relu:
      y = x.value().cwiseMax(Scalar(0));
      break;
  }
  return Tensor<Scalar>::from_op(std::move(y), {x}, [fn](auto& self) {
    const auto& out = self.value.array();
    const auto& g = self.grad.array();
    Matrix<Scalar> dx;
    switch (fn) {
      case Activation::sigmoid: dx = (g * out * (Scalar(1) - out)).matrix(); break;
      case Activation::tanh: dx = (g * (Scalar(1) - out.square())).matrix(); break;
      case Activation::relu: dx = (out > Scalar(0)).select(g, Scalar(0)).matrix(); break;
      case Activation::identity: dx = self.grad; break;
    }
    self.parent(0).add_grad(dx);
  });
}

template <typename Scalar>
Tensor<Scalar> sigmoid(const Tensor<Scalar>& x) { return elementwise(x, Activation::sigmoid); }
template <typename Scalar>
Tensor<Scalar> tanh(const Tensor<Scalar>& x) { return elementwise(x, Activation::tanh); }
template <typename Scalar>
Tensor<Scalar> relu(const Tensor<Scalar>& x) { return elementwise(x, Activation::relu); }

// ---------------------------------------------------------------------------
// Normalizations.

// axis 1 (or -1) normalizes each row; axis 0 normalizes each column.
template <typename Scalar>
Tensor<Scalar> softmax(const Tensor<Scalar>& x, int axis = -1) {
  if (!x.value().allFinite()) throw std::domain_error("softmax: non-finite input");
  if (axis != 0 && axis != 1 && axis != -1) {
    throw std::invalid_argument("softmax: axis must be 0, 1 or -1");
  }
  const bool by_row = axis != 0;
  const auto xa = x.value().array();
  Matrix<Scalar> y;
  if (by_row) {
    y = (xa.colwise() - xa.rowwise().maxCoeff()).exp().matrix();
    y.array().colwise() /= y.array().rowwise().sum();
  } else {
    y = (xa.rowwise() - xa.colwise().maxCoeff()).exp().matrix();
    y.array().rowwise() /= y.array().colwise().sum();
  }
  return Tensor<Scalar>::from_op(std::move(y), {x}, [by_row](auto& self) {
    const Matrix<Scalar> gy = self.grad.cwiseProduct(self.value);
    Matrix<Scalar> dx;
    if (by_row) {
      dx = gy - (self.value.array().colwise() * gy.rowwise().sum().array()).matrix();
    } else {
      dx = gy - (self.value.array().rowwise() * gy.colwise().sum().array()).matrix();
    }
    self.parent(0).add_grad(dx);
  });
}

// Row-wise layer normalization with population variance.
template <typename Scalar>
Tensor<Scalar> layer_norm(const Tensor<Scalar>& x, const Tensor<Scalar>& gamma,
                          const Tensor<Scalar>& beta, Scalar eps = Scalar(1e-5)) {
  const Index d = x.cols();
  if (d < 1) throw ShapeError("layer_norm: empty rows");
  if (gamma.rows() != 1 || gamma.cols() != d || beta.rows() != 1 || beta.cols() != d) {
    throw ShapeError("layer_norm: gain/bias " + gamma.shape_str() + "/" + beta.shape_str() +
                     " do not match " + x.shape_str());
  }
  const auto& xv = x.value();
  Matrix<Scalar> normed(x.rows(), d);
  Eigen::Array<Scalar, Eigen::Dynamic, 1> inv_std(x.rows());
  for (Index r = 0; r < x.rows(); ++r) {
    const Scalar mean = xv.row(r).mean();
    const auto centered = xv.row(r).array() - mean;
    const Scalar var = centered.square().mean();
    inv_std(r) = Scalar(1) / std::sqrt(var + eps);
    normed.row(r) = centered * inv_std(r);
  }
  Matrix<Scalar> y =
      (normed.array().rowwise() * gamma.value().row(0).array()).rowwise() +
      beta.value().row(0).array();
  return Tensor<Scalar>::from_op(
      std::move(y), {x, gamma, beta},
      [normed = std::move(normed), inv_std = std::move(inv_std)](auto& self) {
        auto& px = self.parent(0);
        auto& pg = self.parent(1);
        auto& pb = self.parent(2);
        if (pg.requires_grad) pg.add_grad(self.grad.cwiseProduct(normed).colwise().sum());
        if (pb.requires_grad) pb.add_grad(self.grad.colwise().sum());
        if (px.requires_grad) {
          const Matrix<Scalar> gn = (self.grad.array().rowwise() * pg.value.row(0).array()).matrix();
          const auto mean_gn = gn.rowwise().mean().array();
          const auto mean_gn_n = gn.cwiseProduct(normed).rowwise().mean().array();
          Matrix<Scalar> dx =
              ((gn.array().colwise() - mean_gn) - normed.array().colwise() * mean_gn_n).matrix();
          dx.array().colwise() *= inv_std;
          px.add_grad(dx);
        }
      });
}

// ---------------------------------------------------------------------------
// Structural ops.

template <typename Scalar>
Tensor<Scalar> slice_rows(const Tensor<Scalar>& x, Index start, Index count) {
  if (start < 0 || count < 0 || start + count > x.rows()) {
    throw ShapeError("slice_rows: [" + std::to_string(start) + ", +" + std::to_string(count) +
                     ") out of " + x.shape_str());
  }
  return Tensor<Scalar>::from_op(x.value().middleRows(start, count), {x}, [start, count](auto& self) {
    auto& p = self.parent(0);
    p.ensure_grad();
    p.grad.middleRows(start, count) += self.grad;
  });
}

template <typename Scalar>
Tensor<Scalar> slice_cols(const Tensor<Scalar>& x, Index start, Index count) {
  if (start < 0 || count < 0 || start + count > x.cols()) {
    throw ShapeError("slice_cols: [" + std::to_string(start) + ", +" + std::to_string(count) +
                     ") out of " + x.shape_str());
  }
  return Tensor<Scalar>::from_op(x.value().middleCols(start, count), {x}, [start, count](auto& self) {
    auto& p = self.parent(0);
    p.ensure_grad();
    p.grad.middleCols(start, count) += self.grad;
  });
}

template <typename Scalar>
Tensor<Scalar> concat_cols(const std::vector<Tensor<Scalar>>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: nothing to concatenate");
  const Index rows = parts.front().rows();
  Index cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw ShapeError("concat_cols: row counts differ, " + p.shape_str());
    cols += p.cols();
  }
  Matrix<Scalar> out(rows, cols);
  Index at = 0;
  for (const auto& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  return Tensor<Scalar>::from_op(std::move(out), parts, [](auto& self) {
    Index offset = 0;
    for (auto& parent : self.parents) {
      const Index c = parent->value.cols();
      if (parent->requires_grad) parent->add_grad(self.grad.middleCols(offset, c));
      offset += c;
    }
  });
}

template <typename Scalar>
Tensor<Scalar> concat_rows(const std::vector<Tensor<Scalar>>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: nothing to concatenate");
  const Index cols = parts.front().cols();
  Index rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) throw ShapeError("concat_rows: column counts differ, " + p.shape_str());
    rows += p.rows();
  }
  Matrix<Scalar> out(rows, cols);
  Index at = 0;
  for (const auto& p : parts) {
    out.middleRows(at, p.rows()) = p.value();
    at += p.rows();
  }
  return Tensor<Scalar>::from_op(std::move(out), parts, [](auto& self) {
    Index offset = 0;
    for (auto& parent : self.parents) {
      const Index r = parent->value.rows();
      if (parent->requires_grad) parent->add_grad(self.grad.middleRows(offset, r));
      offset += r;
    }
  });
}

template <typename Scalar>
Tensor<Scalar> reshape(const Tensor<Scalar>& x, Index rows, Index cols) {
  if (rows * cols != x.size()) {
    throw ShapeError("reshape: " + x.shape_str() + " cannot become " + shape_string(rows, cols));
  }
  Matrix<Scalar> out = Eigen::Map<const Matrix<Scalar>>(x.value().data(), rows, cols);
  return Tensor<Scalar>::from_op(std::move(out), {x}, [](auto& self) {
    auto& p = self.parent(0);
    p.add_grad(Eigen::Map<const Matrix<Scalar>>(self.grad.data(), p.value.rows(), p.value.cols()));
  });
}

// Row lookup; when the table requires gradients they are scatter-added.
template <typename Scalar>
Tensor<Scalar> gather_rows(const Tensor<Scalar>& table, std::span<const std::int32_t> ids) {
  Matrix<Scalar> out(static_cast<Index>(ids.size()), table.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= table.rows()) {
      throw std::out_of_range("gather_rows: id " + std::to_string(ids[i]) + " outside table of " +
                              std::to_string(table.rows()) + " rows");
    }
    out.row(static_cast<Index>(i)) = table.value().row(ids[i]);
  }
  std::vector<std::int32_t> kept;
  if (table.requires_grad()) kept.assign(ids.begin(), ids.end());
  return Tensor<Scalar>::from_op(std::move(out), {table}, [kept = std::move(kept)](auto& self) {
    auto& p = self.parent(0);
    p.ensure_grad();
    for (std::size_t i = 0; i < kept.size(); ++i) {
      p.grad.row(kept[i]) += self.grad.row(static_cast<Index>(i));
    }
  });
}

// Sliding windows over the rows of each segment of `segment_rows` rows:
// output row j of a segment is the concatenation of input rows j..j+width-1.
template <typename Scalar>
Tensor<Scalar> unfold_rows(const Tensor<Scalar>& x, Index width, Index segment_rows) {
  if (width < 1 || segment_rows < 1 || x.rows() % segment_rows != 0) {
    throw ShapeError("unfold_rows: bad width/segment for " + x.shape_str());
  }
  if (segment_rows < width) {
    throw ShapeError("unfold_rows: sequence length " + std::to_string(segment_rows) +
                     " shorter than window " + std::to_string(width));
  }
  const Index segments = x.rows() / segment_rows;
  const Index per = segment_rows - width + 1;
  const Index c = x.cols();
  Matrix<Scalar> out(segments * per, width * c);
  for (Index s = 0; s < segments; ++s) {
    for (Index j = 0; j < per; ++j) {
      for (Index k = 0; k < width; ++k) {
        out.row(s * per + j).segment(k * c, c) = x.value().row(s * segment_rows + j + k);
      }
    }
  }
  return Tensor<Scalar>::from_op(std::move(out), {x}, [=](auto& self) {
    auto& p = self.parent(0);
    p.ensure_grad();
    for (Index s = 0; s < segments; ++s) {
      for (Index j = 0; j < per; ++j) {
        for (Index k = 0; k < width; ++k) {
          p.grad.row(s * segment_rows + j + k) += self.grad.row(s * per + j).segment(k * c, c);
        }
      }
    }
  });
}

// Column-wise max over consecutive blocks of `window` rows inside each segment.
// A trailing partial block is pooled on its own.
template <typename Scalar>
Tensor<Scalar> maxpool_rows(const Tensor<Scalar>& x, Index window, Index segment_rows) {
  if (window < 1 || segment_rows < 1 || x.rows() % segment_rows != 0) {
    throw ShapeError("maxpool_rows: bad window/segment for " + x.shape_str());
  }
  const Index segments = x.rows() / segment_rows;
  const Index blocks = (segment_rows + window - 1) / window;
  const Index c = x.cols();
  Matrix<Scalar> out(segments * blocks, c);
  std::vector<Index> argmax(static_cast<std::size_t>(segments * blocks * c));
  for (Index s = 0; s < segments; ++s) {
    for (Index b = 0; b < blocks; ++b) {
      const Index begin = s * segment_rows + b * window;
      const Index end = s * segment_rows + std::min(segment_rows, (b + 1) * window);
      for (Index col = 0; col < c; ++col) {
        Index best = begin;
        for (Index r = begin + 1; r < end; ++r) {
          if (x.value()(r, col) > x.value()(best, col)) best = r;
        }
        out(s * blocks + b, col) = x.value()(best, col);
        argmax[static_cast<std::size_t>((s * blocks + b) * c + col)] = best;
      }
    }
  }
  return Tensor<Scalar>::from_op(std::move(out), {x}, [argmax = std::move(argmax), c](auto& self) {
    auto& p = self.parent(0);
    p.ensure_grad();
    for (Index r = 0; r < self.grad.rows(); ++r) {
      for (Index col = 0; col < c; ++col) {
        p.grad(argmax[static_cast<std::size_t>(r * c + col)], col) += self.grad(r, col);
      }
    }
  });
}

// ---------------------------------------------------------------------------
// Reductions.

template <typename Scalar>
Tensor<Scalar> sum(const Tensor<Scalar>& x) {
  Matrix<Scalar> s(1, 1);
  s(0, 0) = x.value().sum();
  return Tensor<Scalar>::from_op(std::move(s), {x}, [](auto& self) {
    auto& p = self.parent(0);
    p.add_grad(Matrix<Scalar>::Constant(p.value.rows(), p.value.cols(), self.grad(0, 0)));
  });
}

template <typename Scalar>
Tensor<Scalar> mean(const Tensor<Scalar>& x) {
  return scale(sum(x), Scalar(1) / static_cast<Scalar>(x.size()));
}

}  // namespace hoaxnet
