#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "hoaxnet/numerics.hpp"
#include "hoaxnet/rng.hpp"

namespace testing {

using hoaxnet::Index;
using hoaxnet::Matrix;
using hoaxnet::Rng;
using Tensor = hoaxnet::Tensor<double>;

inline Matrix<double> random_matrix(Index rows, Index cols, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Matrix<double> m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
  return m;
}

inline Tensor random_param(Index rows, Index cols, Rng& rng) {
  return Tensor::parameter(random_matrix(rows, cols, rng));
}

// sum(out * R) for a fixed random R: every output entry contributes with a
// distinct weight.
inline Tensor weighted_sum(const Tensor& out, const Matrix<double>& r) {
  return hoaxnet::sum(hoaxnet::mul(out, Tensor::constant(r)));
}

// Largest norm-wise relative error ||a - n|| / (||a|| + ||n||) between the
// reverse-mode gradient and central differences, over all tensors in `wrt`.
inline double gradient_error(const std::function<Tensor()>& loss, const std::vector<Tensor>& wrt,
                             double step = 1e-5) {
  for (const auto& t : wrt) t.zero_grad();
  hoaxnet::backward(loss());
  double worst = 0.0;
  for (const auto& t : wrt) {
    const Matrix<double> analytic = t.grad();
    Matrix<double> numeric(analytic.rows(), analytic.cols());
    auto& w = t.mutable_value();
    for (Index i = 0; i < w.size(); ++i) {
      const double orig = w.data()[i];
      w.data()[i] = orig + step;
      const double up = loss().item();
      w.data()[i] = orig - step;
      const double down = loss().item();
      w.data()[i] = orig;
      numeric.data()[i] = (up - down) / (2.0 * step);
    }
    const double denom = analytic.norm() + numeric.norm();
    if (denom > 1e-12) worst = std::max(worst, (analytic - numeric).norm() / denom);
  }
  return worst;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("hoaxnet-" + tag + "-" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
