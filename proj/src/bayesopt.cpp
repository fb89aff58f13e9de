#include "hoaxnet/bayesopt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace hoaxnet {

namespace {

constexpr double kLengthScales[] = {0.05, 0.1, 0.15, 0.2, 0.3, 0.45, 0.7, 1.0, 1.5};
constexpr double kAmplitudes[] = {1.0, 2.0, 4.0};

double radical_inverse(std::uint64_t index, std::uint64_t base) {
  double result = 0.0;
  double f = 1.0 / static_cast<double>(base);
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= static_cast<double>(base);
  }
  return result;
}

std::vector<std::uint64_t> first_primes(std::size_t n) {
  std::vector<std::uint64_t> primes;
  for (std::uint64_t c = 2; primes.size() < n; ++c) {
    bool prime = true;
    for (auto p : primes) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(c);
  }
  return primes;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Search space

void SearchSpace::validate() const {
  if (dims.empty()) throw std::invalid_argument("search space: no dimensions");
  for (const auto& d : dims) {
    if (!(d.lower < d.upper)) {
      throw std::invalid_argument("search space: dimension '" + d.name + "' needs lower < upper");
    }
    if (d.kind == Dimension::Kind::integer &&
        (std::floor(d.lower) != d.lower || std::floor(d.upper) != d.upper)) {
      throw std::invalid_argument("search space: integer dimension '" + d.name +
                                  "' needs integer bounds");
    }
  }
}

Eigen::VectorXd SearchSpace::from_unit(const Eigen::VectorXd& u) const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(dims.size()));
  for (std::size_t i = 0; i < dims.size(); ++i) {
    const auto& d = dims[i];
    const double t = std::clamp(u(static_cast<Eigen::Index>(i)), 0.0, 1.0);
    double v = d.lower + t * (d.upper - d.lower);
    if (d.kind == Dimension::Kind::integer) v = std::clamp(std::round(v), d.lower, d.upper);
    x(static_cast<Eigen::Index>(i)) = v;
  }
  return x;
}

Eigen::VectorXd SearchSpace::to_unit(const Eigen::VectorXd& x) const {
  Eigen::VectorXd u(static_cast<Eigen::Index>(dims.size()));
  for (std::size_t i = 0; i < dims.size(); ++i) {
    const auto& d = dims[i];
    u(static_cast<Eigen::Index>(i)) = (x(static_cast<Eigen::Index>(i)) - d.lower) / (d.upper - d.lower);
  }
  return u;
}

// ---------------------------------------------------------------------------
// Gaussian process

double GpModel::kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  return amplitude2 * std::exp(-(a - b).squaredNorm() / (2.0 * length_scale * length_scale));
}

GpModel gp_fit_fixed(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double amplitude2,
                     double length_scale) {
  if (x.rows() < 1 || x.rows() != y.size()) {
    throw std::invalid_argument("gp_fit: need at least one observation with matching targets");
  }
  GpModel m;
  m.inputs = x;
  m.targets = y;
  m.amplitude2 = amplitude2;
  m.length_scale = length_scale;
  m.noise2 = kGpJitter;
  m.y_mean = y.mean();
  const double sd = std::sqrt((y.array() - m.y_mean).square().mean());
  m.y_scale = sd > 1e-12 ? sd : 1.0;
  const Eigen::VectorXd ys = (y.array() - m.y_mean) / m.y_scale;

  const Eigen::Index n = x.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      k(i, j) = k(j, i) = m.kernel(x.row(i).transpose(), x.row(j).transpose());
    }
  }
  k.diagonal().array() += m.noise2;
  m.chol.compute(k);
  if (m.chol.info() != Eigen::Success) {
    throw std::runtime_error("gp_fit: kernel matrix not positive definite");
  }
  m.alpha = m.chol.solve(ys);
  const Eigen::MatrixXd l = m.chol.matrixL();
  m.log_marginal_likelihood = -0.5 * ys.dot(m.alpha) - l.diagonal().array().log().sum() -
                              0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
  return m;
}

GpModel gp_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  GpModel best;
  bool have = false;
  for (double amp : kAmplitudes) {
    for (double ell : kLengthScales) {
      GpModel m;
      try {
        m = gp_fit_fixed(x, y, amp, ell);
      } catch (const std::runtime_error&) {
        continue;
      }
      if (!have || m.log_marginal_likelihood > best.log_marginal_likelihood) {
        best = std::move(m);
        have = true;
      }
    }
  }
  if (!have) throw std::runtime_error("gp_fit: no kernel setting gave a positive definite matrix");
  return best;
}

GpPrediction gp_predict(const GpModel& m, const Eigen::VectorXd& x) {
  const Eigen::Index n = m.inputs.rows();
  Eigen::VectorXd ks(n);
  for (Eigen::Index i = 0; i < n; ++i) ks(i) = m.kernel(m.inputs.row(i).transpose(), x);
  const double mean = ks.dot(m.alpha);
  const Eigen::VectorXd v = m.chol.matrixL().solve(ks);
  const double var = std::max(0.0, m.amplitude2 - v.squaredNorm());
  return {m.y_mean + m.y_scale * mean, m.y_scale * std::sqrt(var)};
}

// ---------------------------------------------------------------------------
// Acquisition

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double expected_improvement(double mu, double sigma, double f_best) {
  if (sigma < 0.0) throw std::invalid_argument("expected_improvement: negative sigma");
  if (sigma == 0.0) return 0.0;
  const double delta = mu - f_best;
  const double z = delta / sigma;
  return std::max(0.0, delta * normal_cdf(z) + sigma * normal_pdf(z));
}

Proposal propose_next(const GpModel& model, const SearchSpace& space, Rng& rng,
                      const ProposalOptions& options) {
  space.validate();
  const Eigen::Index d = static_cast<Eigen::Index>(space.size());
  if (model.inputs.cols() != d) throw std::invalid_argument("propose_next: model/space dimension mismatch");
  Eigen::Index best_obs = 0;
  const double f_best = model.targets.maxCoeff(&best_obs);

  struct Candidate {
    Eigen::VectorXd u;
    double ei, sd;
  };
  std::vector<Candidate> candidates;
  auto score = [&](const Eigen::VectorXd& u) {
    const auto p = gp_predict(model, u);
    return Candidate{u, expected_improvement(p.mean, p.stddev, f_best), p.stddev};
  };

  const auto primes = first_primes(space.size());
  Eigen::VectorXd shift(d);
  for (Eigen::Index j = 0; j < d; ++j) shift(j) = rng.uniform();
  for (int i = 0; i < options.quasi_random_samples; ++i) {
    Eigen::VectorXd u(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      const double h = radical_inverse(static_cast<std::uint64_t>(i + 1), primes[static_cast<std::size_t>(j)]);
      u(j) = std::fmod(h + shift(j), 1.0);
    }
    candidates.push_back(score(u));
  }
  const Eigen::VectorXd center = model.inputs.row(best_obs).transpose();
  for (int i = 0; i < options.neighborhood_samples; ++i) {
    Eigen::VectorXd u(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      u(j) = std::clamp(center(j) + options.neighborhood_radius * rng.normal(), 0.0, 1.0);
    }
    candidates.push_back(score(u));
  }

  auto better = [](const Candidate& a, const Candidate& b) {
    if (a.ei != b.ei) return a.ei > b.ei;
    return a.sd > b.sd;
  };

  // Compass-search refinement from the best few samples.
  std::vector<std::size_t> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return better(candidates[a], candidates[b]); });
  const std::size_t starts = std::min<std::size_t>(static_cast<std::size_t>(options.refine_starts), order.size());
  for (std::size_t s = 0; s < starts; ++s) {
    Candidate cur = candidates[order[s]];
    if (cur.ei <= 0.0) continue;
    double step = 0.05;
    for (int iter = 0; iter < 4000 && step > 1e-8; ++iter) {
      bool moved = false;
      for (Eigen::Index j = 0; j < d && !moved; ++j) {
        for (double dir : {1.0, -1.0}) {
          Eigen::VectorXd u = cur.u;
          u(j) = std::clamp(u(j) + dir * step, 0.0, 1.0);
          if (u(j) == cur.u(j)) continue;
          const Candidate c = score(u);
          if (c.ei > cur.ei) {
            cur = c;
            moved = true;
            break;
          }
        }
      }
      if (!moved) step *= 0.5;
    }
    candidates.push_back(cur);
  }

  std::size_t pick = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (better(candidates[i], candidates[pick])) pick = i;
  }
  Proposal p;
  p.unit_point = candidates[pick].u;
  p.point = space.from_unit(p.unit_point);
  p.ei = candidates[pick].ei;
  p.stddev = candidates[pick].sd;
  return p;
}

// ---------------------------------------------------------------------------
// Driver

namespace {

void record(TuneResult& result, const Objective& objective, Eigen::VectorXd point) {
  double value = std::numeric_limits<double>::quiet_NaN();
  try {
    value = objective(point);
  } catch (const std::exception&) {
  }
  Evaluation e;
  e.point = std::move(point);
  if (std::isfinite(value)) {
    e.objective = value;
  } else {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& h : result.history) {
      if (!h.failed) worst = std::min(worst, h.objective);
    }
    e.objective = std::isfinite(worst) ? worst : 0.0;
    e.failed = true;
  }
  const bool first_success = !e.failed && std::none_of(result.history.begin(), result.history.end(),
                                                       [](const Evaluation& h) { return !h.failed; });
  if (result.history.empty() || first_success || (!e.failed && e.objective > result.best_objective)) {
    result.best_objective = e.objective;
    result.best_point = e.point;
  }
  result.history.push_back(std::move(e));
}

}  // namespace

TuneResult tune(const Objective& objective, const SearchSpace& space, int n_init, int budget,
                std::uint64_t seed) {
  space.validate();
  if (n_init < 1) throw std::invalid_argument("tune: n_init must be at least 1");
  if (budget < n_init) throw std::invalid_argument("tune: budget must be at least n_init");
  Rng rng(seed);
  const Eigen::Index d = static_cast<Eigen::Index>(space.size());
  TuneResult result;
  for (int i = 0; i < n_init; ++i) {
    Eigen::VectorXd u(d);
    for (Eigen::Index j = 0; j < d; ++j) u(j) = rng.uniform();
    record(result, objective, space.from_unit(u));
  }
  while (static_cast<int>(result.history.size()) < budget) {
    const Eigen::Index n = static_cast<Eigen::Index>(result.history.size());
    Eigen::MatrixXd x(n, d);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      x.row(i) = space.to_unit(result.history[static_cast<std::size_t>(i)].point).transpose();
      y(i) = result.history[static_cast<std::size_t>(i)].objective;
    }
    const auto model = gp_fit(x, y);
    const auto proposal = propose_next(model, space, rng);
    record(result, objective, proposal.point);
  }
  return result;
}

TuneResult random_search(const Objective& objective, const SearchSpace& space, int budget,
                         std::uint64_t seed) {
  return tune(objective, space, budget, budget, seed);
}

std::string history_csv(const TuneResult& result, const SearchSpace& space) {
  std::ostringstream out;
  out << "iter";
  for (const auto& d : space.dims) out << ',' << d.name;
  out << ",objective\n";
  for (std::size_t i = 0; i < result.history.size(); ++i) {
    const auto& h = result.history[i];
    out << (i + 1);
    for (Eigen::Index j = 0; j < h.point.size(); ++j) out << ',' << fmt(h.point(j));
    out << ',' << fmt(h.objective) << '\n';
  }
  return out.str();
}

}  // namespace hoaxnet
