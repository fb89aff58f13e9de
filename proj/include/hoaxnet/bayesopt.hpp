#pragma once

// Gaussian-process Bayesian optimization with Expected Improvement, for
// maximizing a black-box objective over a box of continuous and integer
// dimensions. Everything works in the unit cube internally.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hoaxnet/rng.hpp"

namespace hoaxnet {

struct Dimension {
  enum class Kind { continuous, integer };
  std::string name;
  Kind kind = Kind::continuous;
  double lower = 0.0;
  double upper = 1.0;
};

struct SearchSpace {
  std::vector<Dimension> dims;

  void validate() const;
  std::size_t size() const { return dims.size(); }
  // Unit cube -> native coordinates, integer dimensions rounded.
  Eigen::VectorXd from_unit(const Eigen::VectorXd& u) const;
  Eigen::VectorXd to_unit(const Eigen::VectorXd& x) const;
};

struct GpModel {
  Eigen::MatrixXd inputs;   // n x d, unit cube
  Eigen::VectorXd targets;  // raw objective values
  double y_mean = 0.0;
  double y_scale = 1.0;
  double amplitude2 = 1.0;    // sigma_f^2, standardized units
  double length_scale = 0.2;
  double noise2 = 1e-6;       // sigma_n^2
  double log_marginal_likelihood = 0.0;
  Eigen::LLT<Eigen::MatrixXd> chol;
  Eigen::VectorXd alpha;  // (K + noise I)^-1 standardized y

  std::size_t size() const { return static_cast<std::size_t>(targets.size()); }
  double kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
};

inline constexpr double kGpJitter = 1e-6;

// Squared-exponential kernel; amplitude and length-scale chosen on a grid
// by log marginal likelihood.
GpModel gp_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);
// Same with the kernel hyperparameters fixed.
GpModel gp_fit_fixed(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double amplitude2,
                     double length_scale);

struct GpPrediction {
  double mean = 0.0;
  double stddev = 0.0;  // latent-function posterior, original y scale
};

GpPrediction gp_predict(const GpModel& model, const Eigen::VectorXd& x);

double normal_pdf(double z);
double normal_cdf(double z);

// Maximization form: (mu - f_best) Phi(Z) + sigma phi(Z), Z = (mu - f_best) / sigma;
// 0 when sigma == 0.
double expected_improvement(double mu, double sigma, double f_best);

struct Proposal {
  Eigen::VectorXd unit_point;
  Eigen::VectorXd point;  // native coordinates, integers rounded
  double ei = 0.0;
  double stddev = 0.0;
};

struct ProposalOptions {
  int quasi_random_samples = 1024;
  int neighborhood_samples = 64;
  double neighborhood_radius = 0.05;
  int refine_starts = 4;
};

Proposal propose_next(const GpModel& model, const SearchSpace& space, Rng& rng,
                      const ProposalOptions& options = {});

struct Evaluation {
  Eigen::VectorXd point;  // native coordinates
  double objective = 0.0;
  bool failed = false;
};

struct TuneResult {
  Eigen::VectorXd best_point;
  double best_objective = 0.0;
  std::vector<Evaluation> history;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

// n_init seeded uniform evaluations, then fit / propose / evaluate until the
// budget is spent. Non-finite (or throwing) evaluations are recorded as the
// worst value seen so far.
TuneResult tune(const Objective& objective, const SearchSpace& space, int n_init, int budget,
                std::uint64_t seed);

// tune() with every evaluation drawn uniformly at random.
TuneResult random_search(const Objective& objective, const SearchSpace& space, int budget,
                         std::uint64_t seed);

// "iter,<dims...>,objective" with a header row.
std::string history_csv(const TuneResult& result, const SearchSpace& space);

}  // namespace hoaxnet
