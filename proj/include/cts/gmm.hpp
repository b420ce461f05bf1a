#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "cts/rng.hpp"

namespace cts {

// Thrown when a model fit cannot produce a usable result (component
// collapse, non-positive-definite covariance, no candidate converged).
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EmConfig {
  int max_iters = 100;
  double rel_tol = 1e-3;    // stop when relative log-likelihood gain drops below
  double cov_floor = 1e-6;  // added to every covariance diagonal each update
  int n_init = 1;           // independent restarts; best final likelihood wins
};

struct GaussianComponent {
  double weight = 0.0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

struct GmmModel {
  std::vector<GaussianComponent> components;
  double log_likelihood = 0.0;
  std::vector<double> ll_trace;  // likelihood after each EM iteration (winning restart)
  int n_points = 0;
  int fit_dim = 0;

  int k() const { return static_cast<int>(components.size()); }
};

// Expectation-maximization fit of a k-component full-covariance mixture.
// `data` holds one point per row. Initial means are picked farthest-point
// style from the data; initial covariances equal the data covariance.
GmmModel em_fit(const Eigen::MatrixXd& data, int k, const EmConfig& cfg, Rng& rng);

// Akaike information criterion of a fitted mixture (lower is better).
double aic(const GmmModel& model);

// Fits every candidate size in [k_min, k_max] and keeps the lowest-AIC
// model. Candidates larger than the data, and candidates whose fit fails,
// are skipped; AIC ties resolve toward fewer components. Throws FitError
// when no candidate produces a model.
GmmModel select_best_gmm(const Eigen::MatrixXd& data, int k_min, int k_max,
                         const EmConfig& cfg, Rng& rng);

// One draw from a single Gaussian component (ignores its weight).
Eigen::VectorXd sample_gaussian(const GaussianComponent& component, Rng& rng);

}  // namespace cts
