#include "cts/gmm.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace cts {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2*pi)

struct Workspace {
  std::vector<Eigen::LLT<Eigen::MatrixXd>> llts;
  Eigen::MatrixXd log_prob;  // n x k
  Eigen::VectorXd log_norm;  // n, log-sum-exp over components
};

// Per-point log joint densities log(w_j) + log N(x_i | mu_j, sigma_j) and
// the total log-likelihood. Throws FitError on a non-PD covariance.
double log_densities(const Eigen::MatrixXd& data,
                     const std::vector<GaussianComponent>& comps,
                     Workspace& ws) {
  const auto n = data.rows();
  const auto d = data.cols();
  const auto k = static_cast<Eigen::Index>(comps.size());
  ws.log_prob.resize(n, k);
  ws.llts.resize(static_cast<std::size_t>(k));

  for (Eigen::Index j = 0; j < k; ++j) {
    const GaussianComponent& c = comps[static_cast<std::size_t>(j)];
    auto& llt = ws.llts[static_cast<std::size_t>(j)];
    llt.compute(c.covariance);
    if (llt.info() != Eigen::Success) {
      throw FitError("em_fit: covariance is not positive definite");
    }
    const double half_log_det =
        llt.matrixLLT().diagonal().array().log().sum();
    // Solve L y = (x - mu)^T for all points at once.
    Eigen::MatrixXd centered = (data.rowwise() - c.mean.transpose()).transpose();
    llt.matrixL().solveInPlace(centered);
    ws.log_prob.col(j) =
        (-0.5 * (centered.colwise().squaredNorm().array() +
                 static_cast<double>(d) * kLog2Pi) -
         half_log_det + std::log(c.weight))
            .matrix()
            .transpose();
  }

  // log-sum-exp across components, guarded against empty exponents
  ws.log_norm = ws.log_prob.rowwise().maxCoeff();
  Eigen::VectorXd lse =
      ((ws.log_prob.colwise() - ws.log_norm).array().exp().rowwise().sum())
          .log()
          .matrix() +
      ws.log_norm;
  ws.log_norm = lse;
  const double ll = lse.sum();
  if (!std::isfinite(ll)) throw FitError("em_fit: log-likelihood diverged");
  return ll;
}

std::vector<Eigen::Index> farthest_point_indices(const Eigen::MatrixXd& data,
                                                 int k, Rng& rng) {
  const auto n = data.rows();
  std::vector<Eigen::Index> picked;
  picked.reserve(static_cast<std::size_t>(k));
  picked.push_back(
      static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::size_t>(n))));

  Eigen::VectorXd min_d2 =
      (data.rowwise() - data.row(picked[0])).rowwise().squaredNorm();
  while (picked.size() < static_cast<std::size_t>(k)) {
    Eigen::Index next = 0;
    min_d2.maxCoeff(&next);  // first maximal index; deterministic
    picked.push_back(next);
    min_d2 = min_d2.cwiseMin(
        (data.rowwise() - data.row(next)).rowwise().squaredNorm());
  }
  return picked;
}

std::vector<GaussianComponent> initial_components(const Eigen::MatrixXd& data,
                                                  int k, double cov_floor,
                                                  Rng& rng) {
  const auto d = data.cols();
  const auto n = data.rows();

  Eigen::RowVectorXd mean = data.colwise().mean();
  Eigen::MatrixXd centered = data.rowwise() - mean;
  Eigen::MatrixXd data_cov =
      (centered.transpose() * centered) / static_cast<double>(n);
  data_cov.diagonal().array() += cov_floor;

  std::vector<GaussianComponent> comps(static_cast<std::size_t>(k));
  const auto seeds = farthest_point_indices(data, k, rng);
  for (int j = 0; j < k; ++j) {
    comps[static_cast<std::size_t>(j)].weight = 1.0 / static_cast<double>(k);
    comps[static_cast<std::size_t>(j)].mean =
        data.row(seeds[static_cast<std::size_t>(j)]).transpose();
    comps[static_cast<std::size_t>(j)].covariance = data_cov;
  }
  return comps;
}

GmmModel em_fit_once(const Eigen::MatrixXd& data, int k, const EmConfig& cfg,
                     Rng& rng) {
  const auto n = data.rows();
  const auto d = data.cols();

  GmmModel model;
  model.components = initial_components(data, k, cfg.cov_floor, rng);
  model.n_points = static_cast<int>(n);
  model.fit_dim = static_cast<int>(d);

  Workspace ws;
  double ll_prev = -std::numeric_limits<double>::infinity();
  for (int iter = 0;; ++iter) {
    const double ll = log_densities(data, model.components, ws);
    model.ll_trace.push_back(ll);
    model.log_likelihood = ll;

    if (iter > 0) {
      const double gain = ll - ll_prev;
      const double rel = gain / std::max(std::abs(ll_prev), 1e-300);
      if (rel < cfg.rel_tol) break;
    }
    if (iter == cfg.max_iters) break;
    ll_prev = ll;

    // M-step: responsibilities from the stored log densities, then moment
    // updates with the covariance floor re-applied.
    Eigen::MatrixXd resp =
        (ws.log_prob.colwise() - ws.log_norm).array().exp().matrix();
    Eigen::VectorXd nk = resp.colwise().sum();
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(model.components.size()); ++j) {
      if (!(nk[j] > 1e-9)) {
        throw FitError("em_fit: component " + std::to_string(j) + " collapsed");
      }
      GaussianComponent& c = model.components[static_cast<std::size_t>(j)];
      c.weight = nk[j] / static_cast<double>(n);
      c.mean = (resp.col(j).transpose() * data).transpose() / nk[j];
      Eigen::MatrixXd centered = data.rowwise() - c.mean.transpose();
      c.covariance = (centered.transpose() *
                      resp.col(j).asDiagonal() * centered) /
                     nk[j];
      c.covariance.diagonal().array() += cfg.cov_floor;
    }
  }
  return model;
}

}  // namespace

GmmModel em_fit(const Eigen::MatrixXd& data, int k, const EmConfig& cfg,
                Rng& rng) {
  if (k < 1) throw FitError("em_fit: k must be positive");
  if (data.rows() < k) throw FitError("em_fit: fewer points than components");
  if (data.cols() < 1) throw FitError("em_fit: data has no columns");
  if (cfg.max_iters < 1 || cfg.n_init < 1 || !(cfg.cov_floor > 0.0)) {
    throw FitError("em_fit: invalid EmConfig");
  }
  if (!data.allFinite()) throw FitError("em_fit: data has non-finite values");

  GmmModel best;
  bool have_best = false;
  std::string last_error;
  for (int r = 0; r < cfg.n_init; ++r) {
    try {
      GmmModel m = em_fit_once(data, k, cfg, rng);
      if (!have_best || m.log_likelihood > best.log_likelihood) {
        best = std::move(m);
        have_best = true;
      }
    } catch (const FitError& e) {
      last_error = e.what();
    }
  }
  if (!have_best) throw FitError(last_error.empty() ? "em_fit: all restarts failed"
                                                    : last_error);
  return best;
}

double aic(const GmmModel& model) {
  const double d = model.fit_dim;
  const double k = model.k();
  const double n_params = k * (d + d * (d + 1) / 2.0) + (k - 1.0);
  return 2.0 * n_params - 2.0 * model.log_likelihood;
}

GmmModel select_best_gmm(const Eigen::MatrixXd& data, int k_min, int k_max,
                         const EmConfig& cfg, Rng& rng) {
  if (k_min < 1 || k_max < k_min) {
    throw FitError("select_best_gmm: invalid k range");
  }
  GmmModel best;
  double best_aic = std::numeric_limits<double>::infinity();
  bool have_best = false;
  std::string last_error = "select_best_gmm: no candidate fit";
  for (int k = k_min; k <= k_max; ++k) {
    if (data.rows() < k) continue;  // not enough points for this size
    try {
      GmmModel m = em_fit(data, k, cfg, rng);
      const double a = aic(m);
      if (a < best_aic) {  // strict: ties keep the smaller k fitted earlier
        best_aic = a;
        best = std::move(m);
        have_best = true;
      }
    } catch (const FitError& e) {
      last_error = e.what();
    }
  }
  if (!have_best) throw FitError(last_error);
  return best;
}

Eigen::VectorXd sample_gaussian(const GaussianComponent& component, Rng& rng) {
  const auto d = component.mean.size();
  if (component.covariance.rows() != d || component.covariance.cols() != d) {
    throw FitError("sample_gaussian: mean/covariance shape mismatch");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(component.covariance);
  if (llt.info() != Eigen::Success) {
    throw FitError("sample_gaussian: covariance is not positive definite");
  }
  Eigen::VectorXd z(d);
  for (Eigen::Index i = 0; i < d; ++i) z[i] = rng.normal();
  return component.mean + llt.matrixL() * z;
}

}  // namespace cts
