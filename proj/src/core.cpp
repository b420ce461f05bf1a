#include "cts/core.hpp"

#include <algorithm>
#include <cmath>

namespace cts {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ContractError(what);
}

void require_finite(std::span<const double> p, const std::string& what) {
  for (double x : p) {
    if (!std::isfinite(x)) throw ContractError(what + ": non-finite value");
  }
}

}  // namespace

ParameterSpace::ParameterSpace(Vec lo, Vec hi)
    : lower(std::move(lo)), upper(std::move(hi)) {
  require(!lower.empty(), "ParameterSpace: needs at least one dimension");
  require(lower.size() == upper.size(),
          "ParameterSpace: lower/upper dimension mismatch");
  require_finite(lower, "ParameterSpace lower");
  require_finite(upper, "ParameterSpace upper");
  for (std::size_t i = 0; i < lower.size(); ++i) {
    require(lower[i] <= upper[i], "ParameterSpace: lower > upper on axis " +
                                      std::to_string(i));
  }
}

bool ParameterSpace::contains(std::span<const double> p) const {
  if (p.size() != dims()) return false;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] >= lower[i] && p[i] <= upper[i])) return false;
  }
  return true;
}

ParameterSpace ParameterSpace::unit(std::size_t dims) {
  return ParameterSpace(Vec(dims, 0.0), Vec(dims, 1.0));
}

Vec normalize(std::span<const double> p, const ParameterSpace& space) {
  require(p.size() == space.dims(), "normalize: dimension mismatch");
  Vec u(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double range = space.upper[i] - space.lower[i];
    u[i] = range > 0.0 ? (p[i] - space.lower[i]) / range : 0.0;
  }
  return u;
}

Vec denormalize(std::span<const double> u, const ParameterSpace& space) {
  require(u.size() == space.dims(), "denormalize: dimension mismatch");
  Vec p(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    require(u[i] >= 0.0 && u[i] <= 1.0,
            "denormalize: component " + std::to_string(i) + " outside [0, 1]");
    p[i] = space.lower[i] + u[i] * (space.upper[i] - space.lower[i]);
  }
  return p;
}

Vec clip_to_space(std::span<const double> p, const ParameterSpace& space) {
  require(p.size() == space.dims(), "clip_to_space: dimension mismatch");
  Vec q(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    q[i] = std::clamp(p[i], space.lower[i], space.upper[i]);
  }
  return q;
}

void RunConfig::validate() const {
  if (budget == 0) throw ContractError("RunConfig: budget must be positive");
  if (tasks_per_param != 1) {
    throw ContractError("RunConfig: tasks_per_param is fixed to 1");
  }
  if (param_weight != 1.0) {
    throw ContractError("RunConfig: param_weight is fixed to 1");
  }
}

History::History(std::size_t dims) : dims_(dims) {
  if (dims == 0) throw ContractError("History: dims must be positive");
}

void History::append(std::span<const double> p, double reward) {
  if (p.size() != dims_) throw ContractError("History::append: dimension mismatch");
  params_.insert(params_.end(), p.begin(), p.end());
  rewards_.push_back(reward);
}

std::span<const double> History::param(std::size_t episode) const {
  if (episode >= size()) throw ContractError("History::param: episode out of range");
  return {params_.data() + episode * dims_, dims_};
}

double History::reward(std::size_t episode) const {
  if (episode >= size()) throw ContractError("History::reward: episode out of range");
  return rewards_[episode];
}

SampleRecord History::record(std::size_t episode) const {
  auto p = param(episode);
  return SampleRecord{Vec(p.begin(), p.end()), rewards_[episode], episode};
}

Teacher::Teacher(ParameterSpace space)
    : space_(std::move(space)), history_(space_.dims()) {}

Vec Teacher::propose() {
  if (awaiting_result_) {
    throw ContractError("Teacher::propose: previous proposal still awaits observe()");
  }
  Vec u = do_propose();
  if (u.size() != space_.dims()) {
    throw ContractError("Teacher::propose: strategy returned wrong dimension");
  }
  // Strategies work in [0, 1]^d; map onto the task space and clamp away
  // any floating-point spill.
  for (double& x : u) x = std::clamp(x, 0.0, 1.0);
  awaiting_result_ = true;
  return denormalize(u, space_);
}

void Teacher::observe(std::span<const double> p, double reward) {
  if (!awaiting_result_) {
    throw ContractError("Teacher::observe: no outstanding proposal");
  }
  if (p.size() != space_.dims()) {
    throw ContractError("Teacher::observe: dimension mismatch");
  }
  if (!std::isfinite(reward)) {
    throw ContractError("Teacher::observe: reward must be finite");
  }
  require_finite(p, "Teacher::observe param");
  history_.append(p, reward);
  awaiting_result_ = false;
  Vec u = normalize(p, space_);
  for (double& x : u) x = std::clamp(x, 0.0, 1.0);
  do_observe(u, reward);
}

}  // namespace cts
