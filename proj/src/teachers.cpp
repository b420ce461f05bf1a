#include "cts/teachers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace cts {

namespace {

Vec uniform_unit(std::size_t d, Rng& rng) {
  Vec u(d);
  for (double& x : u) x = rng.uniform();
  return u;
}

}  // namespace

TeacherKind teacher_kind_from_string(const std::string& name) {
  std::string s;
  s.reserve(name.size());
  for (char c : name) s.push_back(c == '_' ? '-' : static_cast<char>(std::tolower(c)));
  if (s == "alp-gmm" || s == "alpgmm") return TeacherKind::AlpGmm;
  if (s == "covar-gmm" || s == "covargmm") return TeacherKind::CovarGmm;
  if (s == "riac") return TeacherKind::Riac;
  if (s == "oracle") return TeacherKind::Oracle;
  if (s == "random") return TeacherKind::Random;
  throw ContractError("unknown teacher '" + name + "'");
}

std::string to_string(TeacherKind kind) {
  switch (kind) {
    case TeacherKind::AlpGmm: return "alp-gmm";
    case TeacherKind::CovarGmm: return "covar-gmm";
    case TeacherKind::Riac: return "riac";
    case TeacherKind::Oracle: return "oracle";
    case TeacherKind::Random: return "random";
  }
  throw ContractError("unknown TeacherKind value");
}

void GmmTeacherConfig::validate() const {
  if (fit_rate < 2) throw ContractError("GmmTeacherConfig: fit_rate must be >= 2");
  if (k_max < 2) throw ContractError("GmmTeacherConfig: k_max must be >= 2");
  if (!(p_rnd >= 0.0 && p_rnd <= 1.0)) {
    throw ContractError("GmmTeacherConfig: p_rnd must lie in [0, 1]");
  }
}

void RiacConfig::validate() const {
  if (max_region_size < 2) throw ContractError("RiacConfig: max_region_size must be >= 2");
  if (n_candidates < 1) throw ContractError("RiacConfig: n_candidates must be >= 1");
  if (min_region_size < 1) throw ContractError("RiacConfig: min_region_size must be >= 1");
  if (!(min_extent_ratio > 0.0 && min_extent_ratio <= 0.5)) {
    throw ContractError("RiacConfig: min_extent_ratio must lie in (0, 0.5]");
  }
  if (!(mutation_sigma >= 0.0)) throw ContractError("RiacConfig: mutation_sigma must be >= 0");
  if (!(mix_random >= 0.0 && mix_alp >= 0.0 && mix_mutate >= 0.0)) {
    throw ContractError("RiacConfig: mixture weights must be >= 0");
  }
  if (std::abs(mix_random + mix_alp + mix_mutate - 1.0) > 1e-9) {
    throw ContractError("RiacConfig: mixture weights must sum to 1");
  }
}

void OracleConfig::validate(std::size_t dims) const {
  if (!(window_ratio > 0.0 && window_ratio <= 1.0)) {
    throw ContractError("OracleConfig: window_ratio must lie in (0, 1]");
  }
  if (!(step_ratio >= 0.0)) throw ContractError("OracleConfig: step_ratio must be >= 0");
  if (memory_size < 1) throw ContractError("OracleConfig: memory_size must be >= 1");
  if (!direction.empty()) {
    if (direction.size() != dims) {
      throw ContractError("OracleConfig: direction dimension mismatch");
    }
    for (int s : direction) {
      if (s < -1 || s > 1) throw ContractError("OracleConfig: direction entries must be -1, 0 or 1");
    }
  }
  if (!start.empty()) {
    if (start.size() != dims) throw ContractError("OracleConfig: start dimension mismatch");
    for (double x : start) {
      if (!(x >= 0.0 && x <= 1.0)) {
        throw ContractError("OracleConfig: start must lie in the unit cube");
      }
    }
  }
}

std::size_t pick_proportional(std::span<const double> utilities, Rng& rng) {
  if (utilities.empty()) throw ContractError("pick_proportional: no candidates");
  double total = 0.0;
  for (double u : utilities) total += std::max(u, 0.0);
  if (!(total > 0.0)) return rng.uniform_index(utilities.size());
  const double target = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < utilities.size(); ++i) {
    acc += std::max(utilities[i], 0.0);
    if (target < acc) return i;
  }
  return utilities.size() - 1;
}

double compute_alp(std::span<const double> p_norm, double reward, KdTree& index) {
  double alp = 0.0;
  if (index.size() > 0) {
    alp = std::abs(reward - index.nearest(p_norm).value);
  }
  index.insert(p_norm, reward);
  return alp;
}

Eigen::MatrixXd covar_fit_matrix(const std::deque<std::pair<Vec, double>>& window) {
  if (window.empty()) throw ContractError("covar_fit_matrix: empty window");
  const auto n = static_cast<Eigen::Index>(window.size());
  const auto d = static_cast<Eigen::Index>(window.front().first.size());
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  Eigen::MatrixXd m(n, d + 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& [p, reward] = window[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(p.size()) != d) {
      throw ContractError("covar_fit_matrix: inconsistent parameter dimension");
    }
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = p[static_cast<std::size_t>(j)];
    m(i, d) = reward;
    m(i, d + 1) = static_cast<double>(i) / denom;
  }
  return m;
}

double riac_region_alp(std::span<const double> rewards) {
  const std::size_t n = rewards.size();
  if (n < 2) return 0.0;
  const std::size_t n_new = n / 2;       // newer half
  const std::size_t n_old = n - n_new;   // older half keeps the middle record
  double s_old = 0.0;
  double s_new = 0.0;
  for (std::size_t i = 0; i < n_old; ++i) s_old += rewards[i];
  for (std::size_t i = n_old; i < n; ++i) s_new += rewards[i];
  return std::abs(s_new / static_cast<double>(n_new) -
                  s_old / static_cast<double>(n_old));
}

// ---- Random ----

RandomTeacher::RandomTeacher(ParameterSpace space, std::uint64_t seed)
    : Teacher(std::move(space)), rng_(seed) {}

Vec RandomTeacher::do_propose() { return uniform_unit(space().dims(), rng_); }

// ---- ALP-GMM ----

AlpGmmTeacher::AlpGmmTeacher(ParameterSpace space, GmmTeacherConfig cfg,
                             std::uint64_t seed)
    : Teacher(std::move(space)),
      cfg_(cfg),
      rng_(seed),
      alp_index_(this->space().dims()) {
  cfg_.validate();
}

Vec AlpGmmTeacher::do_propose() {
  const std::size_t d = space().dims();
  if (history().size() < static_cast<std::size_t>(cfg_.fit_rate)) {
    ++counts_.bootstrap;
    return uniform_unit(d, rng_);
  }
  if (!model_) {
    ++counts_.fallback;
    return uniform_unit(d, rng_);
  }
  if (rng_.uniform() < cfg_.p_rnd) {
    ++counts_.random;
    return uniform_unit(d, rng_);
  }
  ++counts_.gmm;
  const std::size_t j = pick_proportional(utilities_, rng_);
  const Eigen::VectorXd x = sample_gaussian(model_->components[j], rng_);
  Vec u(d);
  for (std::size_t i = 0; i < d; ++i) {
    u[i] = std::clamp(x[static_cast<Eigen::Index>(i)], 0.0, 1.0);
  }
  return u;  // progress coordinate dropped
}

void AlpGmmTeacher::do_observe(std::span<const double> p_norm, double reward) {
  const double alp = compute_alp(p_norm, reward, alp_index_);
  window_.emplace_back(Vec(p_norm.begin(), p_norm.end()), alp);
  if (window_.size() > static_cast<std::size_t>(cfg_.fit_rate)) window_.pop_front();

  if (history().size() % static_cast<std::size_t>(cfg_.fit_rate) != 0) return;

  const auto n = static_cast<Eigen::Index>(window_.size());
  const auto d = static_cast<Eigen::Index>(space().dims());
  Eigen::MatrixXd m(n, d + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& [p, a] = window_[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = p[static_cast<std::size_t>(j)];
    m(i, d) = a;
  }
  try {
    model_ = select_best_gmm(m, 2, cfg_.k_max, cfg_.em, rng_);
    utilities_.resize(model_->components.size());
    for (std::size_t j = 0; j < model_->components.size(); ++j) {
      utilities_[j] = model_->components[j].mean[d];
    }
  } catch (const FitError&) {
    // Keep the previous mixture; proposals fall back to uniform if there
    // has never been one.
  }
}

// ---- Covar-GMM ----

CovarGmmTeacher::CovarGmmTeacher(ParameterSpace space, GmmTeacherConfig cfg,
                                 std::uint64_t seed)
    : Teacher(std::move(space)), cfg_(cfg), rng_(seed) {
  cfg_.validate();
}

Vec CovarGmmTeacher::do_propose() {
  const std::size_t d = space().dims();
  if (history().size() < static_cast<std::size_t>(cfg_.fit_rate)) {
    ++counts_.bootstrap;
    return uniform_unit(d, rng_);
  }
  if (!model_) {
    ++counts_.fallback;
    return uniform_unit(d, rng_);
  }
  if (rng_.uniform() < cfg_.p_rnd) {
    ++counts_.random;
    return uniform_unit(d, rng_);
  }
  ++counts_.gmm;
  const std::size_t j = pick_proportional(utilities_, rng_);
  const Eigen::VectorXd x = sample_gaussian(model_->components[j], rng_);
  Vec u(d);
  for (std::size_t i = 0; i < d; ++i) {
    u[i] = std::clamp(x[static_cast<Eigen::Index>(i)], 0.0, 1.0);
  }
  return u;  // reward and time coordinates dropped
}

void CovarGmmTeacher::do_observe(std::span<const double> p_norm, double reward) {
  window_.emplace_back(Vec(p_norm.begin(), p_norm.end()), reward);
  if (window_.size() > static_cast<std::size_t>(cfg_.fit_rate)) window_.pop_front();

  if (history().size() % static_cast<std::size_t>(cfg_.fit_rate) != 0) return;

  const auto d = static_cast<Eigen::Index>(space().dims());
  const Eigen::MatrixXd m = covar_fit_matrix(window_);
  try {
    model_ = select_best_gmm(m, 2, cfg_.k_max, cfg_.em, rng_);
    utilities_.resize(model_->components.size());
    for (std::size_t j = 0; j < model_->components.size(); ++j) {
      // Positive covariance between the time and reward coordinates means
      // reward in that component grew while the window filled.
      utilities_[j] = std::max(0.0, model_->components[j].covariance(d + 1, d));
    }
  } catch (const FitError&) {
    // Keep the previous mixture.
  }
}

// ---- RIAC ----

std::optional<RiacSplit> riac_attempt_split(const RiacRegion& region,
                                            const RiacConfig& cfg, Rng& rng) {
  const std::size_t d = region.dims();
  if (d == 0) throw ContractError("riac_attempt_split: region has no dimensions");
  const auto min_records = static_cast<std::size_t>(cfg.min_region_size);

  std::optional<RiacSplit> best;
  double best_score = -std::numeric_limits<double>::infinity();
  Vec left_rewards;
  Vec right_rewards;
  left_rewards.reserve(region.size());
  right_rewards.reserve(region.size());

  for (int c = 0; c < cfg.n_candidates; ++c) {
    const std::size_t axis = rng.uniform_index(d);
    const double thr = rng.uniform(region.lo[axis], region.hi[axis]);
    // Children must keep a workable edge on the cut axis (fractions are
    // relative to the full normalized range, i.e. absolute here).
    if (thr - region.lo[axis] < cfg.min_extent_ratio ||
        region.hi[axis] - thr < cfg.min_extent_ratio) {
      continue;
    }
    left_rewards.clear();
    right_rewards.clear();
    for (std::size_t i = 0; i < region.size(); ++i) {
      const double x = region.param(i)[axis];
      (x < thr ? left_rewards : right_rewards).push_back(region.rewards[i]);
    }
    if (left_rewards.size() < min_records || right_rewards.size() < min_records) {
      continue;
    }
    const double score = static_cast<double>(left_rewards.size()) *
                         static_cast<double>(right_rewards.size()) *
                         std::abs(riac_region_alp(left_rewards) -
                                  riac_region_alp(right_rewards));
    if (score > best_score) {
      best_score = score;
      best = RiacSplit{static_cast<int>(axis), thr};
    }
  }
  return best;
}

RiacTeacher::RiacTeacher(ParameterSpace space, RiacConfig cfg, std::uint64_t seed)
    : Teacher(std::move(space)), cfg_(cfg), rng_(seed) {
  cfg_.validate();
  const std::size_t d = this->space().dims();
  root_ = std::make_unique<RiacRegion>();
  root_->lo.assign(d, 0.0);
  root_->hi.assign(d, 1.0);
  root_->leaf_slot = 0;
  leaves_.push_back(root_.get());
  picker_.push_back(0.0);
}

std::vector<const RiacRegion*> RiacTeacher::leaves() const {
  return {leaves_.begin(), leaves_.end()};
}

RiacRegion* RiacTeacher::descend(std::span<const double> p_norm) {
  RiacRegion* r = root_.get();
  while (!r->is_leaf()) {
    const double x = p_norm[static_cast<std::size_t>(r->split_axis)];
    r = x < r->split_threshold ? r->left.get() : r->right.get();
  }
  return r;
}

const RiacRegion* RiacTeacher::pick_leaf() {
  if (picker_.total() > 0.0) return leaves_[picker_.pick(rng_.uniform())];
  return leaves_[rng_.uniform_index(leaves_.size())];  // no progress anywhere yet
}

Vec RiacTeacher::do_propose() {
  const std::size_t d = space().dims();
  const double u = rng_.uniform();
  if (u < cfg_.mix_random) {
    ++counts_.random;
    return uniform_unit(d, rng_);
  }
  const RiacRegion* leaf = pick_leaf();
  if (u < cfg_.mix_random + cfg_.mix_alp) {
    ++counts_.alp_region;
    Vec p(d);
    for (std::size_t i = 0; i < d; ++i) p[i] = rng_.uniform(leaf->lo[i], leaf->hi[i]);
    return p;
  }
  ++counts_.mutate;
  if (leaf->size() == 0) {
    Vec p(d);
    for (std::size_t i = 0; i < d; ++i) p[i] = rng_.uniform(leaf->lo[i], leaf->hi[i]);
    return p;
  }
  // Nudge the record that paid worst (earliest wins ties).
  std::size_t w = 0;
  for (std::size_t i = 1; i < leaf->size(); ++i) {
    if (leaf->rewards[i] < leaf->rewards[w]) w = i;
  }
  const auto p0 = leaf->param(w);
  Vec p(d);
  for (std::size_t i = 0; i < d; ++i) {
    p[i] = std::clamp(p0[i] + cfg_.mutation_sigma * rng_.normal(), 0.0, 1.0);
  }
  return p;
}

void RiacTeacher::apply_split(RiacRegion* region, const RiacSplit& split) {
  const auto axis = static_cast<std::size_t>(split.axis);
  auto left = std::make_unique<RiacRegion>();
  auto right = std::make_unique<RiacRegion>();
  left->lo = region->lo;
  left->hi = region->hi;
  left->hi[axis] = split.threshold;
  right->lo = region->lo;
  right->hi = region->hi;
  right->lo[axis] = split.threshold;

  for (std::size_t i = 0; i < region->size(); ++i) {
    const auto p = region->param(i);
    RiacRegion* dst = p[axis] < split.threshold ? left.get() : right.get();
    dst->pflat.insert(dst->pflat.end(), p.begin(), p.end());
    dst->rewards.push_back(region->rewards[i]);
  }
  left->alp = riac_region_alp(left->rewards);
  right->alp = riac_region_alp(right->rewards);

  const int slot = region->leaf_slot;
  region->split_axis = split.axis;
  region->split_threshold = split.threshold;
  region->leaf_slot = -1;
  region->pflat.clear();
  region->pflat.shrink_to_fit();
  region->rewards.clear();
  region->rewards.shrink_to_fit();

  left->leaf_slot = slot;
  right->leaf_slot = static_cast<int>(leaves_.size());
  leaves_[static_cast<std::size_t>(slot)] = left.get();
  leaves_.push_back(right.get());
  picker_.set(static_cast<std::size_t>(slot), left->alp);
  picker_.push_back(right->alp);

  region->left = std::move(left);
  region->right = std::move(right);
}

void RiacTeacher::do_observe(std::span<const double> p_norm, double reward) {
  RiacRegion* leaf = descend(p_norm);
  leaf->pflat.insert(leaf->pflat.end(), p_norm.begin(), p_norm.end());
  leaf->rewards.push_back(reward);
  leaf->alp = riac_region_alp(leaf->rewards);

  if (leaf->size() >= static_cast<std::size_t>(cfg_.max_region_size)) {
    if (const auto split = riac_attempt_split(*leaf, cfg_, rng_)) {
      apply_split(leaf, *split);
      return;
    }
    // No admissible cut: forget the oldest quarter and keep sampling.
    const std::size_t drop = leaf->size() / 4;
    leaf->pflat.erase(leaf->pflat.begin(),
                      leaf->pflat.begin() +
                          static_cast<std::ptrdiff_t>(drop * leaf->dims()));
    leaf->rewards.erase(leaf->rewards.begin(),
                        leaf->rewards.begin() + static_cast<std::ptrdiff_t>(drop));
    leaf->alp = riac_region_alp(leaf->rewards);
  }
  picker_.set(static_cast<std::size_t>(leaf->leaf_slot), leaf->alp);
}

// ---- Oracle ----

OracleTeacher::OracleTeacher(ParameterSpace space, OracleConfig cfg,
                             std::uint64_t seed)
    : Teacher(std::move(space)), cfg_(cfg), rng_(seed) {
  const std::size_t d = this->space().dims();
  cfg_.validate(d);
  w_size_.assign(d, cfg_.window_ratio);
  step_.assign(d, cfg_.step_ratio);
  dir_ = cfg_.direction.empty() ? std::vector<int>(d, 1) : cfg_.direction;
  w_pos_ = cfg_.start.empty() ? Vec(d, 0.0) : cfg_.start;
  for (std::size_t i = 0; i < d; ++i) {
    w_pos_[i] = std::clamp(w_pos_[i], 0.0, 1.0 - w_size_[i]);
  }
}

Vec OracleTeacher::do_propose() {
  Vec p(space().dims());
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = w_pos_[i] + rng_.uniform() * w_size_[i];
  }
  return p;
}

void OracleTeacher::do_observe(std::span<const double>, double reward) {
  recent_.push_back(reward);
  if (recent_.size() > static_cast<std::size_t>(cfg_.memory_size)) {
    recent_.pop_front();
  }
  if (recent_.size() < static_cast<std::size_t>(cfg_.memory_size)) return;

  double mean = 0.0;
  for (double r : recent_) mean += r;
  mean /= static_cast<double>(recent_.size());
  if (mean > cfg_.reward_threshold) {
    for (std::size_t i = 0; i < w_pos_.size(); ++i) {
      w_pos_[i] = std::clamp(w_pos_[i] + dir_[i] * step_[i], 0.0, 1.0 - w_size_[i]);
    }
    recent_.clear();  // a fresh window earns a fresh memory
  }
}

// ---- factory ----

std::unique_ptr<Teacher> make_teacher(TeacherKind kind, const ParameterSpace& space,
                                      const TeacherParams& params,
                                      std::uint64_t seed) {
  switch (kind) {
    case TeacherKind::AlpGmm:
      return std::make_unique<AlpGmmTeacher>(space, params.gmm, seed);
    case TeacherKind::CovarGmm:
      return std::make_unique<CovarGmmTeacher>(space, params.gmm, seed);
    case TeacherKind::Riac:
      return std::make_unique<RiacTeacher>(space, params.riac, seed);
    case TeacherKind::Oracle:
      return std::make_unique<OracleTeacher>(space, params.oracle, seed);
    case TeacherKind::Random:
      return std::make_unique<RandomTeacher>(space, seed);
  }
  throw ContractError("make_teacher: unknown TeacherKind");
}

}  // namespace cts
