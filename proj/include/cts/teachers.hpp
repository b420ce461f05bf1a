#pragma once

#include <deque>
#include <memory>
#include <optional>
#include <utility>

#include "cts/core.hpp"
#include "cts/gmm.hpp"
#include "cts/kdtree.hpp"
#include "cts/rng.hpp"
#include "cts/weighted_picker.hpp"

namespace cts {

enum class TeacherKind { AlpGmm, CovarGmm, Riac, Oracle, Random };

TeacherKind teacher_kind_from_string(const std::string& name);
std::string to_string(TeacherKind kind);

// Shared by both mixture-model teachers.
struct GmmTeacherConfig {
  int fit_rate = 250;  // bootstrap length and refit period
  int k_max = 10;
  double p_rnd = 0.2;  // chance of a uniform proposal once fitted
  EmConfig em;
  void validate() const;
};

struct RiacConfig {
  int max_region_size = 200;   // records that trigger a split attempt
  int n_candidates = 50;       // random (axis, threshold) candidates per attempt
  int min_region_size = 20;    // records each child must keep
  double min_extent_ratio = 1.0 / 6.0;  // child edge as fraction of the axis range
  double mutation_sigma = 0.1;
  double mix_random = 0.2;  // uniform over the whole space
  double mix_alp = 0.7;     // progress-weighted region, uniform inside
  double mix_mutate = 0.1;  // progress-weighted region, mutate weakest record
  void validate() const;
};

struct OracleConfig {
  double window_ratio = 1.0 / 6.0;  // window edge as fraction of each axis
  double step_ratio = 1.0 / 30.0;   // slide distance as fraction of each axis
  double reward_threshold = 230.0;  // mean recent reward that triggers a slide
  int memory_size = 50;             // episodes averaged for the trigger
  std::vector<int> direction;       // per-axis slide sign; empty = all +1
  Vec start;                        // normalized start corner; empty = origin
  void validate(std::size_t dims) const;
};

struct TeacherParams {
  GmmTeacherConfig gmm;
  RiacConfig riac;
  OracleConfig oracle;
};

std::unique_ptr<Teacher> make_teacher(TeacherKind kind, const ParameterSpace& space,
                                      const TeacherParams& params,
                                      std::uint64_t seed);

// ---- reusable pieces, exposed for direct testing ----

// Draws an index with probability proportional to max(utility, 0); if no
// utility is positive the draw is uniform.
std::size_t pick_proportional(std::span<const double> utilities, Rng& rng);

// Absolute learning progress of a new observation: |reward - reward of the
// closest previously seen parameter|. The pair is added to the index
// afterwards. The first observation has no neighbour and scores 0.
double compute_alp(std::span<const double> p_norm, double reward, KdTree& index);

// Rows of (parameter ⊕ reward ⊕ relative time) for the covariance variant;
// relative time is the record's rank scaled onto [0, 1], oldest first.
Eigen::MatrixXd covar_fit_matrix(const std::deque<std::pair<Vec, double>>& window);

// Learning progress of a region's reward sequence (insertion order):
// |mean of the newer half - mean of the older half|; an odd middle record
// joins the older half; fewer than two records score 0.
double riac_region_alp(std::span<const double> rewards);

// ---- strategies ----

class RandomTeacher : public Teacher {
 public:
  RandomTeacher(ParameterSpace space, std::uint64_t seed);

 private:
  Vec do_propose() override;
  void do_observe(std::span<const double>, double) override {}

  Rng rng_;
};

// Mixture-model teacher over (parameter ⊕ learning progress): proposals chase
// the component whose mean shows the most progress.
class AlpGmmTeacher : public Teacher {
 public:
  AlpGmmTeacher(ParameterSpace space, GmmTeacherConfig cfg, std::uint64_t seed);

  struct ProposalCounts {
    std::uint64_t bootstrap = 0;
    std::uint64_t random = 0;
    std::uint64_t gmm = 0;
    std::uint64_t fallback = 0;  // model unavailable after bootstrap
  };
  const ProposalCounts& proposal_counts() const { return counts_; }
  const std::optional<GmmModel>& model() const { return model_; }
  const std::deque<std::pair<Vec, double>>& window() const { return window_; }
  const KdTree& alp_index() const { return alp_index_; }

 private:
  Vec do_propose() override;
  void do_observe(std::span<const double> p_norm, double reward) override;

  GmmTeacherConfig cfg_;
  Rng rng_;
  KdTree alp_index_;
  std::deque<std::pair<Vec, double>> window_;  // (param, progress), capped
  std::optional<GmmModel> model_;
  std::vector<double> utilities_;  // per-component mean progress
  ProposalCounts counts_;
};

// Mixture-model teacher over (parameter ⊕ reward ⊕ relative time): proposals
// chase components whose reward grows over time.
class CovarGmmTeacher : public Teacher {
 public:
  CovarGmmTeacher(ParameterSpace space, GmmTeacherConfig cfg, std::uint64_t seed);

  struct ProposalCounts {
    std::uint64_t bootstrap = 0;
    std::uint64_t random = 0;
    std::uint64_t gmm = 0;
    std::uint64_t fallback = 0;
  };
  const ProposalCounts& proposal_counts() const { return counts_; }
  const std::optional<GmmModel>& model() const { return model_; }
  const std::deque<std::pair<Vec, double>>& window() const { return window_; }

 private:
  Vec do_propose() override;
  void do_observe(std::span<const double> p_norm, double reward) override;

  GmmTeacherConfig cfg_;
  Rng rng_;
  std::deque<std::pair<Vec, double>> window_;  // (param, reward), capped
  std::optional<GmmModel> model_;
  std::vector<double> utilities_;  // per-component time/reward covariance
  ProposalCounts counts_;
};

// Node of the region tree: an axis-aligned box over normalized space holding
// the records that landed in it, in insertion order.
struct RiacRegion {
  Vec lo;
  Vec hi;
  std::vector<double> pflat;  // size() * dims, row-major
  Vec rewards;
  double alp = 0.0;
  int split_axis = -1;
  double split_threshold = 0.0;
  std::unique_ptr<RiacRegion> left;
  std::unique_ptr<RiacRegion> right;
  int leaf_slot = -1;  // index into the teacher's leaf list; -1 once split

  bool is_leaf() const { return left == nullptr; }
  std::size_t size() const { return rewards.size(); }
  std::size_t dims() const { return lo.size(); }
  std::span<const double> param(std::size_t i) const {
    return {pflat.data() + i * dims(), dims()};
  }
};

struct RiacSplit {
  int axis = -1;
  double threshold = 0.0;
};

// Scores n_candidates random (axis, threshold) cuts of the region and
// returns the best valid one, if any. Drawn candidates always consume the
// same amount of randomness whether or not they are valid.
std::optional<RiacSplit> riac_attempt_split(const RiacRegion& region,
                                            const RiacConfig& cfg, Rng& rng);

// Region-tree teacher: recursively carves the space into boxes and samples
// the ones where reward moved most between older and newer episodes.
class RiacTeacher : public Teacher {
 public:
  RiacTeacher(ParameterSpace space, RiacConfig cfg, std::uint64_t seed);

  struct BranchCounts {
    std::uint64_t random = 0;
    std::uint64_t alp_region = 0;
    std::uint64_t mutate = 0;
  };
  const BranchCounts& branch_counts() const { return counts_; }
  const RiacRegion& root() const { return *root_; }
  std::vector<const RiacRegion*> leaves() const;

 private:
  Vec do_propose() override;
  void do_observe(std::span<const double> p_norm, double reward) override;
  RiacRegion* descend(std::span<const double> p_norm);
  const RiacRegion* pick_leaf();
  void apply_split(RiacRegion* region, const RiacSplit& split);

  RiacConfig cfg_;
  Rng rng_;
  std::unique_ptr<RiacRegion> root_;
  std::vector<RiacRegion*> leaves_;
  WeightedPicker picker_;  // leaf progress weights, parallel to leaves_
  BranchCounts counts_;
};

// Scripted expert: samples uniformly inside a sliding window that starts at
// the easy corner and advances whenever recent rewards clear a threshold.
class OracleTeacher : public Teacher {
 public:
  OracleTeacher(ParameterSpace space, OracleConfig cfg, std::uint64_t seed);

  const Vec& window_pos() const { return w_pos_; }
  const Vec& window_size() const { return w_size_; }

 private:
  Vec do_propose() override;
  void do_observe(std::span<const double> p_norm, double reward) override;

  OracleConfig cfg_;
  Rng rng_;
  Vec w_pos_;
  Vec w_size_;
  Vec step_;
  std::vector<int> dir_;
  std::deque<double> recent_;
};

}  // namespace cts
