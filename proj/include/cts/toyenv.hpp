#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cts/core.hpp"

namespace cts {

struct ToySpaceConfig {
  int relevant_dims = 2;
  int irrelevant_dims = 0;
  int cubes_per_dim = 10;
  int unlock_count = 75;   // samples in a cube before its neighbours unlock
  int reward_cap = 100;

  int dims() const { return relevant_dims + irrelevant_dims; }
  void validate() const;
};

// Synthetic student: the unit hypercube tiled into locked cells over the
// relevant axes (which come first; the remaining axes never influence the
// outcome). Sampling an unlocked cell pays its visit count, capped; once a
// cell has been sampled unlock_count times, the face-adjacent cells open.
// Samples landing in a locked cell pay nothing and are not counted. Only
// the cell at the origin corner starts unlocked.
class ToySpace {
 public:
  explicit ToySpace(ToySpaceConfig cfg);

  const ToySpaceConfig& config() const { return cfg_; }
  const ParameterSpace& space() const { return space_; }

  // Cell coordinates over the relevant axes for a point of the full space.
  std::vector<int> cube_index(std::span<const double> p) const;

  // Runs one episode at p and returns its reward.
  double episode(std::span<const double> p);

  std::size_t total_cubes() const { return counters_.size(); }
  std::size_t unlocked_count() const { return n_unlocked_; }
  double unlocked_fraction() const {
    return static_cast<double>(n_unlocked_) / static_cast<double>(total_cubes());
  }

  bool is_unlocked(std::span<const int> cube) const;
  int sample_count(std::span<const int> cube) const;

 private:
  std::size_t linear_index(std::span<const int> cube) const;

  ToySpaceConfig cfg_;
  ParameterSpace space_;
  std::vector<std::int32_t> counters_;
  std::vector<std::uint8_t> unlocked_;
  std::size_t n_unlocked_ = 0;
};

}  // namespace cts
