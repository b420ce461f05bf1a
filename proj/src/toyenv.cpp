#include "cts/toyenv.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cts {

void ToySpaceConfig::validate() const {
  if (relevant_dims < 1) throw ContractError("ToySpaceConfig: relevant_dims must be >= 1");
  if (irrelevant_dims < 0) throw ContractError("ToySpaceConfig: irrelevant_dims must be >= 0");
  if (cubes_per_dim < 2) throw ContractError("ToySpaceConfig: cubes_per_dim must be >= 2");
  if (unlock_count < 1) throw ContractError("ToySpaceConfig: unlock_count must be >= 1");
  if (reward_cap < 1) throw ContractError("ToySpaceConfig: reward_cap must be >= 1");
  double cells = std::pow(static_cast<double>(cubes_per_dim), relevant_dims);
  if (cells > 1e8) {
    throw ContractError("ToySpaceConfig: grid of " + std::to_string(cells) +
                        " cells is too large");
  }
}

ToySpace::ToySpace(ToySpaceConfig cfg)
    : cfg_(cfg), space_(ParameterSpace::unit(static_cast<std::size_t>(cfg.dims()))) {
  cfg_.validate();
  std::size_t cells = 1;
  for (int i = 0; i < cfg_.relevant_dims; ++i) {
    cells *= static_cast<std::size_t>(cfg_.cubes_per_dim);
  }
  counters_.assign(cells, 0);
  unlocked_.assign(cells, 0);
  unlocked_[0] = 1;  // origin-corner cell
  n_unlocked_ = 1;
}

std::vector<int> ToySpace::cube_index(std::span<const double> p) const {
  if (p.size() != space_.dims()) {
    throw ContractError("ToySpace::cube_index: dimension mismatch");
  }
  if (!space_.contains(p)) {
    throw ContractError("ToySpace::cube_index: point outside the unit cube");
  }
  std::vector<int> idx(static_cast<std::size_t>(cfg_.relevant_dims));
  for (int i = 0; i < cfg_.relevant_dims; ++i) {
    const int c = static_cast<int>(std::floor(p[static_cast<std::size_t>(i)] *
                                              cfg_.cubes_per_dim));
    idx[static_cast<std::size_t>(i)] = std::min(c, cfg_.cubes_per_dim - 1);
  }
  return idx;
}

std::size_t ToySpace::linear_index(std::span<const int> cube) const {
  if (cube.size() != static_cast<std::size_t>(cfg_.relevant_dims)) {
    throw ContractError("ToySpace: cell coordinate dimension mismatch");
  }
  std::size_t lin = 0;
  for (int i = 0; i < cfg_.relevant_dims; ++i) {
    const int c = cube[static_cast<std::size_t>(i)];
    if (c < 0 || c >= cfg_.cubes_per_dim) {
      throw ContractError("ToySpace: cell coordinate out of range");
    }
    lin = lin * static_cast<std::size_t>(cfg_.cubes_per_dim) + static_cast<std::size_t>(c);
  }
  return lin;
}

bool ToySpace::is_unlocked(std::span<const int> cube) const {
  return unlocked_[linear_index(cube)] != 0;
}

int ToySpace::sample_count(std::span<const int> cube) const {
  return counters_[linear_index(cube)];
}

double ToySpace::episode(std::span<const double> p) {
  const auto cube = cube_index(p);
  const std::size_t lin = linear_index(cube);
  if (!unlocked_[lin]) return 0.0;

  const std::int32_t count = ++counters_[lin];
  if (count == cfg_.unlock_count) {
    // Open the face-adjacent cells.
    std::vector<int> nb = cube;
    for (int i = 0; i < cfg_.relevant_dims; ++i) {
      for (int step : {-1, +1}) {
        const int c = cube[static_cast<std::size_t>(i)] + step;
        if (c < 0 || c >= cfg_.cubes_per_dim) continue;
        nb[static_cast<std::size_t>(i)] = c;
        const std::size_t nlin = linear_index(nb);
        if (!unlocked_[nlin]) {
          unlocked_[nlin] = 1;
          ++n_unlocked_;
        }
      }
      nb[static_cast<std::size_t>(i)] = cube[static_cast<std::size_t>(i)];
    }
  }
  return static_cast<double>(std::min(count, cfg_.reward_cap));
}

}  // namespace cts
