#pragma once

#include <cstddef>
#include <vector>

#include "cts/core.hpp"

namespace cts {

// Append-only list of non-negative weights with O(log n) updates and
// cumulative-weight lookups (Fenwick tree underneath). Used to draw items
// proportionally to weights that change one at a time.
class WeightedPicker {
 public:
  std::size_t size() const { return weights_.size(); }
  double total() const;
  double weight(std::size_t i) const;

  void push_back(double w);
  void set(std::size_t i, double w);

  // Item whose cumulative weight interval contains u * total(); u in [0, 1).
  // total() must be positive.
  std::size_t pick(double u) const;

 private:
  void add(std::size_t i, double delta);

  std::vector<double> weights_;
  std::vector<double> tree_;  // 1-based Fenwick partial sums
};

}  // namespace cts
