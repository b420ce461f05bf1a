#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cts/core.hpp"

namespace cts {

double squared_distance(std::span<const double> a, std::span<const double> b);

// Exact nearest-neighbour index with incremental insertion. Results are
// identical to a brute-force scan: the closest point by Euclidean distance
// wins and distance ties go to the point inserted first. The tree rebalances
// itself whenever it doubles in size or an insertion chain grows too deep,
// so query cost stays logarithmic under clustered insertion patterns.
class KdTree {
 public:
  explicit KdTree(std::size_t dims);

  std::size_t size() const { return values_.size(); }
  std::size_t dims() const { return dims_; }

  void insert(std::span<const double> point, double value);

  struct Hit {
    Vec point;
    double value;
    std::size_t index;  // insertion order of the winning point
    double dist2;
  };

  // Throws ContractError when the tree is empty.
  Hit nearest(std::span<const double> query) const;

 private:
  struct Node {
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::int32_t axis = 0;
  };

  std::span<const double> point(std::size_t i) const {
    return {points_.data() + i * dims_, dims_};
  }

  std::int32_t build_balanced(std::vector<std::int32_t>& ids, std::size_t lo,
                              std::size_t hi, int depth);
  void rebuild();

  std::size_t dims_;
  std::vector<double> points_;  // size() * dims_, row-major, insertion order
  std::vector<double> values_;
  std::vector<Node> nodes_;     // parallel to points
  std::int32_t root_ = -1;
  std::size_t last_rebuild_size_ = 0;
};

}  // namespace cts
