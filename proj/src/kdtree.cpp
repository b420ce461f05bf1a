#include "cts/kdtree.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

namespace cts {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ContractError("squared_distance: dimension mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

KdTree::KdTree(std::size_t dims) : dims_(dims) {
  if (dims == 0) throw ContractError("KdTree: dims must be positive");
}

void KdTree::insert(std::span<const double> p, double value) {
  if (p.size() != dims_) throw ContractError("KdTree::insert: dimension mismatch");
  for (double x : p) {
    if (!std::isfinite(x)) throw ContractError("KdTree::insert: non-finite coordinate");
  }

  const auto id = static_cast<std::int32_t>(size());
  points_.insert(points_.end(), p.begin(), p.end());
  values_.push_back(value);
  nodes_.push_back(Node{});

  std::size_t depth = 0;
  if (root_ < 0) {
    root_ = id;
  } else {
    std::int32_t cur = root_;
    for (;;) {
      ++depth;
      Node& n = nodes_[static_cast<std::size_t>(cur)];
      const double split = point(static_cast<std::size_t>(cur))[static_cast<std::size_t>(n.axis)];
      std::int32_t& next = p[static_cast<std::size_t>(n.axis)] < split ? n.left : n.right;
      if (next < 0) {
        next = id;
        nodes_[static_cast<std::size_t>(id)].axis =
            static_cast<std::int32_t>((static_cast<std::size_t>(n.axis) + 1) % dims_);
        break;
      }
      cur = next;
    }
  }

  // Rebalance on doubling, or when one insertion path degenerates into a
  // long chain (clustered or sorted inputs).
  const std::size_t n = size();
  const std::size_t depth_cap = 2 * std::bit_width(n) + 8;
  if (n >= 2 * std::max<std::size_t>(last_rebuild_size_, 32) || depth > depth_cap) {
    rebuild();
  }
}

std::int32_t KdTree::build_balanced(std::vector<std::int32_t>& ids, std::size_t lo,
                                    std::size_t hi, int depth) {
  if (lo >= hi) return -1;
  const auto axis = static_cast<std::size_t>(depth) % dims_;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::nth_element(ids.begin() + static_cast<std::ptrdiff_t>(lo),
                   ids.begin() + static_cast<std::ptrdiff_t>(mid),
                   ids.begin() + static_cast<std::ptrdiff_t>(hi),
                   [&](std::int32_t a, std::int32_t b) {
                     const double xa = point(static_cast<std::size_t>(a))[axis];
                     const double xb = point(static_cast<std::size_t>(b))[axis];
                     return xa < xb || (xa == xb && a < b);
                   });
  const std::int32_t id = ids[mid];
  Node& n = nodes_[static_cast<std::size_t>(id)];
  n.axis = static_cast<std::int32_t>(axis);
  n.left = build_balanced(ids, lo, mid, depth + 1);
  n.right = build_balanced(ids, mid + 1, hi, depth + 1);
  return id;
}

void KdTree::rebuild() {
  std::vector<std::int32_t> ids(size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<std::int32_t>(i);
  root_ = build_balanced(ids, 0, ids.size(), 0);
  last_rebuild_size_ = size();
}

KdTree::Hit KdTree::nearest(std::span<const double> query) const {
  if (query.size() != dims_) throw ContractError("KdTree::nearest: dimension mismatch");
  if (size() == 0) throw ContractError("KdTree::nearest: tree is empty");

  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();

  // Depth-first walk with an explicit stack. Each entry carries a lower
  // bound on the distance to its subtree; a subtree is dropped only when
  // that bound is strictly larger than the current best, which keeps
  // equally-distant candidates reachable for the insertion-order tie break.
  struct Item {
    std::int32_t node;
    double min_d2;
  };
  std::vector<Item> stack;
  stack.reserve(64);
  stack.push_back({root_, 0.0});
  while (!stack.empty()) {
    const Item item = stack.back();
    stack.pop_back();
    if (item.node < 0 || item.min_d2 > best_d2) continue;
    const auto ci = static_cast<std::size_t>(item.node);
    const Node& n = nodes_[ci];

    const double d2 = squared_distance(query, point(ci));
    if (d2 < best_d2 || (d2 == best_d2 && ci < best)) {
      best = ci;
      best_d2 = d2;
    }

    const auto axis = static_cast<std::size_t>(n.axis);
    const double diff = query[axis] - point(ci)[axis];
    const std::int32_t near_child = diff < 0 ? n.left : n.right;
    const std::int32_t far_child = diff < 0 ? n.right : n.left;
    // Far side is re-checked against the (possibly improved) bound when
    // popped; near side is explored first.
    stack.push_back({far_child, diff * diff});
    stack.push_back({near_child, item.min_d2});
  }

  auto p = point(best);
  return Hit{Vec(p.begin(), p.end()), values_[best], best, best_d2};
}

}  // namespace cts
