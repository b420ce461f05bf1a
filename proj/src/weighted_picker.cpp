#include "cts/weighted_picker.hpp"

#include <bit>
#include <cmath>

namespace cts {

double WeightedPicker::total() const {
  double s = 0.0;
  for (std::size_t i = tree_.size(); i > 0; i -= i & (~i + 1)) s += tree_[i - 1];
  return s;
}

double WeightedPicker::weight(std::size_t i) const {
  if (i >= weights_.size()) throw ContractError("WeightedPicker: index out of range");
  return weights_[i];
}

void WeightedPicker::push_back(double w) {
  if (!(w >= 0.0) || !std::isfinite(w)) {
    throw ContractError("WeightedPicker: weight must be finite and non-negative");
  }
  weights_.push_back(0.0);
  tree_.push_back(0.0);
  // Seed the new Fenwick node with the partial sum it covers, then add w.
  const std::size_t i = tree_.size();  // 1-based position
  const std::size_t span = i & (~i + 1);
  if (span > 1) {
    for (std::size_t j = i - 1; j > i - span; j -= j & (~j + 1)) {
      tree_[i - 1] += tree_[j - 1];
    }
  }
  set(weights_.size() - 1, w);
}

void WeightedPicker::add(std::size_t i, double delta) {
  for (std::size_t j = i + 1; j <= tree_.size(); j += j & (~j + 1)) {
    tree_[j - 1] += delta;
  }
}

void WeightedPicker::set(std::size_t i, double w) {
  if (i >= weights_.size()) throw ContractError("WeightedPicker: index out of range");
  if (!(w >= 0.0) || !std::isfinite(w)) {
    throw ContractError("WeightedPicker: weight must be finite and non-negative");
  }
  add(i, w - weights_[i]);
  weights_[i] = w;
}

std::size_t WeightedPicker::pick(double u) const {
  const double t = total();
  if (!(t > 0.0)) throw ContractError("WeightedPicker: total weight is zero");
  double target = u * t;

  // Fenwick descent: find the first item whose cumulative sum exceeds target.
  std::size_t pos = 0;
  std::size_t step = std::bit_floor(tree_.size());
  while (step > 0) {
    const std::size_t next = pos + step;
    if (next <= tree_.size() && tree_[next - 1] <= target) {
      target -= tree_[next - 1];
      pos = next;
    }
    step >>= 1;
  }
  std::size_t i = pos < weights_.size() ? pos : weights_.size() - 1;
  // Float drift can land on a zero-weight item; move to a real candidate.
  while (i + 1 < weights_.size() && weights_[i] <= 0.0) ++i;
  if (weights_[i] <= 0.0) {
    while (i > 0 && weights_[i] <= 0.0) --i;
  }
  return i;
}

}  // namespace cts
