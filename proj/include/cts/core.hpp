#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cts {

using Vec = std::vector<double>;

// Thrown when a caller breaks an API contract: dimension mismatch,
// out-of-range input, propose/observe called out of order, bad config.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Axis-aligned box of valid task parameters.
struct ParameterSpace {
  Vec lower;
  Vec upper;

  ParameterSpace(Vec lo, Vec hi);

  std::size_t dims() const { return lower.size(); }
  bool contains(std::span<const double> p) const;

  // [0, 1]^dims
  static ParameterSpace unit(std::size_t dims);
};

// Map a point of the space onto [0, 1]^d and back. Zero-extent axes
// normalize to 0.
Vec normalize(std::span<const double> p, const ParameterSpace& space);
Vec denormalize(std::span<const double> u, const ParameterSpace& space);

// Component-wise clamp onto the box.
Vec clip_to_space(std::span<const double> p, const ParameterSpace& space);

struct SampleRecord {
  Vec param;
  double reward;
  std::size_t episode;  // 0-based position in the history
};

// Per-run execution settings. Multi-task parameters (m) and parameter
// weights (w_p) are carried explicitly but frozen at 1: one episode per
// proposal, all proposals weighted equally.
struct RunConfig {
  std::size_t budget = 0;
  int tasks_per_param = 1;
  double param_weight = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Append-only log of every (parameter, reward) pair a teacher has seen.
// Storage is flat so long runs stay cache- and allocation-friendly.
class History {
 public:
  explicit History(std::size_t dims);

  void append(std::span<const double> p, double reward);

  std::size_t size() const { return rewards_.size(); }
  std::size_t dims() const { return dims_; }

  std::span<const double> param(std::size_t episode) const;
  double reward(std::size_t episode) const;
  SampleRecord record(std::size_t episode) const;

 private:
  std::size_t dims_;
  std::vector<double> params_;   // size() * dims_, row-major
  std::vector<double> rewards_;
};

// Common behavioural contract of every curriculum strategy. propose() yields
// the next parameter vector to train on; observe() reports the episodic
// reward measured for it. Calls must strictly alternate, starting with
// propose(); each strategy sees the observation in normalized coordinates
// through do_observe and answers proposals through do_propose (also
// normalized; the base class denormalizes and clips).
class Teacher {
 public:
  virtual ~Teacher() = default;

  Teacher(const Teacher&) = delete;
  Teacher& operator=(const Teacher&) = delete;

  Vec propose();
  void observe(std::span<const double> p, double reward);

  const ParameterSpace& space() const { return space_; }
  const History& history() const { return history_; }

 protected:
  explicit Teacher(ParameterSpace space);

  // Returns the next proposal in normalized [0, 1]^d coordinates.
  virtual Vec do_propose() = 0;
  // Receives the observed pair; p_norm is the parameter in [0, 1]^d.
  virtual void do_observe(std::span<const double> p_norm, double reward) = 0;

 private:
  ParameterSpace space_;
  History history_;
  bool awaiting_result_ = false;
};

}  // namespace cts
