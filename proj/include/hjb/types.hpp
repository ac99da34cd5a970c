#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hjb {

// States and controls are small dense vectors. MaxRows keeps them on the
// stack, which matters in the tree expansion loops.
inline constexpr int kMaxDim = 16;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

inline Vec make_vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

/// Sentinel successor index for pruned (constraint-violating) branches.
inline constexpr std::int32_t kInadmissible = -1;

/// Sentinel control index for nodes with no admissible control.
inline constexpr std::int32_t kNoControl = -1;

class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// A tree level ran empty before the final time step.
class EmptyLevelError : public SolverError {
 public:
  explicit EmptyLevelError(int level)
      : SolverError("EMPTY_LEVEL: all branches pruned at level " + std::to_string(level)),
        level_(level) {}
  int level() const { return level_; }

 private:
  int level_;
};

/// The root value is +inf: no viable trajectory from x0 survives pruning.
class NoAdmissiblePolicyError : public SolverError {
 public:
  NoAdmissiblePolicyError()
      : SolverError("NO_ADMISSIBLE_POLICY: root value is +inf") {}
};

/// Feedback synthesis found no admissible control at some step.
class StuckError : public SolverError {
 public:
  explicit StuckError(int step)
      : SolverError("STUCK: no admissible control at step " + std::to_string(step)),
        step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// A quantitative estimate was requested outside its hypothesis range.
class HypothesisViolatedError : public SolverError {
 public:
  explicit HypothesisViolatedError(const std::string& what)
      : SolverError("HYPOTHESIS_VIOLATED: " + what) {}
};

}  // namespace hjb
