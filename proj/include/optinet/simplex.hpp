#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace optinet {

enum class LpStatus { optimal, target_reached, unbounded, iteration_limit };

struct LpResult {
  LpStatus status = LpStatus::optimal;
  double objective = 0.0;
  std::vector<double> x;
  std::size_t iterations = 0;
};

/// Dense LP  max c.x  s.t.  A x <= b,  x >= 0,  with b >= 0 so the origin is
/// a feasible start (no phase one).
///
/// Stored as a compact dictionary: one row per constraint, one column per
/// nonbasic variable. A pivot costs O(rows * cols), which suits the intended
/// use of many constraints over a handful of variables. Entering and leaving
/// variables follow Bland's rule, so degenerate problems terminate.
class SimplexSolver {
 public:
  /// `a` is row-major, rows x cols.
  SimplexSolver(std::size_t rows, std::size_t cols, std::span<const double> a,
                std::span<const double> b, std::span<const double> c);

  /// Runs until optimal, or until the objective strictly exceeds `target`
  /// (status target_reached, x not filled). The objective never decreases
  /// along the way, so the current vertex already witnesses the target.
  LpResult solve(std::size_t max_iterations,
                 double target = std::numeric_limits<double>::infinity());

 private:
  void pivot(std::size_t r, std::size_t s);
  double& at(std::size_t i, std::size_t j) { return tab_[i * (cols_ + 1) + j]; }

  std::size_t rows_, cols_;
  std::vector<double> tab_;           // (rows + 1) x (cols + 1); last row = objective
  std::vector<std::size_t> basic_;    // variable id per row
  std::vector<std::size_t> nonbasic_; // variable id per column
};

}  // namespace optinet
