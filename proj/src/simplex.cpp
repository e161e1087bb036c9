#include "optinet/simplex.hpp"

#include <limits>

#include "optinet/error.hpp"

namespace optinet {

namespace {
constexpr double kPivotEps = 1e-12;
}

// Row i encodes  basic_i + sum_j T[i][j] * nonbasic_j = T[i][cols].
// The objective row encodes  z + sum_j T[m][j] * nonbasic_j = T[m][cols],
// so a negative entry marks an improving column.
SimplexSolver::SimplexSolver(std::size_t rows, std::size_t cols,
                             std::span<const double> a, std::span<const double> b,
                             std::span<const double> c)
    : rows_(rows), cols_(cols), tab_((rows + 1) * (cols + 1), 0.0),
      basic_(rows), nonbasic_(cols) {
  if (a.size() != rows * cols || b.size() != rows || c.size() != cols)
    throw InvalidArgument("SimplexSolver: inconsistent problem sizes");
  for (std::size_t i = 0; i < rows; ++i) {
    if (b[i] < 0.0) throw InvalidArgument("SimplexSolver: origin must be feasible (b >= 0)");
    for (std::size_t j = 0; j < cols; ++j) at(i, j) = a[i * cols + j];
    at(i, cols) = b[i];
    basic_[i] = cols + i;  // slack ids follow structural ids
  }
  for (std::size_t j = 0; j < cols; ++j) {
    at(rows, j) = -c[j];
    nonbasic_[j] = j;
  }
}

void SimplexSolver::pivot(std::size_t r, std::size_t s) {
  const std::size_t w = cols_ + 1;
  double* prow = &tab_[r * w];
  const double inv = 1.0 / prow[s];
  for (std::size_t j = 0; j < w; ++j) prow[j] *= inv;
  prow[s] = inv;
  for (std::size_t i = 0; i <= rows_; ++i) {
    if (i == r) continue;
    double* row = &tab_[i * w];
    const double f = row[s];
    if (f == 0.0) continue;
    for (std::size_t j = 0; j < w; ++j) row[j] -= f * prow[j];
    row[s] = -f * inv;
  }
  std::swap(basic_[r], nonbasic_[s]);
}

LpResult SimplexSolver::solve(std::size_t max_iterations, double target) {
  LpResult result;
  for (;;) {
    if (at(rows_, cols_) > target) {
      result.status = LpStatus::target_reached;
      result.objective = at(rows_, cols_);
      return result;
    }
    // Bland: lowest-id improving column.
    std::size_t s = cols_;
    for (std::size_t j = 0; j < cols_; ++j) {
      if (at(rows_, j) < -kPivotEps && (s == cols_ || nonbasic_[j] < nonbasic_[s])) s = j;
    }
    if (s == cols_) break;

    std::size_t r = rows_;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rows_; ++i) {
      const double coef = at(i, s);
      if (coef <= kPivotEps) continue;
      const double ratio = at(i, cols_) / coef;
      if (ratio < best_ratio || (ratio == best_ratio && basic_[i] < basic_[r])) {
        best_ratio = ratio;
        r = i;
      }
    }
    if (r == rows_) {
      result.status = LpStatus::unbounded;
      result.objective = std::numeric_limits<double>::infinity();
      return result;
    }
    if (result.iterations == max_iterations) {
      result.status = LpStatus::iteration_limit;
      return result;
    }
    pivot(r, s);
    ++result.iterations;
  }

  result.status = LpStatus::optimal;
  result.objective = at(rows_, cols_);
  result.x.assign(cols_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    if (basic_[i] < cols_) result.x[basic_[i]] = at(i, cols_);
  }
  return result;
}

}  // namespace optinet
