#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace dmpath {

/// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class Sense { kMaximize, kMinimize };

/// optimize objective.x  s.t.  ineq_matrix.x <= ineq_rhs,  eq_row.x = 1,
/// x >= 0. Entries of ineq_rhs may be +inf (the row is then inactive).
struct LpProblem {
  std::vector<double> objective;
  Sense sense = Sense::kMaximize;
  Matrix ineq_matrix;
  std::vector<double> ineq_rhs;
  std::vector<double> eq_row;

  std::size_t variables() const { return objective.size(); }
  void validate() const;
};

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded };

const char* to_string(SolveStatus status);

struct Solution {
  SolveStatus status = SolveStatus::kInfeasible;
  std::vector<double> x;
  double objective_value = 0.0;

  // Dual multipliers of the maximization form (a minimize problem is solved
  // as maximize -objective). Optimality certificate:
  //   ineq_duals >= 0,  A^T ineq_duals + eq_dual * eq_row >= objective',
  //   ineq_rhs . ineq_duals + eq_dual == objective' . x
  std::vector<double> ineq_duals;
  double eq_dual = 0.0;
  std::size_t pivots = 0;

  bool optimal() const { return status == SolveStatus::kOptimal; }
};

struct SolverConfig {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  /// 0 selects 10 * (rows + cols)^2.
  std::size_t max_pivots = 0;

  void validate() const;
};

/// Thrown when the pivot budget runs out even after switching to Bland's rule.
class CyclingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense two-phase primal simplex. Dantzig pricing, falling back to Bland's
/// rule after a run of degenerate pivots.
Solution solve(const LpProblem& problem, const SolverConfig& config = {});

/// Largest violation of any constraint (inequality rows, the equality row,
/// and non-negativity) by `x`, measured relative to max(1, |rhs|).
double max_constraint_violation(const LpProblem& problem,
                                std::span<const double> x);

/// Sub-problem over the listed columns only.
LpProblem restrict_columns(const LpProblem& problem,
                           std::span<const std::size_t> columns);

}  // namespace dmpath
