#include "dmpath/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dmpath {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kDriveOutTol = 1e-9;
constexpr std::size_t kDegenerateRunBeforeBland = 50;
constexpr std::size_t kNoRow = std::numeric_limits<std::size_t>::max();

// Bookkeeping for one original constraint after row scaling.
struct RowInfo {
  std::size_t original = 0;  // index into ineq rows, or kEqRow
  double scale = 1.0;        // tableau row = sign * original row / scale
  double sign = 1.0;
  std::size_t slack = kNoRow;
  std::size_t artificial = kNoRow;
};
constexpr std::size_t kEqRow = std::numeric_limits<std::size_t>::max() - 1;

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_((rows + 1) * (cols + 1), 0.0),
        basis_(rows, kNoRow) {}

  double& at(std::size_t r, std::size_t c) { return data_[r * (cols_ + 1) + c]; }
  double at(std::size_t r, std::size_t c) const {
    return data_[r * (cols_ + 1) + c];
  }
  double& rhs(std::size_t r) { return at(r, cols_); }
  double rhs(std::size_t r) const { return at(r, cols_); }
  // Objective row holds reduced costs; its rhs entry holds -z.
  double& cost(std::size_t c) { return at(rows_, c); }
  double cost(std::size_t c) const { return at(rows_, c); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::vector<std::size_t>& basis() { return basis_; }
  const std::vector<std::size_t>& basis() const { return basis_; }

  void pivot(std::size_t pr, std::size_t pc) {
    const std::size_t width = cols_ + 1;
    double* prow = &data_[pr * width];
    const double inv = 1.0 / prow[pc];
    for (std::size_t c = 0; c < width; ++c) prow[c] *= inv;
    prow[pc] = 1.0;
    for (std::size_t r = 0; r <= rows_; ++r) {
      if (r == pr) continue;
      double* row = &data_[r * width];
      const double factor = row[pc];
      if (factor == 0.0) continue;
      for (std::size_t c = 0; c < width; ++c) row[c] -= factor * prow[c];
      row[pc] = 0.0;
    }
    for (std::size_t r = 0; r < rows_; ++r) {
      double& b = rhs(r);
      if (b < 0.0 && b > -1e-12) b = 0.0;
    }
    basis_[pr] = pc;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
  std::vector<std::size_t> basis_;
};

enum class PhaseResult { kOptimal, kUnbounded };

class Simplex {
 public:
  Simplex(Tableau& tab, const std::vector<bool>& artificial,
          const SolverConfig& config, std::size_t budget)
      : tab_(tab), artificial_(artificial), config_(config), budget_(budget) {}

  PhaseResult run(bool allow_artificial) {
    for (;;) {
      const std::size_t enter = choose_entering(allow_artificial);
      if (enter == kNoRow) return PhaseResult::kOptimal;
      const std::size_t leave = choose_leaving(enter);
      if (leave == kNoRow) return PhaseResult::kUnbounded;
      const double step = tab_.rhs(leave) / tab_.at(leave, enter);
      if (step <= 1e-12) {
        if (++degenerate_run_ >= kDegenerateRunBeforeBland) bland_ = true;
      } else {
        degenerate_run_ = 0;
      }
      if (++pivots_ > budget_) {
        throw CyclingError("simplex exceeded " + std::to_string(budget_) +
                           " pivots");
      }
      tab_.pivot(leave, enter);
    }
  }

  std::size_t pivots() const { return pivots_; }

 private:
  std::size_t choose_entering(bool allow_artificial) const {
    std::size_t best = kNoRow;
    double best_cost = config_.optimality_tol;
    for (std::size_t c = 0; c < tab_.cols(); ++c) {
      if (!allow_artificial && artificial_[c]) continue;
      const double d = tab_.cost(c);
      if (d <= config_.optimality_tol) continue;
      if (bland_) return c;
      if (d > best_cost) {
        best_cost = d;
        best = c;
      }
    }
    return best;
  }

  std::size_t choose_leaving(std::size_t enter) const {
    std::size_t best = kNoRow;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < tab_.rows(); ++r) {
      const double a = tab_.at(r, enter);
      if (a <= kPivotTol) continue;
      const double ratio = tab_.rhs(r) / a;
      if (best == kNoRow) {
        best_ratio = ratio;
        best = r;
        continue;
      }
      const double tie = 1e-12 * std::max(1.0, std::abs(best_ratio));
      if (ratio < best_ratio - tie) {
        best_ratio = ratio;
        best = r;
      } else if (ratio <= best_ratio + tie &&
                 tab_.basis()[r] < tab_.basis()[best]) {
        best = r;
      }
    }
    return best;
  }

  Tableau& tab_;
  const std::vector<bool>& artificial_;
  const SolverConfig& config_;
  std::size_t budget_;
  std::size_t pivots_ = 0;
  std::size_t degenerate_run_ = 0;
  bool bland_ = false;
};

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double a : v) m = std::max(m, std::abs(a));
  return m;
}

}  // namespace

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kInfeasible:
      return "infeasible";
    case SolveStatus::kUnbounded:
      return "unbounded";
  }
  return "unknown";
}

void LpProblem::validate() const {
  const std::size_t n = objective.size();
  if (ineq_matrix.rows() > 0 && ineq_matrix.cols() != n) {
    throw std::invalid_argument("LP: inequality matrix has " +
                                std::to_string(ineq_matrix.cols()) +
                                " columns, objective has " + std::to_string(n));
  }
  if (ineq_rhs.size() != ineq_matrix.rows()) {
    throw std::invalid_argument("LP: rhs length does not match row count");
  }
  if (!eq_row.empty() && eq_row.size() != n) {
    throw std::invalid_argument("LP: equality row length mismatch");
  }
  for (double v : objective) {
    if (!std::isfinite(v)) throw std::invalid_argument("LP: non-finite objective");
  }
  for (std::size_t r = 0; r < ineq_matrix.rows(); ++r) {
    for (double v : ineq_matrix.row(r)) {
      if (!std::isfinite(v)) throw std::invalid_argument("LP: non-finite entry in A");
    }
    if (std::isnan(ineq_rhs[r]) || ineq_rhs[r] == -std::numeric_limits<double>::infinity()) {
      throw std::invalid_argument("LP: rhs must be a number or +inf");
    }
  }
}

void SolverConfig::validate() const {
  if (!(feasibility_tol > 0.0) || !(optimality_tol > 0.0)) {
    throw std::invalid_argument("solver tolerances must be positive");
  }
}

Solution solve(const LpProblem& problem, const SolverConfig& config) {
  problem.validate();
  config.validate();

  const std::size_t n = problem.variables();
  const double sense = problem.sense == Sense::kMaximize ? 1.0 : -1.0;

  Solution out;
  out.ineq_duals.assign(problem.ineq_matrix.rows(), 0.0);

  // Collect active rows; drop +inf rows and all-zero rows that hold trivially.
  std::vector<RowInfo> rows;
  for (std::size_t r = 0; r < problem.ineq_matrix.rows(); ++r) {
    const double q = problem.ineq_rhs[r];
    if (q == std::numeric_limits<double>::infinity()) continue;
    const double s = max_abs(problem.ineq_matrix.row(r));
    if (s == 0.0) {
      if (q < -config.feasibility_tol) return out;  // 0 <= negative
      continue;
    }
    RowInfo info;
    info.original = r;
    info.scale = s;
    info.sign = q / s >= 0.0 ? 1.0 : -1.0;
    rows.push_back(info);
  }
  if (!problem.eq_row.empty()) {
    const double s = max_abs(problem.eq_row);
    if (s == 0.0) return out;  // 0 = 1
    RowInfo info;
    info.original = kEqRow;
    info.scale = s;
    info.sign = 1.0;
    rows.push_back(info);
  }

  // Column layout: structural | slacks | artificials.
  std::size_t cols = n;
  for (auto& info : rows) {
    if (info.original != kEqRow) info.slack = cols++;
  }
  for (auto& info : rows) {
    if (info.original == kEqRow || info.sign < 0.0) info.artificial = cols++;
  }
  std::vector<bool> artificial(cols, false);
  for (const auto& info : rows) {
    if (info.artificial != kNoRow) artificial[info.artificial] = true;
  }

  Tableau tab(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const RowInfo& info = rows[r];
    const double k = info.sign / info.scale;
    if (info.original == kEqRow) {
      for (std::size_t c = 0; c < n; ++c) tab.at(r, c) = k * problem.eq_row[c];
      tab.rhs(r) = k;
    } else {
      const auto a = problem.ineq_matrix.row(info.original);
      for (std::size_t c = 0; c < n; ++c) tab.at(r, c) = k * a[c];
      tab.at(r, info.slack) = info.sign;
      tab.rhs(r) = k * problem.ineq_rhs[info.original];
    }
    if (info.artificial != kNoRow) {
      tab.at(r, info.artificial) = 1.0;
      tab.basis()[r] = info.artificial;
    } else {
      tab.basis()[r] = info.slack;
    }
  }

  const std::size_t dim = rows.size() + cols;
  const std::size_t budget =
      config.max_pivots > 0 ? config.max_pivots : 10 * dim * dim + 100;
  Simplex simplex(tab, artificial, config, budget);

  // Phase 1: maximize -sum(artificials).
  double infeasibility_scale = 1.0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!artificial[tab.basis()[r]]) continue;
    for (std::size_t c = 0; c <= cols; ++c) {
      if (c < cols && artificial[c]) continue;
      tab.at(rows.size(), c) += tab.at(r, c);
    }
    infeasibility_scale = std::max(infeasibility_scale, tab.rhs(r));
  }
  if (simplex.run(true) == PhaseResult::kUnbounded) {
    throw std::logic_error("phase 1 of the simplex cannot be unbounded");
  }
  // The objective row's rhs now holds the remaining sum of artificials.
  if (tab.at(rows.size(), cols) > config.feasibility_tol * infeasibility_scale) {
    out.pivots = simplex.pivots();
    return out;
  }

  // Drive zero-level artificials out of the basis where possible; rows where
  // no structural or slack column has a usable entry are redundant.
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!artificial[tab.basis()[r]]) continue;
    std::size_t best = kNoRow;
    double best_abs = kDriveOutTol;
    for (std::size_t c = 0; c < cols; ++c) {
      if (artificial[c]) continue;
      if (std::abs(tab.at(r, c)) > best_abs) {
        best_abs = std::abs(tab.at(r, c));
        best = c;
      }
    }
    if (best != kNoRow) {
      tab.rhs(r) = 0.0;
      tab.pivot(r, best);
    }
  }

  // Phase 2 objective row.
  std::vector<double> c_full(cols, 0.0);
  for (std::size_t c = 0; c < n; ++c) c_full[c] = sense * problem.objective[c];
  for (std::size_t c = 0; c <= cols; ++c) {
    double d = c < cols ? c_full[c] : 0.0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      d -= c_full[tab.basis()[r]] * tab.at(r, c);
    }
    tab.at(rows.size(), c) = d;
  }
  const PhaseResult phase2 = simplex.run(false);
  out.pivots = simplex.pivots();
  if (phase2 == PhaseResult::kUnbounded) {
    out.status = SolveStatus::kUnbounded;
    return out;
  }

  out.status = SolveStatus::kOptimal;
  out.x.assign(n, 0.0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t b = tab.basis()[r];
    if (b < n) out.x[b] = std::max(0.0, tab.rhs(r));
  }
  double value = 0.0;
  for (std::size_t c = 0; c < n; ++c) value += problem.objective[c] * out.x[c];
  out.objective_value = value;

  for (const RowInfo& info : rows) {
    if (info.original == kEqRow) {
      out.eq_dual = -info.sign * tab.cost(info.artificial) / info.scale;
    } else {
      out.ineq_duals[info.original] = -tab.cost(info.slack) / info.scale;
    }
  }
  return out;
}

double max_constraint_violation(const LpProblem& problem,
                                std::span<const double> x) {
  double worst = 0.0;
  for (double v : x) worst = std::max(worst, -v);
  for (std::size_t r = 0; r < problem.ineq_matrix.rows(); ++r) {
    const double q = problem.ineq_rhs[r];
    if (q == std::numeric_limits<double>::infinity()) continue;
    double lhs = 0.0;
    double magnitude = 0.0;
    const auto a = problem.ineq_matrix.row(r);
    for (std::size_t c = 0; c < x.size(); ++c) {
      lhs += a[c] * x[c];
      magnitude += std::abs(a[c] * x[c]);
    }
    worst = std::max(worst, (lhs - q) / std::max({1.0, std::abs(q), magnitude}));
  }
  if (!problem.eq_row.empty()) {
    double lhs = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) lhs += problem.eq_row[c] * x[c];
    worst = std::max(worst, std::abs(lhs - 1.0));
  }
  return worst;
}

LpProblem restrict_columns(const LpProblem& problem,
                           std::span<const std::size_t> columns) {
  LpProblem sub;
  sub.sense = problem.sense;
  sub.ineq_rhs = problem.ineq_rhs;
  sub.ineq_matrix = Matrix(problem.ineq_matrix.rows(), columns.size());
  for (std::size_t k = 0; k < columns.size(); ++k) {
    const std::size_t c = columns[k];
    sub.objective.push_back(problem.objective.at(c));
    if (!problem.eq_row.empty()) sub.eq_row.push_back(problem.eq_row.at(c));
    for (std::size_t r = 0; r < problem.ineq_matrix.rows(); ++r) {
      sub.ineq_matrix(r, k) = problem.ineq_matrix(r, c);
    }
  }
  return sub;
}

}  // namespace dmpath
