#include "pap/lp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bounded_simplex.hpp"
#include "pap/error.hpp"

namespace pap {

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal: return "Optimal";
    case LpStatus::kInfeasible: return "Infeasible";
    case LpStatus::kUnbounded: return "Unbounded";
  }
  return "?";
}

template <typename Scalar>
void LinearProgram<Scalar>::validate() const {
  const Eigen::Index n = num_vars();
  if (lower.size() != n || upper.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "bound vectors must match the variable count");
  if (!objective.allFinite()) throw Error(ErrorCode::InvalidArgument, "objective has NaN/Inf");
  for (Eigen::Index j = 0; j < n; ++j) {
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] == std::numeric_limits<Scalar>::infinity() ||
        upper[j] == -std::numeric_limits<Scalar>::infinity())
      throw Error(ErrorCode::InvalidArgument, "invalid bound on variable " + std::to_string(j));
    if (lower[j] > upper[j])
      throw Error(ErrorCode::InvalidArgument, "lower bound exceeds upper bound on variable " + std::to_string(j));
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].coeffs.size() != n)
      throw Error(ErrorCode::DimensionMismatch, "row " + std::to_string(i) + " has wrong width");
    if (!rows[i].coeffs.allFinite() || !std::isfinite(rows[i].rhs))
      throw Error(ErrorCode::InvalidArgument, "row " + std::to_string(i) + " has NaN/Inf");
  }
}

template <typename Scalar>
Scalar max_violation(const LinearProgram<Scalar>& spec,
                     const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x) {
  Scalar worst = 0;
  for (const auto& row : spec.rows) {
    const Scalar activity = row.coeffs.dot(x);
    Scalar gap = 0;
    switch (row.relation) {
      case Relation::kGreaterEqual: gap = row.rhs - activity; break;
      case Relation::kLessEqual: gap = activity - row.rhs; break;
      case Relation::kEqual: gap = std::abs(activity - row.rhs); break;
    }
    worst = std::max(worst, gap);
  }
  worst = std::max(worst, (spec.lower - x).maxCoeff());
  worst = std::max(worst, (x - spec.upper).maxCoeff());
  return worst;
}

namespace {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
detail::EngineTolerances<Scalar> engine_tolerances(const LpOptions& options) {
  detail::EngineTolerances<Scalar> tol;
  tol.dual = Scalar(options.optimality_tol);
  return tol;
}

template <typename Scalar>
long iteration_cap(const LinearProgram<Scalar>& spec) {
  return 50L * (spec.num_rows() + spec.num_vars()) + 100;
}

template <typename Scalar>
void row_bounds(const typename LinearProgram<Scalar>::Row& row, Scalar& lo, Scalar& up) {
  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  lo = row.relation == Relation::kLessEqual ? -inf : row.rhs;
  up = row.relation == Relation::kGreaterEqual ? inf : row.rhs;
}

template <typename Scalar>
LpSolution<Scalar> solve_primal_orientation(const LinearProgram<Scalar>& spec,
                                            const LpOptions& options) {
  const Eigen::Index m = spec.num_rows(), n = spec.num_vars();
  Mat<Scalar> a(m, n);
  Vec<Scalar> rlo(m), rup(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    a.row(i) = spec.rows[i].coeffs.transpose();
    row_bounds<Scalar>(spec.rows[i], rlo[i], rup[i]);
  }
  detail::BoundedSimplex<Scalar> engine(a, spec.objective, spec.lower, spec.upper, rlo, rup,
                                        engine_tolerances<Scalar>(options));
  engine.set_iteration_cap(iteration_cap(spec));
  LpSolution<Scalar> out;
  const detail::EngineStatus status = engine.run();
  out.iterations = engine.iterations();
  if (status == detail::EngineStatus::kInfeasible) {
    out.status = LpStatus::kInfeasible;
    return out;
  }
  if (status == detail::EngineStatus::kUnbounded) {
    out.status = LpStatus::kUnbounded;
    return out;
  }
  out.status = LpStatus::kOptimal;
  out.primal = engine.structural_values();
  out.objective = spec.objective.dot(out.primal);
  out.duals = engine.row_duals();
  return out;
}

// Dual of the bound-shifted problem
//   min c'x' s.t. G x' >= g (or = g), x'_j >= 0 or free,
// solved as min -g'l s.t. G'l <= c' (= c' for free x'), l >= 0 (free for
// equality rows). The primal x' is minus the engine's row multipliers.
template <typename Scalar>
class DualForm {
 public:
  using Row = typename LinearProgram<Scalar>::Row;

  DualForm(const LinearProgram<Scalar>& spec, const LpOptions& options) {
    const Scalar inf = std::numeric_limits<Scalar>::infinity();
    const Eigen::Index n = spec.num_vars();
    shift_ = Vec<Scalar>::Zero(n);
    sign_ = Vec<Scalar>::Ones(n);
    free_.assign(n, false);
    std::vector<Eigen::Index> bounded;
    for (Eigen::Index j = 0; j < n; ++j) {
      const bool lo_finite = std::isfinite(spec.lower[j]);
      const bool up_finite = std::isfinite(spec.upper[j]);
      if (lo_finite) {
        shift_[j] = spec.lower[j];
        if (up_finite) bounded.push_back(j);
      } else if (up_finite) {
        shift_[j] = spec.upper[j];
        sign_[j] = -1;
      } else {
        free_[j] = true;
      }
    }

    const Eigen::Index k = spec.num_rows();
    const Eigen::Index nb = static_cast<Eigen::Index>(bounded.size());
    Mat<Scalar> h(n, k + nb);
    Vec<Scalar> cost(k + nb), lo(k + nb), up(k + nb);
    for (Eigen::Index i = 0; i < k; ++i) {
      Vec<Scalar> col;
      Scalar c, l, u;
      transform_row(spec.rows[i], col, c, l, u);
      h.col(i) = col;
      cost[i] = c;
      lo[i] = l;
      up[i] = u;
    }
    for (Eigen::Index b = 0; b < nb; ++b) {
      const Eigen::Index j = bounded[b];
      h.col(k + b).setZero();
      h(j, k + b) = -1;
      cost[k + b] = spec.upper[j] - spec.lower[j];
      lo[k + b] = 0;
      up[k + b] = inf;
    }
    row_columns_.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) row_columns_[i] = i;
    next_column_ = k + nb;

    const Vec<Scalar> c_shifted = spec.objective.cwiseProduct(sign_);
    Vec<Scalar> rlo(n), rup(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      rup[j] = c_shifted[j];
      rlo[j] = free_[j] ? c_shifted[j] : -inf;
    }
    engine_ = std::make_unique<detail::BoundedSimplex<Scalar>>(h, cost, lo, up, rlo, rup,
                                                               engine_tolerances<Scalar>(options));
  }

  void add_rows(const std::vector<Row>& rows) {
    const Eigen::Index n = shift_.size();
    const Eigen::Index k = static_cast<Eigen::Index>(rows.size());
    Mat<Scalar> h(n, k);
    Vec<Scalar> cost(k), lo(k), up(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      Vec<Scalar> col;
      transform_row(rows[i], col, cost[i], lo[i], up[i]);
      h.col(i) = col;
      row_columns_.push_back(next_column_++);
    }
    engine_->add_columns(h, cost, lo, up);
  }

  // Removes the given rows (ascending) whose dual columns are nonbasic and
  // returns the removed ones.
  std::vector<std::size_t> remove_rows(const std::vector<std::size_t>& rows) {
    std::vector<bool> drop(engine_->structurals(), false);
    std::vector<bool> removed_row(row_columns_.size(), false);
    std::vector<std::size_t> removed;
    for (std::size_t r : rows) {
      const Eigen::Index col = row_columns_[r];
      if (engine_->is_basic_structural(col)) continue;
      drop[col] = true;
      removed_row[r] = true;
      removed.push_back(r);
    }
    if (removed.empty()) return removed;
    engine_->remove_columns(drop);
    std::vector<Eigen::Index> shift(drop.size() + 1, 0);
    for (std::size_t j = 0; j < drop.size(); ++j) shift[j + 1] = shift[j] + (drop[j] ? 1 : 0);
    std::vector<Eigen::Index> kept;
    kept.reserve(row_columns_.size() - removed.size());
    for (std::size_t r = 0; r < row_columns_.size(); ++r)
      if (!removed_row[r]) kept.push_back(row_columns_[r] - shift[row_columns_[r]]);
    row_columns_ = std::move(kept);
    next_column_ -= static_cast<Eigen::Index>(removed.size());
    return removed;
  }

  // Returns false when the engine cannot decide the primal status by itself.
  bool run(const LinearProgram<Scalar>& spec, LpSolution<Scalar>& out) {
    engine_->set_iteration_cap(iteration_cap(spec));
    const long before = engine_->iterations();
    const detail::EngineStatus status = engine_->run();
    out.iterations = engine_->iterations() - before;
    if (status == detail::EngineStatus::kUnbounded) {
      out.status = LpStatus::kInfeasible;
      return true;
    }
    if (status == detail::EngineStatus::kInfeasible) return false;

    const Vec<Scalar>& y = engine_->row_duals();
    out.status = LpStatus::kOptimal;
    out.primal = shift_ - sign_.cwiseProduct(y);
    out.objective = spec.objective.dot(out.primal);
    const Vec<Scalar> lambda = engine_->structural_values();
    Vec<Scalar> duals(spec.num_rows());
    for (Eigen::Index i = 0; i < spec.num_rows(); ++i) {
      const Scalar value = lambda[row_columns_[i]];
      duals[i] = spec.rows[i].relation == Relation::kLessEqual ? -value : value;
    }
    out.duals = duals;
    return true;
  }

 private:
  void transform_row(const Row& row, Vec<Scalar>& col, Scalar& cost, Scalar& lo, Scalar& up) const {
    const Scalar inf = std::numeric_limits<Scalar>::infinity();
    Scalar g = row.rhs - row.coeffs.dot(shift_);
    col = row.coeffs.cwiseProduct(sign_);
    if (row.relation == Relation::kLessEqual) {
      col = -col;
      g = -g;
    }
    cost = -g;
    lo = row.relation == Relation::kEqual ? -inf : Scalar(0);
    up = inf;
  }

  Vec<Scalar> shift_;
  Vec<Scalar> sign_;
  std::vector<bool> free_;
  std::vector<Eigen::Index> row_columns_;
  Eigen::Index next_column_ = 0;
  std::unique_ptr<detail::BoundedSimplex<Scalar>> engine_;
};

template <typename Scalar>
LpStatus feasibility_status(const LinearProgram<Scalar>& spec, const LpOptions& options) {
  LinearProgram<Scalar> probe = spec;
  probe.objective.setZero();
  return solve_primal_orientation(probe, options).status == LpStatus::kOptimal ? LpStatus::kUnbounded
                                                                              : LpStatus::kInfeasible;
}

template <typename Scalar>
bool use_dual(const LinearProgram<Scalar>& spec, const LpOptions& options) {
  switch (options.orientation) {
    case LpOrientation::kPrimal: return false;
    case LpOrientation::kDual: return true;
    case LpOrientation::kAuto: break;
  }
  return 2 * spec.num_rows() > 3 * spec.num_vars();
}

template <typename Scalar>
bool acceptable(const LinearProgram<Scalar>& spec, const LpSolution<Scalar>& sol,
                const LpOptions& options) {
  if (sol.status != LpStatus::kOptimal) return true;
  return sol.primal.allFinite() && max_violation(spec, sol.primal) <= Scalar(options.feasibility_tol);
}

template <typename Scalar>
LpSolution<Scalar> solve_oriented(const LinearProgram<Scalar>& spec, const LpOptions& options,
                                  bool dual) {
  if (!dual) return solve_primal_orientation(spec, options);
  DualForm<Scalar> form(spec, options);
  LpSolution<Scalar> out;
  if (!form.run(spec, out)) out.status = feasibility_status(spec, options);
  return out;
}

}  // namespace

template <typename Scalar>
LpSolution<Scalar> solve_lp(const LinearProgram<Scalar>& spec, const LpOptions& options) {
  spec.validate();
  const bool dual = use_dual(spec, options);
  LpSolution<Scalar> sol;
  try {
    sol = solve_oriented(spec, options, dual);
    if (acceptable(spec, sol, options)) return sol;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NumericalBreakdown) throw;
  }
  sol = solve_oriented(spec, options, !dual);
  if (!acceptable(spec, sol, options))
    throw Error(ErrorCode::NumericalBreakdown, "solution fails verification in both orientations");
  return sol;
}

template <typename Scalar>
LpSolution<Scalar> resolve_with_rows(const LinearProgram<Scalar>& spec,
                                     const std::vector<typename LinearProgram<Scalar>::Row>& new_rows,
                                     const LpOptions& options) {
  IncrementalLp<Scalar> session(spec, options);
  session.solve();
  session.add_rows(new_rows);
  return session.solve();
}

template <typename Scalar>
struct IncrementalLp<Scalar>::Session {
  DualForm<Scalar> form;
};

template <typename Scalar>
IncrementalLp<Scalar>::IncrementalLp(LinearProgram<Scalar> spec, LpOptions options)
    : spec_(std::move(spec)), options_(options) {
  spec_.validate();
}

template <typename Scalar>
IncrementalLp<Scalar>::~IncrementalLp() = default;
template <typename Scalar>
IncrementalLp<Scalar>::IncrementalLp(IncrementalLp&&) noexcept = default;
template <typename Scalar>
IncrementalLp<Scalar>& IncrementalLp<Scalar>::operator=(IncrementalLp&&) noexcept = default;

template <typename Scalar>
void IncrementalLp<Scalar>::add_rows(const std::vector<Row>& rows) {
  for (const Row& row : rows) {
    if (row.coeffs.size() != spec_.num_vars())
      throw Error(ErrorCode::DimensionMismatch, "new row has wrong width");
    spec_.rows.push_back(row);
    pending_.push_back(row);
  }
}

template <typename Scalar>
std::vector<std::size_t> IncrementalLp<Scalar>::remove_rows(std::vector<std::size_t> rows) {
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  const std::size_t live = spec_.rows.size() - pending_.size();
  while (!rows.empty() && rows.back() >= live) rows.pop_back();
  std::vector<std::size_t> removed = session_ ? session_->form.remove_rows(rows) : rows;
  for (auto it = removed.rbegin(); it != removed.rend(); ++it) spec_.rows.erase(spec_.rows.begin() + *it);
  return removed;
}

template <typename Scalar>
const LpSolution<Scalar>& IncrementalLp<Scalar>::solve() {
  if (!use_dual(spec_, options_)) {
    pending_.clear();
    session_.reset();
    last_ = solve_lp(spec_, options_);
    return last_;
  }
  try {
    if (!session_) {
      session_.reset(new Session{DualForm<Scalar>(spec_, options_)});
    } else if (!pending_.empty()) {
      session_->form.add_rows(pending_);
    }
    pending_.clear();
    LpSolution<Scalar> sol;
    if (!session_->form.run(spec_, sol)) sol.status = feasibility_status(spec_, options_);
    if (acceptable(spec_, sol, options_)) {
      last_ = std::move(sol);
      return last_;
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NumericalBreakdown) throw;
  }
  session_.reset();
  pending_.clear();
  last_ = solve_lp(spec_, options_);
  return last_;
}

template struct LinearProgram<double>;
template LpSolution<double> solve_lp(const LinearProgram<double>&, const LpOptions&);
template LpSolution<double> resolve_with_rows(const LinearProgram<double>&,
                                              const std::vector<LinearProgram<double>::Row>&,
                                              const LpOptions&);
template double max_violation(const LinearProgram<double>&, const Eigen::VectorXd&);
template class IncrementalLp<double>;

}  // namespace pap
