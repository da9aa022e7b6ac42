#pragma once

#include <Eigen/Dense>

#include <limits>
#include <memory>
#include <optional>
#include <vector>

namespace pap {

enum class Relation { kGreaterEqual, kLessEqual, kEqual };
enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

// kAuto solves the LP dual when rows outnumber columns by more than 3:2.
enum class LpOrientation { kAuto, kPrimal, kDual };

const char* to_string(LpStatus status);

template <typename Scalar>
struct LinearProgram {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  struct Row {
    Vector coeffs;
    Relation relation;
    Scalar rhs;
  };

  explicit LinearProgram(Eigen::Index num_vars = 0)
      : objective(Vector::Zero(num_vars)),
        lower(Vector::Zero(num_vars)),
        upper(Vector::Constant(num_vars, std::numeric_limits<Scalar>::infinity())) {}

  Eigen::Index num_vars() const { return objective.size(); }
  Eigen::Index num_rows() const { return static_cast<Eigen::Index>(rows.size()); }

  void add_row(Vector coeffs, Relation relation, Scalar rhs) {
    rows.push_back({std::move(coeffs), relation, rhs});
  }

  // Throws DimensionMismatch or InvalidArgument.
  void validate() const;

  Vector objective;  // minimized
  std::vector<Row> rows;
  Vector lower;
  Vector upper;
};

template <typename Scalar>
struct LpSolution {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  LpStatus status = LpStatus::kInfeasible;
  Vector primal;
  Scalar objective = 0;
  std::optional<Vector> duals;  // one multiplier per row, sign follows the relation
  long iterations = 0;
};

struct LpOptions {
  LpOrientation orientation = LpOrientation::kAuto;
  double feasibility_tol = 1e-7;
  double optimality_tol = 1e-8;
};

template <typename Scalar>
LpSolution<Scalar> solve_lp(const LinearProgram<Scalar>& spec, const LpOptions& options = {});

template <typename Scalar>
LpSolution<Scalar> resolve_with_rows(const LinearProgram<Scalar>& spec,
                                     const std::vector<typename LinearProgram<Scalar>::Row>& new_rows,
                                     const LpOptions& options = {});

// Largest violation of rows and bounds at x.
template <typename Scalar>
Scalar max_violation(const LinearProgram<Scalar>& spec,
                     const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x);

// Row-growing LP session for constraint generation. In the dual orientation new
// rows become new dual columns, so the previous basis stays feasible.
template <typename Scalar>
class IncrementalLp {
 public:
  using Row = typename LinearProgram<Scalar>::Row;

  explicit IncrementalLp(LinearProgram<Scalar> spec, LpOptions options = {});
  ~IncrementalLp();
  IncrementalLp(IncrementalLp&&) noexcept;
  IncrementalLp& operator=(IncrementalLp&&) noexcept;

  const LpSolution<Scalar>& solve();
  void add_rows(const std::vector<Row>& rows);
  // Drops listed rows whose dual columns are nonbasic in the current basis;
  // returns the removed indices in ascending order. Pending rows stay.
  std::vector<std::size_t> remove_rows(std::vector<std::size_t> rows);
  const LinearProgram<Scalar>& spec() const { return spec_; }

 private:
  struct Session;

  LinearProgram<Scalar> spec_;
  LpOptions options_;
  std::unique_ptr<Session> session_;
  std::vector<Row> pending_;
  LpSolution<Scalar> last_;
};

using LinearProgramD = LinearProgram<double>;
using LpSolutionD = LpSolution<double>;

extern template struct LinearProgram<double>;
extern template LpSolution<double> solve_lp(const LinearProgram<double>&, const LpOptions&);
extern template LpSolution<double> resolve_with_rows(const LinearProgram<double>&,
                                                     const std::vector<LinearProgram<double>::Row>&,
                                                     const LpOptions&);
extern template double max_violation(const LinearProgram<double>&, const Eigen::VectorXd&);
extern template class IncrementalLp<double>;

}  // namespace pap
