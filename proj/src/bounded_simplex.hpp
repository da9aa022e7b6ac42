#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "pap/error.hpp"

namespace pap::detail {

enum class EngineStatus { kOptimal, kInfeasible, kUnbounded };

template <typename Scalar>
struct EngineTolerances {
  Scalar primal = Scalar(1e-9);
  Scalar dual = Scalar(1e-8);
  Scalar pivot = Scalar(1e-9);
  Scalar degenerate_step = Scalar(1e-12);
  int refactor_every = 100;
  int bland_after = 1000;
};

// Revised primal simplex on
//   min cost'x  s.t.  row_lower <= A x <= row_upper,  lower <= x <= upper.
// Row activities are explicit variables r = A x with column -e_i, so every
// variable carries bounds and the right-hand side is zero. Index layout is
// [row activities | structurals]; structural columns can be appended between
// runs without disturbing the current basis.
template <typename Scalar>
class BoundedSimplex {
 public:
  using Index = Eigen::Index;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  BoundedSimplex(const Matrix& a, const Vector& cost, const Vector& lower, const Vector& upper,
                 const Vector& row_lower, const Vector& row_upper,
                 EngineTolerances<Scalar> tol = {})
      : m_(a.rows()), n_(a.cols()), tol_(tol) {
    a_ = a;
    const Index total = m_ + n_;
    cost_ = Vector::Zero(total);
    lo_.resize(total);
    up_.resize(total);
    x_ = Vector::Zero(total);
    state_.assign(total, State::kAtLower);
    cost_.tail(n_) = cost;
    lo_.head(m_) = row_lower;
    up_.head(m_) = row_upper;
    lo_.tail(n_) = lower;
    up_.tail(n_) = upper;
    for (Index j = m_; j < total; ++j) place_at_bound(j);
    weight_ = Vector::Ones(total);
    head_.resize(m_);
    for (Index i = 0; i < m_; ++i) {
      head_[i] = i;
      state_[i] = State::kBasic;
    }
    needs_refactor_ = true;
  }

  Index rows() const { return m_; }
  Index structurals() const { return n_; }
  long iterations() const { return iterations_; }
  void set_iteration_cap(long cap) { iteration_cap_ = cap; }

  // New columns enter nonbasic at a finite bound (or zero when free).
  void add_columns(const Matrix& cols, const Vector& cost, const Vector& lower,
                   const Vector& upper) {
    const Index k = cols.cols();
    if (k == 0) return;
    if (n_ + k > a_.cols()) {
      Index capacity = std::max<Index>(2 * a_.cols(), n_ + k);
      Matrix grown(m_, capacity);
      grown.leftCols(n_) = a_.leftCols(n_);
      a_.swap(grown);
    }
    a_.middleCols(n_, k) = cols;
    const Index old_total = m_ + n_;
    n_ += k;
    cost_.conservativeResize(m_ + n_);
    lo_.conservativeResize(m_ + n_);
    up_.conservativeResize(m_ + n_);
    x_.conservativeResize(m_ + n_);
    cost_.tail(k) = cost;
    lo_.tail(k) = lower;
    up_.tail(k) = upper;
    state_.resize(m_ + n_, State::kAtLower);
    weight_.conservativeResize(m_ + n_);
    weight_.tail(k).setOnes();
    d_.resize(0);
    for (Index j = old_total; j < m_ + n_; ++j) place_at_bound(j);
    if (!x_.tail(k).isZero()) needs_recompute_ = true;
  }

  bool is_basic_structural(Index j) const { return state_[m_ + j] == State::kBasic; }

  // Drops nonbasic structural columns; `drop` is indexed by structural.
  void remove_columns(const std::vector<bool>& drop) {
    std::vector<Index> remap(m_ + n_, -1);
    for (Index i = 0; i < m_; ++i) remap[i] = i;
    Index next = 0;
    for (Index j = 0; j < n_; ++j) {
      if (drop[j]) {
        if (state_[m_ + j] == State::kBasic)
          throw Error(ErrorCode::InvalidArgument, "cannot remove a basic column");
        if (x_[m_ + j] != 0) needs_recompute_ = true;
        continue;
      }
      remap[m_ + j] = m_ + next;
      if (next != j) a_.col(next) = a_.col(j);
      ++next;
    }
    for (Index k = m_; k < m_ + n_; ++k) {
      const Index to = remap[k];
      if (to < 0 || to == k) continue;
      cost_[to] = cost_[k];
      lo_[to] = lo_[k];
      up_[to] = up_[k];
      x_[to] = x_[k];
      weight_[to] = weight_[k];
      state_[to] = state_[k];
    }
    n_ = next;
    cost_.conservativeResize(m_ + n_);
    lo_.conservativeResize(m_ + n_);
    up_.conservativeResize(m_ + n_);
    x_.conservativeResize(m_ + n_);
    weight_.conservativeResize(m_ + n_);
    state_.resize(m_ + n_);
    for (Index& h : head_) h = remap[h];
  }

  // Phase two keeps reduced costs current with the pivot row, which also
  // feeds the Devex reference weights; phase one reprices every iteration.
  EngineStatus run() {
    if (needs_refactor_) refactor();
    if (needs_recompute_) recompute_basics();

    Vector cb(m_), y(m_), alpha(m_), column(m_), rho(m_), row;
    int degenerate_run = 0;
    bool bland = false;
    bool priced = false;  // d_ holds phase-two reduced costs
    bool stale = false;   // d_ was updated incrementally since the last pricing
    const long start = iterations_;

    for (;;) {
      if (iteration_cap_ > 0 && iterations_ - start >= iteration_cap_)
        throw Error(ErrorCode::NumericalBreakdown, "simplex iteration cap reached");

      bool phase1 = false;
      for (Index p = 0; p < m_; ++p) {
        const Index k = head_[p];
        Scalar c = 0;
        if (x_[k] < lo_[k] - tol_.primal) {
          c = -1;
          phase1 = true;
        } else if (x_[k] > up_[k] + tol_.primal) {
          c = 1;
          phase1 = true;
        }
        cb[p] = c;
      }
      if (phase1 || !priced) {
        if (!phase1)
          for (Index p = 0; p < m_; ++p) cb[p] = cost_[head_[p]];
        y = cb;
        btran(y);
        price(y, phase1, d_);
        priced = !phase1;
        stale = false;
      }

      const Index q = choose_entering(d_, bland);
      if (q < 0) {
        if (!fresh_ || stale) {
          refactor();
          recompute_basics();
          priced = false;
          continue;
        }
        if (phase1) return EngineStatus::kInfeasible;
        duals_ = y;
        return EngineStatus::kOptimal;
      }

      const Scalar dir = d_[q] < 0 ? Scalar(1) : Scalar(-1);
      load_column(q, column);
      alpha = column;
      ftran(alpha);

      Index leave = -1;
      Scalar leave_bound = 0;
      Scalar theta = 0;
      bool flip = false;
      ratio_test(alpha, dir, q, phase1, bland, leave, leave_bound, theta, flip);

      if (leave < 0 && !flip) {
        if (!fresh_) {
          refactor();
          recompute_basics();
          priced = false;
          continue;
        }
        if (phase1) throw Error(ErrorCode::NumericalBreakdown, "unbounded phase-one ray");
        return EngineStatus::kUnbounded;
      }

      ++iterations_;
      fresh_ = false;
      x_[q] += dir * theta;
      for (Index p = 0; p < m_; ++p) x_[head_[p]] -= dir * theta * alpha[p];

      if (flip) {
        state_[q] = (dir > 0) ? State::kAtUpper : State::kAtLower;
        x_[q] = (dir > 0) ? up_[q] : lo_[q];
      } else {
        const Index k = head_[leave];
        rho = inv_.row(leave).transpose();
        row.noalias() = a_.leftCols(n_).transpose() * rho;
        const Scalar arq = alpha[leave];
        const Scalar step = d_[q] / arq;
        const Scalar wq = weight_[q];
        for (Index j = 0; j < m_ + n_; ++j) {
          if (state_[j] == State::kBasic || j == q) continue;
          const Scalar arj = j < m_ ? -rho[j] : row[j - m_];
          if (arj == 0) continue;
          d_[j] -= step * arj;
          const Scalar ratio = arj / arq;
          weight_[j] = std::max(weight_[j], ratio * ratio * wq);
        }
        d_[q] = 0;
        d_[k] = -step;
        stale = true;
        weight_[k] = std::max(wq / (arq * arq), Scalar(1));
        if (!(weight_.maxCoeff() < kWeightReset)) weight_.setOnes();

        x_[k] = leave_bound;
        state_[k] = (leave_bound == up_[k] && leave_bound != lo_[k]) ? State::kAtUpper
                                                                     : State::kAtLower;
        head_[leave] = q;
        state_[q] = State::kBasic;
        update_inverse(leave, alpha);
        if (++updates_ >= tol_.refactor_every) {
          refactor();
          recompute_basics();
          priced = false;
        }
      }

      if (theta <= tol_.degenerate_step) {
        if (++degenerate_run >= tol_.bland_after) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }
    }
  }

  Vector structural_values() const { return x_.tail(n_); }
  Vector row_activities() const { return x_.head(m_); }
  const Vector& row_duals() const { return duals_; }

 private:
  enum class State : unsigned char { kBasic, kAtLower, kAtUpper };
  static constexpr Scalar kWeightReset = Scalar(1e8);


  void place_at_bound(Index j) {
    if (std::isfinite(lo_[j])) {
      x_[j] = lo_[j];
      state_[j] = State::kAtLower;
    } else if (std::isfinite(up_[j])) {
      x_[j] = up_[j];
      state_[j] = State::kAtUpper;
    } else {
      x_[j] = 0;
      state_[j] = State::kAtLower;
    }
  }

  void load_column(Index j, Vector& out) const {
    if (j < m_) {
      out.setZero();
      out[j] = -1;
    } else {
      out = a_.col(j - m_);
    }
  }

  void refactor() {
    Matrix basis(m_, m_);
    Vector column(m_);
    for (Index p = 0; p < m_; ++p) {
      load_column(head_[p], column);
      basis.col(p) = column;
    }
    const Eigen::PartialPivLU<Matrix> lu(basis);
    if (m_ > 0 && !(lu.rcond() > Scalar(1e-14)))
      throw Error(ErrorCode::NumericalBreakdown, "basis matrix is numerically singular");
    inv_ = lu.inverse();
    updates_ = 0;
    needs_refactor_ = false;
    fresh_ = true;
  }

  void recompute_basics() {
    Vector rhs = Vector::Zero(m_);
    for (Index j = 0; j < m_ + n_; ++j) {
      if (state_[j] == State::kBasic || x_[j] == 0) continue;
      if (j < m_)
        rhs[j] += x_[j];
      else
        rhs.noalias() -= a_.col(j - m_) * x_[j];
    }
    ftran(rhs);
    for (Index p = 0; p < m_; ++p) x_[head_[p]] = rhs[p];
    needs_recompute_ = false;
  }

  void ftran(Vector& v) const {
    if (m_ == 0) return;
    v = inv_ * v;
  }

  void btran(Vector& v) const {
    if (m_ == 0) return;
    v = inv_.transpose() * v;
  }

  // Product-form step on the explicit inverse: row `leave` is scaled by the
  // pivot and eliminated from every other row.
  void update_inverse(Index leave, const Vector& alpha) {
    const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> pivot_row = inv_.row(leave) / alpha[leave];
    Vector factor = alpha;
    factor[leave] -= 1;
    inv_.noalias() -= factor * pivot_row;
  }

  void price(const Vector& y, bool phase1, Vector& d) const {
    const Index total = m_ + n_;
    d.resize(total);
    for (Index i = 0; i < m_; ++i) d[i] = (phase1 ? Scalar(0) : cost_[i]) + y[i];
    if (phase1)
      d.tail(n_).noalias() = -(a_.leftCols(n_).transpose() * y);
    else
      d.tail(n_).noalias() = cost_.tail(n_) - a_.leftCols(n_).transpose() * y;
  }

  Index choose_entering(const Vector& d, bool bland) const {
    Index best = -1;
    Scalar best_score = 0;
    for (Index j = 0; j < m_ + n_; ++j) {
      if (state_[j] == State::kBasic) continue;
      if (lo_[j] == up_[j]) continue;
      const Scalar dj = d[j];
      bool eligible = false;
      const bool free_var = !std::isfinite(lo_[j]) && !std::isfinite(up_[j]);
      if (free_var)
        eligible = std::abs(dj) > tol_.dual;
      else if (state_[j] == State::kAtLower)
        eligible = dj < -tol_.dual;
      else
        eligible = dj > tol_.dual;
      if (!eligible) continue;
      if (bland) return j;
      const Scalar score = dj * dj / weight_[j];
      if (best < 0 || score > best_score) {
        best_score = score;
        best = j;
      }
    }
    return best;
  }

  // Harris two-pass ratio test; Bland mode uses the textbook minimum ratio with
  // smallest-index ties. Infeasible basics (phase one) block only at the bound
  // they currently violate.
  void ratio_test(const Vector& alpha, Scalar dir, Index q, bool phase1, bool bland,
                  Index& leave, Scalar& leave_bound, Scalar& theta, bool& flip) const {
    const Scalar inf = std::numeric_limits<Scalar>::infinity();
    const Scalar flip_distance =
        (std::isfinite(lo_[q]) && std::isfinite(up_[q])) ? up_[q] - lo_[q] : inf;

    auto breakpoint = [&](Index p, Scalar relax, Scalar& ratio, Scalar& bound) -> bool {
      const Scalar rate = -dir * alpha[p];
      if (std::abs(alpha[p]) <= tol_.pivot) return false;
      const Index k = head_[p];
      const Scalar xk = x_[k];
      if (rate < 0) {
        if (phase1 && xk > up_[k] + tol_.primal) {
          bound = up_[k];
        } else if (std::isfinite(lo_[k]) && !(phase1 && xk < lo_[k] - tol_.primal)) {
          bound = lo_[k];
        } else {
          return false;
        }
        ratio = (xk - bound + relax) / (-rate);
      } else {
        if (phase1 && xk < lo_[k] - tol_.primal) {
          bound = lo_[k];
        } else if (std::isfinite(up_[k]) && !(phase1 && xk > up_[k] + tol_.primal)) {
          bound = up_[k];
        } else {
          return false;
        }
        ratio = (bound - xk + relax) / rate;
      }
      return true;
    };

    leave = -1;
    flip = false;
    Scalar ratio = 0, bound = 0;

    if (bland) {
      Scalar best = inf;
      for (Index p = 0; p < m_; ++p)
        if (breakpoint(p, 0, ratio, bound)) best = std::min(best, std::max<Scalar>(ratio, 0));
      if (flip_distance <= best) {
        flip = true;
        theta = flip_distance;
        return;
      }
      if (!std::isfinite(best)) return;
      for (Index p = 0; p < m_; ++p) {
        if (!breakpoint(p, 0, ratio, bound)) continue;
        if (std::max<Scalar>(ratio, 0) > best + tol_.degenerate_step) continue;
        if (leave < 0 || head_[p] < head_[leave]) {
          leave = p;
          leave_bound = bound;
        }
      }
      theta = best;
      return;
    }

    Scalar limit = inf;
    for (Index p = 0; p < m_; ++p)
      if (breakpoint(p, tol_.primal, ratio, bound)) limit = std::min(limit, ratio);

    if (flip_distance <= limit) {
      flip = true;
      theta = flip_distance;
      return;
    }
    if (!std::isfinite(limit)) return;

    Scalar best_pivot = 0;
    for (Index p = 0; p < m_; ++p) {
      if (!breakpoint(p, 0, ratio, bound)) continue;
      if (ratio <= limit && std::abs(alpha[p]) > best_pivot) {
        best_pivot = std::abs(alpha[p]);
        leave = p;
        leave_bound = bound;
        theta = std::max<Scalar>(ratio, 0);
      }
    }
  }

  Index m_;
  Index n_;
  EngineTolerances<Scalar> tol_;
  Matrix a_;
  Vector cost_, lo_, up_, x_, duals_;
  Vector d_;       // reduced costs
  Vector weight_;  // Devex reference weights
  std::vector<State> state_;
  std::vector<Index> head_;
  Matrix inv_;  // explicit basis inverse
  int updates_ = 0;
  long iterations_ = 0;
  long iteration_cap_ = 0;
  bool needs_refactor_ = true;
  bool needs_recompute_ = true;
  bool fresh_ = false;
};

}  // namespace pap::detail
