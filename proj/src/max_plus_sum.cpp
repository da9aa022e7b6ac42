#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "pap/domination.hpp"
#include "pap/error.hpp"
#include "pap/lp.hpp"

namespace pap {

namespace {

using Eigen::Index;
using Eigen::VectorXd;

constexpr int kMaxSubsetDim = 20;
constexpr long kMaxNodes = 2'000'000;

bool uniform(const VectorXd& x) {
  if (x.size() == 0) return true;
  const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
  return (x.array() - x[0]).abs().maxCoeff() <= 1e-12 * scale;
}

double plus_sum(const VectorXd& h, const VectorXd& u, const VectorXd& w) {
  return w.dot((h - u).cwiseMax(0.0));
}

bool pi_applicable(const UncertaintySet& set, const VectorXd& u, const VectorXd& w) {
  if (const auto* s = set.as<ScaledSpi>())
    return uniform(u.cwiseQuotient(s->lambda)) && uniform(w.cwiseProduct(s->lambda));
  return set.is_permutation_invariant() && uniform(u) && uniform(w);
}

// Optimal points put gamma(k) on k coordinates.
MaxPlusSumResult pi_enumeration(const UncertaintySet& set, const VectorXd& u, const VectorXd& w) {
  if (const auto* s = set.as<ScaledSpi>()) {
    MaxPlusSumResult inner = pi_enumeration(*s->inner, u.cwiseQuotient(s->lambda), w.cwiseProduct(s->lambda));
    inner.argmax = inner.argmax.cwiseProduct(s->lambda);
    return inner;
  }
  const Index m = set.dim();
  MaxPlusSumResult out{0.0, VectorXd::Zero(m), MaxPlusSumStrategy::PiEnumeration, 0};
  if (m == 0) return out;
  int best_k = 0;
  double best_gamma = 0.0;
  for (int k = 1; k <= m; ++k) {
    const double g = gamma(set, k);
    const double value = w[0] * k * std::max(0.0, g - u[0]);
    ++out.nodes;
    if (value > out.value) {
      out.value = value;
      best_k = k;
      best_gamma = g;
    }
  }
  out.argmax.head(best_k).setConstant(best_gamma);
  return out;
}

MaxPlusSumResult vertex_scan(const ExplicitConvHull& hull, const VectorXd& u, const VectorXd& w) {
  const Index m = u.size();
  MaxPlusSumResult out{0.0, VectorXd::Zero(m), MaxPlusSumStrategy::VertexScan, 0};
  for (const VectorXd& p : hull.points) {
    const double value = plus_sum(p, u, w);
    ++out.nodes;
    if (value > out.value) {
      out.value = value;
      out.argmax = p;
    }
  }
  if (hull.orbit && hull.orbit->count > 0) {
    VectorXd gain = w.cwiseProduct((VectorXd::Constant(m, hull.orbit->value) - u).cwiseMax(0.0));
    std::vector<Index> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return gain[a] > gain[b]; });
    VectorXd nu = VectorXd::Zero(m);
    double value = 0.0;
    for (int t = 0; t < hull.orbit->count; ++t) {
      nu[order[t]] = hull.orbit->value;
      value += gain[order[t]];
    }
    ++out.nodes;
    if (value > out.value) {
      out.value = value;
      out.argmax = nu;
    }
  }
  return out;
}

MaxPlusSumResult subset_oracle(const UncertaintySet& set, const VectorXd& u, const VectorXd& w) {
  const Index m = set.dim();
  MaxPlusSumResult out{0.0, VectorXd::Zero(m), MaxPlusSumStrategy::SubsetOracle, 0};
  std::vector<Index> active;
  for (Index i = 0; i < m; ++i)
    if (w[i] > 0) active.push_back(i);
  const Index na = static_cast<Index>(active.size());
  VectorXd ws = VectorXd::Zero(m);
  for (unsigned long mask = 1; mask < (1ul << na); ++mask) {
    ws.setZero();
    double offset = 0.0;
    for (Index b = 0; b < na; ++b)
      if (mask & (1ul << b)) {
        ws[active[b]] = w[active[b]];
        offset += w[active[b]] * u[active[b]];
      }
    const SupportResult s = support(set, ws);
    const double value = s.value - offset;
    ++out.nodes;
    if (value > out.value) {
      out.value = value;
      out.argmax = s.argmax;
    }
  }
  return out;
}

// Depth-first branch and bound on the binary selectors of
//   max sum w_i z_i
//   z_i <= h_i - u_i + M_i (1 - x_i),  z_i <= M_i x_i,  z >= 0,  x binary,  h in U,
// with the valid strengthening z_i <= h_i - u_i x_i and z_i <= (ub_i - u_i) x_i.
MaxPlusSumResult milp(const UncertaintySet& set, const VectorXd& u, const VectorXd& w) {
  const Index m = set.dim();
  const HRep rep = set.hrep();
  VectorXd ub = rep.upper;
  for (Index i = 0; i < m; ++i)
    if (!std::isfinite(ub[i])) ub[i] = support(set, VectorXd::Unit(m, i)).value;

  std::vector<Index> active;
  for (Index i = 0; i < m; ++i)
    if (w[i] > 0 && u[i] < ub[i]) active.push_back(i);
  const Index na = static_cast<Index>(active.size());

  MaxPlusSumResult out{0.0, VectorXd::Zero(m), MaxPlusSumStrategy::Milp, 0};
  if (na == 0) return out;

  const Index nv = m + 2 * na;
  LinearProgramD base(nv);
  base.upper.head(m) = ub;
  for (Index k = 0; k < na; ++k) {
    const Index i = active[k];
    const Index z = m + k, x = m + na + k;
    const double big = std::max(1.0, ub[i]);
    base.objective[z] = -w[i];
    base.upper[x] = 1.0;
    VectorXd row = VectorXd::Zero(nv);
    row[z] = 1.0;
    row[i] = -1.0;
    row[x] = big;
    base.add_row(row, Relation::kLessEqual, big - u[i]);
    row.setZero();
    row[z] = 1.0;
    row[x] = -big;
    base.add_row(row, Relation::kLessEqual, 0.0);
    row.setZero();
    row[z] = 1.0;
    row[i] = -1.0;
    row[x] = u[i];
    base.add_row(row, Relation::kLessEqual, 0.0);
    row.setZero();
    row[z] = 1.0;
    row[x] = -(ub[i] - u[i]);
    base.add_row(row, Relation::kLessEqual, 0.0);
  }
  for (Index r = 0; r < rep.G.rows(); ++r) {
    VectorXd row = VectorXd::Zero(nv);
    row.head(m) = rep.G.row(r).transpose();
    base.add_row(row, Relation::kLessEqual, rep.g[r]);
  }

  struct Node {
    VectorXd lo, hi;
  };
  std::vector<Node> stack{{VectorXd::Zero(na), VectorXd::Ones(na)}};
  while (!stack.empty()) {
    Node node = std::move(stack.back());
    stack.pop_back();
    if (++out.nodes > kMaxNodes) throw Error(ErrorCode::IterationCapExceeded, "branch-and-bound node cap reached");
    LinearProgramD lp = base;
    lp.lower.tail(na) = node.lo;
    lp.upper.tail(na) = node.hi;
    const LpSolutionD sol = solve_lp(lp);
    if (sol.status != LpStatus::kOptimal) continue;
    const double bound = -sol.objective;
    const double slack = 1e-9 * (1.0 + std::abs(out.value));
    if (bound <= out.value + slack) continue;

    const VectorXd h = sol.primal.head(m).cwiseMax(0.0).cwiseMin(ub);
    const double value = plus_sum(h, u, w);
    if (value > out.value) {
      out.value = value;
      out.argmax = h;
    }
    if (bound <= out.value + slack) continue;

    Index pick = -1;
    double closest = 0.5;
    for (Index k = 0; k < na; ++k) {
      const double x = sol.primal[m + na + k];
      const double frac = x - std::floor(x);
      if (frac <= 1e-9 || frac >= 1.0 - 1e-9) continue;
      if (std::abs(frac - 0.5) < closest) {
        closest = std::abs(frac - 0.5);
        pick = k;
      }
    }
    if (pick < 0) continue;
    Node down = node, up = node;
    down.hi[pick] = 0.0;
    up.lo[pick] = 1.0;
    if (sol.primal[m + na + pick] >= 0.5) {
      stack.push_back(std::move(down));
      stack.push_back(std::move(up));
    } else {
      stack.push_back(std::move(up));
      stack.push_back(std::move(down));
    }
  }
  return out;
}

}  // namespace

const char* to_string(MaxPlusSumStrategy s) {
  switch (s) {
    case MaxPlusSumStrategy::Auto: return "Auto";
    case MaxPlusSumStrategy::PiEnumeration: return "PiEnumeration";
    case MaxPlusSumStrategy::Milp: return "Milp";
    case MaxPlusSumStrategy::SubsetOracle: return "SubsetOracle";
    case MaxPlusSumStrategy::VertexScan: return "VertexScan";
  }
  return "?";
}

bool strategy_available(const UncertaintySet& set, const VectorXd& u, const VectorXd& w,
                        MaxPlusSumStrategy strategy) {
  switch (strategy) {
    case MaxPlusSumStrategy::Auto:
      return pi_applicable(set, u, w) || set.as<ExplicitConvHull>() || set.has_hrep() ||
             set.dim() <= kMaxSubsetDim;
    case MaxPlusSumStrategy::PiEnumeration: return pi_applicable(set, u, w);
    case MaxPlusSumStrategy::Milp: return set.has_hrep();
    case MaxPlusSumStrategy::SubsetOracle: return set.dim() <= kMaxSubsetDim;
    case MaxPlusSumStrategy::VertexScan: return set.as<ExplicitConvHull>() != nullptr;
  }
  return false;
}

MaxPlusSumResult max_plus_sum(const UncertaintySet& set, const VectorXd& u, const VectorXd& w,
                              MaxPlusSumStrategy strategy) {
  if (u.size() != set.dim() || w.size() != set.dim())
    throw Error(ErrorCode::DimensionMismatch, "threshold and weight must match the set dimension");
  if (!u.allFinite() || !w.allFinite()) throw Error(ErrorCode::InvalidArgument, "threshold or weight has NaN/Inf");
  if ((u.array() < 0).any() || (w.array() < 0).any())
    throw Error(ErrorCode::InvalidArgument, "threshold and weight must be nonnegative");
  if (strategy == MaxPlusSumStrategy::Auto) {
    if (pi_applicable(set, u, w))
      strategy = MaxPlusSumStrategy::PiEnumeration;
    else if (set.as<ExplicitConvHull>())
      strategy = MaxPlusSumStrategy::VertexScan;
    else if (set.has_hrep())
      strategy = MaxPlusSumStrategy::Milp;
    else if (set.dim() <= kMaxSubsetDim)
      strategy = MaxPlusSumStrategy::SubsetOracle;
    else
      throw Error(ErrorCode::StrategyUnavailable, "no exact max-plus-sum strategy for " + set.family_name());
  }
  if (!strategy_available(set, u, w, strategy))
    throw Error(ErrorCode::StrategyUnavailable,
                std::string(to_string(strategy)) + " does not apply to " + set.family_name());
  switch (strategy) {
    case MaxPlusSumStrategy::PiEnumeration: return pi_enumeration(set, u, w);
    case MaxPlusSumStrategy::Milp: return milp(set, u, w);
    case MaxPlusSumStrategy::SubsetOracle: return subset_oracle(set, u, w);
    case MaxPlusSumStrategy::VertexScan: return vertex_scan(*set.as<ExplicitConvHull>(), u, w);
    case MaxPlusSumStrategy::Auto: break;
  }
  throw Error(ErrorCode::StrategyUnavailable, "unresolved strategy");
}

}  // namespace pap
