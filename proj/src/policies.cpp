#include "pap/policies.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>

#include "pap/error.hpp"
#include "pap/lp.hpp"

namespace pap {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kMaxScenarioSize = 1e5;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSlackTol = 1e-9;
constexpr int kPurgeAge = 5;

void check_dims(const Instance& instance, Index m) {
  instance.validate();
  if (instance.m() != m) throw Error(ErrorCode::DimensionMismatch, "instance and uncertainty dimensions differ");
}

// Column layout of the affine master: x | P (row-major) | q | z.
struct AffineLayout {
  Index n, m;
  Index x(Index i) const { return i; }
  Index P(Index i, Index k) const { return n + i * m + k; }
  Index q(Index i) const { return n + n * m + i; }
  Index z() const { return n + n * m + n; }
  Index size() const { return n + n * m + n + 1; }
};

LinearProgramD::Row cover_cut(const Instance& inst, const AffineLayout& L, Index j, const VectorXd& h) {
  VectorXd a = VectorXd::Zero(L.size());
  for (Index i = 0; i < L.n; ++i) {
    a[L.x(i)] = inst.A(j, i);
    const double b = inst.B(j, i);
    if (b == 0) continue;
    a[L.q(i)] = b;
    for (Index k = 0; k < L.m; ++k) a[L.P(i, k)] = b * h[k];
  }
  return {a, Relation::kGreaterEqual, h[j]};
}

LinearProgramD::Row nonneg_cut(const AffineLayout& L, Index i, const VectorXd& h) {
  VectorXd a = VectorXd::Zero(L.size());
  for (Index k = 0; k < L.m; ++k) a[L.P(i, k)] = h[k];
  a[L.q(i)] = 1.0;
  return {a, Relation::kGreaterEqual, 0.0};
}

LinearProgramD::Row objective_cut(const Instance& inst, const AffineLayout& L, const VectorXd& h) {
  VectorXd a = VectorXd::Zero(L.size());
  for (Index i = 0; i < L.n; ++i) {
    const double d = inst.d[i];
    if (d == 0) continue;
    a[L.q(i)] = d;
    for (Index k = 0; k < L.m; ++k) a[L.P(i, k)] = d * h[k];
  }
  a[L.z()] = -1.0;
  return {a, Relation::kLessEqual, 0.0};
}

struct Separation {
  VectorXd cover_support, nonneg_support;  // support values of each family
  double objective_support = 0.0;
  VectorXd cover, nonneg;                  // violation amounts
  std::vector<VectorXd> cover_h, nonneg_h;
  double objective_violation = 0.0;
  VectorXd objective_h;
  double worst_second_stage = 0.0;
  double max_violation() const {
    double v = objective_violation;
    if (cover.size()) v = std::max(v, cover.maxCoeff());
    if (nonneg.size()) v = std::max(v, nonneg.maxCoeff());
    return v;
  }
};

Separation separate(const Instance& inst, const UncertaintySet& set, const VectorXd& x, const MatrixXd& P,
                    const VectorXd& q, double z) {
  const Index m = inst.m(), n = inst.n();
  Separation s;
  s.cover_support.resize(m);
  s.nonneg_support.resize(n);
  s.cover_h.resize(m);
  s.nonneg_h.resize(n);
  const MatrixXd BP = inst.B * P;
  for (Index j = 0; j < m; ++j) {
    VectorXd w = -BP.row(j).transpose();
    w[j] += 1.0;
    SupportResult r = support(set, w);
    s.cover_support[j] = r.value;
    s.cover_h[j] = std::move(r.argmax);
  }
  for (Index i = 0; i < n; ++i) {
    SupportResult r = support(set, -P.row(i).transpose());
    s.nonneg_support[i] = r.value;
    s.nonneg_h[i] = std::move(r.argmax);
  }
  SupportResult r = support(set, P.transpose() * inst.d);
  s.objective_support = r.value;
  s.objective_h = std::move(r.argmax);
  s.cover = s.cover_support - inst.A * x - inst.B * q;
  s.nonneg = s.nonneg_support - q;
  s.worst_second_stage = inst.d.dot(q) + s.objective_support;
  s.objective_violation = s.worst_second_stage - z;
  return s;
}

// Cheapest (x, q) for a fixed P given its support values; every family then
// holds exactly, so the result is a feasible affine policy.
bool reoptimize_static(const Instance& inst, const Separation& sep, VectorXd& x, VectorXd& q, double& z) {
  const Index m = inst.m(), n = inst.n();
  LinearProgramD lp(2 * n);
  lp.objective << inst.c, inst.d;
  lp.lower.tail(n) = sep.nonneg_support;
  for (Index j = 0; j < m; ++j) {
    VectorXd row(2 * n);
    row << inst.A.row(j).transpose(), inst.B.row(j).transpose();
    lp.add_row(std::move(row), Relation::kGreaterEqual, sep.cover_support[j]);
  }
  LpSolutionD sol;
  try {
    sol = solve_lp(lp);
  } catch (const Error&) {
    return false;
  }
  if (sol.status != LpStatus::kOptimal) return false;
  x = sol.primal.head(n).cwiseMax(0.0);
  q = sol.primal.tail(n).cwiseMax(sep.nonneg_support);
  // Absorb LP round-off so the cover rows hold exactly.
  const VectorXd row_sums = inst.A.rowwise().sum();
  const VectorXd short_by = (sep.cover_support - inst.A * x - inst.B * q).cwiseMax(0.0);
  if (short_by.maxCoeff() > 0) {
    if (!(row_sums.array() > 0).all() || (inst.A.array() < 0).any()) return false;
    x.array() += short_by.cwiseQuotient(row_sums).maxCoeff();
  }
  z = inst.d.dot(q) + sep.objective_support;
  return true;
}

// min d'y  s.t.  B y >= h - A x, y >= 0.
std::pair<double, VectorXd> cheapest_recourse(const Instance& inst, const VectorXd& x, const VectorXd& h) {
  const VectorXd need = h - inst.A * x;
  if ((need.array() <= 0).all()) return {0.0, VectorXd::Zero(inst.n())};
  LinearProgramD lp(inst.n());
  lp.objective = inst.d;
  for (Index j = 0; j < inst.m(); ++j) lp.add_row(inst.B.row(j).transpose(), Relation::kGreaterEqual, need[j]);
  const LpSolutionD sol = solve_lp(lp);
  if (sol.status == LpStatus::kInfeasible)
    throw Error(ErrorCode::LpInfeasible, "recourse matrix cannot cover some scenario");
  if (sol.status != LpStatus::kOptimal) throw Error(ErrorCode::NumericalBreakdown, "recourse LP is unbounded");
  return {sol.objective, sol.primal};
}

}  // namespace

ScenarioLpSolution solve_scenario_lp(const Instance& inst, const MatrixXd& scenarios) {
  inst.validate();
  const Index m = inst.m(), n = inst.n();
  if (scenarios.rows() != m) throw Error(ErrorCode::DimensionMismatch, "scenario length must equal m");
  std::vector<Index> active;
  for (Index s = 0; s < scenarios.cols(); ++s)
    if ((scenarios.col(s).array() > 0).any()) active.push_back(s);
  const Index ns = static_cast<Index>(active.size());
  const Index nv = n + n * ns + 1;
  const Index zcol = nv - 1;

  LinearProgramD lp(nv);
  lp.objective.head(n) = inst.c;
  lp.objective[zcol] = 1.0;
  for (Index s = 0; s < ns; ++s) {
    const Index off = n + s * n;
    for (Index j = 0; j < m; ++j) {
      VectorXd row = VectorXd::Zero(nv);
      row.head(n) = inst.A.row(j).transpose();
      row.segment(off, n) = inst.B.row(j).transpose();
      lp.add_row(std::move(row), Relation::kGreaterEqual, scenarios(j, active[s]));
    }
    VectorXd row = VectorXd::Zero(nv);
    row[zcol] = 1.0;
    row.segment(off, n) = -inst.d;
    lp.add_row(std::move(row), Relation::kGreaterEqual, 0.0);
  }
  const LpSolutionD sol = solve_lp(lp);
  if (sol.status == LpStatus::kInfeasible)
    throw Error(ErrorCode::LpInfeasible, "recourse matrix cannot cover some scenario");
  if (sol.status != LpStatus::kOptimal) throw Error(ErrorCode::NumericalBreakdown, "scenario LP is unbounded");

  ScenarioLpSolution out;
  out.x = sol.primal.head(n);
  out.recourse = MatrixXd::Zero(n, scenarios.cols());
  for (Index s = 0; s < ns; ++s) out.recourse.col(active[s]) = sol.primal.segment(n + s * n, n);
  out.z = sol.primal[zcol];
  out.objective = sol.objective;
  out.iterations = sol.iterations;
  return out;
}

SimplexArSolution solve_simplex_ar(const Instance& instance, const DominatingSimplex& simplex) {
  check_dims(instance, simplex.dim());
  const ScenarioLpSolution s = solve_scenario_lp(instance, simplex.vertex_matrix());
  SimplexArSolution out;
  out.x = s.x;
  out.recourse = s.recourse;
  out.z = s.z;
  out.objective = s.objective;
  out.dominating_objective = simplex.hull_factor() * s.objective;
  return out;
}

ExactArSolution exact_ar(const Instance& instance, const std::vector<VectorXd>& vertices) {
  instance.validate();
  if (static_cast<double>(vertices.size()) * static_cast<double>(instance.n()) > kMaxScenarioSize)
    throw Error(ErrorCode::CombinatorialBlowup, "vertex LP exceeds 10^5 recourse variables");
  const Index total = static_cast<Index>(vertices.size());
  MatrixXd scenarios(instance.m(), total);
  for (Index s = 0; s < total; ++s) {
    if (vertices[static_cast<size_t>(s)].size() != instance.m())
      throw Error(ErrorCode::DimensionMismatch, "vertex length must equal m");
    scenarios.col(s) = vertices[static_cast<size_t>(s)];
  }

  // Scenario generation: solve over a subset, add the vertices whose best
  // recourse costs more than z, and stop when none does.
  const Index batch = std::max<Index>(8, instance.m());
  std::vector<Index> order(static_cast<size_t>(total));
  for (Index s = 0; s < total; ++s) order[static_cast<size_t>(s)] = s;
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return scenarios.col(a).sum() > scenarios.col(b).sum(); });
  std::vector<bool> in_subset(static_cast<size_t>(total), false);
  std::vector<Index> subset(order.begin(), order.begin() + std::min(total, 2 * batch));
  for (Index s : subset) in_subset[static_cast<size_t>(s)] = true;

  while (true) {
    MatrixXd active(instance.m(), static_cast<Index>(subset.size()));
    for (size_t k = 0; k < subset.size(); ++k) active.col(static_cast<Index>(k)) = scenarios.col(subset[k]);
    const ScenarioLpSolution sol = solve_scenario_lp(instance, active);
    ExactArSolution out{sol.objective, sol.x, MatrixXd::Zero(instance.n(), total)};
    for (size_t k = 0; k < subset.size(); ++k) out.recourse.col(subset[k]) = sol.recourse.col(static_cast<Index>(k));

    std::vector<std::pair<double, Index>> violated;
    for (Index s = 0; s < total; ++s) {
      if (in_subset[static_cast<size_t>(s)]) continue;
      const auto [cost, y] = cheapest_recourse(instance, sol.x, scenarios.col(s));
      out.recourse.col(s) = y;
      if (cost > sol.z + 1e-9 * (1.0 + std::abs(sol.z))) violated.emplace_back(cost, s);
    }
    if (violated.empty()) return out;
    std::sort(violated.begin(), violated.end(), std::greater<>());
    for (size_t k = 0; k < violated.size() && k < static_cast<size_t>(batch); ++k) {
      subset.push_back(violated[k].second);
      in_subset[static_cast<size_t>(violated[k].second)] = true;
    }
  }
}

PiecewisePolicy make_pap(const DominatingSimplex& simplex, const SimplexArSolution& solution) {
  return make_pap(simplex, solution, simplex.direct || simplex.shifted ? PapMode::Direct : PapMode::Doubled);
}

PiecewisePolicy make_pap(const DominatingSimplex& simplex, const SimplexArSolution& solution, PapMode mode) {
  if (mode == PapMode::Direct && !(simplex.direct || simplex.shifted))
    throw Error(ErrorCode::InvalidArgument, "direct policy needs a directly dominating simplex");
  if (solution.recourse.cols() != simplex.dim() + 1)
    throw Error(ErrorCode::DimensionMismatch, "recourse must have m + 1 columns");
  PiecewisePolicy p;
  p.simplex = simplex;
  p.mode = mode;
  p.recourse = solution.recourse;
  if (mode == PapMode::Doubled) {
    p.x = 2.0 * solution.x;
    p.objective_bound = 2.0 * solution.objective;
  } else {
    p.x = solution.x;
    p.objective_bound = solution.objective;
  }
  return p;
}

VectorXd pap_recourse(const PiecewisePolicy& policy, const Eigen::Ref<const VectorXd>& h) {
  const DominatingSimplex& s = policy.simplex;
  const Index m = s.dim();
  if (h.size() != m) throw Error(ErrorCode::DimensionMismatch, "scenario length must equal m");
  if (policy.mode == PapMode::Doubled) {
    const VectorXd c = (h - s.beta * s.v).cwiseMax(0.0).cwiseQuotient(s.axis()) / s.beta;
    return policy.recourse.leftCols(m) * c + policy.recourse.col(m);
  }
  return policy.recourse * dominating_point(s, h).weights;
}

PapWorstCost pap_worst_cost(const Instance& instance, const PiecewisePolicy& policy, const UncertaintySet& set,
                            int samples, std::uint64_t seed) {
  check_dims(instance, set.dim());
  const DominatingSimplex& s = policy.simplex;
  const Index m = s.dim();
  const VectorXd vertex_cost = policy.recourse.transpose() * instance.d;
  const double first = instance.c.dot(policy.x);
  PapWorstCost out;

  auto cost_at = [&](const VectorXd& h) { return first + instance.d.dot(pap_recourse(policy, h)); };
  for (const VectorXd& h : sample(set, samples, seed)) out.sampled_lower = std::max(out.sampled_lower, cost_at(h));

  // Both forms are c'x + d'y_base + sum_i w_i (h_i - beta v_i)^+ on the set.
  VectorXd w;
  if (policy.mode == PapMode::Doubled) {
    w = vertex_cost.head(m).cwiseQuotient(s.axis()) / s.beta;
  } else if (s.shifted) {
    w = (vertex_cost.head(m).array() - vertex_cost[m]).matrix().cwiseQuotient(s.axis()) / s.beta;
  }
  const VectorXd u = s.beta * s.v;
  if (w.size() == m && (w.array() >= 0).all() && strategy_available(set, u, w, MaxPlusSumStrategy::Auto)) {
    out.value = first + vertex_cost[m] + max_plus_sum(set, u, w).value;
    out.exact = true;
  } else {
    out.value = policy.objective_bound;
  }
  out.sampled_lower = std::min(out.sampled_lower, out.value);
  return out;
}

AffinePolicy solve_affine(const Instance& inst, const UncertaintySet& set, const AffineOptions& options) {
  check_dims(inst, set.dim());
  if (!(options.tol > 0)) throw Error(ErrorCode::InvalidArgument, "affine tolerance must be positive");
  const Index m = inst.m(), n = inst.n();
  const AffineLayout L{n, m};
  const long cap = options.max_cuts > 0 ? options.max_cuts : 200 * static_cast<long>(m);

  LinearProgramD master(L.size());
  master.objective.head(n) = inst.c;
  master.objective[L.z()] = 1.0;
  master.lower.segment(n, n * m + n).setConstant(-kInf);

  std::vector<VectorXd> seeds{VectorXd::Zero(m)};
  for (Index i = 0; i < m; ++i) seeds.push_back(support(set, VectorXd::Unit(m, i)).argmax);
  for (const VectorXd& h : seeds) {
    for (Index j = 0; j < m; ++j) master.rows.push_back(cover_cut(inst, L, j, h));
    for (Index i = 0; i < n; ++i) master.rows.push_back(nonneg_cut(L, i, h));
    master.rows.push_back(objective_cut(inst, L, h));
  }

  IncrementalLp<double> session(master, {LpOrientation::kDual});
  AffinePolicy out;
  AffinePolicy best;  // best certified-feasible policy seen so far
  best.objective = kInf;
  MatrixXd P(n, m);
  auto cuts_at = [&](const Separation& sep) {
    std::vector<LinearProgramD::Row> cuts;
    for (Index j = 0; j < m; ++j)
      if (sep.cover[j] > options.tol) cuts.push_back(cover_cut(inst, L, j, sep.cover_h[j]));
    for (Index i = 0; i < n; ++i)
      if (sep.nonneg[i] > options.tol) cuts.push_back(nonneg_cut(L, i, sep.nonneg_h[i]));
    if (sep.objective_violation > options.tol) cuts.push_back(objective_cut(inst, L, sep.objective_h));
    return cuts;
  };
  auto consider = [&](const Separation& sep, const MatrixXd& P_candidate) {
    VectorXd x, q;
    double z = 0.0;
    if (!reoptimize_static(inst, sep, x, q, z) || !(inst.c.dot(x) + z < best.objective)) return;
    best.x = std::move(x);
    best.P = P_candidate;
    best.q = std::move(q);
    best.z = z;
    best.objective = inst.c.dot(best.x) + z;
  };
  // Separation runs at a point between the master optimum and the incumbent;
  // a cut violated there also cuts off the master optimum.
  double blend = 0.5;
  std::vector<int> age;  // consecutive rounds each master row has been slack
  for (;;) {
    const LpSolutionD& sol = session.solve();
    if (sol.status == LpStatus::kInfeasible)
      throw Error(ErrorCode::LpInfeasible, "affine master is infeasible");
    if (sol.status != LpStatus::kOptimal) throw Error(ErrorCode::NumericalBreakdown, "affine master is unbounded");
    ++out.rounds;
    out.x = sol.primal.head(n).cwiseMax(0.0);
    for (Index i = 0; i < n; ++i) P.row(i) = sol.primal.segment(L.P(i, 0), m).transpose();
    out.P = P;
    out.q = sol.primal.segment(L.q(0), n);
    out.lower_bound = std::max(out.lower_bound, sol.objective);

    const Separation sep = separate(inst, set, out.x, P, out.q, sol.primal[L.z()]);
    out.max_violation = sep.max_violation();
    out.z = sep.worst_second_stage;
    out.objective = inst.c.dot(out.x) + out.z;
    // Line search toward the incumbent for a better feasible policy.
    if (std::isfinite(best.objective)) {
      const MatrixXd P_best = best.P;
      for (double t : {0.75, 0.5, 0.25}) {
        const MatrixXd P_t = t * P + (1.0 - t) * P_best;
        consider(separate(inst, set, out.x, P_t, out.q, 0.0), P_t);
      }
    }
    consider(sep, P);
    {  // retire cuts that have stayed slack for several rounds
      const auto& rows = session.spec().rows;
      age.resize(rows.size(), 0);
      std::vector<std::size_t> stale;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const double activity = rows[r].coeffs.dot(sol.primal);
        const double slack = rows[r].relation == Relation::kLessEqual ? rows[r].rhs - activity : activity - rows[r].rhs;
        age[r] = slack > kSlackTol * (1.0 + std::abs(rows[r].rhs)) ? age[r] + 1 : 0;
        if (age[r] >= kPurgeAge) stale.push_back(r);
      }
      const std::vector<std::size_t> removed = session.remove_rows(stale);
      for (auto it = removed.rbegin(); it != removed.rend(); ++it) age.erase(age.begin() + static_cast<long>(*it));
    }
    const double gap = best.objective - out.lower_bound;
    if (out.max_violation <= options.tol || gap <= options.tol * (1.0 + std::abs(best.objective))) {
      out.converged = true;
      break;
    }

    std::vector<LinearProgramD::Row> cuts;
    if (std::isfinite(best.objective) && blend < 1.0) {
      const VectorXd x_mid = blend * out.x + (1.0 - blend) * best.x;
      const MatrixXd P_mid = blend * P + (1.0 - blend) * best.P;
      const VectorXd q_mid = blend * out.q + (1.0 - blend) * best.q;
      const double z_mid = blend * sol.primal[L.z()] + (1.0 - blend) * best.z;
      const Separation mid = separate(inst, set, x_mid, P_mid, q_mid, z_mid);
      cuts = cuts_at(mid);
      if (cuts.empty()) {
        consider(mid, P_mid);
        blend = std::min(1.0, blend + 0.25);
      }
    }
    if (cuts.empty()) cuts = cuts_at(sep);
    if (out.cuts + static_cast<long>(cuts.size()) > cap) break;
    out.cuts += static_cast<long>(cuts.size());
    session.add_rows(cuts);
  }

  if (std::isfinite(best.objective)) {
    best.lower_bound = out.lower_bound;
    best.cuts = out.cuts;
    best.rounds = out.rounds;
    best.converged = out.converged;
    best.repaired = true;
    best.max_violation = 0.0;
    out = std::move(best);
  }
  if (!out.converged && options.throw_on_cap)
    throw Error(ErrorCode::IterationCapExceeded,
                "affine cut cap " + std::to_string(cap) + " reached; incumbent " + std::to_string(out.objective) +
                    ", lower bound " + std::to_string(out.lower_bound) + ", max violation " +
                    std::to_string(out.max_violation));
  return out;
}

}  // namespace pap
