#include "pap/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "pap/error.hpp"
#include "pap/lp.hpp"

namespace pap {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxVertices = 1e6;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double pnorm(const VectorXd& h, double p) {
  if (std::isinf(p)) return h.cwiseAbs().maxCoeff();
  if (p == 1.0) return h.cwiseAbs().sum();
  if (p == 2.0) return h.norm();
  double s = 0;
  for (Index i = 0; i < h.size(); ++i) s += std::pow(std::abs(h[i]), p);
  return std::pow(s, 1.0 / p);
}

// argmax of w'h over {h >= 0, ||h||_p <= radius} for w >= 0.
SupportResult pnorm_support(const VectorXd& w, double p, double radius) {
  SupportResult out{0.0, VectorXd::Zero(w.size())};
  if (w.maxCoeff() <= 0) return out;
  if (p == 1.0) {
    Index i;
    out.value = radius * w.maxCoeff(&i);
    out.argmax[i] = radius;
    return out;
  }
  const double dual = p / (p - 1.0);
  const double norm = pnorm(w, dual);
  for (Index i = 0; i < w.size(); ++i)
    out.argmax[i] = w[i] > 0 ? radius * std::pow(w[i] / norm, dual - 1.0) : 0.0;
  out.value = w.dot(out.argmax);
  return out;
}

// Root of a h^(p-1) + b h^(q-1) = w on h >= 0, with a > 0, b >= 0, p > q > 1, w > 0.
double kkt_root(double w, double a, double b, double p, double q) {
  double hi = std::pow(w / a, 1.0 / (p - 1.0));
  if (b > 0) hi = std::min(hi, std::pow(w / b, 1.0 / (q - 1.0)));
  double lo = 0.0;
  double h = hi;
  for (int it = 0; it < 100; ++it) {
    const double f = a * std::pow(h, p - 1.0) + b * std::pow(h, q - 1.0) - w;
    if (f > 0) hi = h; else lo = h;
    if (std::abs(f) <= 1e-15 * w || hi - lo <= 1e-16 * hi) break;
    const double df = a * (p - 1.0) * std::pow(h, p - 2.0) + b * (q - 1.0) * std::pow(h, q - 2.0);
    double next = (df > 0 && std::isfinite(df)) ? h - f / df : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    h = next;
  }
  return h;
}

// Stationary point of w'h - mu1 ||h||_p^p - mu2 ||h||_q^q (scaled multipliers).
VectorXd two_norm_point(const VectorXd& w, double mu1, double mu2, double p, double q) {
  VectorXd h = VectorXd::Zero(w.size());
  for (Index i = 0; i < w.size(); ++i) {
    if (w[i] <= 0) continue;
    if (q == 1.0) {
      const double excess = w[i] - mu2 * q;
      h[i] = excess > 0 ? std::pow(excess / (mu1 * p), 1.0 / (p - 1.0)) : 0.0;
    } else {
      h[i] = kkt_root(w[i], mu1 * p, mu2 * q, p, q);
    }
  }
  return h;
}

double power_sum(const VectorXd& h, double p) {
  double s = 0;
  for (Index i = 0; i < h.size(); ++i) s += std::pow(h[i], p);
  return s;
}

// Both norm constraints active: nested bisection on the two multipliers.
SupportResult two_norm_support(const TwoNormBalls& s, const VectorXd& w) {
  SupportResult out{0.0, VectorXd::Zero(w.size())};
  if (w.maxCoeff() <= 0) return out;
  SupportResult first = pnorm_support(w, s.p, 1.0);
  if (pnorm(first.argmax, s.q) <= s.r * (1 + 1e-12)) return first;
  SupportResult second = pnorm_support(w, s.q, s.r);
  if (pnorm(second.argmax, s.p) <= 1 + 1e-12) return second;

  const double target_q = std::pow(s.r, s.q);
  // For fixed mu2, mu1 with ||h||_p = 1; returns false when mu2 is too large.
  auto inner = [&](double mu2, VectorXd& h) {
    double lo = 1e-300, hi = 1.0;
    h = two_norm_point(w, lo, mu2, s.p, s.q);
    if (power_sum(h, s.p) < 1.0) return false;
    while (power_sum(two_norm_point(w, hi, mu2, s.p, s.q), s.p) > 1.0) hi *= 4.0;
    double llo = std::log(lo), lhi = std::log(hi);
    for (int it = 0; it < 200 && lhi - llo > 1e-14; ++it) {
      const double mid = 0.5 * (llo + lhi);
      if (power_sum(two_norm_point(w, std::exp(mid), mu2, s.p, s.q), s.p) > 1.0)
        llo = mid;
      else
        lhi = mid;
    }
    h = two_norm_point(w, std::exp(0.5 * (llo + lhi)), mu2, s.p, s.q);
    return true;
  };

  double lo = 0.0, hi = s.q == 1.0 ? w.maxCoeff() : 1.0;
  VectorXd h;
  if (s.q > 1.0)
    while (inner(hi, h)) hi *= 4.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (!inner(mid, h) || power_sum(h, s.q) < target_q)
      hi = mid;
    else
      lo = mid;
  }
  if (!inner(lo, h)) h = second.argmax;
  const double scale = std::max({pnorm(h, s.p), pnorm(h, s.q) / s.r, 1e-300});
  if (scale > 1.0) h /= scale;
  out.argmax = h;
  out.value = w.dot(h);
  return out;
}

SupportResult ellipsoid_support(double a, const VectorXd& w) {
  const Index m = w.size();
  SupportResult out{0.0, VectorXd::Zero(m)};
  if (w.maxCoeff() <= 0) return out;
  if (a >= 1.0) {
    Index i;
    out.value = w.maxCoeff(&i);
    out.argmax[i] = 1.0;
    return out;
  }
  std::vector<bool> active(m);
  for (Index i = 0; i < m; ++i) active[i] = w[i] > 0;
  double shift = 0;
  for (Index round = 0; round <= m; ++round) {
    double total = 0;
    Index count = 0;
    for (Index i = 0; i < m; ++i)
      if (active[i]) {
        total += w[i];
        ++count;
      }
    shift = a * total / (1.0 - a + a * count);
    bool changed = false;
    for (Index i = 0; i < m; ++i)
      if (active[i] && w[i] < shift) {
        active[i] = false;
        changed = true;
      }
    if (!changed) break;
  }
  VectorXd u = VectorXd::Zero(m);
  for (Index i = 0; i < m; ++i)
    if (active[i]) u[i] = (w[i] - shift) / (1.0 - a);
  const double form = (1.0 - a) * u.squaredNorm() + a * u.sum() * u.sum();
  out.argmax = u / std::sqrt(form);
  out.value = w.dot(out.argmax);
  return out;
}

SupportResult budget_support(double k, const VectorXd& w) {
  const Index m = w.size();
  SupportResult out{0.0, VectorXd::Zero(m)};
  std::vector<Index> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) { return w[i] > w[j]; });
  double left = k;
  for (Index i : order) {
    if (w[i] <= 0 || left <= 0) break;
    out.argmax[i] = std::min(1.0, left);
    left -= out.argmax[i];
  }
  out.value = w.dot(out.argmax);
  return out;
}

SupportResult hrep_support(const HRep& rep, const VectorXd& w) {
  const Index m = w.size();
  SupportResult out{0.0, VectorXd::Zero(m)};
  if (w.maxCoeff() <= 0) return out;
  LinearProgramD lp(m);
  lp.objective = -w;
  lp.upper = rep.upper;
  for (Index r = 0; r < rep.G.rows(); ++r) lp.add_row(rep.G.row(r).transpose(), Relation::kLessEqual, rep.g[r]);
  const LpSolutionD sol = solve_lp(lp);
  if (sol.status != LpStatus::kOptimal)
    throw Error(ErrorCode::NumericalBreakdown, "support LP did not reach optimality");
  out.argmax = sol.primal.cwiseMax(0.0);
  for (Index i = 0; i < m; ++i)
    if (w[i] <= 0) out.argmax[i] = 0;
  out.value = w.dot(out.argmax);
  return out;
}

bool is_unit_or_zero(const VectorXd& v) {
  int ones = 0;
  for (Index i = 0; i < v.size(); ++i) {
    if (v[i] == 1.0)
      ++ones;
    else if (v[i] != 0.0)
      return false;
  }
  return ones <= 1;
}

SupportResult hull_support(const ExplicitConvHull& hull, const VectorXd& w) {
  const Index m = w.size();
  SupportResult out{0.0, VectorXd::Zero(m)};
  for (const VectorXd& v : hull.points) {
    const double value = w.dot(v);
    if (value > out.value) {
      out.value = value;
      out.argmax = v;
    }
  }
  if (hull.orbit && hull.orbit->count > 0) {
    std::vector<Index> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) { return w[i] > w[j]; });
    VectorXd nu = VectorXd::Zero(m);
    for (int t = 0; t < hull.orbit->count; ++t) nu[order[t]] = hull.orbit->value;
    const double value = w.dot(nu);
    if (value > out.value) {
      out.value = value;
      out.argmax = nu;
    }
  }
  for (Index i = 0; i < m; ++i)
    if (w[i] <= 0) out.argmax[i] = 0;
  out.value = w.dot(out.argmax);
  return out;
}

// Smallest total weight on hull generators needed to dominate h.
bool hull_membership(const ExplicitConvHull& hull, const VectorXd& h, double tol, bool simplex_inside = true) {
  const Index m = h.size();
  if (simplex_inside && h.sum() <= 1.0 + tol) return true;
  const Index np = static_cast<Index>(hull.points.size());
  const bool orbit = hull.orbit && hull.orbit->count > 0;
  const Index nv = np + (orbit ? 1 + m : 0);
  LinearProgramD lp(nv);
  lp.objective.head(np).setOnes();
  if (orbit) lp.objective[np] = 1.0;
  for (Index i = 0; i < m; ++i) {
    VectorXd row = VectorXd::Zero(nv);
    for (Index v = 0; v < np; ++v) row[v] = hull.points[v][i];
    if (orbit) row[np + 1 + i] = hull.orbit->value;
    lp.add_row(row, Relation::kGreaterEqual, h[i]);
  }
  if (orbit) {
    for (Index i = 0; i < m; ++i) {
      VectorXd row = VectorXd::Zero(nv);
      row[np] = 1.0;
      row[np + 1 + i] = -1.0;
      lp.add_row(row, Relation::kGreaterEqual, 0.0);
    }
    VectorXd row = VectorXd::Zero(nv);
    row[np] = hull.orbit->count;
    row.tail(m).setConstant(-1.0);
    lp.add_row(row, Relation::kGreaterEqual, 0.0);
  }
  const LpSolutionD sol = solve_lp(lp);
  return sol.status == LpStatus::kOptimal && sol.objective <= 1.0 + tol;
}

// Completion test for {G g <= g0, 0 <= g <= upper, g >= h}.
bool polytope_completion_membership(const HRep& rep, const VectorXd& h, double tol) {
  const Index m = h.size();
  LinearProgramD lp(m);
  lp.lower = h;
  lp.upper = rep.upper.cwiseMax(h);
  for (Index r = 0; r < rep.G.rows(); ++r) lp.add_row(rep.G.row(r).transpose(), Relation::kLessEqual, rep.g[r] + tol);
  for (Index i = 0; i < m; ++i)
    if (h[i] > rep.upper[i] + tol) return false;
  return solve_lp(lp).status == LpStatus::kOptimal;
}

// Raising all coordinates to a common level is optimal for theta > 1.
bool generalized_budget_membership(double theta, const VectorXd& h, double tol) {
  const Index m = h.size();
  if (h.maxCoeff() > 1.0 + tol) return false;
  VectorXd sorted = h;
  std::sort(sorted.data(), sorted.data() + m);
  auto excess = [&](double level) {
    VectorXd g = sorted.cwiseMax(level);
    std::sort(g.data(), g.data() + m);
    const double low = m >= 2 ? g[0] + g[1] : g[0];
    return g.sum() - theta * low;
  };
  double best = excess(0.0);
  if (theta > 1.0) {
    for (Index i = 0; i < m; ++i) best = std::min(best, excess(std::min(1.0, sorted[i])));
    best = std::min(best, excess(1.0));
  }
  return best <= 1.0 + tol;
}

HRep generalized_budget_hrep(Index m, double theta) {
  const Index pairs = m * (m - 1) / 2;
  HRep rep{MatrixXd::Ones(pairs, m), VectorXd::Ones(pairs), VectorXd::Ones(m)};
  Index r = 0;
  for (Index i = 0; i < m; ++i)
    for (Index j = i + 1; j < m; ++j, ++r) {
      rep.G(r, i) -= theta;
      rep.G(r, j) -= theta;
    }
  return rep;
}

double binomial(Index n, Index k) {
  double c = 1;
  for (Index i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return c;
}

// Appends every vector with `count` entries equal to `value` in lexicographic support order.
void expand_orbit(Index m, int count, double value, std::vector<VectorXd>& out) {
  std::vector<Index> pick(count);
  std::iota(pick.begin(), pick.end(), 0);
  if (count > m) return;
  for (;;) {
    VectorXd v = VectorXd::Zero(m);
    for (Index i : pick) v[i] = value;
    out.push_back(v);
    int k = count - 1;
    while (k >= 0 && pick[k] == m - count + k) --k;
    if (k < 0) break;
    ++pick[k];
    for (int i = k + 1; i < count; ++i) pick[i] = pick[i - 1] + 1;
  }
}

std::vector<VectorXd> polytope_vertices(const HRep& rep, Index m) {
  std::vector<VectorXd> normals;
  std::vector<double> offsets;
  for (Index r = 0; r < rep.G.rows(); ++r) {
    normals.push_back(rep.G.row(r).transpose());
    offsets.push_back(rep.g[r]);
  }
  for (Index i = 0; i < m; ++i) {
    normals.push_back(VectorXd::Unit(m, i));
    offsets.push_back(0.0);
    if (std::isfinite(rep.upper[i])) {
      normals.push_back(VectorXd::Unit(m, i));
      offsets.push_back(rep.upper[i]);
    }
  }
  const Index planes = static_cast<Index>(normals.size());
  if (binomial(planes, m) > 5e7)
    throw Error(ErrorCode::CombinatorialBlowup, "too many hyperplane subsets to enumerate");
  std::vector<VectorXd> out;
  std::vector<Index> pick(m);
  std::iota(pick.begin(), pick.end(), 0);
  for (;;) {
    MatrixXd sys(m, m);
    VectorXd rhs(m);
    for (Index i = 0; i < m; ++i) {
      sys.row(i) = normals[pick[i]].transpose();
      rhs[i] = offsets[pick[i]];
    }
    Eigen::FullPivLU<MatrixXd> lu(sys);
    if (lu.rank() == m) {
      VectorXd x = lu.solve(rhs);
      bool ok = (x.array() >= -1e-9).all() && (x.array() <= rep.upper.array() + 1e-9).all();
      if (ok && rep.G.rows() > 0) ok = ((rep.G * x - rep.g).array() <= 1e-9).all();
      if (ok) {
        x = x.cwiseMax(0.0);
        bool seen = false;
        for (const VectorXd& v : out)
          if ((v - x).cwiseAbs().maxCoeff() <= 1e-9) {
            seen = true;
            break;
          }
        if (!seen) out.push_back(x);
        if (static_cast<double>(out.size()) > kMaxVertices)
          throw Error(ErrorCode::CombinatorialBlowup, "vertex list exceeds 10^6 entries");
      }
    }
    Index k = m - 1;
    while (k >= 0 && pick[k] == planes - m + k) --k;
    if (k < 0) break;
    ++pick[k];
    for (Index i = k + 1; i < m; ++i) pick[i] = pick[i - 1] + 1;
  }
  return out;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::ParameterOutOfRange, what);
}

}  // namespace

UncertaintySet::UncertaintySet(Index m, SetFamily family) : m_(m), family_(std::move(family)) {
  if (m_ < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  std::visit(
      Overloaded{
          [](const PNormBall& s) {
            require(s.p >= 1.0 && std::isfinite(s.p), "PNormBall needs finite p >= 1");
            require(s.radius >= 1.0 && std::isfinite(s.radius), "PNormBall radius must be >= 1");
          },
          [](const Hypersphere&) {},
          [](const TwoNormBalls& s) {
            require(s.q >= 1.0 && s.p > s.q && std::isfinite(s.p), "TwoNormBalls needs p > q >= 1");
            require(s.r >= 1.0 && std::isfinite(s.r), "TwoNormBalls radius r must be >= 1");
          },
          [this](const Budget& s) {
            require(s.k >= 1.0 && s.k <= static_cast<double>(m_), "Budget needs 1 <= k <= m");
          },
          [this](const BudgetIntersection& s) {
            if (s.alpha.cols() != m_) throw Error(ErrorCode::DimensionMismatch, "alpha must have m columns");
            require(s.alpha.rows() >= 1 && s.alpha.allFinite(), "alpha needs at least one finite row");
            require((s.alpha.array() >= 0).all(), "alpha must be nonnegative");
            require((s.alpha.array() <= 1).all(), "alpha entries above 1 exclude unit vectors");
          },
          [](const GeneralizedBudget& s) {
            require(s.theta >= 0.0 && std::isfinite(s.theta), "GeneralizedBudget needs theta >= 0");
          },
          [](const PiEllipsoid& s) { require(s.a >= 0.0 && s.a <= 1.0, "PiEllipsoid needs a in [0,1]"); },
          [this](const ScaledSpi& s) {
            if (s.lambda.size() != m_) throw Error(ErrorCode::DimensionMismatch, "lambda must have m entries");
            if (!(s.lambda.array() > 0).all() || !s.lambda.allFinite())
              throw Error(ErrorCode::NonPositiveScale, "lambda must be positive");
            if (!s.inner || s.inner->dim() != m_)
              throw Error(ErrorCode::DimensionMismatch, "inner set must have dimension m");
            if (!s.inner->is_permutation_invariant())
              throw Error(ErrorCode::NotPermutationInvariant, "inner set must be permutation invariant");
          },
          [this](const ExplicitPolytope& s) {
            if (s.G.cols() != m_ || s.G.rows() != s.g.size())
              throw Error(ErrorCode::DimensionMismatch, "polytope rows have wrong shape");
            require(s.G.allFinite() && s.g.allFinite(), "polytope data must be finite");
          },
          [this](const ExplicitConvHull& s) {
            for (const VectorXd& v : s.points) {
              if (v.size() != m_) throw Error(ErrorCode::DimensionMismatch, "hull point has wrong size");
              require(v.allFinite() && (v.array() >= 0).all(), "hull points must be nonnegative");
            }
            if (s.orbit) require(s.orbit->count >= 0 && s.orbit->count <= m_ && s.orbit->value >= 0,
                                 "orbit parameters out of range");
          },
      },
      family_);

  const auto* hull = std::get_if<ExplicitConvHull>(&family_);
  if (hull || std::holds_alternative<ExplicitPolytope>(family_)) {
    for (Index i = 0; i < m_; ++i) {
      const VectorXd unit = VectorXd::Unit(m_, i);
      if (hull ? !hull_membership(*hull, unit, 1e-9, false) : !membership(*this, unit, 1e-9))
        throw Error(ErrorCode::InvalidArgument, "set must contain every unit vector");
    }
  }
}

std::string UncertaintySet::family_name() const {
  return std::visit(Overloaded{
                        [](const PNormBall&) { return "PNormBall"; },
                        [](const Hypersphere&) { return "Hypersphere"; },
                        [](const TwoNormBalls&) { return "TwoNormBalls"; },
                        [](const Budget&) { return "Budget"; },
                        [](const BudgetIntersection&) { return "BudgetIntersection"; },
                        [](const GeneralizedBudget&) { return "GeneralizedBudget"; },
                        [](const PiEllipsoid&) { return "PiEllipsoid"; },
                        [](const ScaledSpi&) { return "ScaledSpi"; },
                        [](const ExplicitPolytope&) { return "ExplicitPolytope"; },
                        [](const ExplicitConvHull&) { return "ExplicitConvHull"; },
                    },
                    family_);
}

bool UncertaintySet::is_permutation_invariant() const {
  return std::visit(Overloaded{
                        [](const BudgetIntersection&) { return false; },
                        [](const ScaledSpi&) { return false; },
                        [](const ExplicitPolytope&) { return false; },
                        [](const ExplicitConvHull& s) {
                          return std::all_of(s.points.begin(), s.points.end(), is_unit_or_zero);
                        },
                        [](const auto&) { return true; },
                    },
                    family_);
}

bool UncertaintySet::has_hrep() const {
  return std::holds_alternative<Budget>(family_) || std::holds_alternative<BudgetIntersection>(family_) ||
         std::holds_alternative<GeneralizedBudget>(family_) || std::holds_alternative<ExplicitPolytope>(family_);
}

HRep UncertaintySet::hrep() const {
  const Index m = m_;
  return std::visit(
      Overloaded{
          [m](const Budget& s) {
            return HRep{MatrixXd::Ones(1, m), VectorXd::Constant(1, s.k), VectorXd::Ones(m)};
          },
          [m](const BudgetIntersection& s) {
            return HRep{s.alpha, VectorXd::Ones(s.alpha.rows()), VectorXd::Ones(m)};
          },
          [m](const GeneralizedBudget& s) { return generalized_budget_hrep(m, s.theta); },
          [m](const ExplicitPolytope& s) { return HRep{s.G, s.g, VectorXd::Constant(m, kInf)}; },
          [this](const auto&) -> HRep {
            throw Error(ErrorCode::RequiresHRep, family_name() + " has no inequality description");
          },
      },
      family_);
}

bool membership(const UncertaintySet& set, const Eigen::Ref<const VectorXd>& h_in, double tol) {
  if (h_in.size() != set.dim()) throw Error(ErrorCode::DimensionMismatch, "point has wrong dimension");
  if (!h_in.allFinite()) return false;
  if ((h_in.array() < -tol).any()) return false;
  const VectorXd h = h_in.cwiseMax(0.0);
  return std::visit(
      Overloaded{
          [&](const PNormBall& s) { return pnorm(h, s.p) <= s.radius + tol; },
          [&](const Hypersphere&) { return h.norm() <= 1.0 + tol; },
          [&](const TwoNormBalls& s) { return pnorm(h, s.p) <= 1.0 + tol && pnorm(h, s.q) <= s.r + tol; },
          [&](const Budget& s) { return h.maxCoeff() <= 1.0 + tol && h.sum() <= s.k + tol; },
          [&](const BudgetIntersection& s) {
            return h.maxCoeff() <= 1.0 + tol && ((s.alpha * h).array() <= 1.0 + tol).all();
          },
          [&](const GeneralizedBudget& s) { return generalized_budget_membership(s.theta, h, tol); },
          [&](const PiEllipsoid& s) {
            return (1.0 - s.a) * h.squaredNorm() + s.a * h.sum() * h.sum() <= 1.0 + tol;
          },
          [&](const ScaledSpi& s) {
            return membership(*s.inner, h.cwiseQuotient(s.lambda), tol);
          },
          [&](const ExplicitPolytope& s) {
            if (s.G.rows() == 0 || ((s.G * h - s.g).array() <= tol).all()) return true;
            if ((s.G.array() >= 0).all()) return false;
            return polytope_completion_membership(set.hrep(), h, tol);
          },
          [&](const ExplicitConvHull& s) { return hull_membership(s, h, tol); },
      },
      set.family());
}

SupportResult support(const UncertaintySet& set, const Eigen::Ref<const VectorXd>& w_in) {
  if (w_in.size() != set.dim()) throw Error(ErrorCode::DimensionMismatch, "weight has wrong dimension");
  if (!w_in.allFinite()) throw Error(ErrorCode::InvalidArgument, "weight has NaN/Inf");
  const VectorXd w = w_in.cwiseMax(0.0);
  SupportResult out = std::visit(
      Overloaded{
          [&](const PNormBall& s) { return pnorm_support(w, s.p, s.radius); },
          [&](const Hypersphere&) { return pnorm_support(w, 2.0, 1.0); },
          [&](const TwoNormBalls& s) { return two_norm_support(s, w); },
          [&](const Budget& s) { return budget_support(s.k, w); },
          [&](const BudgetIntersection&) { return hrep_support(set.hrep(), w); },
          [&](const GeneralizedBudget&) { return hrep_support(set.hrep(), w); },
          [&](const PiEllipsoid& s) { return ellipsoid_support(s.a, w); },
          [&](const ScaledSpi& s) {
            SupportResult inner = support(*s.inner, w.cwiseProduct(s.lambda));
            return SupportResult{inner.value, inner.argmax.cwiseProduct(s.lambda)};
          },
          [&](const ExplicitPolytope&) { return hrep_support(set.hrep(), w); },
          [&](const ExplicitConvHull& s) { return hull_support(s, w); },
      },
      set.family());
  for (Index i = 0; i < w.size(); ++i)
    if (w_in[i] <= 0) out.argmax[i] = 0;
  out.value = w_in.dot(out.argmax);
  return out;
}

double gamma(const UncertaintySet& set, int k) {
  const Index m = set.dim();
  if (k < 1 || k > m) throw Error(ErrorCode::InvalidArgument, "gamma needs 1 <= k <= m");
  if (!set.is_permutation_invariant())
    throw Error(ErrorCode::NotPermutationInvariant, set.family_name() + " is not permutation invariant");
  const double kk = k;
  return std::visit(Overloaded{
                        [&](const PNormBall& s) { return s.radius * std::pow(kk, -1.0 / s.p); },
                        [&](const Hypersphere&) { return 1.0 / std::sqrt(kk); },
                        [&](const TwoNormBalls& s) {
                          return std::min(std::pow(kk, -1.0 / s.p), s.r * std::pow(kk, -1.0 / s.q));
                        },
                        [&](const Budget& s) { return std::min(1.0, s.k / kk); },
                        [&](const PiEllipsoid& s) { return 1.0 / std::sqrt(s.a * kk * kk + (1.0 - s.a) * kk); },
                        [&](const auto&) {
                          VectorXd w = VectorXd::Zero(m);
                          w.head(k).setOnes();
                          return support(set, w).value / kk;
                        },
                    },
                    set.family());
}

std::optional<std::vector<VectorXd>> vertices(const UncertaintySet& set) {
  const Index m = set.dim();
  if (const auto* b = set.as<Budget>()) {
    if (b->k != std::floor(b->k)) return std::nullopt;
    const int k = static_cast<int>(b->k);
    double count = 0;
    for (int j = 0; j <= k; ++j) count += binomial(m, j);
    if (count > kMaxVertices) throw Error(ErrorCode::CombinatorialBlowup, "vertex list exceeds 10^6 entries");
    std::vector<VectorXd> out;
    for (int j = 0; j <= k; ++j) {
      if (j == 0)
        out.push_back(VectorXd::Zero(m));
      else
        expand_orbit(m, j, 1.0, out);
    }
    return out;
  }
  if (const auto* h = set.as<ExplicitConvHull>()) {
    double count = static_cast<double>(h->points.size());
    if (h->orbit && h->orbit->count > 0) count += binomial(m, h->orbit->count);
    if (count > kMaxVertices) throw Error(ErrorCode::CombinatorialBlowup, "vertex list exceeds 10^6 entries");
    std::vector<VectorXd> out = h->points;
    if (h->orbit && h->orbit->count > 0) expand_orbit(m, h->orbit->count, h->orbit->value, out);
    return out;
  }
  if (set.has_hrep() && m <= 8) return polytope_vertices(set.hrep(), m);
  return std::nullopt;
}

std::vector<VectorXd> sample(const UncertaintySet& set, int count, std::uint64_t seed) {
  const Index m = set.dim();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<VectorXd> out;
  out.reserve(std::max(count, 0));
  for (int s = 0; s < count; ++s) {
    const double density = unit(rng);
    VectorXd u(m);
    for (Index i = 0; i < m; ++i) {
      const double keep = unit(rng);
      const double value = unit(rng);
      u[i] = keep <= density ? value : 0.0;
    }
    if (membership(set, u, 0.0)) {
      out.push_back(u);
      continue;
    }
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 45; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (membership(set, mid * u, 0.0))
        lo = mid;
      else
        hi = mid;
    }
    out.push_back(lo * u);
  }
  return out;
}

std::pair<Instance, UncertaintySet> unwrap_scaled(const Instance& instance, const UncertaintySet& set) {
  const auto* scaled = set.as<ScaledSpi>();
  if (!scaled) throw Error(ErrorCode::UnsupportedFamily, "unwrap_scaled expects a ScaledSpi set");
  if (instance.m() != set.dim()) throw Error(ErrorCode::DimensionMismatch, "instance and set dimensions differ");
  if (!(scaled->lambda.array() > 0).all()) throw Error(ErrorCode::NonPositiveScale, "lambda must be positive");
  Instance out = instance;
  const VectorXd inv = scaled->lambda.cwiseInverse();
  out.A = inv.asDiagonal() * instance.A;
  out.B = inv.asDiagonal() * instance.B;
  return {out, *scaled->inner};
}

}  // namespace pap
