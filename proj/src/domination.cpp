#include "pap/domination.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pap/error.hpp"

namespace pap {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kStructuralSlack = 1e-6;
constexpr double kLoopSlack = 1e-7;

DominatingSimplex clamp_beta(DominatingSimplex s) {
  if (s.beta < 1.0) {
    s.beta = 1.0;
    s.clamped = true;
  }
  return s;
}

DominatingSimplex with_axis(DominatingSimplex s, const VectorXd& lambda) {
  s.v = s.v.cwiseProduct(lambda);
  s.axis_scale = lambda;
  return s;
}

double structural_value(const UncertaintySet& set, const DominatingSimplex& s, VectorXd* argmax = nullptr) {
  const MaxPlusSumResult r = max_plus_sum(set, s.beta * s.v, s.axis().cwiseInverse());
  if (argmax) *argmax = r.argmax;
  return r.value;
}

}  // namespace

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::ClosedForm: return "ClosedForm";
    case Provenance::NumericPi: return "NumericPi";
    case Provenance::Iterative: return "Iterative";
    case Provenance::Shifted: return "Shifted";
    case Provenance::GeneralizedBudget: return "GeneralizedBudget";
    case Provenance::Explicit: return "Explicit";
  }
  return "?";
}

Provenance provenance_from_string(const std::string& name) {
  for (Provenance p : {Provenance::ClosedForm, Provenance::NumericPi, Provenance::Iterative, Provenance::Shifted,
                       Provenance::GeneralizedBudget, Provenance::Explicit})
    if (name == to_string(p)) return p;
  throw Error(ErrorCode::InvalidArgument, "unknown provenance '" + name + "'");
}

VectorXd DominatingSimplex::axis() const {
  return axis_scale.size() == v.size() ? axis_scale : VectorXd::Ones(v.size());
}

MatrixXd DominatingSimplex::vertex_matrix() const {
  const Index m = dim();
  MatrixXd out(m, m + 1);
  out.leftCols(m) = beta * axis().asDiagonal().toDenseMatrix();
  if (shifted) out.leftCols(m).colwise() += beta * v;
  out.col(m) = beta * v;
  return out;
}

DominatingSimplex make_simplex(double beta, VectorXd v, Provenance provenance, bool direct) {
  DominatingSimplex s;
  s.beta = beta;
  s.axis_scale = VectorXd::Ones(v.size());
  s.v = std::move(v);
  s.provenance = provenance;
  s.direct = direct;
  return s;
}

PiBeta beta_pi(const UncertaintySet& set) {
  if (!set.is_permutation_invariant())
    throw Error(ErrorCode::NotPermutationInvariant, set.family_name() + " is not permutation invariant");
  const Index m = set.dim();
  const double gm = gamma(set, static_cast<int>(m));
  PiBeta out;
  out.raw = -1.0;
  for (int k = 1; k <= m; ++k) {
    const double value = gamma(set, k) / (gm + 1.0 / k);
    if (value > out.raw) {
      out.raw = value;
      out.k = k;
    }
  }
  out.beta = std::max(1.0, out.raw);
  out.v = VectorXd::Constant(m, gm);
  return out;
}

DominatingSimplex numeric_pi_simplex(const UncertaintySet& set) {
  if (const auto* s = set.as<ScaledSpi>()) return with_axis(numeric_pi_simplex(*s->inner), s->lambda);
  const PiBeta pb = beta_pi(set);
  DominatingSimplex out = make_simplex(pb.beta, pb.v, Provenance::NumericPi, false);
  out.clamped = pb.clamped();
  return out;
}

DominatingSimplex closed_form_simplex(const UncertaintySet& set) {
  const Index m = set.dim();
  const double md = static_cast<double>(m);
  if (const auto* s = set.as<ScaledSpi>()) return with_axis(closed_form_simplex(*s->inner), s->lambda);
  if (set.as<Hypersphere>())
    return clamp_beta(make_simplex(std::pow(md, 0.25) / 2.0, VectorXd::Constant(m, 1.0 / std::sqrt(md)),
                                   Provenance::ClosedForm, false));
  if (const auto* s = set.as<PNormBall>()) {
    if (s->radius != 1.0) throw Error(ErrorCode::ParameterOutOfRange, "closed form needs the unit p-norm ball");
    const double p = s->p;
    const double beta = std::pow(p - 1.0, (p - 1.0) / p) * std::pow(md, (p - 1.0) / (p * p)) / p;
    return clamp_beta(
        make_simplex(beta, VectorXd::Constant(m, std::pow(md, -1.0 / p)), Provenance::ClosedForm, false));
  }
  if (const auto* s = set.as<TwoNormBalls>()) {
    const double p = s->p, q = s->q, r = s->r;
    const double upper = std::pow(md, 1.0 / q - 1.0 / p);
    if (r < 1.0 || r > upper * (1.0 + 1e-12))
      throw Error(ErrorCode::ParameterOutOfRange, "two-ball closed form needs 1 <= r <= m^(1/q - 1/p)");
    const double b1 = std::pow(r, (1.0 - p) / p) * std::pow(md, (p - 1.0) / (p * q));
    const double b2 = std::pow(r, 1.0 / q) * std::pow(md, (q - 1.0) / (q * q));
    return clamp_beta(make_simplex(std::min(b1, b2), VectorXd::Constant(m, r * std::pow(md, -1.0 / q)),
                                   Provenance::ClosedForm, true));
  }
  if (const auto* s = set.as<PiEllipsoid>()) {
    const double a = s->a;
    const double spread = a * md * md + (1.0 - a) * md;
    const double beta = 1.0 / (a / 2.0 + std::sqrt(1.0 - a) / std::pow(spread, 0.25));
    return clamp_beta(
        make_simplex(beta, VectorXd::Constant(m, 1.0 / std::sqrt(spread)), Provenance::ClosedForm, true));
  }
  if (const auto* s = set.as<Budget>()) {
    return clamp_beta(make_simplex(std::min(s->k, md / s->k), VectorXd::Constant(m, s->k / md),
                                   Provenance::ClosedForm, true));
  }
  if (const auto* s = set.as<GeneralizedBudget>()) {
    const double denom = md - 1.0 - 2.0 * s->theta;
    if (denom <= 0)
      throw Error(ErrorCode::ParameterOutOfRange, "generalized budget closed form needs theta < (m - 1) / 2");
    return make_simplex(1.0, VectorXd::Constant(m, 1.0 / denom), Provenance::GeneralizedBudget, true);
  }
  throw Error(ErrorCode::UnsupportedFamily, "no closed-form simplex for " + set.family_name());
}

IterativeResult iterative_simplex(const UncertaintySet& set, MaxPlusSumStrategy strategy) {
  if (!set.has_hrep())
    throw Error(ErrorCode::RequiresHRep, "the iterative construction needs an inequality description; " + set.family_name() +
                                             " should use beta_pi");
  const Index m = set.dim();
  const int cap = static_cast<int>(std::ceil(2.0 * std::sqrt(static_cast<double>(m)))) + 2;
  const VectorXd ones = VectorXd::Ones(m);
  IterativeResult out;
  VectorXd u = VectorXd::Zero(m);
  int t = 0;
  for (;;) {
    const MaxPlusSumResult r = max_plus_sum(set, u, ones, strategy);
    out.final_value = r.value;
    if (r.value <= t + kLoopSlack) break;
    if (t >= cap) throw Error(ErrorCode::NonConvergence, "iterative construction exceeded ceil(2 sqrt m) + 2 rounds");
    VectorXd h = r.argmax;
    for (Index i = 0; i < m; ++i)
      if (u[i] >= 1.0) h[i] = 0.0;
    u = (u + h).cwiseMin(1.0);
    out.trace.push_back({r.value, h, u});
    ++t;
  }
  out.simplex = make_simplex(t, u / t, Provenance::Iterative, false);
  return out;
}

DominatingSimplex shifted_simplex(const UncertaintySet& set, double beta, const VectorXd& v) {
  if (v.size() != set.dim()) throw Error(ErrorCode::DimensionMismatch, "v must match the set dimension");
  if (!(beta > 0)) throw Error(ErrorCode::InvalidArgument, "beta must be positive");
  DominatingSimplex s = make_simplex(beta, v, Provenance::Shifted, false);
  s.shifted = true;
  const double value = structural_value(set, s);
  if (value > beta + kStructuralSlack)
    throw Error(ErrorCode::StructuralInequalityUnverified,
                "max-plus-sum " + std::to_string(value) + " exceeds beta " + std::to_string(beta));
  return s;
}

DominatingSimplex construct_simplex(const UncertaintySet& set) {
  const UncertaintySet* base = &set;
  if (const auto* s = set.as<ScaledSpi>()) base = s->inner.get();
  const bool has_closed_form = base->as<Hypersphere>() || base->as<Budget>() || base->as<PiEllipsoid>() ||
                               base->as<GeneralizedBudget>() ||
                               (base->as<PNormBall>() && base->as<PNormBall>()->radius == 1.0);
  if (has_closed_form) {
    try {
      return closed_form_simplex(set);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ParameterOutOfRange) throw;
    }
  }
  if (const auto* s = base->as<TwoNormBalls>()) {
    const double upper = std::pow(static_cast<double>(set.dim()), 1.0 / s->q - 1.0 / s->p);
    if (s->r >= 1.0 && s->r <= upper) return closed_form_simplex(set);
  }
  if (base->is_permutation_invariant()) return numeric_pi_simplex(set);
  if (set.has_hrep()) {
    const IterativeResult a = iterative_simplex(set);
    return shifted_simplex(set, a.simplex.beta, a.simplex.v);
  }
  throw Error(ErrorCode::UnsupportedFamily, "no dominating simplex construction for " + set.family_name());
}

DominatingPoint dominating_point(const DominatingSimplex& s, const Eigen::Ref<const VectorXd>& h) {
  const Index m = s.dim();
  if (h.size() != m) throw Error(ErrorCode::DimensionMismatch, "point must match the simplex dimension");
  const VectorXd axis = s.axis();
  const VectorXd base = s.beta * s.v;
  DominatingPoint out{VectorXd(m), VectorXd(m + 1)};

  if (!s.direct || s.shifted) {
    const VectorXd excess = (h - base).cwiseMax(0.0);
    const VectorXd c = excess.cwiseQuotient(axis) / s.beta;
    out.point = base + excess;
    if (s.shifted) {
      out.weights.head(m) = c;
      out.weights[m] = std::max(0.0, 1.0 - c.sum());
    } else {
      out.weights.head(m) = c / 2.0;
      out.weights[m] = 0.5;
    }
    return out;
  }

  // Lightest combination: weight t on beta v, the rest on the axis vertices.
  auto weights_at = [&](double t) { return (h - t * base).cwiseMax(0.0).cwiseQuotient(axis) / s.beta; };
  std::vector<double> candidates{0.0, 1.0};
  for (Index i = 0; i < m; ++i)
    if (base[i] > 0) {
      const double t = h[i] / base[i];
      if (t > 0 && t < 1) candidates.push_back(t);
    }
  std::sort(candidates.begin(), candidates.end());
  double best_t = 0.0, best = std::numeric_limits<double>::infinity();
  for (double t : candidates) {
    const double total = t + weights_at(t).sum();
    if (total < best - 1e-15) {
      best = total;
      best_t = t;
    }
  }
  out.weights.head(m) = weights_at(best_t);
  out.weights[m] = best_t;
  out.point = s.beta * axis.cwiseProduct(out.weights.head(m)) + best_t * base;
  return out;
}

DominationCheck verify_domination(const UncertaintySet& set, const DominatingSimplex& s, int factor, int samples,
                                  std::uint64_t seed) {
  DominationCheck out;
  if (s.dim() != set.dim()) throw Error(ErrorCode::DimensionMismatch, "simplex and set dimensions differ");
  if (factor != 1 && factor != 2) throw Error(ErrorCode::InvalidArgument, "factor must be 1 or 2");
  auto fail = [&](std::string reason, VectorXd witness) {
    out.ok = false;
    out.reason = std::move(reason);
    out.witness = std::move(witness);
    return out;
  };

  VectorXd argmax;
  out.max_plus_sum = structural_value(set, s, &argmax);
  if (out.max_plus_sum > s.beta + kStructuralSlack) return fail("structural inequality violated", argmax);

  if (s.scale_bound) {
    const MatrixXd vertices = s.vertex_matrix();
    for (Index j = 0; j < vertices.cols(); ++j)
      if (!membership(set, vertices.col(j) / *s.scale_bound, kDominationTol))
        return fail("vertex outside scale_bound times the set", vertices.col(j));
  }
  if (factor == 1) return out;

  std::vector<VectorXd> points = sample(set, samples, seed);
  for (Index i = 0; i < set.dim(); ++i) points.push_back(support(set, VectorXd::Unit(set.dim(), i)).argmax);
  const MatrixXd scaled = s.hull_factor() * s.vertex_matrix();
  for (const VectorXd& h : points) {
    const DominatingPoint dp = dominating_point(s, h);
    if ((dp.point - h).minCoeff() < -kDominationTol) return fail("dominating point below h", h);
    if (dp.weights.minCoeff() < -kDominationTol) return fail("negative convex weight", h);
    if (dp.weights.sum() > 1.0 + kDominationTol) return fail("convex weights exceed one", h);
    if ((scaled * dp.weights - dp.point).minCoeff() < -kDominationTol)
      return fail("dominating point outside the hull completion", h);
  }
  return out;
}

}  // namespace pap
