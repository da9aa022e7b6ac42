#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lp_oracle.hpp"
#include "pap/error.hpp"
#include "pap/lp.hpp"
#include "pap/uncertainty.hpp"
#include "test_sets.hpp"

namespace {

using namespace pap;
using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd vec(std::initializer_list<double> values) {
  VectorXd v(values.size());
  int i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected pap::Error";
  return ErrorCode::InvalidArgument;
}

TEST(Membership, UnitVectorInHypersphere) {
  UncertaintySet ball(3, Hypersphere{});
  EXPECT_TRUE(membership(ball, VectorXd::Unit(3, 0)));
}

TEST(Membership, BudgetRejectsOverspend) {
  UncertaintySet budget(4, Budget{2});
  EXPECT_FALSE(membership(budget, vec({1, 1, 0.5, 0})));
  EXPECT_TRUE(membership(budget, vec({1, 0.5, 0.5, 0})));
}

TEST(Membership, EllipsoidGammaPointIsOnBoundary) {
  UncertaintySet ell(3, PiEllipsoid{0.5});
  const double g = 1.0 / std::sqrt(0.5 * 9 + 0.5 * 3);
  const VectorXd h = VectorXd::Constant(3, g);
  EXPECT_TRUE(membership(ell, h));
  EXPECT_NEAR(0.5 * h.squaredNorm() + 0.5 * h.sum() * h.sum(), 1.0, 1e-14);
  EXPECT_FALSE(membership(ell, 1.001 * h));
}

TEST(Membership, NegativeEntriesAreRejected) {
  UncertaintySet ball(2, Hypersphere{});
  EXPECT_FALSE(membership(ball, vec({-0.1, 0.2})));
  EXPECT_EQ(code_of([&] { membership(ball, vec({0.1, 0.1, 0.1})); }), ErrorCode::DimensionMismatch);
}

TEST(Membership, GeneralizedBudgetMatchesCompletionLp) {
  const int m = 6;
  const double theta = 2.0;
  UncertaintySet set(m, GeneralizedBudget{theta});
  const HRep rep = set.hrep();
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unit(0, 1);
  int inside = 0;
  for (int t = 0; t < 300; ++t) {
    VectorXd h(m);
    const double scale = 0.2 + 0.8 * unit(rng);
    for (int i = 0; i < m; ++i) h[i] = scale * unit(rng);
    // exists g in [h, 1] with G g <= g0
    LinearProgramD lp(m);
    lp.lower = h;
    lp.upper = VectorXd::Ones(m);
    for (int r = 0; r < rep.G.rows(); ++r) lp.add_row(rep.G.row(r).transpose(), Relation::kLessEqual, rep.g[r]);
    const bool expected = solve_lp(lp).status == LpStatus::kOptimal;
    EXPECT_EQ(membership(set, h, 1e-9), expected) << h.transpose();
    inside += expected;
  }
  EXPECT_GT(inside, 10);
  EXPECT_LT(inside, 290);
}

TEST(Membership, LazyOrbitHullMatchesEnumeratedHull) {
  const int m = 6, r = 4;
  ExplicitConvHull lazy;
  lazy.points.push_back(VectorXd::Zero(m));
  for (int i = 0; i < m; ++i) lazy.points.push_back(VectorXd::Unit(m, i));
  lazy.orbit = PermutationOrbit{r, 1.0 / std::sqrt(double(m))};
  UncertaintySet a(m, lazy);
  UncertaintySet b(m, ExplicitConvHull{*vertices(a), std::nullopt});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0, 0.6);
  for (int t = 0; t < 200; ++t) {
    VectorXd h(m);
    for (int i = 0; i < m; ++i) h[i] = unit(rng);
    EXPECT_EQ(membership(a, h), membership(b, h));
    VectorXd w(m);
    for (int i = 0; i < m; ++i) w[i] = unit(rng) - 0.2;
    EXPECT_NEAR(support(a, w).value, support(b, w).value, 1e-12);
  }
}

TEST(Support, UnitDirectionOnBall) {
  UncertaintySet ball(4, PNormBall{2.0, 1.0});
  const SupportResult s = support(ball, VectorXd::Unit(4, 0));
  EXPECT_NEAR(s.value, 1.0, 1e-15);
  EXPECT_TRUE(s.argmax.isApprox(VectorXd::Unit(4, 0)));
}

TEST(Support, AllOnesOnBallIsSqrtM) {
  UncertaintySet ball(4, PNormBall{2.0, 1.0});
  const SupportResult s = support(ball, VectorXd::Ones(4));
  EXPECT_NEAR(s.value, 2.0, 1e-14);
  EXPECT_TRUE(s.argmax.isApprox(VectorXd::Constant(4, 0.5), 1e-14));
}

TEST(Support, BudgetIntersectionMatchesVertexEnumeration) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> unit(-0.5, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int m = 6;
    UncertaintySet set(m, BudgetIntersection{testing_sets::normalized_abs_gaussian_rows(2, m, 100 + trial)});
    VectorXd w(m);
    for (int i = 0; i < m; ++i) w[i] = unit(rng);
    LinearProgramD lp(m);
    lp.objective = -w;
    lp.upper = VectorXd::Ones(m);
    const auto* fam = set.as<BudgetIntersection>();
    for (int r = 0; r < 2; ++r) lp.add_row(fam->alpha.row(r).transpose(), Relation::kLessEqual, 1.0);
    const double expected = -*oracle::vertex_enumeration_min(lp);
    EXPECT_NEAR(support(set, w).value, expected, 1e-9);
  }
}

// Maximizes w'Sigma^{-1}w over supports S whose unconstrained maximizer is nonnegative.
double ellipsoid_subset_oracle(double a, const VectorXd& w) {
  const int m = static_cast<int>(w.size());
  double best = 0;
  for (int mask = 1; mask < (1 << m); ++mask) {
    std::vector<int> idx;
    for (int i = 0; i < m; ++i)
      if (mask >> i & 1) idx.push_back(i);
    const int k = static_cast<int>(idx.size());
    MatrixXd sigma = MatrixXd::Constant(k, k, a);
    sigma.diagonal().setConstant(1.0);
    VectorXd ws(k);
    for (int t = 0; t < k; ++t) ws[t] = w[idx[t]];
    const VectorXd u = sigma.ldlt().solve(ws);
    if ((u.array() < -1e-12).any()) continue;
    best = std::max(best, std::sqrt(ws.dot(u)));
  }
  return best;
}

TEST(Support, EllipsoidActiveSetMatchesSubsetOracle) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(-0.3, 1.0);
  for (double a : {0.0, 0.2, 0.5, 0.9}) {
    UncertaintySet set(6, PiEllipsoid{a});
    for (int t = 0; t < 20; ++t) {
      VectorXd w(6);
      for (int i = 0; i < 6; ++i) w[i] = unit(rng);
      const SupportResult s = support(set, w);
      EXPECT_NEAR(s.value, ellipsoid_subset_oracle(a, w), 1e-10);
      EXPECT_TRUE(membership(set, s.argmax, 1e-9));
    }
  }
}

TEST(Support, TwoNormBallsMatchesLagrangianDual) {
  // For p = 2, q = 1 the support equals min over mu >= 0 of ||(w - mu e)^+||_2 + mu r.
  const TwoNormBalls params{2.0, 1.0, 1.4};
  const int m = 5;
  UncertaintySet set(m, params);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> unit(-0.2, 1.0);
  for (int t = 0; t < 20; ++t) {
    VectorXd w(m);
    for (int i = 0; i < m; ++i) w[i] = unit(rng);
    auto dual = [&](double mu) { return (w.array() - mu).cwiseMax(0.0).matrix().norm() + mu * params.r; };
    double lo = 0, hi = std::max(0.0, w.maxCoeff());
    for (int it = 0; it < 300; ++it) {
      const double a = lo + (hi - lo) / 3, b = hi - (hi - lo) / 3;
      if (dual(a) <= dual(b)) hi = b; else lo = a;
    }
    const double expected = std::min(dual(0.0), dual(0.5 * (lo + hi)));
    const SupportResult s = support(set, w);
    EXPECT_TRUE(membership(set, s.argmax, 1e-9));
    EXPECT_NEAR(s.value, expected, 1e-9);
  }
}

TEST(Gamma, ClosedFormExamples) {
  EXPECT_NEAR(gamma(UncertaintySet(4, PNormBall{2.0, 1.0}), 4), 0.5, 1e-15);
  EXPECT_NEAR(gamma(UncertaintySet(5, Budget{3}), 2), 1.0, 1e-15);
  UncertaintySet flat(7, PiEllipsoid{0.0});
  for (int k = 1; k <= 7; ++k) EXPECT_NEAR(gamma(flat, k), 1.0 / std::sqrt(double(k)), 1e-15);
}

TEST(Gamma, ClosedFormsAgreeWithSupportOracle) {
  const int m = 9;
  std::vector<UncertaintySet> sets;
  for (double p : {1.0, 1.5, 2.0, 3.0}) sets.emplace_back(m, PNormBall{p, 1.0});
  sets.emplace_back(m, Hypersphere{});
  sets.emplace_back(m, Budget{2.5});
  sets.emplace_back(m, TwoNormBalls{3.0, 1.5, 1.7});
  for (double a : {0.0, 0.3, 1.0}) sets.emplace_back(m, PiEllipsoid{a});
  for (const auto& set : sets) {
    for (int k = 1; k <= m; ++k) {
      VectorXd w = VectorXd::Zero(m);
      w.head(k).setOnes();
      EXPECT_NEAR(gamma(set, k), support(set, w).value / k, 1e-9) << set.family_name() << " k=" << k;
    }
  }
}

TEST(Gamma, RejectsNonInvariantSets) {
  UncertaintySet set(4, BudgetIntersection{testing_sets::normalized_abs_gaussian_rows(2, 4, 1)});
  EXPECT_EQ(code_of([&] { gamma(set, 2); }), ErrorCode::NotPermutationInvariant);
}

TEST(Vertices, SingleUnitBudget) {
  const auto v = vertices(UncertaintySet(3, Budget{1}));
  ASSERT_TRUE(v.has_value());
  ASSERT_EQ(v->size(), 4u);
  EXPECT_TRUE((*v)[0].isZero());
  for (int i = 0; i < 3; ++i) EXPECT_TRUE((*v)[i + 1].isApprox(VectorXd::Unit(3, i)));
}

TEST(Vertices, WorstCaseHullAtFour) {
  const int m = 4;
  ExplicitConvHull hull;
  hull.points.push_back(VectorXd::Zero(m));
  for (int i = 0; i < m; ++i) hull.points.push_back(VectorXd::Unit(m, i));
  hull.orbit = PermutationOrbit{2, 0.5};
  const auto v = vertices(UncertaintySet(m, hull));
  ASSERT_TRUE(v.has_value());
  EXPECT_EQ(v->size(), 11u);
  int halves = 0;
  for (const auto& x : *v)
    if ((x.array() == 0.5).count() == 2 && (x.array() == 0).count() == 2) ++halves;
  EXPECT_EQ(halves, 6);
}

TEST(Vertices, UnitSquarePolytope) {
  MatrixXd G(2, 2);
  G.setIdentity();
  const auto v = vertices(UncertaintySet(2, ExplicitPolytope{G, VectorXd::Ones(2)}));
  ASSERT_TRUE(v.has_value());
  EXPECT_EQ(v->size(), 4u);
}

TEST(Vertices, ContinuumFamiliesAreUnavailable) {
  EXPECT_FALSE(vertices(UncertaintySet(4, Hypersphere{})).has_value());
  EXPECT_FALSE(vertices(UncertaintySet(4, Budget{1.5})).has_value());
  EXPECT_EQ(code_of([] { vertices(UncertaintySet(40, Budget{10})); }), ErrorCode::CombinatorialBlowup);
}

TEST(Sample, ShrinkPathFromSmallPointStaysInside) {
  for (const auto& set : testing_sets::all_families(5)) {
    EXPECT_TRUE(membership(set, VectorXd::Constant(5, 1.0 / 5.0))) << set.family_name();
    const auto pts = sample(set, 1, 42);
    ASSERT_EQ(pts.size(), 1u);
    EXPECT_TRUE(membership(set, pts[0], 1e-9)) << set.family_name();
  }
}

TEST(Sample, ThousandHypersphereSamplesAreMembers) {
  UncertaintySet ball(5, Hypersphere{});
  for (const auto& h : sample(ball, 1000, 9)) EXPECT_TRUE(membership(ball, h, 1e-9));
}

TEST(Sample, DeterministicPerSeed) {
  UncertaintySet ell(6, PiEllipsoid{0.3});
  const auto a = sample(ell, 20, 77), b = sample(ell, 20, 77), c = sample(ell, 20, 78);
  for (int i = 0; i < 20; ++i) EXPECT_TRUE((a[i].array() == b[i].array()).all());
  EXPECT_FALSE((a[0].array() == c[0].array()).all());
}

TEST(Construction, ParameterChecks) {
  EXPECT_EQ(code_of([] { UncertaintySet(3, PNormBall{0.5, 1.0}); }), ErrorCode::ParameterOutOfRange);
  EXPECT_EQ(code_of([] { UncertaintySet(3, PiEllipsoid{1.5}); }), ErrorCode::ParameterOutOfRange);
  EXPECT_EQ(code_of([] { UncertaintySet(3, Budget{0.5}); }), ErrorCode::ParameterOutOfRange);
  EXPECT_EQ(code_of([] {
              UncertaintySet(3, ScaledSpi{vec({1, -1, 1}), std::make_shared<UncertaintySet>(3, Hypersphere{})});
            }),
            ErrorCode::NonPositiveScale);
  EXPECT_EQ(code_of([] { UncertaintySet(3, BudgetIntersection{MatrixXd::Ones(2, 4)}); }),
            ErrorCode::DimensionMismatch);
  MatrixXd G = MatrixXd::Identity(2, 2);
  EXPECT_EQ(code_of([&] { UncertaintySet(2, ExplicitPolytope{G, vec({0.5, 1.0})}); }), ErrorCode::InvalidArgument);
}

TEST(UnwrapScaled, IdentityScaleKeepsInstance) {
  Instance inst{MatrixXd::Identity(3, 3), MatrixXd::Constant(3, 3, 0.5), VectorXd::Ones(3), VectorXd::Ones(3)};
  UncertaintySet set(3, ScaledSpi{VectorXd::Ones(3), std::make_shared<UncertaintySet>(3, Hypersphere{})});
  const auto [out, inner] = unwrap_scaled(inst, set);
  EXPECT_TRUE(out.A.isApprox(inst.A));
  EXPECT_TRUE(out.B.isApprox(inst.B));
  EXPECT_EQ(inner.family_name(), "Hypersphere");
}

TEST(UnwrapScaled, AxisAlignedEllipsoidUnwrapsToHypersphere) {
  // {h >= 0 : sum (h_i / r_i)^2 <= 1} is diag(r) times the unit ball.
  const VectorXd radii = vec({1.0, 2.0, 0.5});
  UncertaintySet ell(3, ScaledSpi{radii, std::make_shared<UncertaintySet>(3, Hypersphere{})});
  const VectorXd h = vec({0.6, 1.2, 0.2});
  EXPECT_EQ(membership(ell, h), h.cwiseQuotient(radii).norm() <= 1.0);
  const VectorXd w = vec({0.3, 0.4, 1.0});
  EXPECT_NEAR(support(ell, w).value, w.cwiseProduct(radii).norm(), 1e-14);
  Instance inst{MatrixXd::Ones(3, 2), MatrixXd::Ones(3, 2), VectorXd::Ones(2), VectorXd::Ones(2)};
  const auto [scaled, inner] = unwrap_scaled(inst, ell);
  EXPECT_EQ(inner.family_name(), "Hypersphere");
  EXPECT_NEAR(scaled.A(1, 0), 0.5, 1e-15);
}

class FamilyProperties : public ::testing::TestWithParam<int> {};

TEST_P(FamilyProperties, DownMonotoneSupportDominatesAndGammaPoints) {
  const int m = GetParam();
  std::mt19937_64 rng(1000 + m);
  std::uniform_real_distribution<double> unit(0, 1);
  for (const auto& set : testing_sets::all_families(m)) {
    const auto pts = sample(set, 500, 5 + m);
    int failures_down = 0, failures_support = 0;
    for (const VectorXd& h : pts) {
      VectorXd lower(m), w(m);
      for (int i = 0; i < m; ++i) {
        lower[i] = unit(rng) * h[i];
        w[i] = unit(rng) - 0.3;
      }
      if (!membership(set, lower, 1e-9)) ++failures_down;
      if (support(set, w).value < w.dot(h) - 1e-9) ++failures_support;
    }
    EXPECT_EQ(failures_down, 0) << set.family_name();
    EXPECT_EQ(failures_support, 0) << set.family_name();

    for (int t = 0; t < 20; ++t) {
      VectorXd w(m);
      for (int i = 0; i < m; ++i) w[i] = unit(rng) - 0.3;
      const SupportResult s = support(set, w);
      EXPECT_TRUE(membership(set, s.argmax, 1e-7)) << set.family_name();
      EXPECT_NEAR(w.dot(s.argmax), s.value, 1e-8 * (1 + std::abs(s.value)));
    }

    if (!set.is_permutation_invariant()) continue;
    double previous = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= m; ++k) {
      const double g = gamma(set, k);
      VectorXd point = VectorXd::Zero(m);
      point.head(k).setConstant(g);
      EXPECT_TRUE(membership(set, point, 1e-9)) << set.family_name() << " k=" << k;
      EXPECT_LE(g, previous + 1e-12) << set.family_name();
      previous = g;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Dims, FamilyProperties, ::testing::Values(5, 10));

}  // namespace
