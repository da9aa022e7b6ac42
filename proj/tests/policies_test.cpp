#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "pap/domination.hpp"
#include "pap/error.hpp"
#include "pap/experiments.hpp"
#include "pap/lp.hpp"
#include "pap/policies.hpp"

namespace {

using namespace pap;
using Eigen::MatrixXd;
using Eigen::VectorXd;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected pap::Error";
  return ErrorCode::InvalidArgument;
}

Instance random_instance(int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit(0.5, 1.5);
  MatrixXd A = MatrixXd::Identity(m, m), B = MatrixXd::Identity(m, m);
  VectorXd c(m), d(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      A(i, j) += std::abs(gauss(rng)) / std::sqrt(double(m));
      B(i, j) += std::abs(gauss(rng)) / std::sqrt(double(m));
    }
    c[i] = unit(rng);
    d[i] = unit(rng);
  }
  return {A, B, c, d};
}

Instance identity_instance(int m, double c) {
  return {MatrixXd::Identity(m, m), MatrixXd::Identity(m, m), VectorXd::Constant(m, c), VectorXd::Ones(m)};
}

// Variables [x | y_1 ... y_S | z]: min c'x + z, A x + B y_s >= h_s, z >= d'y_s.
double vertex_lp_oracle(const Instance& in, const std::vector<VectorXd>& scenarios) {
  const int m = static_cast<int>(in.m()), n = static_cast<int>(in.n());
  const int S = static_cast<int>(scenarios.size());
  const int vars = n + S * n + 1;
  LinearProgramD lp(vars);
  lp.objective.head(n) = in.c;
  lp.objective[vars - 1] = 1.0;
  for (int s = 0; s < S; ++s) {
    for (int i = 0; i < m; ++i) {
      VectorXd row = VectorXd::Zero(vars);
      row.head(n) = in.A.row(i).transpose();
      row.segment(n + s * n, n) = in.B.row(i).transpose();
      lp.add_row(row, Relation::kGreaterEqual, scenarios[s][i]);
    }
    VectorXd row = VectorXd::Zero(vars);
    row[vars - 1] = 1.0;
    row.segment(n + s * n, n) = -in.d;
    lp.add_row(row, Relation::kGreaterEqual, 0.0);
  }
  const auto sol = solve_lp(lp);
  EXPECT_EQ(sol.status, LpStatus::kOptimal);
  return sol.objective;
}

// Affine policy y = P h + q enforced at every listed point; exact for polytopes
// given by their extreme points.
double affine_vertex_oracle(const Instance& in, const std::vector<VectorXd>& points) {
  const int m = static_cast<int>(in.m()), n = static_cast<int>(in.n());
  const int vars = n + n * m + n + 1;
  const int p0 = n, q0 = n + n * m, zi = vars - 1;
  LinearProgramD lp(vars);
  lp.objective.head(n) = in.c;
  lp.objective[zi] = 1.0;
  lp.lower.setConstant(-std::numeric_limits<double>::infinity());
  lp.lower.head(n).setZero();
  auto recourse_row = [&](int k, const VectorXd& h) {
    VectorXd row = VectorXd::Zero(vars);
    row.segment(p0 + k * m, m) = h;
    row[q0 + k] = 1.0;
    return row;
  };
  for (const VectorXd& h : points) {
    for (int i = 0; i < m; ++i) {
      VectorXd row = VectorXd::Zero(vars);
      row.head(n) = in.A.row(i).transpose();
      for (int k = 0; k < n; ++k) row += in.B(i, k) * recourse_row(k, h);
      lp.add_row(row, Relation::kGreaterEqual, h[i]);
    }
    VectorXd obj = VectorXd::Zero(vars);
    obj[zi] = 1.0;
    for (int k = 0; k < n; ++k) {
      lp.add_row(recourse_row(k, h), Relation::kGreaterEqual, 0.0);
      obj -= in.d[k] * recourse_row(k, h);
    }
    lp.add_row(obj, Relation::kGreaterEqual, 0.0);
  }
  const auto sol = solve_lp(lp);
  EXPECT_EQ(sol.status, LpStatus::kOptimal);
  return sol.objective;
}

std::vector<VectorXd> budget_vertices(int m, double k) {
  return *vertices(UncertaintySet(m, Budget{k}));
}

TEST(ScenarioLp, IdentityInstanceOverUnitSimplex) {
  // Cost t c m + (1 - t) along x = t e, so the optimum is min(1, c m) at m = 2.
  for (double c : {0.3, 0.4, 0.6, 1.0}) {
    const auto verts = budget_vertices(2, 1.0);
    EXPECT_NEAR(exact_ar(identity_instance(2, c), verts).value, std::min(1.0, 2 * c), 1e-9) << c;
  }
}

TEST(ScenarioLp, ExactArMatchesVertexLpOracle) {
  for (int t = 0; t < 5; ++t) {
    const Instance in = random_instance(7, 100 + t);
    const auto verts = budget_vertices(7, 3.0);
    EXPECT_NEAR(exact_ar(in, verts).value, vertex_lp_oracle(in, verts), 1e-7);
  }
}

TEST(ScenarioLp, RecourseCoversEveryScenario) {
  const Instance in = random_instance(7, 5);
  const auto verts = budget_vertices(7, 3.0);
  const ExactArSolution sol = exact_ar(in, verts);
  for (size_t s = 0; s < verts.size(); ++s) {
    const VectorXd y = sol.recourse.col(static_cast<Eigen::Index>(s));
    EXPECT_GE((in.A * sol.x + in.B * y - verts[s]).minCoeff(), -1e-7);
    EXPECT_LE(in.c.dot(sol.x) + in.d.dot(y), sol.value + 1e-7);
  }
}

TEST(ScenarioLp, WorstCaseAdjustableOptimumBelowSimplexValue) {
  const WorstCase wc = build_worstcase_instance(16);
  const double exact = exact_ar(wc.instance, *vertices(wc.set)).value;
  EXPECT_LE(exact, solve_simplex_ar(wc.instance, wc.simplex).dominating_objective + 1e-9);
  EXPECT_LE(exact, 1.0);
}

TEST(ScenarioLp, ExactArRefusesHugeVertexLists) {
  const Instance in = identity_instance(200, 1.0);
  const std::vector<VectorXd> verts(600, VectorXd::Zero(200));
  EXPECT_EQ(code_of([&] { exact_ar(in, verts); }), ErrorCode::CombinatorialBlowup);
}

TEST(SimplexAr, IdentityInstanceOnUnitSimplexIsOne) {
  const UncertaintySet set(6, Budget{1.0});
  const DominatingSimplex simplex = closed_form_simplex(set);
  EXPECT_NEAR(solve_simplex_ar(identity_instance(6, 1.0), simplex).dominating_objective, 1.0, 1e-9);
}

TEST(SimplexAr, SandwichOnBudgetSets) {
  const UncertaintySet set(6, Budget{2.0});
  const DominatingSimplex simplex = closed_form_simplex(set);
  const auto verts = *vertices(set);
  for (int t = 0; t < 20; ++t) {
    const Instance in = random_instance(6, 200 + t);
    const double exact = vertex_lp_oracle(in, verts);
    const double dominating = solve_simplex_ar(in, simplex).dominating_objective;
    EXPECT_LE(exact, dominating + 1e-7);
    EXPECT_LE(dominating, simplex.beta * exact + 1e-6);
  }
}

TEST(SimplexAr, WorstCaseInstanceStaysUnderScaleBound) {
  for (int m : {9, 16, 25}) {
    const WorstCase wc = build_worstcase_instance(m);
    const double bound = double(m) / wc.r;
    EXPECT_LE(solve_simplex_ar(wc.instance, wc.simplex).dominating_objective, bound + 1e-9) << m;
  }
  EXPECT_NEAR(16.0 / build_worstcase_instance(16).r, 16.0 / 12.0, 1e-15);
}

class PapOnBudget : public ::testing::TestWithParam<int> {};

TEST_P(PapOnBudget, FeasibleAndWithinGuarantee) {
  const UncertaintySet set(6, Budget{2.0});
  const Instance in = random_instance(6, 300 + GetParam());
  const auto verts = *vertices(set);
  const double exact = vertex_lp_oracle(in, verts);
  for (const DominatingSimplex& simplex : {closed_form_simplex(set), numeric_pi_simplex(set)}) {
    const SimplexArSolution sol = solve_simplex_ar(in, simplex);
    const PiecewisePolicy policy = make_pap(simplex, sol);
    const PapWorstCost worst = pap_worst_cost(in, policy, set);
    EXPECT_LE(worst.value, 2 * simplex.beta * exact + 1e-6);
    EXPECT_LE(worst.value, policy.objective_bound + 1e-7);
    for (const VectorXd& h : sample(set, 1000, 9 + GetParam())) {
      const VectorXd y = pap_recourse(policy, h);
      EXPECT_GE(y.minCoeff(), -1e-9);
      ASSERT_GE((in.A * policy.x + in.B * y - h).minCoeff(), -1e-7);
      ASSERT_LE(in.c.dot(policy.x) + in.d.dot(y), worst.value + 1e-7);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Instances, PapOnBudget, ::testing::Range(0, 5));

TEST(Pap, WorstCostMatchesVertexScan) {
  // The recourse is convex in h, so the worst cost over a polytope is at a vertex.
  const UncertaintySet set(6, Budget{2.0});
  const auto verts = *vertices(set);
  for (int t = 0; t < 5; ++t) {
    const Instance in = random_instance(6, 400 + t);
    const DominatingSimplex simplex = numeric_pi_simplex(set);
    const PiecewisePolicy policy = make_pap(simplex, solve_simplex_ar(in, simplex), PapMode::Doubled);
    double scan = 0;
    for (const VectorXd& h : verts) scan = std::max(scan, in.c.dot(policy.x) + in.d.dot(pap_recourse(policy, h)));
    const PapWorstCost worst = pap_worst_cost(in, policy, set);
    EXPECT_TRUE(worst.exact);
    EXPECT_NEAR(worst.value, scan, 1e-7);
    EXPECT_LE(worst.sampled_lower, worst.value + 1e-12);
  }
}

TEST(Pap, DirectModeCoversSamples) {
  const UncertaintySet set(8, Budget{2.0});
  const DominatingSimplex simplex = closed_form_simplex(set);
  ASSERT_TRUE(simplex.direct);
  const Instance in = random_instance(8, 17);
  const SimplexArSolution sol = solve_simplex_ar(in, simplex);
  const PiecewisePolicy policy = make_pap(simplex, sol, PapMode::Direct);
  EXPECT_NEAR(policy.objective_bound, sol.objective, 1e-12);
  for (const VectorXd& h : sample(set, 500, 4)) {
    const VectorXd y = pap_recourse(policy, h);
    ASSERT_GE((in.A * policy.x + in.B * y - h).minCoeff(), -1e-7);
    ASSERT_LE(in.c.dot(policy.x) + in.d.dot(y), policy.objective_bound + 1e-7);
  }
}

TEST(Pap, DirectModeNeedsDirectSimplex) {
  const UncertaintySet set(5, Hypersphere{});
  const DominatingSimplex simplex = closed_form_simplex(set);
  const SimplexArSolution sol = solve_simplex_ar(identity_instance(5, 1.0), simplex);
  EXPECT_EQ(code_of([&] { make_pap(simplex, sol, PapMode::Direct); }), ErrorCode::InvalidArgument);
}

TEST(Pap, DoubledFeasibleOnHypersphere) {
  const UncertaintySet set(10, Hypersphere{});
  const DominatingSimplex simplex = closed_form_simplex(set);
  const Instance in = random_instance(10, 23);
  const PiecewisePolicy policy = make_pap(simplex, solve_simplex_ar(in, simplex));
  const PapWorstCost worst = pap_worst_cost(in, policy, set);
  for (const VectorXd& h : sample(set, 1000, 8)) {
    const VectorXd y = pap_recourse(policy, h);
    ASSERT_GE((in.A * policy.x + in.B * y - h).minCoeff(), -1e-7);
    ASSERT_LE(in.c.dot(policy.x) + in.d.dot(y), worst.value + 1e-7);
  }
  EXPECT_LE(worst.sampled_lower, worst.value + 1e-12);
}

void expect_affine_feasible(const Instance& in, const AffinePolicy& pol, const std::vector<VectorXd>& points) {
  for (const VectorXd& h : points) {
    const VectorXd y = pol.P * h + pol.q;
    ASSERT_GE(y.minCoeff(), -1e-7);
    ASSERT_GE((in.A * pol.x + in.B * y - h).minCoeff(), -1e-7);
    ASSERT_LE(in.c.dot(pol.x) + in.d.dot(y), pol.objective + 1e-7);
  }
}

TEST(Affine, MatchesVertexOracleOnBudgetSets) {
  const UncertaintySet set(6, Budget{2.0});
  const auto verts = *vertices(set);
  for (int t = 0; t < 3; ++t) {
    const Instance in = random_instance(6, 500 + t);
    const AffinePolicy pol = solve_affine(in, set);
    const double oracle = affine_vertex_oracle(in, verts);
    EXPECT_TRUE(pol.converged);
    EXPECT_NEAR(pol.objective, oracle, 1e-5 * (1 + std::abs(oracle)));
    EXPECT_LE(pol.lower_bound, oracle + 1e-7);
    expect_affine_feasible(in, pol, verts);
  }
}

TEST(Affine, OptimalOnTheUnitSimplex) {
  const UncertaintySet set(5, Budget{1.0});
  const auto verts = *vertices(set);
  for (int t = 0; t < 3; ++t) {
    const Instance in = random_instance(5, 600 + t);
    AffineOptions options;
    options.tol = 1e-8;
    EXPECT_NEAR(solve_affine(in, set, options).objective, vertex_lp_oracle(in, verts), 1e-5);
  }
}

TEST(Affine, NeverBelowTheAdjustableOptimum) {
  const UncertaintySet set(5, Budget{2.0});
  const auto verts = *vertices(set);
  for (int t = 0; t < 3; ++t) {
    const Instance in = random_instance(5, 700 + t);
    EXPECT_GE(solve_affine(in, set).objective, exact_ar(in, verts).value - 1e-6);
  }
}

TEST(Affine, IdentityInstanceCostsOne) {
  const AffinePolicy pol = solve_affine(identity_instance(4, 1.0), UncertaintySet(4, Budget{1.0}));
  EXPECT_NEAR(pol.objective, 1.0, 1e-6);
}

TEST(Affine, FeasibleOnHypersphereSamples) {
  const UncertaintySet set(6, Hypersphere{});
  const Instance in = random_instance(6, 31);
  AffineOptions options;
  options.tol = 1e-4;
  const AffinePolicy pol = solve_affine(in, set, options);
  EXPECT_TRUE(pol.converged);
  EXPECT_LE(pol.lower_bound, pol.objective + 1e-9);
  std::vector<VectorXd> points = sample(set, 1000, 12);
  for (int i = 0; i < 6; ++i) points.push_back(VectorXd::Unit(6, i));
  expect_affine_feasible(in, pol, points);
}

TEST(Affine, WorstCaseStaticBound) {
  const WorstCase wc = build_worstcase_instance(9);
  AffineOptions options;
  options.tol = 1e-6;
  EXPECT_LE(solve_affine(wc.instance, wc.set, options).objective, 3.0 / 15.0 + 1e-4);
}

TEST(Affine, CutCapThrowsWhenRequested) {
  const UncertaintySet set(8, Hypersphere{});
  AffineOptions options;
  options.max_cuts = 3;
  EXPECT_EQ(code_of([&] { solve_affine(random_instance(8, 3), set, options); }), ErrorCode::IterationCapExceeded);
  options.throw_on_cap = false;
  const AffinePolicy pol = solve_affine(random_instance(8, 3), set, options);
  EXPECT_FALSE(pol.converged);
}

TEST(Affine, RejectsMismatchedDimensions) {
  EXPECT_EQ(code_of([] { solve_affine(identity_instance(4, 1.0), UncertaintySet(5, Budget{1.0})); }),
            ErrorCode::DimensionMismatch);
}

}  // namespace
