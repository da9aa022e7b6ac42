#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "pap/domination.hpp"
#include "pap/instance.hpp"
#include "pap/uncertainty.hpp"

namespace pap {

// One recourse vector per scenario column; shared by the simplex and exact LPs.
struct ScenarioLpSolution {
  Eigen::VectorXd x;
  Eigen::MatrixXd recourse;  // n x scenarios
  double z = 0.0;            // worst second-stage cost over the scenarios
  double objective = 0.0;    // c'x + z
  long iterations = 0;
};

// min c'x + z  s.t.  A x + B y_s >= h_s,  z >= d'y_s,  x, y >= 0  for every column h_s.
ScenarioLpSolution solve_scenario_lp(const Instance& instance, const Eigen::MatrixXd& scenarios);

struct SimplexArSolution {
  Eigen::VectorXd x;
  Eigen::MatrixXd recourse;  // n x (m+1), last column for beta v
  double z = 0.0;
  double objective = 0.0;              // adjustable value over the simplex
  double dominating_objective = 0.0;   // over hull_factor * simplex
};

SimplexArSolution solve_simplex_ar(const Instance& instance, const DominatingSimplex& simplex);

struct ExactArSolution {
  double value = 0.0;
  Eigen::VectorXd x;
  Eigen::MatrixXd recourse;
};

// Throws CombinatorialBlowup when vertices * n exceeds 10^5.
ExactArSolution exact_ar(const Instance& instance, const std::vector<Eigen::VectorXd>& vertices);

// Doubled: x = 2 x_hat and y(h) = (1/beta) sum (h_i - beta v_i)^+ / s_i y_i + y_{m+1}.
// Direct: x = x_hat and y(h) interpolates the recourse at the weights of the
// dominating point inside the simplex itself.
enum class PapMode { Doubled, Direct };

struct PiecewisePolicy {
  DominatingSimplex simplex;
  PapMode mode = PapMode::Doubled;
  Eigen::VectorXd x;
  Eigen::MatrixXd recourse;
  double objective_bound = 0.0;  // certified worst-case cost
};

PiecewisePolicy make_pap(const DominatingSimplex& simplex, const SimplexArSolution& solution);
PiecewisePolicy make_pap(const DominatingSimplex& simplex, const SimplexArSolution& solution, PapMode mode);

Eigen::VectorXd pap_recourse(const PiecewisePolicy& policy, const Eigen::Ref<const Eigen::VectorXd>& h);

struct PapWorstCost {
  double value = 0.0;  // exact worst case when `exact`, otherwise the certified upper bound
  bool exact = false;
  double sampled_lower = 0.0;
};

PapWorstCost pap_worst_cost(const Instance& instance, const PiecewisePolicy& policy, const UncertaintySet& set,
                            int samples = 200, std::uint64_t seed = 3);

struct AffineOptions {
  double tol = 1e-6;
  long max_cuts = 0;  // 0 means 200 m
  bool throw_on_cap = true;
};

struct AffinePolicy {
  Eigen::VectorXd x;
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  double z = 0.0;            // worst second-stage cost d'q + max_h d'P h
  double objective = 0.0;    // c'x + z of the returned (feasible) policy
  double lower_bound = 0.0;  // best master LP value
  double max_violation = 0.0;
  long cuts = 0;
  int rounds = 0;
  bool converged = false;
  bool repaired = false;   // x, q re-optimized for the returned P
};

// Cutting planes over (x, P, q, z) with support-oracle separation. Stops when
// the master solution violates every family by at most tol, or when the best
// feasible policy is within tol (1 + |objective|) of the master bound. Throws
// IterationCapExceeded past the cut cap unless options.throw_on_cap is false.
AffinePolicy solve_affine(const Instance& instance, const UncertaintySet& set, const AffineOptions& options = {});

}  // namespace pap
