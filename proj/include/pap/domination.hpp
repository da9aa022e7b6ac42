#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pap/uncertainty.hpp"

namespace pap {

enum class Provenance { ClosedForm, NumericPi, Iterative, Shifted, GeneralizedBudget, Explicit };

const char* to_string(Provenance p);
Provenance provenance_from_string(const std::string& name);

// Simplex beta * conv(s_1 e_1, ..., s_m e_m, v) with axis scale s (all ones
// unless the set is a diagonal scaling of a permutation invariant set).
//
// `direct` simplices dominate the set themselves; the others dominate only
// after doubling. `shifted` simplices have vertices beta v, beta (s_i e_i + v)
// and always dominate directly.
struct DominatingSimplex {
  double beta = 1.0;
  Eigen::VectorXd v;
  Provenance provenance = Provenance::ClosedForm;
  bool direct = false;
  bool shifted = false;
  Eigen::VectorXd axis_scale;
  // Known factor with simplex contained in scale_bound * set, when established.
  std::optional<double> scale_bound;
  bool clamped = false;

  Eigen::Index dim() const { return v.size(); }
  double hull_factor() const { return direct || shifted ? 1.0 : 2.0; }
  Eigen::VectorXd axis() const;
  // m x (m+1); column i < m is the axis vertex, column m is beta v.
  Eigen::MatrixXd vertex_matrix() const;
};

DominatingSimplex make_simplex(double beta, Eigen::VectorXd v, Provenance provenance, bool direct);

struct PiBeta {
  double beta = 1.0;  // clamped to >= 1
  double raw = 1.0;
  int k = 1;          // maximizing number of coordinates
  Eigen::VectorXd v;
  bool clamped() const { return raw < 1.0; }
};

// max over integer k of gamma(k) / (gamma(m) + 1/k), v = gamma(m) e.
PiBeta beta_pi(const UncertaintySet& set);

// NumericPi simplex built from beta_pi, doubled.
DominatingSimplex numeric_pi_simplex(const UncertaintySet& set);

// Throws UnsupportedFamily or ParameterOutOfRange.
DominatingSimplex closed_form_simplex(const UncertaintySet& set);

enum class MaxPlusSumStrategy { Auto, PiEnumeration, Milp, SubsetOracle, VertexScan };

const char* to_string(MaxPlusSumStrategy s);

struct MaxPlusSumResult {
  double value = 0.0;
  Eigen::VectorXd argmax;
  MaxPlusSumStrategy strategy = MaxPlusSumStrategy::Auto;
  long nodes = 0;  // branch-and-bound nodes or subsets visited
};

bool strategy_available(const UncertaintySet& set, const Eigen::VectorXd& u, const Eigen::VectorXd& w,
                        MaxPlusSumStrategy strategy);

// max over h in the set of sum_i w_i (h_i - u_i)^+. Throws StrategyUnavailable.
MaxPlusSumResult max_plus_sum(const UncertaintySet& set, const Eigen::VectorXd& u, const Eigen::VectorXd& w,
                              MaxPlusSumStrategy strategy = MaxPlusSumStrategy::Auto);

struct IterativeStep {
  double value = 0.0;  // max-plus-sum at the current thresholds
  Eigen::VectorXd h;   // maximizer after zeroing saturated coordinates
  Eigen::VectorXd u;   // thresholds after the update
};

struct IterativeResult {
  DominatingSimplex simplex;
  std::vector<IterativeStep> trace;
  double final_value = 0.0;
};

// Throws RequiresHRep for families without an inequality description and
// NonConvergence past ceil(2 sqrt m) + 2 rounds.
IterativeResult iterative_simplex(const UncertaintySet& set, MaxPlusSumStrategy strategy = MaxPlusSumStrategy::Auto);

// Closed form when one exists, else beta_pi for permutation invariant sets,
// else the iterative construction followed by the shifted simplex.
DominatingSimplex construct_simplex(const UncertaintySet& set);

// Vertices beta v and beta (e_i + v). Throws StructuralInequalityUnverified.
DominatingSimplex shifted_simplex(const UncertaintySet& set, double beta, const Eigen::VectorXd& v);

// Convex weights refer to the columns of hull_factor() * vertex_matrix(); the
// point is their combination and dominates h.
struct DominatingPoint {
  Eigen::VectorXd point;
  Eigen::VectorXd weights;
};

DominatingPoint dominating_point(const DominatingSimplex& simplex, const Eigen::Ref<const Eigen::VectorXd>& h);

struct DominationCheck {
  bool ok = true;
  std::string reason;
  std::optional<Eigen::VectorXd> witness;
  double max_plus_sum = 0.0;
};

constexpr double kDominationTol = 1e-7;

// factor 1 checks the structural inequality (and scale_bound if present);
// factor 2 also checks sampled dominating points and their weights.
DominationCheck verify_domination(const UncertaintySet& set, const DominatingSimplex& simplex, int factor = 2,
                                  int samples = 1000, std::uint64_t seed = 1);

}  // namespace pap
