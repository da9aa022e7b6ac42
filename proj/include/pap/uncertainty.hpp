#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pap/instance.hpp"

namespace pap {

class UncertaintySet;

// {h >= 0 : ||h||_p <= radius}
struct PNormBall {
  double p = 2.0;
  double radius = 1.0;
};

// Unit Euclidean ball in the nonnegative orthant.
struct Hypersphere {};

// {h >= 0 : ||h||_p <= 1, ||h||_q <= r} with p > q >= 1.
struct TwoNormBalls {
  double p = 2.0;
  double q = 1.0;
  double r = 1.0;
};

// {h in [0,1]^m : sum h <= k}
struct Budget {
  double k = 1.0;
};

// {h in [0,1]^m : alpha h <= 1} with alpha >= 0 of shape L x m.
struct BudgetIntersection {
  Eigen::MatrixXd alpha;
};

// {h in [0,1]^m : sum h <= 1 + theta (h_i + h_j) for all i != j}
struct GeneralizedBudget {
  double theta = 0.0;
};

// {h >= 0 : (1 - a) ||h||^2 + a (sum h)^2 <= 1}
struct PiEllipsoid {
  double a = 0.0;
};

// {diag(lambda) g : g in inner}, inner permutation invariant.
struct ScaledSpi {
  Eigen::VectorXd lambda;
  std::shared_ptr<const UncertaintySet> inner;
};

// {h >= 0 : G h <= g}
struct ExplicitPolytope {
  Eigen::MatrixXd G;
  Eigen::VectorXd g;
};

// All coordinate permutations of a vector with `count` entries equal to `value`.
struct PermutationOrbit {
  int count = 0;
  double value = 0.0;
};

// Down-monotone hull of explicit points plus, optionally, a permutation orbit.
// Orbits are expanded only on demand (vertices()).
struct ExplicitConvHull {
  std::vector<Eigen::VectorXd> points;
  std::optional<PermutationOrbit> orbit;
};

using SetFamily = std::variant<PNormBall, Hypersphere, TwoNormBalls, Budget, BudgetIntersection,
                               GeneralizedBudget, PiEllipsoid, ScaledSpi, ExplicitPolytope,
                               ExplicitConvHull>;

// Inequality description {h >= 0, h <= upper : G h <= g}.
struct HRep {
  Eigen::MatrixXd G;
  Eigen::VectorXd g;
  Eigen::VectorXd upper;
};

class UncertaintySet {
 public:
  // Validates parameters; throws ParameterOutOfRange, NonPositiveScale,
  // DimensionMismatch or InvalidArgument.
  UncertaintySet(Eigen::Index m, SetFamily family);

  Eigen::Index dim() const { return m_; }
  const SetFamily& family() const { return family_; }
  std::string family_name() const;

  template <typename T>
  const T* as() const {
    return std::get_if<T>(&family_);
  }

  bool is_permutation_invariant() const;
  bool has_hrep() const;
  // Throws RequiresHRep for conic and hull families.
  HRep hrep() const;

 private:
  Eigen::Index m_;
  SetFamily family_;
};

struct SupportResult {
  double value = 0.0;
  Eigen::VectorXd argmax;
};

constexpr double kMembershipTol = 1e-9;

// Membership in the down-monotone completion; negative entries are rejected.
bool membership(const UncertaintySet& set, const Eigen::Ref<const Eigen::VectorXd>& h,
                double tol = kMembershipTol);

SupportResult support(const UncertaintySet& set, const Eigen::Ref<const Eigen::VectorXd>& w);

// Largest average of k coordinates; throws NotPermutationInvariant.
double gamma(const UncertaintySet& set, int k);

// Extreme points, or nullopt when the family has a continuum of them.
// Throws CombinatorialBlowup beyond 10^6 points.
std::optional<std::vector<Eigen::VectorXd>> vertices(const UncertaintySet& set);

std::vector<Eigen::VectorXd> sample(const UncertaintySet& set, int count, std::uint64_t seed);

// Rescales rows of A and B by 1/lambda and returns the inner permutation invariant set.
std::pair<Instance, UncertaintySet> unwrap_scaled(const Instance& instance, const UncertaintySet& set);

}  // namespace pap
