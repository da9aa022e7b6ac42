#include <gtest/gtest.h>

#include <functional>

#include "pap/error.hpp"
#include "pap/experiments.hpp"
#include "pap/io.hpp"
#include "test_sets.hpp"

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

TEST(InstanceJson, RoundTripIsExact) {
  Instance in = gen_instance(parse_family("hypersphere"), 4, 7, 1).instance;
  in.A(0, 1) = 0.1 + 0.2;
  in.c[2] = 1.0 / 3.0;
  const Instance back = instance_from_json(Json::parse(to_json(in).dump()));
  EXPECT_EQ(back.A, in.A);
  EXPECT_EQ(back.B, in.B);
  EXPECT_EQ(back.c, in.c);
  EXPECT_EQ(back.d, in.d);
}

TEST(InstanceJson, FlatArraysAreRowMajor) {
  const Json doc = Json::parse(R"({"m":2,"n":3,"A":[1,2,3,4,5,6],"B":[[1,0,0],[0,1,0]],"c":[1,1,1],"d":[1,1,1]})");
  const Instance in = instance_from_json(doc);
  EXPECT_EQ(in.A(0, 2), 3.0);
  EXPECT_EQ(in.A(1, 0), 4.0);
  EXPECT_EQ(in.B(1, 1), 1.0);
}

TEST(InstanceJson, RejectsBadShapes) {
  EXPECT_EQ(code_of([] {
              instance_from_json(Json::parse(R"({"m":2,"n":2,"A":[1,2,3],"B":[1,0,0,1],"c":[1,1],"d":[1,1]})"));
            }),
            ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of([] { instance_from_json(Json::parse(R"({"m":2,"n":2})")); }), ErrorCode::InvalidArgument);
}

TEST(SetJson, EveryFamilyRoundTrips) {
  for (const UncertaintySet& set : testing_sets::all_families(5)) {
    const Json doc = to_json(set);
    const UncertaintySet back = set_from_json(Json::parse(doc.dump()));
    EXPECT_EQ(back.family_name(), set.family_name());
    EXPECT_EQ(to_json(back), doc) << set.family_name();
    const VectorXd w = VectorXd::LinSpaced(5, 0.3, 1.1);
    EXPECT_DOUBLE_EQ(support(back, w).value, support(set, w).value) << set.family_name();
  }
}

TEST(SetJson, GeneralizedBudgetDefaultTheta) {
  const UncertaintySet set = set_from_json(Json::parse(R"({"family":"GeneralizedBudget","m":11})"));
  EXPECT_DOUBLE_EQ(set.as<GeneralizedBudget>()->theta, 4.0);
}

TEST(SetJson, RejectsUnknownFamily) {
  EXPECT_EQ(code_of([] { set_from_json(Json::parse(R"({"family":"Cube","m":3})")); }), ErrorCode::UnsupportedFamily);
  EXPECT_EQ(code_of([] { set_from_json(Json::parse(R"({"family":"Budget","m":3,"params":{}})")); }),
            ErrorCode::InvalidArgument);
}

TEST(SimplexJson, RoundTripKeepsEveryField) {
  DominatingSimplex s = closed_form_simplex(UncertaintySet(9, Budget{3.0}));
  s.scale_bound = 1.5;
  s.axis_scale[2] = 0.7;
  const DominatingSimplex back = simplex_from_json(Json::parse(to_json(s).dump()));
  EXPECT_EQ(back.beta, s.beta);
  EXPECT_EQ(back.v, s.v);
  EXPECT_EQ(back.provenance, s.provenance);
  EXPECT_EQ(back.direct, s.direct);
  EXPECT_EQ(back.shifted, s.shifted);
  EXPECT_EQ(back.axis_scale, s.axis_scale);
  EXPECT_EQ(back.scale_bound, s.scale_bound);
}

TEST(SimplexJson, MinimalDocument) {
  const DominatingSimplex s =
      simplex_from_json(Json::parse(R"({"beta":2,"v":[0.5,0.5],"provenance":"NumericPi"})"));
  EXPECT_EQ(s.hull_factor(), 2.0);
  EXPECT_EQ(s.axis(), VectorXd::Ones(2));
  EXPECT_EQ(code_of([] { simplex_from_json(Json::parse(R"({"beta":0,"v":[1],"provenance":"NumericPi"})")); }),
            ErrorCode::NonPositiveScale);
  EXPECT_EQ(code_of([] { simplex_from_json(Json::parse(R"({"beta":1,"v":[1],"provenance":"Guess"})")); }),
            ErrorCode::InvalidArgument);
}

TEST(PolicyJson, ExportsShapes) {
  const UncertaintySet set(4, Budget{2.0});
  const Instance in = gen_instance(parse_family("hypersphere"), 4, 7, 0).instance;
  const DominatingSimplex s = closed_form_simplex(set);
  const Json pap = to_json(make_pap(s, solve_simplex_ar(in, s)));
  EXPECT_EQ(pap["kind"], "pap");
  EXPECT_EQ(pap["recourse_vertices"].size(), 5u);
  EXPECT_EQ(pap["x"].size(), 4u);
  const Json aff = to_json(solve_affine(in, set));
  EXPECT_EQ(aff["kind"], "affine");
  EXPECT_EQ(aff["P"].size(), 4u);
  EXPECT_EQ(aff["P"][0].size(), 4u);
}

}  // namespace
