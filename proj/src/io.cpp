#include "pap/io.hpp"

#include <fstream>
#include <memory>

#include "pap/error.hpp"

namespace pap {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

template <typename... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <typename... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); }

const Json& field(const Json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) malformed(std::string("missing field '") + key + "'");
  return doc.at(key);
}

double number(const Json& value, const std::string& what) {
  if (!value.is_number()) malformed(what + " must be a number");
  return value.get<double>();
}

Index count(const Json& value, const std::string& what) {
  if (!value.is_number_integer() || value.get<long long>() < 0) malformed(what + " must be a nonnegative integer");
  return static_cast<Index>(value.get<long long>());
}

Json vector_json(const VectorXd& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

VectorXd vector_from(const Json& value, const std::string& what) {
  if (!value.is_array()) malformed(what + " must be an array");
  VectorXd v(static_cast<Index>(value.size()));
  for (size_t i = 0; i < value.size(); ++i) v[static_cast<Index>(i)] = number(value[i], what);
  return v;
}

Json matrix_json(const MatrixXd& a) {
  std::vector<double> flat;
  flat.reserve(static_cast<size_t>(a.size()));
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) flat.push_back(a(i, j));
  return flat;
}

Json nested_matrix_json(const MatrixXd& a) {
  Json rows = Json::array();
  for (Index i = 0; i < a.rows(); ++i) rows.push_back(vector_json(a.row(i).transpose()));
  return rows;
}

// Flat row-major with known shape, or nested rows.
MatrixXd matrix_from(const Json& value, Index rows, Index cols, const std::string& what) {
  if (!value.is_array()) malformed(what + " must be an array");
  MatrixXd a(rows, cols);
  if (!value.empty() && value[0].is_array()) {
    if (static_cast<Index>(value.size()) != rows) throw Error(ErrorCode::DimensionMismatch, what + " has wrong row count");
    for (Index i = 0; i < rows; ++i) {
      const VectorXd r = vector_from(value[static_cast<size_t>(i)], what);
      if (r.size() != cols) throw Error(ErrorCode::DimensionMismatch, what + " has wrong row length");
      a.row(i) = r.transpose();
    }
    return a;
  }
  const VectorXd flat = vector_from(value, what);
  if (flat.size() != rows * cols) throw Error(ErrorCode::DimensionMismatch, what + " has wrong length");
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) a(i, j) = flat[i * cols + j];
  return a;
}

MatrixXd nested_matrix_from(const Json& value, const std::string& what) {
  if (!value.is_array() || value.empty() || !value[0].is_array()) malformed(what + " must be a nonempty array of rows");
  const Index cols = static_cast<Index>(value[0].size());
  return matrix_from(value, static_cast<Index>(value.size()), cols, what);
}

Json params_json(const UncertaintySet& set) {
  return std::visit(
      Overloaded{
          [](const PNormBall& f) { return Json{{"p", f.p}, {"radius", f.radius}}; },
          [](const Hypersphere&) { return Json::object(); },
          [](const TwoNormBalls& f) { return Json{{"p", f.p}, {"q", f.q}, {"r", f.r}}; },
          [](const Budget& f) { return Json{{"k", f.k}}; },
          [](const BudgetIntersection& f) { return Json{{"alpha", nested_matrix_json(f.alpha)}}; },
          [](const GeneralizedBudget& f) { return Json{{"theta", f.theta}}; },
          [](const PiEllipsoid& f) { return Json{{"a", f.a}}; },
          [](const ScaledSpi& f) { return Json{{"lambda", vector_json(f.lambda)}, {"inner", to_json(*f.inner)}}; },
          [](const ExplicitPolytope& f) { return Json{{"G", nested_matrix_json(f.G)}, {"g", vector_json(f.g)}}; },
          [](const ExplicitConvHull& f) {
            Json points = Json::array();
            for (const VectorXd& p : f.points) points.push_back(vector_json(p));
            Json out{{"points", points}};
            if (f.orbit) out["orbit"] = Json{{"count", f.orbit->count}, {"value", f.orbit->value}};
            return out;
          },
      },
      set.family());
}

double param(const Json& params, const char* key, double fallback) {
  return params.contains(key) ? number(params.at(key), key) : fallback;
}

}  // namespace

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) malformed("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    malformed("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& doc) {
  std::ofstream out(path);
  if (!out) malformed("cannot open '" + path + "' for writing");
  out << doc.dump(2) << '\n';
}

Json to_json(const Instance& in) {
  return Json{{"m", in.m()}, {"n", in.n()},           {"A", matrix_json(in.A)},
              {"B", matrix_json(in.B)}, {"c", vector_json(in.c)}, {"d", vector_json(in.d)}};
}

Instance instance_from_json(const Json& doc) {
  const Index m = count(field(doc, "m"), "m"), n = count(field(doc, "n"), "n");
  Instance in{matrix_from(field(doc, "A"), m, n, "A"), matrix_from(field(doc, "B"), m, n, "B"),
              vector_from(field(doc, "c"), "c"), vector_from(field(doc, "d"), "d")};
  in.validate();
  return in;
}

Json to_json(const UncertaintySet& set) {
  return Json{{"family", set.family_name()}, {"m", set.dim()}, {"params", params_json(set)}};
}

UncertaintySet set_from_json(const Json& doc) {
  const Json& name_value = field(doc, "family");
  if (!name_value.is_string()) malformed("family must be a string");
  const std::string name = name_value.get<std::string>();
  const Index m = count(field(doc, "m"), "m");
  const Json params = doc.contains("params") ? doc.at("params") : Json::object();
  if (!params.is_object()) malformed("params must be an object");

  if (name == "PNormBall") return {m, PNormBall{number(field(params, "p"), "p"), param(params, "radius", 1.0)}};
  if (name == "Hypersphere") return {m, Hypersphere{}};
  if (name == "TwoNormBalls")
    return {m, TwoNormBalls{number(field(params, "p"), "p"), number(field(params, "q"), "q"),
                            number(field(params, "r"), "r")}};
  if (name == "Budget") return {m, Budget{number(field(params, "k"), "k")}};
  if (name == "BudgetIntersection") return {m, BudgetIntersection{nested_matrix_from(field(params, "alpha"), "alpha")}};
  if (name == "GeneralizedBudget")
    return {m, GeneralizedBudget{param(params, "theta", 0.4 * static_cast<double>(m - 1))}};
  if (name == "PiEllipsoid") return {m, PiEllipsoid{number(field(params, "a"), "a")}};
  if (name == "ScaledSpi") {
    auto inner = std::make_shared<UncertaintySet>(set_from_json(field(params, "inner")));
    return {m, ScaledSpi{vector_from(field(params, "lambda"), "lambda"), std::move(inner)}};
  }
  if (name == "ExplicitPolytope")
    return {m, ExplicitPolytope{nested_matrix_from(field(params, "G"), "G"), vector_from(field(params, "g"), "g")}};
  if (name == "ExplicitConvHull") {
    ExplicitConvHull hull;
    const Json& points = field(params, "points");
    if (!points.is_array()) malformed("points must be an array");
    for (const Json& p : points) hull.points.push_back(vector_from(p, "points"));
    if (params.contains("orbit")) {
      const Json& o = params.at("orbit");
      hull.orbit = PermutationOrbit{static_cast<int>(count(field(o, "count"), "orbit.count")),
                                    number(field(o, "value"), "orbit.value")};
    }
    return {m, std::move(hull)};
  }
  throw Error(ErrorCode::UnsupportedFamily, "unknown family '" + name + "'");
}

Json to_json(const DominatingSimplex& s) {
  Json out{{"beta", s.beta}, {"v", vector_json(s.v)}, {"provenance", to_string(s.provenance)},
           {"direct", s.direct}, {"shifted", s.shifted}, {"clamped", s.clamped}};
  if (s.axis_scale.size() > 0) out["axis_scale"] = vector_json(s.axis_scale);
  if (s.scale_bound) out["scale_bound"] = *s.scale_bound;
  return out;
}

DominatingSimplex simplex_from_json(const Json& doc) {
  const Json& prov = field(doc, "provenance");
  if (!prov.is_string()) malformed("provenance must be a string");
  const double beta = number(field(doc, "beta"), "beta");
  if (!(beta > 0)) throw Error(ErrorCode::NonPositiveScale, "beta must be positive");
  auto flag = [&](const char* key) {
    if (!doc.contains(key)) return false;
    if (!doc.at(key).is_boolean()) malformed(std::string(key) + " must be a boolean");
    return doc.at(key).get<bool>();
  };
  const Provenance provenance = provenance_from_string(prov.get<std::string>());
  DominatingSimplex s = make_simplex(beta, vector_from(field(doc, "v"), "v"), provenance, flag("direct"));
  s.shifted = flag("shifted");
  s.clamped = flag("clamped");
  if (doc.contains("axis_scale")) {
    s.axis_scale = vector_from(doc.at("axis_scale"), "axis_scale");
    if (s.axis_scale.size() != s.v.size()) throw Error(ErrorCode::DimensionMismatch, "axis_scale length must equal m");
  }
  if (doc.contains("scale_bound")) s.scale_bound = number(doc.at("scale_bound"), "scale_bound");
  return s;
}

Json to_json(const PiecewisePolicy& p) {
  return Json{{"kind", "pap"},
              {"mode", p.mode == PapMode::Doubled ? "doubled" : "direct"},
              {"x", vector_json(p.x)},
              {"beta", p.simplex.beta},
              {"v", vector_json(p.simplex.v)},
              {"simplex", to_json(p.simplex)},
              {"recourse_vertices", nested_matrix_json(p.recourse.transpose())},
              {"objective_bound", p.objective_bound}};
}

Json to_json(const AffinePolicy& p) {
  return Json{{"kind", "affine"},
              {"x", vector_json(p.x)},
              {"P", nested_matrix_json(p.P)},
              {"q", vector_json(p.q)},
              {"z", p.z},
              {"objective", p.objective},
              {"lower_bound", p.lower_bound},
              {"max_violation", p.max_violation},
              {"cuts", p.cuts},
              {"rounds", p.rounds},
              {"converged", p.converged}};
}

}  // namespace pap
