#pragma once

#include <json.hpp>

#include <string>

#include "pap/domination.hpp"
#include "pap/instance.hpp"
#include "pap/policies.hpp"
#include "pap/uncertainty.hpp"

namespace pap {

using Json = nlohmann::json;

// Malformed documents raise InvalidArgument; shape errors raise DimensionMismatch.
Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& doc);

// {"m", "n", "A": row-major, "B": row-major, "c", "d"}; nested row arrays are also accepted.
Json to_json(const Instance& instance);
Instance instance_from_json(const Json& doc);

// {"family", "m", "params"}; ScaledSpi nests the inner descriptor under params.inner.
Json to_json(const UncertaintySet& set);
UncertaintySet set_from_json(const Json& doc);

// {"beta", "v", "provenance"} plus the optional fields direct, shifted,
// axis_scale, scale_bound and clamped.
Json to_json(const DominatingSimplex& simplex);
DominatingSimplex simplex_from_json(const Json& doc);

Json to_json(const PiecewisePolicy& policy);
Json to_json(const AffinePolicy& policy);

}  // namespace pap
