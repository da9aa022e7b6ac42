#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "pap/domination.hpp"
#include "pap/instance.hpp"
#include "pap/policies.hpp"
#include "pap/uncertainty.hpp"

namespace pap {

// Random-instance families: hypersphere, pball3, pball1.5, budget,
// intersection (L budget rows), generalized-budget.
struct FamilySpec {
  std::string name = "hypersphere";
  int budgets = 2;              // rows L for intersection
  double theta_factor = 0.4;    // theta = theta_factor * (m - 1)
};

FamilySpec parse_family(const std::string& text);
std::vector<std::string> known_families();

struct GeneratedInstance {
  Instance instance;
  UncertaintySet set;
};

// n = m, c = d = e, A = B = I + |Y| / s. Deterministic per (seed, m, id).
GeneratedInstance gen_instance(const FamilySpec& family, int m, std::uint64_t seed, int instance_id = 0);

struct WorstCase {
  Instance instance;
  UncertaintySet set;
  DominatingSimplex simplex;  // conv(e_i, e / sqrt m), within m / r of the set
  int r = 0;
};

// m must be a perfect square >= 4.
WorstCase build_worstcase_instance(int m);

struct ExperimentConfig {
  FamilySpec family;
  std::vector<int> m_list{10, 20};
  int instances = 50;
  std::uint64_t seed = 7;
  double affine_tol = 5e-3;  // relative gap of the affine baseline
  int max_affine_m = 30;
  int threads = 1;
  std::string output_path;
};

struct InstanceRecord {
  std::string family;
  int m = 0;
  int instance_id = 0;
  double z_pap = 0.0;
  double z_aff = 0.0;
  double ratio = 0.0;
  double t_pap_ms = 0.0;
  double t_aff_ms = 0.0;
  double t_iterative_ms = 0.0;
  std::string status;  // ok, pap-only, affine-cap, failed: <reason>
};

struct RatioSummary {
  int m = 0;
  int count = 0;
  int failures = 0;
  double avg = 0.0, min = 0.0, max = 0.0;
  double q05 = 0.0, q10 = 0.0, q25 = 0.0, q50 = 0.0;
  double t_pap_ms = 0.0, t_aff_ms = 0.0, t_iterative_ms = 0.0;
};

struct RatioStats {
  std::vector<InstanceRecord> records;  // ordered by (m, instance_id)
  std::vector<RatioSummary> per_m;
  int failures = 0;
};

InstanceRecord run_instance(const ExperimentConfig& config, int m, int instance_id);

// Writes the CSV when output_path is set.
RatioStats run_comparison(const ExperimentConfig& config);

RatioSummary summarize(int m, const std::vector<InstanceRecord>& records);
void write_csv(const std::string& path, const std::vector<InstanceRecord>& records);

}  // namespace pap
