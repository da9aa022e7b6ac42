#include <CLI11.hpp>

#include <cmath>
#include <iomanip>
#include <iostream>
#include <string>

#include "pap/domination.hpp"
#include "pap/error.hpp"
#include "pap/experiments.hpp"
#include "pap/io.hpp"
#include "pap/policies.hpp"

namespace {

using namespace pap;

constexpr int kOk = 0;
constexpr int kFatal = 1;
constexpr int kRecordedFailures = 2;

void emit(const Json& doc, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << doc.dump(2) << '\n';
  } else {
    write_json_file(out_path, doc);
  }
}

void note_clamp(const DominatingSimplex& s) {
  if (s.clamped) std::cerr << "note: beta was clamped up to 1\n";
}

int run_dominate(const std::string& set_path, const std::string& out) {
  const UncertaintySet set = set_from_json(read_json_file(set_path));
  const DominatingSimplex s = construct_simplex(set);
  note_clamp(s);
  emit(to_json(s), out);
  return kOk;
}

struct SolveArgs {
  std::string instance_path, set_path, simplex_path, policy = "pap", out;
  double tol = 1e-6;
};

int run_solve(const SolveArgs& a) {
  const Instance in = instance_from_json(read_json_file(a.instance_path));
  const UncertaintySet set = set_from_json(read_json_file(a.set_path));
  Json doc;
  if (a.policy == "pap") {
    const DominatingSimplex s =
        a.simplex_path.empty() ? construct_simplex(set) : simplex_from_json(read_json_file(a.simplex_path));
    note_clamp(s);
    const SimplexArSolution sol = solve_simplex_ar(in, s);
    const PiecewisePolicy policy = make_pap(s, sol);
    const PapWorstCost worst = pap_worst_cost(in, policy, set);
    doc = {{"policy", to_json(policy)},
           {"z_dominating", sol.dominating_objective},
           {"worst_cost", worst.value},
           {"worst_cost_exact", worst.exact},
           {"worst_cost_sampled_lower", worst.sampled_lower}};
  } else if (a.policy == "affine") {
    AffineOptions options;
    options.tol = a.tol;
    const AffinePolicy pol = solve_affine(in, set, options);
    doc = {{"policy", to_json(pol)}, {"objective", pol.objective}};
  } else {
    const auto verts = vertices(set);
    if (!verts) throw Error(ErrorCode::Unavailable, set.family_name() + " has no finite vertex list");
    const ExactArSolution sol = exact_ar(in, *verts);
    doc = {{"objective", sol.value}, {"x", std::vector<double>(sol.x.data(), sol.x.data() + sol.x.size())}};
  }
  emit(doc, a.out);
  return kOk;
}

int run_verify(const std::string& set_path, const std::string& simplex_path, int factor, int samples,
               std::uint64_t seed) {
  const UncertaintySet set = set_from_json(read_json_file(set_path));
  const DominatingSimplex s = simplex_from_json(read_json_file(simplex_path));
  const DominationCheck check = verify_domination(set, s, factor, samples, seed);
  Json doc{{"ok", check.ok}, {"reason", check.reason}, {"max_plus_sum", check.max_plus_sum}};
  if (check.witness)
    doc["witness"] = std::vector<double>(check.witness->data(), check.witness->data() + check.witness->size());
  std::cout << doc.dump(2) << '\n';
  return check.ok ? kOk : kRecordedFailures;
}

int run_compare(ExperimentConfig config, const std::string& family) {
  const double theta_factor = config.family.theta_factor;
  config.family = parse_family(family);
  config.family.theta_factor = theta_factor;
  const RatioStats stats = run_comparison(config);
  std::cout << "m,count,failures,avg,min,max,q05,q10,q25,q50,t_pap_ms,t_aff_ms,t_alg1_ms\n";
  for (const RatioSummary& s : stats.per_m) {
    std::cout << s.m << ',' << s.count << ',' << s.failures << ',' << s.avg << ',' << s.min << ',' << s.max << ','
              << s.q05 << ',' << s.q10 << ',' << s.q25 << ',' << s.q50 << ',' << s.t_pap_ms << ',' << s.t_aff_ms
              << ',' << s.t_iterative_ms << '\n';
  }
  for (const InstanceRecord& r : stats.records)
    if (r.status.rfind("failed", 0) == 0)
      std::cerr << "m=" << r.m << " instance " << r.instance_id << ": " << r.status << '\n';
  return stats.failures > 0 ? kRecordedFailures : kOk;
}

int run_worstcase(int m, bool affine, double tol, const std::string& out) {
  const WorstCase wc = build_worstcase_instance(m);
  const double z_pap = solve_simplex_ar(wc.instance, wc.simplex).dominating_objective;
  Json doc{{"m", m}, {"r", wc.r}, {"z_pap", z_pap}, {"z_pap_bound", static_cast<double>(m) / wc.r},
           {"affine_static_bound", std::sqrt(static_cast<double>(m)) / 15.0}};
  try {
    if (const auto verts = vertices(wc.set)) doc["z_ar"] = exact_ar(wc.instance, *verts).value;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::CombinatorialBlowup) throw;
  }
  if (affine) {
    AffineOptions options;
    options.tol = tol;
    const AffinePolicy pol = solve_affine(wc.instance, wc.set, options);
    doc["z_aff"] = pol.objective;
    doc["ratio"] = pol.objective / z_pap;
  }
  if (!out.empty()) write_json_file(out, to_json(wc.instance));
  std::cout << doc.dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dominating simplices and piecewise affine policies for two-stage covering problems"};
  app.require_subcommand(1);

  std::string out;

  std::string dominate_set;
  auto* dominate = app.add_subcommand("dominate", "Build a dominating simplex for a set and print it as JSON");
  dominate->add_option("set", dominate_set, "Set descriptor JSON")->required()->check(CLI::ExistingFile);
  dominate->add_option("--out", out, "Write to this file instead of stdout");

  SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve", "Solve an instance with a piecewise affine, affine or exact policy");
  solve->add_option("instance", solve_args.instance_path, "Instance JSON")->required()->check(CLI::ExistingFile);
  solve->add_option("set", solve_args.set_path, "Set descriptor JSON")->required()->check(CLI::ExistingFile);
  solve->add_option("--policy", solve_args.policy, "pap, affine or exact")
      ->check(CLI::IsMember({"pap", "affine", "exact"}));
  solve->add_option("--simplex", solve_args.simplex_path, "Precomputed simplex JSON (pap only)")
      ->check(CLI::ExistingFile);
  solve->add_option("--tol", solve_args.tol, "Affine cutting-plane tolerance");
  solve->add_option("--out", solve_args.out, "Write to this file instead of stdout");

  std::string verify_set, verify_simplex;
  int factor = 2, samples = 1000;
  std::uint64_t verify_seed = 1;
  auto* verify = app.add_subcommand("verify", "Check that a simplex dominates a set");
  verify->add_option("set", verify_set, "Set descriptor JSON")->required()->check(CLI::ExistingFile);
  verify->add_option("simplex", verify_simplex, "Simplex JSON")->required()->check(CLI::ExistingFile);
  verify->add_option("--factor", factor, "1: structural inequality only, 2: also sampled points")
      ->check(CLI::IsMember({1, 2}));
  verify->add_option("--samples", samples, "Sampled points for factor 2");
  verify->add_option("--seed", verify_seed, "Sampler seed");

  ExperimentConfig config;
  std::string family = "hypersphere";
  auto* compare = app.add_subcommand("compare", "Affine versus piecewise affine ratios on random instances");
  compare
      ->add_option("--family", family,
                   "hypersphere, pball3, pball1.5, budget, intersection<L> or generalized-budget. "
                   "generalized-budget defaults to theta = 0.4 (m - 1); its closed form needs theta < (m - 1) / 2 "
                   "and larger theta falls back to the iterative construction")
      ->required();
  compare->add_option("--m-list", config.m_list, "Dimensions")->delimiter(',')->required();
  compare->add_option("--instances", config.instances, "Instances per m")->check(CLI::PositiveNumber);
  compare->add_option("--seed", config.seed, "Generator seed");
  compare->add_option("--out", config.output_path, "CSV with one row per instance");
  compare->add_option("--affine-tol", config.affine_tol, "Affine relative tolerance");
  compare->add_option("--max-affine-m", config.max_affine_m, "Largest m with an affine baseline");
  compare->add_option("--threads", config.threads, "Worker threads")->check(CLI::PositiveNumber);
  compare->add_option("--theta-factor", config.family.theta_factor, "generalized-budget theta / (m - 1)");

  int wc_m = 16;
  bool wc_affine = false;
  double wc_tol = 1e-6;
  auto* worstcase = app.add_subcommand("worstcase", "Build and solve the worst-case instance");
  worstcase->add_option("--m", wc_m, "Perfect square m >= 4")->required();
  worstcase->add_flag("--affine", wc_affine, "Also solve the affine baseline");
  worstcase->add_option("--tol", wc_tol, "Affine tolerance");
  worstcase->add_option("--out", out, "Write the instance JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kFatal;
  }
  std::cout << std::setprecision(17);
  try {
    if (*dominate) return run_dominate(dominate_set, out);
    if (*solve) return run_solve(solve_args);
    if (*verify) return run_verify(verify_set, verify_simplex, factor, samples, verify_seed);
    if (*compare) return run_compare(config, family);
    if (*worstcase) return run_worstcase(wc_m, wc_affine, wc_tol, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFatal;
  }
  return kFatal;
}
