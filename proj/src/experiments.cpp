#include "pap/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <thread>

#include "pap/error.hpp"

namespace pap {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double generator_scale(const std::string& family, int m) {
  if (family == "pball3") return std::cbrt(static_cast<double>(m));
  if (family == "pball1.5") return std::pow(static_cast<double>(m), 2.0 / 3.0);
  return std::sqrt(static_cast<double>(m));
}

// Linear interpolation between order statistics.
double quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::vector<std::string> known_families() {
  return {"hypersphere", "pball3", "pball1.5", "budget", "intersection", "generalized-budget"};
}

FamilySpec parse_family(const std::string& text) {
  FamilySpec spec;
  std::string name = text;
  if (name.rfind("intersection", 0) == 0 && name.size() > 12) {
    spec.budgets = std::stoi(name.substr(name.find_first_of("0123456789")));
    name = "intersection";
  }
  const auto names = known_families();
  if (std::find(names.begin(), names.end(), name) == names.end())
    throw Error(ErrorCode::UnsupportedFamily, "unknown family '" + text + "'");
  spec.name = name;
  return spec;
}

GeneratedInstance gen_instance(const FamilySpec& family, int m, std::uint64_t seed, int instance_id) {
  if (m < 2) throw Error(ErrorCode::InvalidArgument, "m must be at least 2");
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(instance_id)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit(1.0, 2.0);

  const double md = static_cast<double>(m);
  SetFamily set_family = Hypersphere{};
  if (family.name == "pball3") {
    set_family = PNormBall{3.0, 1.0};
  } else if (family.name == "pball1.5") {
    set_family = PNormBall{1.5, 1.0};
  } else if (family.name == "budget") {
    set_family = Budget{std::min(md, unit(rng) * std::sqrt(md))};
  } else if (family.name == "intersection") {
    MatrixXd alpha(family.budgets, m);
    for (Index r = 0; r < alpha.rows(); ++r) {
      for (Index j = 0; j < m; ++j) alpha(r, j) = std::abs(gauss(rng));
      alpha.row(r) /= alpha.row(r).norm();
    }
    set_family = BudgetIntersection{alpha};
  } else if (family.name == "generalized-budget") {
    set_family = GeneralizedBudget{family.theta_factor * (md - 1.0)};
  } else if (family.name != "hypersphere") {
    throw Error(ErrorCode::UnsupportedFamily, "unknown family '" + family.name + "'");
  }

  const double s = generator_scale(family.name, m);
  MatrixXd B = MatrixXd::Identity(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) B(i, j) += std::abs(gauss(rng)) / s;
  Instance inst{B, B, VectorXd::Ones(m), VectorXd::Ones(m)};
  return {std::move(inst), UncertaintySet(m, std::move(set_family))};
}

WorstCase build_worstcase_instance(int m) {
  const int root = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m))));
  if (m < 4 || root * root != m) throw Error(ErrorCode::InvalidArgument, "worst-case instance needs a perfect square m >= 4");
  const double inv = 1.0 / root;
  MatrixXd B = MatrixXd::Constant(m, m, inv);
  B.diagonal().setOnes();
  Instance inst{B, B, VectorXd::Constant(m, 1.0 / 15.0), VectorXd::Ones(m)};

  ExplicitConvHull hull;
  hull.points.push_back(VectorXd::Zero(m));
  for (int i = 0; i < m; ++i) hull.points.push_back(VectorXd::Unit(m, i));
  const int r = m - root;
  hull.orbit = PermutationOrbit{r, inv};

  DominatingSimplex simplex = make_simplex(1.0, VectorXd::Constant(m, inv), Provenance::Explicit, true);
  simplex.scale_bound = static_cast<double>(m) / r;
  return {std::move(inst), UncertaintySet(m, std::move(hull)), std::move(simplex), r};
}

InstanceRecord run_instance(const ExperimentConfig& config, int m, int instance_id) {
  InstanceRecord rec;
  rec.family = config.family.name;
  if (config.family.name == "intersection") rec.family += std::to_string(config.family.budgets);
  rec.m = m;
  rec.instance_id = instance_id;
  rec.z_aff = rec.ratio = std::numeric_limits<double>::quiet_NaN();
  try {
    const GeneratedInstance g = gen_instance(config.family, m, config.seed, instance_id);
    DominatingSimplex simplex;
    if (config.family.name == "intersection") {
      const auto start = Clock::now();
      const IterativeResult a = iterative_simplex(g.set);
      simplex = shifted_simplex(g.set, a.simplex.beta, a.simplex.v);
      rec.t_iterative_ms = ms_since(start);
    } else {
      simplex = closed_form_simplex(g.set);
    }
    auto start = Clock::now();
    rec.z_pap = solve_simplex_ar(g.instance, simplex).dominating_objective;
    rec.t_pap_ms = ms_since(start);

    if (m > config.max_affine_m) {
      rec.status = "pap-only";
      return rec;
    }
    AffineOptions options;
    options.tol = config.affine_tol;
    options.throw_on_cap = false;
    start = Clock::now();
    const AffinePolicy aff = solve_affine(g.instance, g.set, options);
    rec.t_aff_ms = ms_since(start);
    if (!aff.converged && !aff.repaired) {
      rec.status = "failed: affine cut cap without a feasible repair";
      return rec;
    }
    rec.z_aff = aff.objective;
    rec.ratio = rec.z_aff / rec.z_pap;
    rec.status = aff.converged ? "ok" : "affine-cap";
  } catch (const std::exception& e) {
    rec.status = std::string("failed: ") + e.what();
  }
  return rec;
}

RatioSummary summarize(int m, const std::vector<InstanceRecord>& records) {
  RatioSummary s;
  s.m = m;
  std::vector<double> ratios;
  for (const auto& r : records) {
    if (r.m != m) continue;
    if (r.status.rfind("failed", 0) == 0) {
      ++s.failures;
      continue;
    }
    s.t_pap_ms += r.t_pap_ms;
    s.t_aff_ms += r.t_aff_ms;
    s.t_iterative_ms += r.t_iterative_ms;
    ++s.count;
    if (std::isfinite(r.ratio)) ratios.push_back(r.ratio);
  }
  if (s.count > 0) {
    s.t_pap_ms /= s.count;
    s.t_aff_ms /= s.count;
    s.t_iterative_ms /= s.count;
  }
  std::sort(ratios.begin(), ratios.end());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  s.avg = s.min = s.max = nan;
  if (!ratios.empty()) {
    double total = 0;
    for (double r : ratios) total += r;
    s.avg = total / static_cast<double>(ratios.size());
    s.min = ratios.front();
    s.max = ratios.back();
  }
  s.q05 = quantile(ratios, 0.05);
  s.q10 = quantile(ratios, 0.10);
  s.q25 = quantile(ratios, 0.25);
  s.q50 = quantile(ratios, 0.50);
  return s;
}

void write_csv(const std::string& path, const std::vector<InstanceRecord>& records) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot open '" + path + "' for writing");
  out << std::setprecision(17);
  out << "family,m,instance_id,z_pap,z_aff,ratio,t_pap_ms,t_aff_ms,t_alg1_ms,status\n";
  for (const auto& r : records) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    out << r.family << ',' << r.m << ',' << r.instance_id << ',' << r.z_pap << ',' << r.z_aff << ',' << r.ratio
        << ',' << r.t_pap_ms << ',' << r.t_aff_ms << ',' << r.t_iterative_ms << ',' << status << '\n';
  }
}

RatioStats run_comparison(const ExperimentConfig& config) {
  if (config.instances < 1) throw Error(ErrorCode::InvalidArgument, "instances must be at least 1");
  for (int m : config.m_list)
    if (m < 2) throw Error(ErrorCode::InvalidArgument, "every m must be at least 2");

  std::vector<std::pair<int, int>> tasks;
  for (int m : config.m_list)
    for (int id = 0; id < config.instances; ++id) tasks.emplace_back(m, id);
  std::vector<InstanceRecord> records(tasks.size());

  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t t = next++; t < tasks.size(); t = next++) records[t] = run_instance(config, tasks[t].first, tasks[t].second);
  };
  const int threads = std::max(1, config.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  RatioStats stats;
  stats.records = std::move(records);
  std::vector<int> ms = config.m_list;
  std::sort(ms.begin(), ms.end());
  ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
  std::stable_sort(stats.records.begin(), stats.records.end(), [](const auto& a, const auto& b) {
    return a.m != b.m ? a.m < b.m : a.instance_id < b.instance_id;
  });
  for (int m : ms) {
    stats.per_m.push_back(summarize(m, stats.records));
    stats.failures += stats.per_m.back().failures;
  }
  if (!config.output_path.empty()) write_csv(config.output_path, stats.records);
  return stats;
}

}  // namespace pap
