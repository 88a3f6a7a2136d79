// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "fcs/bounds.hpp"
#include "fcs/experiment.hpp"
#include "oracles.hpp"

using namespace fcs;
namespace fs = std::filesystem;

namespace {

const std::vector<double> kTimes = {0.1, 1.0, 10.0, 100.0, 1000.0};
const std::vector<double> kAlphas = {0.25, 0.5, 1.0};
const std::vector<double> kEpsilons = {0.1, 0.5, 1.0};
const std::vector<double> kStrongC = {0.1, 1.0, 10.0};

struct Case {
  std::string system;
  std::string state;
  const PartitionedSystem* sys;
  DensityMatrix rho;
};

struct Criterion {
  int checks = 0;
  int failures = 0;
  double worst = 0.0;
  std::string first_failure;
  std::string note;

  void record(bool ok, double measure, const std::string& what) {
    ++checks;
    worst = std::max(worst, measure);
    if (!ok && failures++ == 0) first_failure = what;
  }
};

bool report(int id, const std::string& title, const Criterion& c, const std::string& measure_name) {
  const bool ok = c.failures == 0 && c.checks > 0;
  std::string line = fmt::format("{} criterion {}: {} ({} checks, {} failures, {} = {:.3e}", ok ? "PASS" : "FAIL",
                                 id, title, c.checks, c.failures, measure_name, c.worst);
  if (!c.note.empty()) line += ", " + c.note;
  line += ")";
  if (!ok && !c.first_failure.empty()) line += " first failure: " + c.first_failure;
  std::puts(line.c_str());
  std::fflush(stdout);
  return ok;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  const auto two_qubit = two_qubit_fixture(0.4);
  const auto xy = build_xy_lattice({1, 1.0, 0.5, kDefaultMaxDim});
  const auto anderson_dot = build_anderson(AndersonSpec::with_nearest_site_coupling(1, 0.5, 1.0, 0.5, true));
  const auto anderson_leads =
      build_anderson(AndersonSpec::with_nearest_site_coupling(1, 0.5, 1.0, 0.5, false));
  const std::vector<std::pair<std::string, const PartitionedSystem*>> systems = {
      {"two_qubit", &two_qubit},
      {"xy_L1", &xy},
      {"anderson_L1", &anderson_dot},
      {"anderson_L1_leads_only", &anderson_leads}};

  std::vector<Case> cases;
  for (const auto& [name, sys] : systems) {
    cases.push_back({name, "maximally_mixed", sys, DensityMatrix::maximally_mixed(sys->dim())});
    cases.push_back({name, "gibbs(0.2,1.0)", sys, gibbs_product_state(*sys, 0.2, 1.0)});
    cases.push_back({name, "pure_random", sys, DensityMatrix::random_pure(sys->dim(), 20240917)});
  }

  // R(alpha_m) and R(C/eps) per system, computed once.
  std::map<std::pair<const PartitionedSystem*, double>, RegularityReport> r_cache;
  auto regularity = [&](const PartitionedSystem* sys, double alpha) {
    const auto key = std::make_pair(sys, alpha);
    auto it = r_cache.find(key);
    if (it == r_cache.end()) it = r_cache.emplace(key, compute_R(*sys, alpha, kDefaultSPoints)).first;
    return it->second;
  };

  Criterion c1, c2, c3, c4, c5, c7;
  int strong_skipped = 0;
  const std::vector<Complex> mgf_alphas = {0.0, 0.5, -0.5, 1.0, -1.0, Complex(0, 0.5), Complex(0, -0.5),
                                           Complex(0, 1.0), Complex(0, -1.0)};

  for (const auto& c : cases) {
    const auto& sys = *c.sys;
    const TwoTimeMeasurement protocol(sys, c.rho);
    const DensityMatrix pinched = pinch(c.rho, protocol.decomposition());
    const EigenSystem hv_eigen = eigh(sys.h_v());
    const double v_norm = op_norm(sys.v().matrix());

    for (double t : kTimes) {
      const std::string where = fmt::format("{} / {} / t={}", c.system, c.state, t);
      const FcsDistribution d = protocol.distribution(t);

      // 1: exponential moment bound.
      for (double alpha : kAlphas) {
        const auto rep = verify_theorem(d, t, alpha, regularity(c.sys, alpha));
        c1.record(rep.pass, rep.lhs / rep.rhs, fmt::format("{} / alpha_m={}: {} > {}", where, alpha, rep.lhs, rep.rhs));
      }

      // 2: first law, FCS mean versus the change of <V> under exp(-itH_V).
      const double mean = moments(d, 1);
      const double heat = heat_from_interaction(sys.v(), hv_eigen, pinched, t);
      const double residual = std::abs(mean - heat);
      c2.record(residual <= 1e-8 * (1.0 + std::abs(mean)), residual,
                fmt::format("{}: mean {} vs heat {}", where, mean, heat));

      // 3: mean current suppression.
      const double current = std::abs(mean / t);
      c3.record(current <= (2.0 * v_norm + 1e-8) / t, current * t / (2.0 * v_norm),
                fmt::format("{}: |mean/t| = {}", where, current));
      if (c.system == "xy_L1" && t == 1000.0) {
        c3.record(current <= 2.0 * v_norm / 1000.0, current * t / (2.0 * v_norm),
                  fmt::format("{}: |mean/1000| = {} > 2|V|/1000", where, current));
      }

      // 4: tail bounds.
      for (double eps : kEpsilons) {
        for (double alpha : kAlphas) {
          const auto tail = tail_bound_check(d, t, eps, alpha, regularity(c.sys, alpha).r_value);
          c4.record(tail.pass, tail.bound > 0 ? tail.empirical / tail.bound : 0.0,
                    fmt::format("{} / eps={} alpha_m={}: {} > {}", where, eps, alpha, tail.empirical, tail.bound));
        }
        for (double cc : kStrongC) {
          try {
            const double r = regularity(c.sys, cc / eps).r_value;
            const auto strong = tail_bound_check(d, t, eps, cc / eps, r);
            if (!std::isfinite(strong.bound)) {
              ++strong_skipped;
              continue;
            }
            c4.record(strong.pass, strong.bound > 0 ? strong.empirical / strong.bound : 0.0,
                      fmt::format("{} / eps={} C={}: {} > {}", where, eps, cc, strong.empirical, strong.bound));
          } catch (const Overflow&) {
            ++strong_skipped;
          }
        }
      }

      // 5: moment generating function, histogram versus trace formula.
      for (Complex alpha : mgf_alphas) {
        const Complex a = mgf_from_distribution(d, alpha);
        const Complex b = mgf_trace_formula(sys, pinched, t, alpha);
        const double diff = std::abs(a - b);
        c5.record(diff <= 1e-8, diff, fmt::format("{} / alpha={}{:+}i: |diff| = {}", where, alpha.real(), alpha.imag(), diff));
      }

      // 7: projector-sandwich oracle.
      const auto oracle_d = oracle::projector_sandwich_fcs(sys, c.rho, t);
      const double tv = total_variation_distance(d, oracle_d, 1e-8);
      c7.record(tv <= 1e-9, tv, fmt::format("{}: TV = {}", where, tv));
    }
  }
  c4.note = fmt::format("{} strong checks skipped where R(C/eps) or its bound is not representable", strong_skipped);

  // 6: randomized inequality fuzzing.
  Criterion c6;
  const auto fuzz = fuzz_inequalities(100, 16, 12, 3.0, 7);
  for (int k = 0; k < fuzz.trace_trials; ++k) c6.record(k >= fuzz.trace_failures, fuzz.worst_trace_ratio, "trace inequality");
  for (int k = 0; k < fuzz.gronwall_trials; ++k)
    c6.record(k >= fuzz.gronwall_failures, fuzz.worst_gronwall_ratio, "Gronwall bound");
  c6.note = fmt::format("worst tr(XY)/(|X|trY) = {:.6f}, worst Gronwall lhs/rhs = {:.6f}", fuzz.worst_trace_ratio,
                        fuzz.worst_gronwall_ratio);

  // 8: R(alpha) on an 11-point grid.
  Criterion c8;
  for (const auto& [name, sys] : systems) {
    double prev = 0.0;
    for (int k = 0; k <= 10; ++k) {
      const double alpha = 0.1 * k;
      const auto plus = compute_R_refined(*sys, alpha, kDefaultSPoints);
      const auto minus = compute_R(*sys, -alpha, 2 * kDefaultSPoints - 1);
      const double odd = std::abs(plus.r_value - minus.r_value);
      c8.record(odd <= 1e-10, odd, fmt::format("{} alpha={}: R(a) - R(-a) = {}", name, alpha, odd));
      c8.record(plus.r_value >= prev - 1e-10, std::max(0.0, prev - plus.r_value),
                fmt::format("{} alpha={}: R decreased from {} to {}", name, alpha, prev, plus.r_value));
      c8.record(plus.refinement_change <= 1e-6, plus.refinement_change,
                fmt::format("{} alpha={}: refinement change {}", name, alpha, plus.refinement_change));
      prev = plus.r_value;
    }
  }

  // 9: reference configs rerun byte-identically.
  Criterion c9;
  const fs::path scratch = fs::temp_directory_path() / "fcs_acceptance_determinism";
  for (const auto& entry : fs::directory_iterator(FCS_CONFIG_DIR)) {
    if (entry.path().extension() != ".yaml") continue;
    auto cfg = load_config(entry.path());
    cfg.output.dir = scratch / entry.path().stem();
    cfg.output.formats = {OutputFormat::csv, OutputFormat::json};
    fs::remove_all(cfg.output.dir);
    std::map<std::string, std::string> first;
    run_experiment(cfg, {1, true});
    for (const auto& f : fs::directory_iterator(cfg.output.dir)) first[f.path().filename().string()] = slurp(f.path());
    run_experiment(cfg, {0, true});
    for (const auto& [file, bytes] : first) {
      const bool same = slurp(cfg.output.dir / file) == bytes;
      c9.record(same, same ? 0.0 : 1.0, fmt::format("{}: {} differs", entry.path().filename().string(), file));
    }
  }
  fs::remove_all(scratch);

  bool all = true;
  all &= report(1, "exponential moment bound E exp(alpha_m|dE|) <= 2 exp R(alpha_m)", c1, "max lhs/rhs");
  all &= report(2, "first law E(dE) = <V>_0 - <V>_t", c2, "max residual");
  all &= report(3, "mean current |E(dE)/t| <= 2|V|/t", c3, "max |E(dE)|/(2|V|)");
  all &= report(4, "tail bounds (alpha_m and strong C forms)", c4, "max empirical/bound");
  all &= report(5, "moment generating function routes agree", c5, "max |diff|");
  all &= report(6, "trace and Gronwall inequalities under fuzzing", c6, "max ratio");
  all &= report(7, "FCS matches the projector-sandwich oracle", c7, "max TV");
  all &= report(8, "R(alpha) even, monotone, grid-stable", c8, "max deviation");
  all &= report(9, "reference configs rerun byte-identically", c9, "files differing");
  return all ? 0 : 1;
}
