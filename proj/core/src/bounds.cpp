#include "fcs/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fcs {

namespace {

void require_grid(int s_points) {
  if (s_points < 3 || s_points % 2 == 0) {
    throw InvalidArgument("s_points must be odd and >= 3 (got " + std::to_string(s_points) + ")");
  }
}

bool within_bound(double lhs, double rhs) { return lhs <= rhs * (1.0 + kBoundTolerance); }

}  // namespace

ConjugatedNorm::ConjugatedNorm(const HermitianOperator& h, const HermitianOperator& v)
    : ConjugatedNorm(eigh(h), v) {}

ConjugatedNorm::ConjugatedNorm(const EigenSystem& h_eigen, const HermitianOperator& v)
    : energies_(h_eigen.eigenvalues),
      v_in_basis_(to_basis(h_eigen.eigenvectors, v.matrix())),
      range_(h_eigen.spectral_range()) {
  if (v.dim() != energies_.size()) throw DimensionMismatch("ConjugatedNorm: H and V differ in dimension");
}

double ConjugatedNorm::operator()(double u) const {
  if (std::abs(u) * range_ > kMaxExponent) {
    throw Overflow("conjugation e^{uH} V e^{-uH}: |u| * range(H) = " +
                   std::to_string(std::abs(u) * range_) + " exceeds the exponent range");
  }
  const std::size_t n = energies_.size();
  ComplexMatrix m = v_in_basis_;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) *= std::exp(u * (energies_[i] - energies_[j]));
  return op_norm(m);
}

// ---------------------------------------------------------------------------

RegularityReport compute_R(const ConjugatedNorm& norm, const HermitianOperator& v, double alpha,
                           int s_points) {
  require_grid(s_points);
  if (!std::isfinite(alpha)) throw InvalidArgument("compute_R: alpha must be finite");
  RegularityReport report;
  report.alpha = alpha;
  report.s_grid_points = s_points;
  if (alpha == 0.0 || v.matrix().max_abs() == 0.0) return report;

  // |e^{-uH} V e^{uH}| = |(e^{uH} V e^{-uH})^+|, so the s-profile is even and
  // only s >= 0 needs evaluating.
  const int half = (s_points - 1) / 2;
  double best = -1.0;
  for (int k = 0; k <= half; ++k) {
    const double s = static_cast<double>(k) / half;
    const double val = norm(s * alpha / 2.0);
    if (val > best) {
      best = val;
      report.argmax_s = s;
    }
  }
  report.r_value = 2.0 * std::abs(alpha) * best;
  return report;
}

RegularityReport compute_R(const PartitionedSystem& system, double alpha, int s_points) {
  require_grid(s_points);
  return compute_R(ConjugatedNorm(system.h_total(), system.v()), system.v(), alpha, s_points);
}

RegularityReport compute_R_refined(const PartitionedSystem& system, double alpha, int s_points) {
  require_grid(s_points);
  const ConjugatedNorm norm(system.h_total(), system.v());
  const RegularityReport coarse = compute_R(norm, system.v(), alpha, s_points);
  RegularityReport fine = compute_R(norm, system.v(), alpha, 2 * s_points - 1);
  fine.refinement_change =
      fine.r_value > 0.0 ? std::abs(fine.r_value - coarse.r_value) / fine.r_value : 0.0;
  return fine;
}

// ---------------------------------------------------------------------------

double exponential_moment(const FcsDistribution& d, double alpha) {
  const double worst = std::abs(alpha) * d.max_abs_delta();
  if (worst > kMaxExponent)
    throw Overflow("exponential_moment: alpha max|dE| = " + std::to_string(worst));
  double s = 0.0;
  for (const auto& a : d.atoms()) s += a.prob * std::exp(alpha * std::abs(a.delta_e));
  return s;
}

TheoremReport verify_theorem(const FcsDistribution& d, double t, double alpha_m,
                             const RegularityReport& r) {
  if (!(alpha_m > 0.0)) throw InvalidArgument("verify_theorem: alpha_m must be positive");
  if (r.alpha != alpha_m)
    throw InvalidArgument("verify_theorem: regularity report was computed for another alpha");
  TheoremReport out;
  out.t = t;
  out.alpha_m = alpha_m;
  out.lhs = exponential_moment(d, alpha_m);
  out.rhs = 2.0 * std::exp(r.r_value);
  out.pass = within_bound(out.lhs, out.rhs);
  out.slack = out.rhs - out.lhs;
  return out;
}

TheoremReport verify_theorem(const PartitionedSystem& system, const DensityMatrix& rho, double t,
                             double alpha_m, int s_points, const FcsOptions& options) {
  const FcsDistribution d = fcs_distribution(system, rho, t, options);
  return verify_theorem(d, t, alpha_m, compute_R(system, alpha_m, s_points));
}

namespace {

double tail_mass(const FcsDistribution& d, double threshold) {
  const double cut = threshold - 1e-12 * std::max(1.0, threshold);
  double mass = 0.0;
  for (const auto& a : d.atoms())
    if (std::abs(a.delta_e) >= cut) mass += a.prob;
  return mass;
}

void require_tail_args(double t, double epsilon) {
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("tail check: t must be positive");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw InvalidArgument("tail check: epsilon must be positive");
}

}  // namespace

TailCheck tail_bound_check(const FcsDistribution& d, double t, double epsilon, double alpha_m,
                           double r) {
  require_tail_args(t, epsilon);
  TailCheck out;
  out.empirical = tail_mass(d, t * epsilon);
  out.bound = 2.0 * std::exp(-t * epsilon * alpha_m + r);
  out.pass = within_bound(out.empirical, out.bound);
  return out;
}

TailCheck strong_tail_check(const PartitionedSystem& system, const FcsDistribution& d, double t,
                            double epsilon, double c, int s_points) {
  require_tail_args(t, epsilon);
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("strong_tail_check: C must be positive");
  const RegularityReport r = compute_R(system, c / epsilon, s_points);
  TailCheck out;
  out.empirical = tail_mass(d, t * epsilon);
  out.bound = 2.0 * std::exp(r.r_value - c * t);
  out.pass = within_bound(out.empirical, out.bound);
  return out;
}

StrongTailOptimum best_strong_tail(const PartitionedSystem& system, const FcsDistribution& d,
                                   double t, double epsilon, int s_points, int c_grid_points) {
  if (c_grid_points < 2) throw InvalidArgument("best_strong_tail: need at least two C values");
  StrongTailOptimum best;
  best.check.bound = std::numeric_limits<double>::infinity();
  bool found = false;
  for (int k = 0; k < c_grid_points; ++k) {
    const double c = std::pow(10.0, -2.0 + 4.0 * k / (c_grid_points - 1));
    try {
      const TailCheck check = strong_tail_check(system, d, t, epsilon, c, s_points);
      if (!found || check.bound < best.check.bound) {
        best = {c, check};
        found = true;
      }
    } catch (const Overflow&) {
      // R(C/eps) not representable for this C
    }
  }
  if (!found) throw Overflow("best_strong_tail: R(C/eps) overflows for every C on the grid");
  return best;
}

// ---------------------------------------------------------------------------

double heat_from_interaction(const HermitianOperator& v, const EigenSystem& h_v_eigen,
                             const DensityMatrix& rho_pinched, double t) {
  const ComplexMatrix u = expm_hermitian(h_v_eigen, Complex(0.0, -t));
  const ComplexMatrix rho_t = u * (rho_pinched.matrix() * u.adjoint());
  return trace_product(v.matrix(), rho_pinched.matrix()).real() -
         trace_product(v.matrix(), rho_t).real();
}

FirstLawReport compare_first_law(double t, double mean_from_fcs, double heat_from_v) {
  FirstLawReport out;
  out.t = t;
  out.mean_from_fcs = mean_from_fcs;
  out.heat_from_v = heat_from_v;
  out.residual = std::abs(mean_from_fcs - heat_from_v);
  out.mean_over_t = t > 0.0 ? mean_from_fcs / t : 0.0;
  out.pass = out.residual <= 1e-8 * (1.0 + std::abs(mean_from_fcs));
  return out;
}

FirstLawReport verify_first_law(const PartitionedSystem& system, const DensityMatrix& rho,
                                double t, const FcsOptions& options) {
  const TwoTimeMeasurement protocol(system, rho, options);
  const double mean = moments(protocol.distribution(t), 1);
  const DensityMatrix pinched = pinch(rho, protocol.decomposition());
  const double heat = heat_from_interaction(system.v(), eigh(system.h_v()), pinched, t);
  return compare_first_law(t, mean, heat);
}

// ---------------------------------------------------------------------------

namespace {

HermitianOperator require_psd(const ComplexMatrix& m, const char* name) {
  try {
    HermitianOperator h(m);
    const double lowest = eigh(h).eigenvalues.front();
    if (lowest < -1e-10) {
      throw NotPSD(std::string("check_trace_inequality: ") + name + " has eigenvalue " +
                   std::to_string(lowest));
    }
    return h;
  } catch (const InvalidArgument&) {
    throw NotPSD(std::string("check_trace_inequality: ") + name + " is not Hermitian");
  }
}

}  // namespace

bool check_trace_inequality(const ComplexMatrix& x, const ComplexMatrix& y) {
  if (x.dim() != y.dim()) throw DimensionMismatch("check_trace_inequality: dimensions differ");
  const HermitianOperator hx = require_psd(x, "X");
  const HermitianOperator hy = require_psd(y, "Y");
  const double lhs = trace_product(hx.matrix(), hy.matrix()).real();
  const double rhs = op_norm(hx.matrix()) * hy.matrix().trace().real();
  return lhs <= rhs + 1e-9 * std::max(1.0, rhs);
}

GronwallReport check_gronwall_bound(const HermitianOperator& t, const HermitianOperator& s,
                                    int s_points) {
  if (t.dim() != s.dim()) throw DimensionMismatch("check_gronwall_bound: T and S differ in dimension");
  if (s_points < 2) throw InvalidArgument("check_gronwall_bound: need at least two grid points");
  GronwallReport out;
  out.lhs = op_norm(expm_hermitian(t + s, 1.0) * expm_hermitian(t, -1.0));

  const ConjugatedNorm norm(t, s);
  auto grid_max = [&](int points) {
    double m = 0.0;
    for (int k = 0; k < points; ++k) m = std::max(m, norm(static_cast<double>(k) / (points - 1)));
    return m;
  };
  int points = s_points;
  double m = grid_max(points);
  for (int doubling = 0; doubling < 10; ++doubling) {
    const int finer = 2 * points - 1;
    const double mf = grid_max(finer);
    const double change = mf > 0.0 ? std::abs(mf - m) / mf : 0.0;
    points = finer;
    m = mf;
    if (change < 1e-8) break;
  }
  out.grid_points = points;
  out.rhs = std::exp(m);
  out.pass = within_bound(out.lhs, out.rhs);
  return out;
}

SweepReport exponential_moment_sweep(const PartitionedSystem& system, const DensityMatrix& rho,
                                     double alpha_m, const std::vector<double>& t_values,
                                     int s_points, const FcsOptions& options) {
  SweepReport out;
  out.regularity = compute_R(system, alpha_m, s_points);
  const TwoTimeMeasurement protocol(system, rho, options);
  for (double t : t_values) {
    if (!(t > 0.0) || !std::isfinite(t))
      throw InvalidArgument("exponential_moment_sweep: times must be positive and finite");
    out.records.push_back(verify_theorem(protocol.distribution(t), t, alpha_m, out.regularity));
    out.max_lhs = std::max(out.max_lhs, out.records.back().lhs);
    out.all_pass = out.all_pass && out.records.back().pass;
  }
  return out;
}

// ---------------------------------------------------------------------------

ComplexMatrix random_psd(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> rank_dist(1, dim);
  const std::size_t rank = rank_dist(rng);
  std::vector<Complex> g(dim * rank);
  for (auto& z : g) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    z = {re, im};
  }
  ComplexMatrix out(dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) {
      Complex s{};
      for (std::size_t k = 0; k < rank; ++k) s += g[i * rank + k] * std::conj(g[j * rank + k]);
      out(i, j) = s;
    }
  return HermitianOperator(std::move(out)).matrix();
}

HermitianOperator random_hermitian(std::size_t dim, double norm, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  ComplexMatrix g(dim);
  for (auto& z : g.entries()) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    z = {re, im};
  }
  ComplexMatrix h = Complex(0.5) * (g + g.adjoint());
  const double current = op_norm(h);
  if (current > 0.0) h *= norm / current;
  return HermitianOperator(std::move(h));
}

InequalityFuzzReport fuzz_inequalities(int trials, std::size_t trace_max_dim,
                                       std::size_t gronwall_max_dim, double max_norm,
                                       std::uint64_t seed) {
  if (trials < 0 || trace_max_dim < 1 || gronwall_max_dim < 1 || !(max_norm > 0.0))
    throw InvalidArgument("fuzz_inequalities: invalid arguments");
  std::mt19937_64 rng(seed);
  InequalityFuzzReport out;

  std::uniform_int_distribution<std::size_t> trace_dim(1, trace_max_dim);
  for (int k = 0; k < trials; ++k) {
    const std::size_t n = trace_dim(rng);
    const ComplexMatrix x = random_psd(n, rng);
    const ComplexMatrix y = random_psd(n, rng);
    ++out.trace_trials;
    if (!check_trace_inequality(x, y)) ++out.trace_failures;
    const double denom = op_norm(x) * y.trace().real();
    if (denom > 0.0)
      out.worst_trace_ratio = std::max(out.worst_trace_ratio, trace_product(x, y).real() / denom);
  }

  std::uniform_int_distribution<std::size_t> gronwall_dim(1, gronwall_max_dim);
  std::uniform_real_distribution<double> norm_dist(0.0, max_norm);
  for (int k = 0; k < trials; ++k) {
    const std::size_t n = gronwall_dim(rng);
    const double nt = max_norm - norm_dist(rng);  // (0, max_norm]
    const double ns = max_norm - norm_dist(rng);
    const HermitianOperator t = random_hermitian(n, nt, rng);
    const HermitianOperator s = random_hermitian(n, ns, rng);
    const GronwallReport r = check_gronwall_bound(t, s);
    ++out.gronwall_trials;
    if (!r.pass) ++out.gronwall_failures;
    out.worst_gronwall_ratio = std::max(out.worst_gronwall_ratio, r.lhs / r.rhs);
  }
  return out;
}

}  // namespace fcs
