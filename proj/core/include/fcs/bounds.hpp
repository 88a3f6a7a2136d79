#pragma once

// Exponential-moment and tail bounds for the energy-variation statistics,
// together with the two matrix inequalities they rest on.

#include <cstdint>
#include <random>
#include <vector>

#include "fcs/fcs.hpp"
#include "fcs/linalg.hpp"
#include "fcs/models.hpp"

namespace fcs {

inline constexpr int kDefaultSPoints = 101;
/// Relative slack allowed on every bound comparison.
inline constexpr double kBoundTolerance = 1e-8;

/// u -> |e^{uH} V e^{-uH}| for fixed Hermitian H and V, evaluated in the
/// eigenbasis of H where the conjugation is an entrywise rescaling.
class ConjugatedNorm {
 public:
  ConjugatedNorm(const HermitianOperator& h, const HermitianOperator& v);
  ConjugatedNorm(const EigenSystem& h_eigen, const HermitianOperator& v);

  /// Throws Overflow when |u| times the spectral range of H exceeds 700.
  double operator()(double u) const;
  double spectral_range() const noexcept { return range_; }

 private:
  std::vector<double> energies_;
  ComplexMatrix v_in_basis_;
  double range_;
};

/// R(alpha) = 2|alpha| max_{s in [-1,1]} |e^{s alpha H/2} V e^{-s alpha H/2}|
/// evaluated on a uniform s-grid.
struct RegularityReport {
  double alpha = 0.0;
  double r_value = 0.0;
  int s_grid_points = 0;
  double argmax_s = 0.0;
  /// |R(2n-1 points) - R(n points)| / R, filled by compute_R_refined.
  double refinement_change = 0.0;

  friend bool operator==(const RegularityReport&, const RegularityReport&) = default;
};

/// s_points must be odd and >= 3 so that s = 0 and s = +-1 are on the grid.
RegularityReport compute_R(const PartitionedSystem& system, double alpha, int s_points);
RegularityReport compute_R(const ConjugatedNorm& norm, const HermitianOperator& v,
                           double alpha, int s_points);
/// compute_R on 2 s_points - 1 points, recording the change from s_points.
RegularityReport compute_R_refined(const PartitionedSystem& system, double alpha,
                                   int s_points);

struct TheoremReport {
  double t = 0.0;
  double alpha_m = 0.0;
  double lhs = 0.0;  // E_t exp(alpha_m |dE|)
  double rhs = 0.0;  // 2 exp(R(alpha_m))
  bool pass = false;
  double slack = 0.0;  // rhs - lhs

  friend bool operator==(const TheoremReport&, const TheoremReport&) = default;
};

/// sum_i p_i exp(alpha |dE_i|)
double exponential_moment(const FcsDistribution& d, double alpha);

TheoremReport verify_theorem(const FcsDistribution& d, double t, double alpha_m,
                             const RegularityReport& r);
TheoremReport verify_theorem(const PartitionedSystem& system, const DensityMatrix& rho,
                             double t, double alpha_m, int s_points = kDefaultSPoints,
                             const FcsOptions& options = {});

struct TailCheck {
  double empirical = 0.0;
  double bound = 0.0;
  bool pass = false;

  friend bool operator==(const TailCheck&, const TailCheck&) = default;
};

/// P(|dE| >= t eps) versus 2 exp(-t eps alpha_m + r).
TailCheck tail_bound_check(const FcsDistribution& d, double t, double epsilon, double alpha_m,
                           double r);

/// P(|dE| >= t eps) versus 2 exp(R(C/eps) - C t).
TailCheck strong_tail_check(const PartitionedSystem& system, const FcsDistribution& d, double t,
                            double epsilon, double c, int s_points = kDefaultSPoints);

struct StrongTailOptimum {
  double c = 0.0;
  TailCheck check;
};

/// Log-spaced search for the C in [1e-2, 1e2] giving the tightest strong
/// bound. C values whose R(C/eps) overflows are skipped.
StrongTailOptimum best_strong_tail(const PartitionedSystem& system, const FcsDistribution& d,
                                   double t, double epsilon, int s_points = kDefaultSPoints,
                                   int c_grid_points = 41);

struct FirstLawReport {
  double t = 0.0;
  double mean_from_fcs = 0.0;
  double heat_from_v = 0.0;  // <V>_0 - <V>_t in the pinched state
  double residual = 0.0;
  double mean_over_t = 0.0;  // 0 at t = 0
  bool pass = false;         // residual <= 1e-8 (1 + |mean|)
};

/// tr(V rho_pinched) - tr(V U rho_pinched U^+), U = e^{-itH_V}.
double heat_from_interaction(const HermitianOperator& v, const EigenSystem& h_v_eigen,
                             const DensityMatrix& rho_pinched, double t);

FirstLawReport compare_first_law(double t, double mean_from_fcs, double heat_from_v);

FirstLawReport verify_first_law(const PartitionedSystem& system, const DensityMatrix& rho,
                                double t, const FcsOptions& options = {});

/// tr(XY) <= |X| tr(Y) for positive semidefinite X, Y (NotPSD otherwise).
bool check_trace_inequality(const ComplexMatrix& x, const ComplexMatrix& y);

struct GronwallReport {
  double lhs = 0.0;  // |e^{T+S} e^{-T}|
  double rhs = 0.0;  // exp(max_{s in [0,1]} |e^{sT} S e^{-sT}|)
  bool pass = false;
  int grid_points = 0;
};

/// The s-grid starts at s_points and is doubled until the maximum changes
/// by less than 1e-8 relative (at most 10 doublings).
GronwallReport check_gronwall_bound(const HermitianOperator& t, const HermitianOperator& s,
                                    int s_points = kDefaultSPoints);

struct SweepReport {
  RegularityReport regularity;
  std::vector<TheoremReport> records;
  double max_lhs = 0.0;
  bool all_pass = true;
};

SweepReport exponential_moment_sweep(const PartitionedSystem& system, const DensityMatrix& rho,
                                     double alpha_m, const std::vector<double>& t_values,
                                     int s_points = kDefaultSPoints,
                                     const FcsOptions& options = {});

/// Random positive semidefinite G G^+ with complex Gaussian G of random rank.
ComplexMatrix random_psd(std::size_t dim, std::mt19937_64& rng);
/// Random Hermitian matrix rescaled to operator norm `norm`.
HermitianOperator random_hermitian(std::size_t dim, double norm, std::mt19937_64& rng);

struct InequalityFuzzReport {
  int trace_trials = 0;
  int trace_failures = 0;
  int gronwall_trials = 0;
  int gronwall_failures = 0;
  double worst_trace_ratio = 0.0;     // max tr(XY) / (|X| tr Y)
  double worst_gronwall_ratio = 0.0;  // max lhs / rhs
};

/// Randomized property suite for both inequalities: psd pairs of dimension
/// 1..trace_max_dim, Hermitian pairs of dimension 1..gronwall_max_dim with
/// operator norms in (0, max_norm].
InequalityFuzzReport fuzz_inequalities(int trials, std::size_t trace_max_dim,
                                       std::size_t gronwall_max_dim, double max_norm,
                                       std::uint64_t seed);

}  // namespace fcs
