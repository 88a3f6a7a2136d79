#pragma once

// Two-time energy measurement protocol: measure H, evolve under H_V for a
// time t, measure H again, record the difference of the two outcomes.

#include <optional>
#include <vector>

#include "fcs/linalg.hpp"
#include "fcs/models.hpp"

namespace fcs {

/// Eigenspaces of a Hermitian operator after clustering numerically equal
/// eigenvalues. Level k spans eigenvector columns [first, first + rank).
class SpectralDecomposition {
 public:
  struct Level {
    double energy;
    std::size_t first;
    std::size_t rank;
  };

  SpectralDecomposition(EigenSystem basis, double cluster_tol);

  const std::vector<Level>& levels() const noexcept { return levels_; }
  const EigenSystem& basis() const noexcept { return basis_; }
  double cluster_tol() const noexcept { return cluster_tol_; }
  std::size_t dim() const noexcept { return basis_.eigenvectors.dim(); }
  /// Level index of eigenvector column i.
  std::size_t level_of(std::size_t column) const { return level_of_[column]; }

  /// Orthogonal projection onto level k.
  ComplexMatrix projection(std::size_t k) const;

 private:
  EigenSystem basis_;
  double cluster_tol_;
  std::vector<Level> levels_;
  std::vector<std::size_t> level_of_;
};

/// 1e-9 times the spectral range (1e-9 for a multiple of the identity).
double default_cluster_tol(const EigenSystem& es);

/// Consecutive eigenvalues closer than cluster_tol share a level; the level
/// energy is their mean.
SpectralDecomposition spectral_decompose(const HermitianOperator& a, double cluster_tol);

/// sum_e P_e rho P_e
DensityMatrix pinch(const DensityMatrix& rho, const SpectralDecomposition& dec);

struct FcsAtom {
  double delta_e;
  double prob;

  friend bool operator==(const FcsAtom&, const FcsAtom&) = default;
};

/// Finite distribution of energy differences.
class FcsDistribution {
 public:
  /// Checks the invariants: probabilities >= -1e-12 (clamped to 0), total 1
  /// to 1e-9, delta_e strictly increasing with gaps above bin_tol.
  /// Throws InvalidArgument otherwise.
  FcsDistribution(std::vector<FcsAtom> atoms, double bin_tol);

  /// Bins raw (delta_e, weight) samples: after sorting, consecutive values
  /// within bin_tol are merged into one atom at their mean. Weights below
  /// -1e-12 are an error; the rest are clamped and renormalized.
  static FcsDistribution from_samples(std::vector<FcsAtom> samples, double bin_tol);

  const std::vector<FcsAtom>& atoms() const noexcept { return atoms_; }
  double bin_tol() const noexcept { return bin_tol_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  double max_abs_delta() const;
  /// Probability of the atom within bin_tol of delta_e (0 if none).
  double prob_at(double delta_e) const;

  friend bool operator==(const FcsDistribution&, const FcsDistribution&) = default;

 private:
  std::vector<FcsAtom> atoms_;
  double bin_tol_;
};

struct FcsOptions {
  std::optional<double> cluster_tol;  // default_cluster_tol(H)
  std::optional<double> bin_tol;      // 2 * cluster_tol
  std::size_t max_level_pairs = std::size_t{1} << 24;
};

/// Transition weights w(e', e) = tr(P_e' U P_e rho P_e U^dagger).
struct JointTable {
  std::vector<double> energies;  // level energies, ascending
  std::vector<double> weights;   // row-major, [final][initial]

  std::size_t levels() const noexcept { return energies.size(); }
  double weight(std::size_t final_level, std::size_t initial_level) const {
    return weights[final_level * energies.size() + initial_level];
  }
};

/// Reusable state for evaluating the protocol at many times: the level
/// structure of H, the spectrum of H_V expressed in the eigenbasis of H, and
/// the initial state in that basis.
class TwoTimeMeasurement {
 public:
  TwoTimeMeasurement(const PartitionedSystem& system, const DensityMatrix& rho,
                     const FcsOptions& options = {});

  const SpectralDecomposition& decomposition() const noexcept { return dec_; }
  double bin_tol() const noexcept { return bin_tol_; }

  JointTable joint(double t) const;
  FcsDistribution distribution(double t) const;

 private:
  SpectralDecomposition dec_;
  std::vector<double> hv_energies_;
  ComplexMatrix hv_in_h_basis_;  // columns: eigenvectors of H_V in the H eigenbasis
  ComplexMatrix rho_in_h_basis_;
  double bin_tol_;
};

/// FCS of the energy difference at time t.
FcsDistribution fcs_distribution(const PartitionedSystem& system, const DensityMatrix& rho,
                                 double t, const FcsOptions& options = {});

/// sum_i p_i exp(alpha delta_e_i). Overflow when |Re alpha| max|delta_e| > 700.
Complex mgf_from_distribution(const FcsDistribution& d, Complex alpha);

/// tr(e^{alpha H} e^{-itH_V} e^{-alpha H} rho_pinched e^{itH_V}). Throws
/// NotPinched unless |[rho_pinched, H]|_max <= 1e-8 max(1, |H|_max).
Complex mgf_trace_formula(const PartitionedSystem& system, const DensityMatrix& rho_pinched,
                          double t, Complex alpha);

/// k-th raw moment sum_i p_i delta_e_i^k, k >= 1.
double moments(const FcsDistribution& d, int k);

/// Total-variation distance; atoms within match_tol are identified.
double total_variation_distance(const FcsDistribution& a, const FcsDistribution& b,
                                double match_tol);

}  // namespace fcs
