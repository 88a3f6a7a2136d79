#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fcs/linalg.hpp"

namespace fcs {

/// Density matrix: Hermitian, eigenvalues >= -1e-10, unit trace to 1e-10.
class DensityMatrix {
 public:
  /// Validates the matrix; throws InvalidState on violation.
  explicit DensityMatrix(ComplexMatrix m);

  static DensityMatrix maximally_mixed(std::size_t dim);
  /// |psi><psi| / <psi|psi>
  static DensityMatrix pure(std::span<const Complex> psi);
  /// Haar-random pure state from normalized complex Gaussian amplitudes.
  static DensityMatrix random_pure(std::size_t dim, std::uint64_t seed);

  const ComplexMatrix& matrix() const noexcept { return m_; }
  std::size_t dim() const noexcept { return m_.dim(); }

 private:
  struct Trusted {};
  DensityMatrix(ComplexMatrix m, Trusted) : m_(std::move(m)) {}
  friend DensityMatrix make_trusted_density(ComplexMatrix m);

  ComplexMatrix m_;
};

/// Wraps a matrix the caller already knows to be a valid density matrix
/// (for instance the pinching of one), skipping the eigenvalue check.
DensityMatrix make_trusted_density(ComplexMatrix m);

/// Two non-interacting parts H = h_a + h_b coupled by v; evolution uses
/// H_V = H + v.
class PartitionedSystem {
 public:
  /// Throws DimensionMismatch or NonCommutingParts ([h_a, h_b] above 1e-10).
  PartitionedSystem(HermitianOperator h_a, HermitianOperator h_b,
                    HermitianOperator v, std::string label = "explicit");

  const HermitianOperator& h_a() const noexcept { return h_a_; }
  const HermitianOperator& h_b() const noexcept { return h_b_; }
  const HermitianOperator& v() const noexcept { return v_; }
  std::size_t dim() const noexcept { return h_a_.dim(); }
  const std::string& label() const noexcept { return label_; }

  HermitianOperator h_total() const { return h_a_ + h_b_; }
  HermitianOperator h_v() const { return h_a_ + h_b_ + v_; }

 private:
  HermitianOperator h_a_;
  HermitianOperator h_b_;
  HermitianOperator v_;
  std::string label_;
};

/// 2L x 2L square lattice of spin-1/2 sites, split into a left and a right
/// half at the line between x1 = 0 and x1 = 1.
struct XYLatticeSpec {
  int half_width = 1;            // L
  double coupling = 1.0;         // J
  double boundary_strength = 0.0;  // epsilon in K_{x,y} = epsilon / (1 + x2^2)
  std::size_t max_dim = kDefaultMaxDim;

  friend bool operator==(const XYLatticeSpec&, const XYLatticeSpec&) = default;
};

/// Lattice coordinates run over {-L+1, ..., L} in both directions. Sites are
/// numbered row-major in (x1, x2) and site 0 is the leftmost tensor factor.
int xy_site_index(int half_width, int x1, int x2);

/// H^{(L,+-)} = -(J/2) sum_nn (s1 s1 + s2 s2) within each half;
/// V = -(1/2) sum K_{x,y} (s1 s1 + s2 s2) across the boundary.
PartitionedSystem build_xy_lattice(const XYLatticeSpec& spec);

/// Anderson impurity: spinful dot between two tight-binding leads.
///
/// Coupling vectors are indexed by distance from the dot: entry j of
/// lead_coupling_left[s] couples to site x = -(j+1), entry j of
/// lead_coupling_right[s] to site x = j+1. Spin index 0 is up, 1 is down.
struct AndersonSpec {
  int lead_length = 1;   // L
  double dot_energy = 0.0;
  double interaction = 0.0;  // U
  std::array<std::vector<Complex>, 2> lead_coupling_left;
  std::array<std::vector<Complex>, 2> lead_coupling_right;
  bool include_dot_in_measured_energy = true;
  std::size_t max_dim = kDefaultMaxDim;

  /// Nearest-site coupling v(x) = lambda delta_{x, -+1} for both spins.
  static AndersonSpec with_nearest_site_coupling(int lead_length, double dot_energy,
                                                 double interaction, Complex lambda,
                                                 bool include_dot = true);

  friend bool operator==(const AndersonSpec&, const AndersonSpec&) = default;
};

/// Fermionic mode order used by the Anderson builder: left lead sites
/// x = -L..-1 (spin up then down at each site), the two dot spins, then
/// right lead sites x = 1..L.
struct AndersonModes {
  int lead_length;

  std::size_t count() const { return static_cast<std::size_t>(2 * (2 * lead_length + 1)); }
  std::size_t left(int x, int spin) const;   // x in [-L, -1]
  std::size_t dot(int spin) const;
  std::size_t right(int x, int spin) const;  // x in [1, L]
};

/// Jordan-Wigner annihilation operators c_0..c_{n-1} on (C^2)^{(x) n}, with
/// |1> the occupied state and mode 0 the leftmost tensor factor.
std::vector<ComplexMatrix> jordan_wigner_annihilators(std::size_t n_modes,
                                                      std::size_t max_dim = kDefaultMaxDim);

PartitionedSystem build_anderson(const AndersonSpec& spec);

/// Builds a system from user matrices; same checks as the constructor.
PartitionedSystem build_explicit(HermitianOperator h_a, HermitianOperator h_b,
                                 HermitianOperator v);

/// exp(-beta_a h_a - beta_b h_b) / Z, evaluated with the spectrum shifted so
/// the largest weight is 1.
DensityMatrix gibbs_product_state(const PartitionedSystem& system, double beta_a,
                                  double beta_b);

/// sigma^3 (x) I + I (x) sigma^3 coupled by g sigma^1 (x) sigma^1.
PartitionedSystem two_qubit_fixture(double g);

}  // namespace fcs
