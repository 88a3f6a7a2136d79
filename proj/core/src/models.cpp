#include "fcs/models.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace fcs {

DensityMatrix make_trusted_density(ComplexMatrix m) {
  return DensityMatrix(std::move(m), DensityMatrix::Trusted{});
}

DensityMatrix::DensityMatrix(ComplexMatrix m) {
  HermitianOperator h = [&] {
    try {
      return HermitianOperator(std::move(m));
    } catch (const InvalidArgument& e) {
      throw InvalidState(std::string("DensityMatrix: ") + e.what());
    }
  }();
  const double tr = h.matrix().trace().real();
  if (std::abs(tr - 1.0) > 1e-10)
    throw InvalidState("DensityMatrix: trace " + std::to_string(tr) + " != 1");
  const EigenSystem es = eigh(h);
  if (es.eigenvalues.front() < -1e-10) {
    throw InvalidState("DensityMatrix: negative eigenvalue " +
                       std::to_string(es.eigenvalues.front()));
  }
  m_ = h.matrix();
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim) {
  return DensityMatrix(Complex(1.0 / static_cast<double>(dim)) * ComplexMatrix::identity(dim),
                       Trusted{});
}

DensityMatrix DensityMatrix::pure(std::span<const Complex> psi) {
  double nrm2 = 0.0;
  for (const auto& z : psi) nrm2 += std::norm(z);
  if (!(nrm2 > 0.0) || !std::isfinite(nrm2))
    throw InvalidState("DensityMatrix::pure: vector has zero or non-finite norm");
  const std::size_t n = psi.size();
  ComplexMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = psi[i] * std::conj(psi[j]) / nrm2;
  return DensityMatrix(std::move(m), Trusted{});
}

DensityMatrix DensityMatrix::random_pure(std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Complex> psi(dim);
  for (auto& z : psi) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    z = {re, im};
  }
  return pure(psi);
}

// ---------------------------------------------------------------------------

PartitionedSystem::PartitionedSystem(HermitianOperator h_a, HermitianOperator h_b,
                                     HermitianOperator v, std::string label)
    : h_a_(std::move(h_a)), h_b_(std::move(h_b)), v_(std::move(v)), label_(std::move(label)) {
  if (h_a_.dim() != h_b_.dim() || h_a_.dim() != v_.dim()) {
    throw DimensionMismatch("PartitionedSystem: h_a, h_b and v must share a dimension (" +
                            std::to_string(h_a_.dim()) + ", " + std::to_string(h_b_.dim()) +
                            ", " + std::to_string(v_.dim()) + ")");
  }
  const double c = commutator(h_a_.matrix(), h_b_.matrix()).max_abs();
  if (c > 1e-10) {
    throw NonCommutingParts("PartitionedSystem: |[h_a, h_b]|_max = " + std::to_string(c));
  }
}

PartitionedSystem build_explicit(HermitianOperator h_a, HermitianOperator h_b,
                                 HermitianOperator v) {
  return PartitionedSystem(std::move(h_a), std::move(h_b), std::move(v), "explicit");
}

PartitionedSystem two_qubit_fixture(double g) {
  const auto i2 = ComplexMatrix::identity(2);
  const auto s1 = pauli(1);
  const auto s3 = pauli(3);
  return PartitionedSystem(HermitianOperator(kron(s3, i2)), HermitianOperator(kron(i2, s3)),
                           HermitianOperator(Complex(g) * kron(s1, s1)), "two_qubit");
}

// ---------------------------------------------------------------------------
// XY lattice

namespace {

// Operator acting as `local[k]` on factor sites[k] and identity elsewhere.
ComplexMatrix site_product(std::size_t n_sites,
                           std::initializer_list<std::pair<std::size_t, const ComplexMatrix*>> ops,
                           std::size_t max_dim) {
  const auto i2 = ComplexMatrix::identity(2);
  ComplexMatrix out = ComplexMatrix::identity(1);
  for (std::size_t s = 0; s < n_sites; ++s) {
    const ComplexMatrix* factor = &i2;
    for (const auto& [site, op] : ops)
      if (site == s) factor = op;
    out = kron(out, *factor, max_dim);
  }
  return out;
}

std::size_t checked_dim(std::size_t n_qubits, std::size_t max_dim, const char* who) {
  if (n_qubits >= 63 || (std::size_t{1} << n_qubits) > max_dim) {
    throw SizeLimit(std::string(who) + ": Hilbert-space dimension 2^" +
                    std::to_string(n_qubits) + " exceeds the configured maximum " +
                    std::to_string(max_dim));
  }
  return std::size_t{1} << n_qubits;
}

}  // namespace

int xy_site_index(int half_width, int x1, int x2) {
  const int side = 2 * half_width;
  return (x1 + half_width - 1) * side + (x2 + half_width - 1);
}

PartitionedSystem build_xy_lattice(const XYLatticeSpec& spec) {
  const int l = spec.half_width;
  if (l < 1) throw InvalidSpec("xy_lattice: half_width must be >= 1");
  if (!std::isfinite(spec.coupling) || !std::isfinite(spec.boundary_strength))
    throw InvalidSpec("xy_lattice: coupling and boundary_strength must be finite");
  const auto n_sites = static_cast<std::size_t>(4 * l * l);
  const std::size_t dim = checked_dim(n_sites, spec.max_dim, "xy_lattice");

  const auto s1 = pauli(1);
  const auto s2 = pauli(2);
  auto bond = [&](int a, int b) {
    const auto sa = static_cast<std::size_t>(a);
    const auto sb = static_cast<std::size_t>(b);
    return site_product(n_sites, {{sa, &s1}, {sb, &s1}}, spec.max_dim) +
           site_product(n_sites, {{sa, &s2}, {sb, &s2}}, spec.max_dim);
  };

  ComplexMatrix h_left(dim), h_right(dim), v(dim);
  // Nearest-neighbour bonds inside each half: (x1, x2)-(x1+1, x2) and (x1, x2)-(x1, x2+1).
  for (int x1 = -l + 1; x1 <= l; ++x1) {
    for (int x2 = -l + 1; x2 <= l; ++x2) {
      ComplexMatrix& half = x1 <= 0 ? h_left : h_right;
      const int here = xy_site_index(l, x1, x2);
      if (x2 + 1 <= l) half += bond(here, xy_site_index(l, x1, x2 + 1));
      if (x1 + 1 <= l && (x1 + 1 <= 0) == (x1 <= 0))
        half += bond(here, xy_site_index(l, x1 + 1, x2));
    }
  }
  for (int x2 = -l + 1; x2 <= l; ++x2) {
    const double k = spec.boundary_strength / (1.0 + static_cast<double>(x2) * x2);
    v += Complex(k) * bond(xy_site_index(l, 0, x2), xy_site_index(l, 1, x2));
  }
  h_left *= -0.5 * spec.coupling;
  h_right *= -0.5 * spec.coupling;
  v *= -0.5;

  return PartitionedSystem(HermitianOperator(std::move(h_left)),
                           HermitianOperator(std::move(h_right)),
                           HermitianOperator(std::move(v)),
                           "xy_lattice_L" + std::to_string(l));
}

// ---------------------------------------------------------------------------
// Anderson impurity

std::size_t AndersonModes::left(int x, int spin) const {
  if (x < -lead_length || x > -1 || spin < 0 || spin > 1)
    throw InvalidArgument("AndersonModes::left: site out of range");
  return static_cast<std::size_t>(2 * (x + lead_length) + spin);
}

std::size_t AndersonModes::dot(int spin) const {
  if (spin < 0 || spin > 1) throw InvalidArgument("AndersonModes::dot: bad spin");
  return static_cast<std::size_t>(2 * lead_length + spin);
}

std::size_t AndersonModes::right(int x, int spin) const {
  if (x < 1 || x > lead_length || spin < 0 || spin > 1)
    throw InvalidArgument("AndersonModes::right: site out of range");
  return static_cast<std::size_t>(2 * lead_length + 2 + 2 * (x - 1) + spin);
}

std::vector<ComplexMatrix> jordan_wigner_annihilators(std::size_t n_modes,
                                                      std::size_t max_dim) {
  checked_dim(n_modes, max_dim, "jordan_wigner");
  const auto i2 = ComplexMatrix::identity(2);
  const auto z = pauli(3);
  // a|1> = |0>; the string sigma^3 = diag(1, -1) gives the fermionic sign.
  const auto a = ComplexMatrix::from_rows({{0.0, 1.0}, {0.0, 0.0}});
  std::vector<ComplexMatrix> out;
  out.reserve(n_modes);
  for (std::size_t m = 0; m < n_modes; ++m) {
    ComplexMatrix op = ComplexMatrix::identity(1);
    for (std::size_t k = 0; k < n_modes; ++k)
      op = kron(op, k < m ? z : (k == m ? a : i2), max_dim);
    out.push_back(std::move(op));
  }
  return out;
}

AndersonSpec AndersonSpec::with_nearest_site_coupling(int lead_length, double dot_energy,
                                                      double interaction, Complex lambda,
                                                      bool include_dot) {
  AndersonSpec spec;
  spec.lead_length = lead_length;
  spec.dot_energy = dot_energy;
  spec.interaction = interaction;
  spec.include_dot_in_measured_energy = include_dot;
  for (int s = 0; s < 2; ++s) {
    spec.lead_coupling_left[s].assign(static_cast<std::size_t>(std::max(lead_length, 0)), 0.0);
    spec.lead_coupling_right[s].assign(static_cast<std::size_t>(std::max(lead_length, 0)), 0.0);
    if (lead_length >= 1) {
      spec.lead_coupling_left[s][0] = lambda;
      spec.lead_coupling_right[s][0] = lambda;
    }
  }
  return spec;
}

PartitionedSystem build_anderson(const AndersonSpec& spec) {
  const int l = spec.lead_length;
  if (l < 1) throw InvalidSpec("anderson: lead_length must be >= 1");
  if (!std::isfinite(spec.dot_energy) || !std::isfinite(spec.interaction))
    throw InvalidSpec("anderson: dot_energy and interaction must be finite");
  for (int s = 0; s < 2; ++s) {
    for (const auto* vec : {&spec.lead_coupling_left[s], &spec.lead_coupling_right[s]}) {
      if (vec->size() != static_cast<std::size_t>(l)) {
        throw InvalidSpec("anderson: coupling vector has length " + std::to_string(vec->size()) +
                          ", expected lead_length = " + std::to_string(l));
      }
      for (const auto& z : *vec)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
          throw InvalidSpec("anderson: non-finite coupling");
    }
  }

  const AndersonModes modes{l};
  const auto c = jordan_wigner_annihilators(modes.count(), spec.max_dim);
  std::vector<ComplexMatrix> cdag;
  cdag.reserve(c.size());
  for (const auto& op : c) cdag.push_back(op.adjoint());
  const std::size_t dim = c.front().dim();

  ComplexMatrix h_l(dim), h_r(dim), h_s(dim), v(dim);
  for (int s = 0; s < 2; ++s) {
    for (int x = -l; x <= -1; ++x) {
      if (x + 1 <= -1) {
        const auto a = modes.left(x, s), b = modes.left(x + 1, s);
        h_l += cdag[a] * c[b] + cdag[b] * c[a];
      }
    }
    for (int x = 1; x <= l; ++x) {
      if (x + 1 <= l) {
        const auto a = modes.right(x, s), b = modes.right(x + 1, s);
        h_r += cdag[a] * c[b] + cdag[b] * c[a];
      }
    }
  }

  const auto n_up = cdag[modes.dot(0)] * c[modes.dot(0)];
  const auto n_down = cdag[modes.dot(1)] * c[modes.dot(1)];
  h_s = Complex(spec.dot_energy) * (n_up + n_down) + Complex(spec.interaction) * (n_up * n_down);

  // V = sum_s d_s^+ (c_l(v_l) + c_r(v_r)) + h.c. with c(phi) = sum_x conj(phi(x)) c(x).
  for (int s = 0; s < 2; ++s) {
    ComplexMatrix lead_part(dim);
    for (int j = 0; j < l; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      lead_part += std::conj(spec.lead_coupling_left[s][uj]) * c[modes.left(-(j + 1), s)];
      lead_part += std::conj(spec.lead_coupling_right[s][uj]) * c[modes.right(j + 1, s)];
    }
    const ComplexMatrix hop = cdag[modes.dot(s)] * lead_part;
    v += hop + hop.adjoint();
  }

  HermitianOperator hl(std::move(h_l)), hr(std::move(h_r)), hs(std::move(h_s)),
      hv(std::move(v));
  const std::string label = "anderson_L" + std::to_string(l);
  if (spec.include_dot_in_measured_energy)
    return PartitionedSystem(hl + hs, hr, hv, label);
  return PartitionedSystem(hl, hr, hs + hv, label + "_leads_only");
}

// ---------------------------------------------------------------------------

DensityMatrix gibbs_product_state(const PartitionedSystem& system, double beta_a,
                                  double beta_b) {
  if (!std::isfinite(beta_a) || !std::isfinite(beta_b))
    throw InvalidArgument("gibbs_product_state: inverse temperatures must be finite");
  // h_a and h_b commute, so exp(-b_a h_a) exp(-b_b h_b) = exp(-(b_a h_a + b_b h_b)).
  const HermitianOperator k = beta_a * system.h_a() + beta_b * system.h_b();
  const EigenSystem es = eigh(k);
  const double shift = es.eigenvalues.front();
  double z = 0.0;
  for (double e : es.eigenvalues) z += std::exp(-(e - shift));
  ComplexMatrix rho =
      spectral_function(es, [&](double e) { return Complex(std::exp(-(e - shift)) / z); });
  return DensityMatrix(std::move(rho));
}

}  // namespace fcs
