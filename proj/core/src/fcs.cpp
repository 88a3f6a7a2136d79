#include "fcs/fcs.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fcs {

SpectralDecomposition::SpectralDecomposition(EigenSystem basis, double cluster_tol)
    : basis_(std::move(basis)), cluster_tol_(cluster_tol) {
  if (!(cluster_tol > 0.0) || !std::isfinite(cluster_tol))
    throw InvalidArgument("spectral_decompose: cluster_tol must be positive and finite");
  const auto& ev = basis_.eigenvalues;
  const std::size_t n = ev.size();
  level_of_.resize(n);
  std::size_t start = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i == n || ev[i] - ev[i - 1] > cluster_tol) {
      double sum = 0.0;
      for (std::size_t k = start; k < i; ++k) sum += ev[k];
      levels_.push_back({sum / static_cast<double>(i - start), start, i - start});
      for (std::size_t k = start; k < i; ++k) level_of_[k] = levels_.size() - 1;
      start = i;
    }
  }
}

ComplexMatrix SpectralDecomposition::projection(std::size_t k) const {
  const Level& lv = levels_.at(k);
  const auto& u = basis_.eigenvectors;
  const std::size_t n = u.dim();
  ComplexMatrix p(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Complex s{};
      for (std::size_t c = lv.first; c < lv.first + lv.rank; ++c) s += u(i, c) * std::conj(u(j, c));
      p(i, j) = s;
    }
  return p;
}

double default_cluster_tol(const EigenSystem& es) {
  const double range = es.spectral_range();
  return range > 0.0 ? 1e-9 * range : 1e-9;
}

SpectralDecomposition spectral_decompose(const HermitianOperator& a, double cluster_tol) {
  return SpectralDecomposition(eigh(a), cluster_tol);
}

DensityMatrix pinch(const DensityMatrix& rho, const SpectralDecomposition& dec) {
  if (rho.dim() != dec.dim()) {
    throw DimensionMismatch("pinch: state has dimension " + std::to_string(rho.dim()) +
                            ", decomposition " + std::to_string(dec.dim()));
  }
  const std::size_t n = rho.dim();
  const auto& u = dec.basis().eigenvectors;
  const auto& r = rho.matrix();
  ComplexMatrix out(n);
  std::vector<Complex> left;   // B^+ rho, rank x n
  std::vector<Complex> block;  // B^+ rho B, rank x rank
  for (const auto& lv : dec.levels()) {
    const std::size_t f = lv.first;
    const std::size_t m = lv.rank;
    left.assign(m * n, Complex{});
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t k = 0; k < n; ++k) {
        const Complex ua = std::conj(u(k, f + a));
        if (ua == Complex{}) continue;
        for (std::size_t j = 0; j < n; ++j) left[a * n + j] += ua * r(k, j);
      }
    block.assign(m * m, Complex{});
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b) {
        Complex s{};
        for (std::size_t j = 0; j < n; ++j) s += left[a * n + j] * u(j, f + b);
        block[a * m + b] = s;
      }
    // out += B block B^+
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t b = 0; b < m; ++b) {
        Complex s{};
        for (std::size_t a = 0; a < m; ++a) s += u(i, f + a) * block[a * m + b];
        if (s == Complex{}) continue;
        for (std::size_t j = 0; j < n; ++j) out(i, j) += s * std::conj(u(j, f + b));
      }
    }
  }
  return make_trusted_density(HermitianOperator(std::move(out)).matrix());
}

// ---------------------------------------------------------------------------

FcsDistribution::FcsDistribution(std::vector<FcsAtom> atoms, double bin_tol)
    : atoms_(std::move(atoms)), bin_tol_(bin_tol) {
  if (atoms_.empty()) throw InvalidArgument("FcsDistribution: no atoms");
  if (!(bin_tol >= 0.0) || !std::isfinite(bin_tol))
    throw InvalidArgument("FcsDistribution: bin_tol must be non-negative and finite");
  double total = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    auto& a = atoms_[i];
    if (!std::isfinite(a.delta_e) || !std::isfinite(a.prob))
      throw InvalidArgument("FcsDistribution: non-finite atom");
    if (a.prob < -1e-12)
      throw InvalidArgument("FcsDistribution: negative probability " + std::to_string(a.prob));
    if (a.prob < 0.0) a.prob = 0.0;
    total += a.prob;
    if (i > 0 && !(a.delta_e - atoms_[i - 1].delta_e > bin_tol))
      throw InvalidArgument("FcsDistribution: atoms not strictly increasing beyond bin_tol");
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw InvalidArgument("FcsDistribution: probabilities sum to " + std::to_string(total));
}

FcsDistribution FcsDistribution::from_samples(std::vector<FcsAtom> samples, double bin_tol) {
  if (samples.empty()) throw InvalidArgument("FcsDistribution::from_samples: no samples");
  std::stable_sort(samples.begin(), samples.end(),
                   [](const FcsAtom& a, const FcsAtom& b) { return a.delta_e < b.delta_e; });
  std::vector<FcsAtom> atoms;
  std::size_t start = 0;
  for (std::size_t i = 1; i <= samples.size(); ++i) {
    if (i == samples.size() || samples[i].delta_e - samples[i - 1].delta_e > bin_tol) {
      double de = 0.0;
      double p = 0.0;
      for (std::size_t k = start; k < i; ++k) {
        de += samples[k].delta_e;
        p += samples[k].prob;
      }
      atoms.push_back({de / static_cast<double>(i - start), p});
      start = i;
    }
  }
  double total = 0.0;
  for (auto& a : atoms) {
    if (a.prob < -1e-12) {
      throw InvalidArgument("FcsDistribution: weight " + std::to_string(a.prob) +
                            " at delta_e = " + std::to_string(a.delta_e) +
                            " is negative beyond rounding");
    }
    a.prob = std::max(a.prob, 0.0);
    total += a.prob;
  }
  if (!(total > 0.0)) throw InvalidArgument("FcsDistribution: total weight is zero");
  for (auto& a : atoms) a.prob /= total;
  return FcsDistribution(std::move(atoms), bin_tol);
}

double FcsDistribution::max_abs_delta() const {
  return std::max(std::abs(atoms_.front().delta_e), std::abs(atoms_.back().delta_e));
}

double FcsDistribution::prob_at(double delta_e) const {
  for (const auto& a : atoms_)
    if (std::abs(a.delta_e - delta_e) <= bin_tol_) return a.prob;
  return 0.0;
}

// ---------------------------------------------------------------------------

namespace {

SpectralDecomposition decompose_h(const PartitionedSystem& system, const FcsOptions& options) {
  EigenSystem es = eigh(system.h_total());
  const double tol = options.cluster_tol.value_or(default_cluster_tol(es));
  return SpectralDecomposition(std::move(es), tol);
}

}  // namespace

TwoTimeMeasurement::TwoTimeMeasurement(const PartitionedSystem& system,
                                       const DensityMatrix& rho, const FcsOptions& options)
    : dec_(decompose_h(system, options)) {
  if (rho.dim() != system.dim()) {
    throw DimensionMismatch("fcs: state has dimension " + std::to_string(rho.dim()) +
                            ", system " + std::to_string(system.dim()));
  }
  const std::size_t nlev = dec_.levels().size();
  if (nlev > 0 && nlev > options.max_level_pairs / nlev) {
    throw SizeLimit("fcs: " + std::to_string(nlev) + "^2 level pairs exceed the budget of " +
                    std::to_string(options.max_level_pairs));
  }
  bin_tol_ = options.bin_tol.value_or(2.0 * dec_.cluster_tol());

  EigenSystem hv = eigh(system.h_v());
  hv_energies_ = std::move(hv.eigenvalues);
  const auto& ub = dec_.basis().eigenvectors;
  hv_in_h_basis_ = ub.adjoint() * hv.eigenvectors;
  rho_in_h_basis_ = to_basis(ub, rho.matrix());
}

JointTable TwoTimeMeasurement::joint(double t) const {
  if (!std::isfinite(t)) throw InvalidArgument("fcs: time must be finite");
  const std::size_t n = dec_.dim();
  const auto& m = hv_in_h_basis_;

  // Propagator e^{-itH_V} in the eigenbasis of H.
  ComplexMatrix md = m;
  for (std::size_t k = 0; k < n; ++k) {
    const Complex phase = std::exp(Complex(0.0, -t * hv_energies_[k]));
    for (std::size_t i = 0; i < n; ++i) md(i, k) *= phase;
  }
  ComplexMatrix w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Complex* mi = &md(i, 0);
    for (std::size_t j = 0; j < n; ++j) {
      const Complex* mj = &m(j, 0);
      Complex s{};
      for (std::size_t k = 0; k < n; ++k) s += mi[k] * std::conj(mj[k]);
      w(i, j) = s;
    }
  }

  const auto& levels = dec_.levels();
  const std::size_t nlev = levels.size();
  JointTable table;
  table.energies.reserve(nlev);
  for (const auto& lv : levels) table.energies.push_back(lv.energy);
  table.weights.assign(nlev * nlev, 0.0);

  const auto& rho = rho_in_h_basis_;
  std::vector<Complex> g;
  for (std::size_t e = 0; e < nlev; ++e) {
    const std::size_t f = levels[e].first;
    const std::size_t r = levels[e].rank;
    g.assign(r, Complex{});
    for (std::size_t i = 0; i < n; ++i) {
      // diag_i = sum_{j,k in level e} W_ij rho_jk conj(W_ik)
      double diag = 0.0;
      for (std::size_t k = 0; k < r; ++k) {
        Complex s{};
        for (std::size_t j = 0; j < r; ++j) s += w(i, f + j) * rho(f + j, f + k);
        diag += (s * std::conj(w(i, f + k))).real();
      }
      table.weights[dec_.level_of(i) * nlev + e] += diag;
    }
  }
  return table;
}

FcsDistribution TwoTimeMeasurement::distribution(double t) const {
  const JointTable table = joint(t);
  const std::size_t nlev = table.levels();
  std::vector<FcsAtom> samples;
  samples.reserve(nlev * nlev);
  for (std::size_t fin = 0; fin < nlev; ++fin)
    for (std::size_t ini = 0; ini < nlev; ++ini)
      samples.push_back({table.energies[fin] - table.energies[ini], table.weight(fin, ini)});
  return FcsDistribution::from_samples(std::move(samples), bin_tol_);
}

FcsDistribution fcs_distribution(const PartitionedSystem& system, const DensityMatrix& rho,
                                 double t, const FcsOptions& options) {
  return TwoTimeMeasurement(system, rho, options).distribution(t);
}

Complex mgf_from_distribution(const FcsDistribution& d, Complex alpha) {
  const double worst = std::abs(alpha.real()) * d.max_abs_delta();
  if (worst > kMaxExponent) {
    throw Overflow("mgf_from_distribution: |Re alpha| max|dE| = " + std::to_string(worst));
  }
  Complex sum{};
  for (const auto& a : d.atoms()) sum += a.prob * std::exp(alpha * a.delta_e);
  return sum;
}

Complex mgf_trace_formula(const PartitionedSystem& system, const DensityMatrix& rho_pinched,
                          double t, Complex alpha) {
  if (rho_pinched.dim() != system.dim())
    throw DimensionMismatch("mgf_trace_formula: state and system dimensions differ");
  const HermitianOperator h = system.h_total();
  const double off = commutator(rho_pinched.matrix(), h.matrix()).max_abs();
  if (off > 1e-8 * std::max(1.0, h.matrix().max_abs())) {
    throw NotPinched("mgf_trace_formula: |[rho, H]|_max = " + std::to_string(off));
  }
  const EigenSystem es = eigh(h);
  const ComplexMatrix up = expm_hermitian(es, alpha);
  const ComplexMatrix um = expm_hermitian(es, -alpha);
  const ComplexMatrix u = expm_hermitian(system.h_v(), Complex(0.0, -t));
  const ComplexMatrix x = up * (u * um);
  const ComplexMatrix y = rho_pinched.matrix() * u.adjoint();
  return trace_product(x, y);
}

double moments(const FcsDistribution& d, int k) {
  if (k < 1) throw InvalidArgument("moments: order must be >= 1");
  double s = 0.0;
  for (const auto& a : d.atoms()) s += a.prob * std::pow(a.delta_e, k);
  return s;
}

double total_variation_distance(const FcsDistribution& a, const FcsDistribution& b,
                                double match_tol) {
  const auto& x = a.atoms();
  const auto& y = b.atoms();
  std::size_t i = 0, j = 0;
  double sum = 0.0;
  while (i < x.size() || j < y.size()) {
    if (j == y.size() || (i < x.size() && x[i].delta_e < y[j].delta_e - match_tol)) {
      sum += x[i++].prob;
    } else if (i == x.size() || y[j].delta_e < x[i].delta_e - match_tol) {
      sum += y[j++].prob;
    } else {
      sum += std::abs(x[i++].prob - y[j++].prob);
    }
  }
  return 0.5 * sum;
}

}  // namespace fcs
