#pragma once

// Dense complex linear algebra for small quantum systems.
//
// Everything here works on square row-major matrices. The Hermitian
// eigensolver is a Householder tridiagonalization followed by implicit-shift
// QL iterations; matrix functions (exponentials, conjugations) are evaluated
// through the eigendecomposition.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "fcs/errors.hpp"

namespace fcs {

using Complex = std::complex<double>;

/// Default cap on Hilbert-space dimension for assembled operators.
inline constexpr std::size_t kDefaultMaxDim = 4096;

class ComplexMatrix {
 public:
  /// 1x1 zero matrix.
  ComplexMatrix();
  /// dim x dim zero matrix.
  explicit ComplexMatrix(std::size_t dim);
  /// Row-major entries; throws InvalidArgument unless entries.size() == dim^2
  /// and every entry is finite.
  ComplexMatrix(std::size_t dim, std::vector<Complex> entries);

  static ComplexMatrix identity(std::size_t dim);
  static ComplexMatrix diagonal(std::span<const double> values);
  static ComplexMatrix diagonal(std::span<const Complex> values);
  static ComplexMatrix from_rows(
      std::initializer_list<std::initializer_list<Complex>> rows);

  std::size_t dim() const noexcept { return dim_; }

  Complex& operator()(std::size_t i, std::size_t j) noexcept {
    return data_[i * dim_ + j];
  }
  const Complex& operator()(std::size_t i, std::size_t j) const noexcept {
    return data_[i * dim_ + j];
  }

  std::span<const Complex> entries() const noexcept { return data_; }
  std::span<Complex> entries() noexcept { return data_; }

  ComplexMatrix adjoint() const;
  Complex trace() const;
  /// Largest entry modulus.
  double max_abs() const;
  bool all_finite() const;

  ComplexMatrix& operator+=(const ComplexMatrix& other);
  ComplexMatrix& operator-=(const ComplexMatrix& other);
  ComplexMatrix& operator*=(Complex scale);

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  std::size_t dim_;
  std::vector<Complex> data_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator*(Complex s, ComplexMatrix a);
ComplexMatrix operator*(ComplexMatrix a, Complex s);

/// max_ij |a_ij - b_ij|.
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);
/// ab - ba
ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);
/// u^dagger m u: expresses m in the basis formed by the columns of u.
ComplexMatrix to_basis(const ComplexMatrix& u, const ComplexMatrix& m);
/// u m u^dagger
ComplexMatrix from_basis(const ComplexMatrix& u, const ComplexMatrix& m);

/// Hermitian matrix. The input must be Hermitian up to
/// 1e-12 * max(1, max_abs); it is stored symmetrized as (M + M^dagger)/2.
class HermitianOperator {
 public:
  HermitianOperator() = default;
  explicit HermitianOperator(ComplexMatrix m);

  static HermitianOperator zero(std::size_t dim);
  static HermitianOperator identity(std::size_t dim);

  const ComplexMatrix& matrix() const noexcept { return m_; }
  std::size_t dim() const noexcept { return m_.dim(); }

  friend HermitianOperator operator+(const HermitianOperator& a,
                                     const HermitianOperator& b);
  friend HermitianOperator operator-(const HermitianOperator& a,
                                     const HermitianOperator& b);
  friend HermitianOperator operator*(double s, const HermitianOperator& a);

 private:
  struct Trusted {};
  HermitianOperator(ComplexMatrix m, Trusted) : m_(std::move(m)) {}

  ComplexMatrix m_;
};

/// Eigenvalues ascending; column k of `eigenvectors` belongs to eigenvalues[k].
struct EigenSystem {
  std::vector<double> eigenvalues;
  ComplexMatrix eigenvectors;

  double spectral_radius() const;
  double spectral_range() const {
    return eigenvalues.back() - eigenvalues.front();
  }
};

/// QL sweeps allowed per eigenvalue before eigh gives up.
inline constexpr int kMaxQlIterationsPerEigenvalue = 60;

/// Hermitian eigendecomposition. Throws ConvergenceFailure when the QL stage
/// exceeds its iteration budget.
EigenSystem eigh(const HermitianOperator& a);

/// U diag(f(lambda)) U^dagger for a callable f: double -> Complex.
template <class F>
ComplexMatrix spectral_function(const EigenSystem& es, F&& f) {
  const std::size_t n = es.eigenvectors.dim();
  std::vector<Complex> fv(n);
  for (std::size_t k = 0; k < n; ++k) fv[k] = f(es.eigenvalues[k]);
  ComplexMatrix out(n);
  const auto& u = es.eigenvectors;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const Complex uik = u(i, k) * fv[k];
      if (uik == Complex{}) continue;
      for (std::size_t j = 0; j < n; ++j) out(i, j) += uik * std::conj(u(j, k));
    }
  }
  return out;
}

/// Largest |Re(c) * lambda| accepted by expm_hermitian.
inline constexpr double kMaxExponent = 700.0;

/// exp(c A). Throws Overflow if max |Re(c) lambda| exceeds kMaxExponent.
ComplexMatrix expm_hermitian(const HermitianOperator& a, Complex c);
ComplexMatrix expm_hermitian(const EigenSystem& es, Complex c);

/// Largest singular value.
double op_norm(const ComplexMatrix& m);

/// tr(XY) without forming the product.
Complex trace_product(const ComplexMatrix& x, const ComplexMatrix& y);

/// Kronecker product; SizeLimit if the result would exceed max_dim.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b,
                   std::size_t max_dim = kDefaultMaxDim);

/// Pauli matrices, indexed 1..3 (sigma^1 = x, sigma^2 = y, sigma^3 = z).
ComplexMatrix pauli(int index);

}  // namespace fcs
