#include "fcs/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace fcs {

namespace {

void require_same_dim(const ComplexMatrix& a, const ComplexMatrix& b,
                      const char* what) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatch(std::string(what) + ": dimensions " +
                            std::to_string(a.dim()) + " and " +
                            std::to_string(b.dim()) + " differ");
  }
}

}  // namespace

ComplexMatrix::ComplexMatrix() : ComplexMatrix(1) {}

ComplexMatrix::ComplexMatrix(std::size_t dim) : dim_(dim), data_(dim * dim) {
  if (dim == 0) throw InvalidArgument("ComplexMatrix: dimension must be >= 1");
}

ComplexMatrix::ComplexMatrix(std::size_t dim, std::vector<Complex> entries)
    : dim_(dim), data_(std::move(entries)) {
  if (dim == 0) throw InvalidArgument("ComplexMatrix: dimension must be >= 1");
  if (data_.size() != dim * dim) {
    throw InvalidArgument("ComplexMatrix: expected " +
                          std::to_string(dim * dim) + " entries, got " +
                          std::to_string(data_.size()));
  }
  if (!all_finite()) throw InvalidArgument("ComplexMatrix: non-finite entry");
}

ComplexMatrix ComplexMatrix::identity(std::size_t dim) {
  ComplexMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const double> values) {
  ComplexMatrix m(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  if (!m.all_finite()) throw InvalidArgument("diagonal: non-finite entry");
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const Complex> values) {
  ComplexMatrix m(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  if (!m.all_finite()) throw InvalidArgument("diagonal: non-finite entry");
  return m;
}

ComplexMatrix ComplexMatrix::from_rows(
    std::initializer_list<std::initializer_list<Complex>> rows) {
  const std::size_t n = rows.size();
  std::vector<Complex> entries;
  entries.reserve(n * n);
  for (const auto& row : rows) {
    if (row.size() != n) throw InvalidArgument("from_rows: matrix not square");
    entries.insert(entries.end(), row.begin(), row.end());
  }
  return ComplexMatrix(n, std::move(entries));
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix out(dim_);
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j) out(j, i) = std::conj((*this)(i, j));
  return out;
}

Complex ComplexMatrix::trace() const {
  Complex t{};
  for (std::size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
  return t;
}

double ComplexMatrix::max_abs() const {
  double m = 0.0;
  for (const auto& z : data_) m = std::max(m, std::abs(z));
  return m;
}

bool ComplexMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](const Complex& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
  require_same_dim(*this, other, "operator+=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
  require_same_dim(*this, other, "operator-=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex scale) {
  for (auto& z : data_) z *= scale;
  return *this;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) {
  a += b;
  return a;
}

ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) {
  a -= b;
  return a;
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dim(a, b, "matrix product");
  const std::size_t n = a.dim();
  ComplexMatrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    Complex* row = &out(i, 0);
    for (std::size_t k = 0; k < n; ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex{}) continue;
      const Complex* brow = &b(k, 0);
      for (std::size_t j = 0; j < n; ++j) row[j] += aik * brow[j];
    }
  }
  return out;
}

ComplexMatrix operator*(Complex s, ComplexMatrix a) {
  a *= s;
  return a;
}

ComplexMatrix operator*(ComplexMatrix a, Complex s) {
  a *= s;
  return a;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dim(a, b, "max_abs_diff");
  double m = 0.0;
  const auto ea = a.entries();
  const auto eb = b.entries();
  for (std::size_t k = 0; k < ea.size(); ++k) m = std::max(m, std::abs(ea[k] - eb[k]));
  return m;
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a * b - b * a;
}

ComplexMatrix to_basis(const ComplexMatrix& u, const ComplexMatrix& m) {
  return u.adjoint() * (m * u);
}

ComplexMatrix from_basis(const ComplexMatrix& u, const ComplexMatrix& m) {
  return u * (m * u.adjoint());
}

// ---------------------------------------------------------------------------

HermitianOperator::HermitianOperator(ComplexMatrix m) {
  const double scale = std::max(1.0, m.max_abs());
  const std::size_t n = m.dim();
  double asym = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      asym = std::max(asym, std::abs(m(i, j) - std::conj(m(j, i))));
  if (asym > 1e-12 * scale) {
    throw InvalidArgument("HermitianOperator: matrix is not Hermitian (|M - M^+|_max = " +
                          std::to_string(asym) + ")");
  }
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = m(i, i).real();
    for (std::size_t j = i + 1; j < n; ++j) {
      const Complex avg = 0.5 * (m(i, j) + std::conj(m(j, i)));
      m(i, j) = avg;
      m(j, i) = std::conj(avg);
    }
  }
  m_ = std::move(m);
}

HermitianOperator HermitianOperator::zero(std::size_t dim) {
  return HermitianOperator(ComplexMatrix(dim), Trusted{});
}

HermitianOperator HermitianOperator::identity(std::size_t dim) {
  return HermitianOperator(ComplexMatrix::identity(dim), Trusted{});
}

HermitianOperator operator+(const HermitianOperator& a, const HermitianOperator& b) {
  return HermitianOperator(a.m_ + b.m_, HermitianOperator::Trusted{});
}

HermitianOperator operator-(const HermitianOperator& a, const HermitianOperator& b) {
  return HermitianOperator(a.m_ - b.m_, HermitianOperator::Trusted{});
}

HermitianOperator operator*(double s, const HermitianOperator& a) {
  return HermitianOperator(Complex(s) * a.m_, HermitianOperator::Trusted{});
}

double EigenSystem::spectral_radius() const {
  return std::max(std::abs(eigenvalues.front()), std::abs(eigenvalues.back()));
}

// ---------------------------------------------------------------------------
// Eigensolver

namespace {

// Reduces the Hermitian matrix `a` (overwritten) to tridiagonal form
// a = q T q^dagger with Householder reflections. Returns q.
ComplexMatrix householder_tridiagonalize(ComplexMatrix& a) {
  const std::size_t n = a.dim();
  ComplexMatrix q = ComplexMatrix::identity(n);
  std::vector<Complex> v(n), w(n);

  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t m = n - k - 1;
    double tail2 = 0.0;
    for (std::size_t i = 1; i < m; ++i) tail2 += std::norm(a(k + 1 + i, k));
    if (tail2 == 0.0) continue;

    const Complex x0 = a(k + 1, k);
    const double xnorm = std::sqrt(tail2 + std::norm(x0));
    const double ax0 = std::abs(x0);
    const Complex phase = ax0 > 0.0 ? x0 / ax0 : Complex(1.0);
    const Complex alpha = -phase * xnorm;

    for (std::size_t i = 0; i < m; ++i) v[i] = a(k + 1 + i, k);
    v[0] -= alpha;
    double vnorm2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) vnorm2 += std::norm(v[i]);
    const double tau = 2.0 / vnorm2;

    // w = tau B v on the trailing block B = a[k+1.., k+1..]
    for (std::size_t i = 0; i < m; ++i) {
      const Complex* row = &a(k + 1 + i, k + 1);
      Complex s{};
      for (std::size_t j = 0; j < m; ++j) s += row[j] * v[j];
      w[i] = tau * s;
    }
    Complex vw{};
    for (std::size_t i = 0; i < m; ++i) vw += std::conj(v[i]) * w[i];
    const double kfac = 0.5 * tau * vw.real();
    for (std::size_t i = 0; i < m; ++i) w[i] -= kfac * v[i];

    // B <- B - v w^dagger - w v^dagger
    for (std::size_t i = 0; i < m; ++i) {
      Complex* row = &a(k + 1 + i, k + 1);
      const Complex vi = v[i];
      const Complex wi = w[i];
      for (std::size_t j = 0; j < m; ++j)
        row[j] -= vi * std::conj(w[j]) + wi * std::conj(v[j]);
    }
    a(k + 1, k) = alpha;
    a(k, k + 1) = std::conj(alpha);
    for (std::size_t i = 1; i < m; ++i) {
      a(k + 1 + i, k) = 0.0;
      a(k, k + 1 + i) = 0.0;
    }

    // q <- q (I - tau v v^dagger)
    for (std::size_t r = 0; r < n; ++r) {
      Complex* row = &q(r, k + 1);
      Complex s{};
      for (std::size_t j = 0; j < m; ++j) s += row[j] * v[j];
      s *= tau;
      for (std::size_t j = 0; j < m; ++j) row[j] -= s * std::conj(v[j]);
    }
  }
  return q;
}

// Implicit-shift QL on a real symmetric tridiagonal matrix (diagonal d,
// subdiagonal e[0..n-2]). On return d holds the eigenvalues (unsorted) and
// row i of zt holds the eigenvector of d[i].
void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e,
                    std::vector<std::vector<double>>& zt) {
  const std::size_t n = d.size();
  e.resize(n);
  e[n - 1] = 0.0;
  double f = 0.0;
  double tst1 = 0.0;
  const double eps = std::ldexp(1.0, -52);

  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    std::size_t m = l;
    while (m < n) {
      if (std::abs(e[m]) <= eps * tst1) break;
      ++m;
    }
    if (m > l) {
      int iter = 0;
      do {
        if (++iter > kMaxQlIterationsPerEigenvalue) {
          throw ConvergenceFailure("eigh: QL iteration did not converge for eigenvalue " +
                                   std::to_string(l));
        }
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0, c2 = 1.0, c3 = 1.0;
        const double el1 = e[l + 1];
        double s = 0.0, s2 = 0.0;
        for (std::size_t ii = m; ii-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[ii];
          h = c * p;
          r = std::hypot(p, e[ii]);
          e[ii + 1] = s * r;
          s = e[ii] / r;
          c = p / r;
          p = c * d[ii] - s * g;
          d[ii + 1] = h + s * (c * g + s * d[ii]);
          auto& zi = zt[ii];
          auto& zi1 = zt[ii + 1];
          for (std::size_t k = 0; k < n; ++k) {
            const double hk = zi1[k];
            zi1[k] = s * zi[k] + c * hk;
            zi[k] = c * zi[k] - s * hk;
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }
}

// Modified Gram-Schmidt on columns [first, last) of u.
void orthonormalize_columns(ComplexMatrix& u, std::size_t first, std::size_t last) {
  const std::size_t n = u.dim();
  for (std::size_t c = first; c < last; ++c) {
    for (std::size_t p = first; p < c; ++p) {
      Complex overlap{};
      for (std::size_t r = 0; r < n; ++r) overlap += std::conj(u(r, p)) * u(r, c);
      for (std::size_t r = 0; r < n; ++r) u(r, c) -= overlap * u(r, p);
    }
    double nrm = 0.0;
    for (std::size_t r = 0; r < n; ++r) nrm += std::norm(u(r, c));
    nrm = std::sqrt(nrm);
    for (std::size_t r = 0; r < n; ++r) u(r, c) /= nrm;
  }
}

}  // namespace

EigenSystem eigh(const HermitianOperator& op) {
  const std::size_t n = op.dim();
  ComplexMatrix a = op.matrix();
  if (n == 1) return {{a(0, 0).real()}, ComplexMatrix::identity(1)};

  const ComplexMatrix q = householder_tridiagonalize(a);

  // Diagonal unitary D making the subdiagonal real and non-negative.
  std::vector<double> d(n), e(n - 1);
  std::vector<Complex> phase(n, Complex(1.0));
  for (std::size_t i = 0; i < n; ++i) d[i] = a(i, i).real();
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const Complex sub = a(k + 1, k);
    const double mag = std::abs(sub);
    e[k] = mag;
    phase[k + 1] = mag > 0.0 ? phase[k] * (sub / mag) : phase[k];
  }

  std::vector<std::vector<double>> zt(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) zt[i][i] = 1.0;
  tridiagonal_ql(d, e, zt);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return d[x] < d[y]; });

  // eigenvectors = q D Z
  ComplexMatrix qd = q;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = 0; k < n; ++k) qd(r, k) *= phase[k];

  EigenSystem out{std::vector<double>(n), ComplexMatrix(n)};
  for (std::size_t c = 0; c < n; ++c) {
    const auto& z = zt[order[c]];
    out.eigenvalues[c] = d[order[c]];
    for (std::size_t r = 0; r < n; ++r) {
      const Complex* row = &qd(r, 0);
      Complex s{};
      for (std::size_t k = 0; k < n; ++k) s += row[k] * z[k];
      out.eigenvectors(r, c) = s;
    }
  }

  const double block_tol = 1e-10 * std::max(1.0, out.spectral_radius());
  std::size_t start = 0;
  for (std::size_t c = 1; c <= n; ++c) {
    if (c == n || out.eigenvalues[c] - out.eigenvalues[c - 1] > block_tol) {
      if (c - start > 1) orthonormalize_columns(out.eigenvectors, start, c);
      start = c;
    }
  }
  return out;
}

ComplexMatrix expm_hermitian(const EigenSystem& es, Complex c) {
  if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
    throw InvalidArgument("expm_hermitian: non-finite scalar");
  const double worst = std::abs(c.real()) * es.spectral_radius();
  if (worst > kMaxExponent) {
    throw Overflow("expm_hermitian: |Re(c) lambda| = " + std::to_string(worst) +
                   " exceeds the double-precision exponent range");
  }
  return spectral_function(es, [c](double lambda) { return std::exp(c * lambda); });
}

ComplexMatrix expm_hermitian(const HermitianOperator& a, Complex c) {
  return expm_hermitian(eigh(a), c);
}

double op_norm(const ComplexMatrix& m) {
  const double scale = m.max_abs();
  if (scale == 0.0) return 0.0;
  ComplexMatrix x = (1.0 / scale) * m;
  const EigenSystem es = eigh(HermitianOperator(x.adjoint() * x));
  return std::sqrt(std::max(es.eigenvalues.back(), 0.0)) * scale;
}

Complex trace_product(const ComplexMatrix& x, const ComplexMatrix& y) {
  require_same_dim(x, y, "trace_product");
  const std::size_t n = x.dim();
  Complex t{};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) t += x(i, j) * y(j, i);
  return t;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b, std::size_t max_dim) {
  const std::size_t na = a.dim();
  const std::size_t nb = b.dim();
  if (na * nb > max_dim) {
    throw SizeLimit("kron: result dimension " + std::to_string(na * nb) +
                    " exceeds the configured maximum " + std::to_string(max_dim));
  }
  ComplexMatrix out(na * nb);
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < na; ++j) {
      const Complex aij = a(i, j);
      if (aij == Complex{}) continue;
      for (std::size_t k = 0; k < nb; ++k)
        for (std::size_t l = 0; l < nb; ++l) out(i * nb + k, j * nb + l) = aij * b(k, l);
    }
  return out;
}

ComplexMatrix pauli(int index) {
  using namespace std::complex_literals;
  switch (index) {
    case 1:
      return ComplexMatrix::from_rows({{0.0, 1.0}, {1.0, 0.0}});
    case 2:
      return ComplexMatrix::from_rows({{0.0, -1i}, {1i, 0.0}});
    case 3:
      return ComplexMatrix::from_rows({{1.0, 0.0}, {0.0, -1.0}});
    default:
      throw InvalidArgument("pauli: index must be 1, 2 or 3");
  }
}

}  // namespace fcs
