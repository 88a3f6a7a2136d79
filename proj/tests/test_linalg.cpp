#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "fcs/linalg.hpp"
#include "oracles.hpp"

using namespace fcs;

namespace {

HermitianOperator herm(const ComplexMatrix& m) { return HermitianOperator(m); }

ComplexMatrix with_eigenvalues(const std::vector<double>& lambda, std::mt19937_64& rng) {
  // Random unitary from the eigenvectors of a random Hermitian matrix, checked
  // against the oracle product so the fixture does not lean on the code under test.
  const auto es = eigh(herm(oracle::random_hermitian(lambda.size(), rng)));
  const auto& q = es.eigenvectors;
  return oracle::multiply(q, oracle::multiply(ComplexMatrix::diagonal(std::span(lambda)),
                                              oracle::adjoint(q)));
}

}  // namespace

TEST_CASE("ComplexMatrix rejects malformed input") {
  CHECK_THROWS_AS(ComplexMatrix(0), InvalidArgument);
  CHECK_THROWS_AS(ComplexMatrix(2, std::vector<Complex>(3)), InvalidArgument);
  CHECK_THROWS_AS(ComplexMatrix(1, {Complex(std::nan(""), 0.0)}), InvalidArgument);
  CHECK_THROWS_AS(ComplexMatrix(2) * ComplexMatrix(3), DimensionMismatch);
}

TEST_CASE("HermitianOperator checks symmetry") {
  CHECK_THROWS_AS(herm(ComplexMatrix::from_rows({{0, 1}, {0, 0}})), InvalidArgument);
  CHECK_NOTHROW(herm(ComplexMatrix::from_rows({{1, Complex(0, 2)}, {Complex(0, -2), 3}})));
}

TEST_CASE("kron matches the index formula") {
  std::mt19937_64 rng(11);
  for (std::size_t na : {1u, 2u, 3u}) {
    for (std::size_t nb : {1u, 2u, 4u}) {
      const auto a = oracle::random_matrix(na, rng);
      const auto b = oracle::random_matrix(nb, rng);
      CHECK(max_abs_diff(kron(a, b), oracle::kron(a, b)) == 0.0);
    }
  }
  CHECK_THROWS_AS(kron(ComplexMatrix(64), ComplexMatrix(65), 4096), SizeLimit);
}

TEST_CASE("pauli algebra") {
  const auto x = pauli(1), y = pauli(2), z = pauli(3);
  const Complex i(0, 1);
  CHECK(max_abs_diff(x * y, i * z) == 0.0);
  CHECK(max_abs_diff(x * x, ComplexMatrix::identity(2)) == 0.0);
  CHECK_THROWS_AS(pauli(0), InvalidArgument);
}

TEST_CASE("eigh agrees with the characteristic-polynomial oracle") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + trial % 4;
    const auto a = oracle::random_hermitian(n, rng);
    const auto es = eigh(herm(a));
    const auto roots = oracle::charpoly_eigenvalues(a);
    REQUIRE(roots.size() == n);
    for (std::size_t k = 0; k < n; ++k) CHECK(es.eigenvalues[k] == doctest::Approx(roots[k]).epsilon(1e-9));
  }
}

TEST_CASE("eigh reconstructs and is unitary") {
  std::mt19937_64 rng(7);
  for (std::size_t n : {1u, 2u, 5u, 16u, 40u}) {
    const auto a = oracle::random_hermitian(n, rng);
    const auto es = eigh(herm(a));
    CHECK(std::is_sorted(es.eigenvalues.begin(), es.eigenvalues.end()));
    const auto& u = es.eigenvectors;
    const auto recon = oracle::multiply(
        u, oracle::multiply(ComplexMatrix::diagonal(std::span(es.eigenvalues)), oracle::adjoint(u)));
    const double scale = std::max(1.0, a.max_abs());
    CHECK(max_abs_diff(recon, a) <= 1e-12 * n * scale);
    CHECK(max_abs_diff(oracle::multiply(oracle::adjoint(u), u), ComplexMatrix::identity(n)) <=
          1e-12 * n);
  }
}

TEST_CASE("eigh handles degenerate and diagonal spectra") {
  std::mt19937_64 rng(5);
  const std::vector<double> lambda = {-1.0, -1.0, 0.5, 2.0, 2.0, 2.0};
  const auto a = with_eigenvalues(lambda, rng);
  const auto es = eigh(herm(a));
  for (std::size_t k = 0; k < lambda.size(); ++k) CHECK(es.eigenvalues[k] == doctest::Approx(lambda[k]).epsilon(1e-12));
  const auto& u = es.eigenvectors;
  CHECK(max_abs_diff(oracle::multiply(oracle::adjoint(u), u), ComplexMatrix::identity(6)) <= 1e-12);

  const auto id = eigh(HermitianOperator::identity(8));
  for (double v : id.eigenvalues) CHECK(v == 1.0);
  const auto zero = eigh(HermitianOperator::zero(3));
  for (double v : zero.eigenvalues) CHECK(v == 0.0);
}

TEST_CASE("expm_hermitian agrees with the Taylor oracle") {
  std::mt19937_64 rng(99);
  for (std::size_t n : {1u, 3u, 6u}) {
    const auto a = oracle::random_hermitian(n, rng);
    for (Complex c : {Complex(0.3, 0), Complex(-1.2, 0), Complex(0, 2.5), Complex(0.4, -0.7)}) {
      const auto got = expm_hermitian(herm(a), c);
      const auto want = oracle::taylor_expm(a, c);
      CHECK(max_abs_diff(got, want) <= 1e-11 * std::max(1.0, want.max_abs()));
    }
  }
}

TEST_CASE("expm_hermitian: unitarity, group law, overflow") {
  std::mt19937_64 rng(3);
  const auto a = herm(oracle::random_hermitian(8, rng));
  const auto u = expm_hermitian(a, Complex(0, -1.7));
  CHECK(max_abs_diff(oracle::multiply(oracle::adjoint(u), u), ComplexMatrix::identity(8)) <= 1e-12);
  const auto ab = oracle::multiply(expm_hermitian(a, 0.3), expm_hermitian(a, -0.8));
  CHECK(max_abs_diff(ab, expm_hermitian(a, -0.5)) <= 1e-12);
  CHECK(max_abs_diff(expm_hermitian(a, 0.0), ComplexMatrix::identity(8)) <= 1e-13);
  const auto big = HermitianOperator::identity(2);
  CHECK_THROWS_AS(expm_hermitian(big, 701.0), Overflow);
  CHECK_NOTHROW(expm_hermitian(big, Complex(0, 1e6)));
}

TEST_CASE("op_norm agrees with power iteration and is submultiplicative") {
  std::mt19937_64 rng(17);
  for (std::size_t n : {1u, 2u, 5u, 9u}) {
    const auto m = oracle::random_matrix(n, rng);
    CHECK(op_norm(m) == doctest::Approx(oracle::power_iteration_norm(m)).epsilon(1e-10));
  }
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + trial % 7;
    const auto a = oracle::random_matrix(n, rng);
    const auto b = oracle::random_matrix(n, rng);
    CHECK(op_norm(oracle::multiply(a, b)) <= op_norm(a) * op_norm(b) * (1 + 1e-12));
    const auto h = oracle::random_hermitian(n, rng);
    const auto es = eigh(herm(h));
    CHECK(op_norm(h) == doctest::Approx(es.spectral_radius()).epsilon(1e-12));
  }
  CHECK(op_norm(ComplexMatrix(3)) == 0.0);
}

TEST_CASE("trace_product and cyclicity") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + trial % 6;
    const auto x = oracle::random_matrix(n, rng);
    const auto y = oracle::random_matrix(n, rng);
    const auto z = oracle::random_matrix(n, rng);
    Complex want{};
    const auto xy = oracle::multiply(x, y);
    for (std::size_t i = 0; i < n; ++i) want += xy(i, i);
    CHECK(std::abs(trace_product(x, y) - want) <= 1e-12 * std::max(1.0, std::abs(want)));
    const Complex t1 = trace_product(oracle::multiply(x, y), z);
    const Complex t2 = trace_product(oracle::multiply(y, z), x);
    CHECK(std::abs(t1 - t2) <= 1e-11 * std::max(1.0, std::abs(t1)));
  }
}
