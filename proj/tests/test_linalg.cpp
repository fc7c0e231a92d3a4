#include <catch2/catch_amalgamated.hpp>

#include "cgfp/linalg.hpp"
#include "cgfp/rng.hpp"

using namespace cgfp;
using Catch::Approx;

namespace {

Mat<double> random_spd(std::size_t n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Mat<double> G(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) G(i, j) = rng.next_gaussian();
  // A = G G^T + n I
  Mat<double> A(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = (i == j) ? double(n) : 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += G(i, k) * G(j, k);
      A(i, j) = acc;
    }
  return A;
}

}  // namespace

TEST_CASE("dot and norm basics") {
  Vec<double> a{1.0, 2.0, 3.0}, b{4.0, -5.0, 6.0};
  CHECK(dot(a, b) == Approx(12.0));
  CHECK(nrm2(a) == Approx(std::sqrt(14.0)));
}

TEST_CASE("cholesky solves SPD systems") {
  Mat<double> A = random_spd(12, 3);
  SplitMix64 rng(4);
  Vec<double> x(12);
  for (auto& v : x) v = rng.next_gaussian();
  Vec<double> b = matvec(A, x);
  Mat<double> L = cholesky(A);
  Vec<double> y = cholesky_solve(L, b);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == Approx(x[i]).epsilon(1e-10));
}

TEST_CASE("cholesky rejects indefinite input") {
  Mat<double> A(2, 2, 0.0);
  A(0, 0) = 1.0;
  A(1, 1) = -1.0;
  CHECK_THROWS_AS(cholesky(A), Error);
}

TEST_CASE("gaussian elimination with pivoting") {
  Mat<double> A(3, 3, 0.0);
  // needs a row swap on the first pivot
  A(0, 0) = 0.0; A(0, 1) = 2.0; A(0, 2) = 1.0;
  A(1, 0) = 1.0; A(1, 1) = 1.0; A(1, 2) = 1.0;
  A(2, 0) = 2.0; A(2, 1) = 0.0; A(2, 2) = -1.0;
  Vec<double> b{4.0, 3.0, 1.0};
  Mat<double> Ac = A;
  Vec<double> bc = b;
  Vec<double> x = gauss_solve(Ac, bc);
  Vec<double> r = matvec(A, x);
  for (std::size_t i = 0; i < 3; ++i) CHECK(r[i] == Approx(b[i]).margin(1e-12));
}

TEST_CASE("two-pass MGS leaves ~machine-level components") {
  SplitMix64 rng(9);
  std::size_t n = 40;
  std::vector<Vec<double>> basis;
  for (int q = 0; q < 10; ++q) {
    Vec<double> v(n);
    for (auto& x : v) x = rng.next_gaussian();
    orthogonalize_against(v, basis, 2);
    double nv = nrm2(v);
    scal(v, 1.0 / nv);
    basis.push_back(v);
  }
  Vec<double> w(n);
  for (auto& x : w) x = rng.next_gaussian();
  orthogonalize_against(w, basis, 2);
  for (const auto& q : basis) CHECK(std::abs(dot(q, w)) <= 1e-14 * nrm2(w) * n);
}

TEST_CASE("high-precision cholesky reaches context accuracy") {
  PrecisionContext ctx(48);
  Mat<double> Ad = random_spd(8, 11);
  Mat<BigFloat> A = promote(Ad, ctx.bits());
  Vec<BigFloat> x = ctx.vec(8);
  for (std::size_t i = 0; i < 8; ++i) x[i] = ctx.make(double(i) - 3.5);
  Vec<BigFloat> b = matvec(A, x);
  Mat<BigFloat> L = cholesky(A);
  Vec<BigFloat> y = cholesky_solve(L, b);
  Vec<BigFloat> d = vsub(y, x);
  CHECK(nrm2(d).log10_abs() < -40.0);
}
