#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include "cgfp/rng.hpp"
#include "cgfp/tridiag.hpp"

using namespace cgfp;
using Catch::Approx;

namespace {

Tridiagonal<double> random_tridiag(std::size_t n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Tridiagonal<double> T;
  for (std::size_t i = 0; i < n; ++i) T.alpha.push_back(2.0 + rng.next_gaussian());
  for (std::size_t i = 0; i + 1 < n; ++i) T.beta.push_back(0.1 + rng.next_uniform());
  T.beta_last = 0.5;
  return T;
}

Eigen::VectorXd dense_eigs(const Tridiagonal<double>& T) {
  std::size_t n = T.size();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    A(i, i) = T.alpha[i];
    if (i + 1 < n) A(i, i + 1) = A(i + 1, i) = T.beta[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  return es.eigenvalues();
}

}  // namespace

TEST_CASE("bisection matches a dense eigensolver") {
  for (std::uint64_t seed : {1, 2, 3}) {
    Tridiagonal<double> T = random_tridiag(25, seed);
    Vec<double> vals = tridiag_eigenvalues(T);
    Eigen::VectorXd ref = dense_eigs(T);
    REQUIRE(vals.size() == 25);
    for (std::size_t i = 0; i < 25; ++i) CHECK(vals[i] == Approx(ref(i)).margin(1e-10));
  }
}

TEST_CASE("2x2 closed forms") {
  Tridiagonal<double> T;
  T.alpha = {2.0, 2.0};
  T.beta = {1.0};
  T.beta_last = 0.0;
  Vec<double> vals = tridiag_eigenvalues(T);
  CHECK(vals[0] == Approx(1.0).margin(1e-12));
  CHECK(vals[1] == Approx(3.0).margin(1e-12));
  CHECK(tridiag_min_eigenvalue(T) == Approx(1.0).margin(1e-12));
}

TEST_CASE("inverse iteration produces orthonormal eigenvectors even for clusters") {
  // two nearly equal eigenvalues via a block structure
  Tridiagonal<double> T;
  T.alpha = {1.0, 1.0 + 1e-13, 3.0, 4.0};
  T.beta = {1e-14, 1e-3, 0.5};
  T.beta_last = 0.0;
  Vec<double> vals = tridiag_eigenvalues(T);
  Mat<double> S = tridiag_eigenvectors(T, vals);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      double acc = 0.0;
      for (std::size_t r = 0; r < 4; ++r) acc += S(r, i) * S(r, j);
      CHECK(acc == Approx(i == j ? 1.0 : 0.0).margin(1e-8));
    }
  // residuals
  for (std::size_t j = 0; j < 4; ++j) {
    Vec<double> x(4);
    for (std::size_t r = 0; r < 4; ++r) x[r] = S(r, j);
    Vec<double> res = tridiag_apply(T, x);
    axmy(res, vals[j], x);
    CHECK(nrm2(res) <= 1e-10);
  }
}

TEST_CASE("ldlt solve matches shifted solve on SPD tridiagonal") {
  Tridiagonal<double> T = random_tridiag(15, 77);
  SplitMix64 rng(5);
  Vec<double> b(15);
  for (auto& v : b) v = rng.next_gaussian();
  Vec<double> x = ldlt_solve(T, b);
  Vec<double> r = tridiag_apply(T, x);
  for (std::size_t i = 0; i < 15; ++i) CHECK(r[i] == Approx(b[i]).margin(1e-9));
}

TEST_CASE("bisection at high precision refines double seeds") {
  PrecisionContext ctx(50);
  Tridiagonal<BigFloat> T;
  T.alpha = {ctx.make(2.0), ctx.make(2.0)};
  T.beta = {ctx.make(1.0)};
  T.beta_last = ctx.make(0.0);
  Vec<BigFloat> vals = tridiag_eigenvalues(T);
  CHECK(abs(vals[0] - ctx.make(1.0)).log10_abs() < -40.0);
  CHECK(abs(vals[1] - ctx.make(3.0)).log10_abs() < -40.0);
}

TEST_CASE("leading principal section keeps the right trailing coefficient") {
  Tridiagonal<double> T = random_tridiag(6, 8);
  Tridiagonal<double> T3 = T.leading(3);
  CHECK(T3.size() == 3);
  CHECK(T3.beta_last == T.beta[2]);
  Tridiagonal<double> Tfull = T.leading(6);
  CHECK(Tfull.beta_last == T.beta_last);
}
