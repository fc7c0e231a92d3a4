#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "cgfp/matio.hpp"

using namespace cgfp;
using Catch::Approx;

TEST_CASE("coordinate symmetric file mirrors the lower triangle") {
  std::istringstream in(
      "%%MatrixMarket matrix coordinate real symmetric\n"
      "% comment\n"
      "2 2 3\n"
      "1 1 2.0\n"
      "2 1 1.0\n"
      "2 2 2.0\n");
  SpdMatrix A = parse_matrix_market(in);
  REQUIRE(A.dim() == 2);
  CHECK(A(0, 0) == 2.0);
  CHECK(A(0, 1) == 1.0);
  CHECK(A(1, 0) == 1.0);
  CHECK(A(1, 1) == 2.0);
}

TEST_CASE("duplicate coordinate entries are summed") {
  std::istringstream in(
      "%%MatrixMarket matrix coordinate real general\n"
      "2 2 3\n"
      "1 1 2.0\n"
      "1 1 3.0\n"
      "2 2 1.0\n");
  SpdMatrix A = parse_matrix_market(in);
  CHECK(A(0, 0) == 5.0);
}

TEST_CASE("array format reads column-major dense data") {
  std::istringstream in(
      "%%MatrixMarket matrix array real symmetric\n"
      "2 2\n"
      "2.0\n"
      "1.0\n"
      "3.0\n");
  SpdMatrix A = parse_matrix_market(in);
  CHECK(A(0, 1) == 1.0);
  CHECK(A(1, 1) == 3.0);
}

TEST_CASE("parser error taxonomy") {
  {
    std::istringstream in("nothing here\n1 1 1\n");
    CHECK_THROWS_MATCHES(parse_matrix_market(in), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.code() == Errc::MalformedHeader; }));
  }
  {
    std::istringstream in("%%MatrixMarket matrix coordinate real general\n2 3 1\n1 1 1.0\n");
    CHECK_THROWS_MATCHES(parse_matrix_market(in), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.code() == Errc::NotSquare; }));
  }
  {
    // (1,2) and (2,1) differ by 1 under general symmetry
    std::istringstream in(
        "%%MatrixMarket matrix coordinate real general\n"
        "2 2 4\n"
        "1 1 2.0\n1 2 5.0\n2 1 4.0\n2 2 2.0\n");
    CHECK_THROWS_MATCHES(parse_matrix_market(in), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.code() == Errc::NotSymmetric; }));
  }
}

TEST_CASE("constructed matrices are bitwise symmetric") {
  SplitMix64 rng(12);
  Mat<double> M(7, 7, 0.0);
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 7; ++j) M(i, j) = rng.next_gaussian();
  SpdMatrix A(std::move(M));
  double worst = 0.0;
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 7; ++j) worst = std::max(worst, std::abs(A(i, j) - A(j, i)));
  CHECK(worst == 0.0);
}

TEST_CASE("diagonal prescale") {
  SECTION("identity is a fixed point") {
    SpdMatrix I = SpdMatrix::diagonal({1.0, 1.0, 1.0});
    SpdMatrix P = diagonal_prescale(I);
    for (std::size_t i = 0; i < 3; ++i) CHECK(P(i, i) == 1.0);
  }
  SECTION("diag(4,9) becomes the identity") {
    SpdMatrix P = diagonal_prescale(SpdMatrix::diagonal({4.0, 9.0}));
    CHECK(P(0, 0) == Approx(1.0).margin(1e-16));
    CHECK(P(1, 1) == Approx(1.0).margin(1e-16));
  }
  SECTION("off-diagonals scale by the root product") {
    Mat<double> M(2, 2, 0.0);
    M(0, 0) = 4.0; M(0, 1) = 2.0; M(1, 0) = 2.0; M(1, 1) = 4.0;
    SpdMatrix P = diagonal_prescale(SpdMatrix(std::move(M)));
    CHECK(P(0, 1) == Approx(0.5).margin(1e-16));
  }
  SECTION("rejects a non-positive diagonal") {
    Mat<double> M(2, 2, 0.0);
    M(0, 0) = 1.0; M(1, 1) = -2.0;
    CHECK_THROWS_AS(diagonal_prescale(SpdMatrix(std::move(M))), Error);
  }
  SECTION("idempotent to a couple of roundoffs") {
    SplitMix64 rng(3);
    Mat<double> G(6, 6, 0.0);
    for (auto& v : G.data()) v = rng.next_gaussian();
    Mat<double> A(6, 6, 0.0);
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = 0; j < 6; ++j) {
        double acc = (i == j) ? 6.0 : 0.0;
        for (std::size_t k = 0; k < 6; ++k) acc += G(i, k) * G(j, k);
        A(i, j) = acc;
      }
    SpdMatrix P1 = diagonal_prescale(SpdMatrix(std::move(A)));
    SpdMatrix P2 = diagonal_prescale(P1);
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = 0; j < 6; ++j)
        CHECK(std::abs(P2(i, j) - P1(i, j)) <= 2 * 0x1p-52 * std::abs(P1(i, j)) + 1e-300);
  }
}

TEST_CASE("unit-norm normalization") {
  SpdMatrix A = normalize_to_unit_norm(SpdMatrix::diagonal({2.0, 4.0}));
  CHECK(A(0, 0) == Approx(0.5));
  CHECK(A(1, 1) == Approx(1.0));
  SpdMatrix I = normalize_to_unit_norm(SpdMatrix::diagonal({1.0, 1.0}));
  CHECK(I(0, 0) == 1.0);
  // idempotent on already-normalized input
  SpdMatrix B = normalize_to_unit_norm(A);
  CHECK(std::abs(B(0, 0) - A(0, 0)) <= 0x1p-52);
  CHECK_THROWS_AS(normalize_to_unit_norm(SpdMatrix::diagonal({0.0, 0.0})), Error);
}

TEST_CASE("model problem spectrum") {
  std::vector<double> lam = model_spectrum(48, 0.8, 0.001, 1.0);
  CHECK(lam.front() == 0.001);
  CHECK(lam.back() == 1.0);
  // lambda_2 against the closed form evaluated in extended precision:
  // 0.001 + (1/47)*0.999*0.8^46 = 1.000740639775709e-3
  {
    PrecisionContext oracle(60);
    BigFloat v = oracle.make(0.001) +
                 oracle.make(1.0) / oracle.make(47.0) * oracle.make(0.999) *
                     pow_int(oracle.make(0.8), 46);
    CHECK(abs(v - oracle.parse("1.000740639775709178607659e-3")).log10_abs() < -22.0);
    CHECK(lam[1] == Approx(v.to_double()).epsilon(1e-14));
  }
  CHECK(lam[1] == Approx(1.000740639775709e-3).epsilon(1e-12));
  // rho = 1 gives uniform spacing
  std::vector<double> uni = model_spectrum(3, 1.0, 0.5, 1.0);
  CHECK(uni[1] == Approx(0.75));
  CHECK_THROWS_AS(model_spectrum(5, 0.8, 0.0, 1.0), Error);
  CHECK_THROWS_AS(model_spectrum(5, 0.8, 2.0, 1.0), Error);
}

TEST_CASE("model problem construction") {
  Problem p = model_problem(48, 0.8, 0.001, 1.0, 9);
  const SpectralData& sd = p.A.spectral();
  CHECK(sd.kappa == Approx(1000.0).epsilon(1e-8));
  CHECK(sd.norm2 == Approx(1.0).epsilon(1e-10));
  CHECK(p.x0 == Vec<double>(48, 0.0));

  SECTION("seed determinism is bit-exact") {
    Problem q = model_problem(48, 0.8, 0.001, 1.0, 9);
    CHECK(q.A.mat().data() == p.A.mat().data());
    CHECK(q.b == p.b);
    CHECK(q.x_true == p.x_true);
  }
  SECTION("cached eigenpairs reconstruct the matrix") {
    double u = 0x1p-53;
    for (std::size_t i = 0; i < 48; i += 7) {
      Vec<double> v(48);
      for (std::size_t r = 0; r < 48; ++r) v[r] = sd.eigenvectors(r, i);
      Vec<double> Av = matvec(p.A.mat(), v);
      axmy(Av, sd.eigenvalues[i], v);
      CHECK(nrm2(Av) <= 10.0 * 48 * u * sd.norm2);
    }
  }
}

TEST_CASE("interval spread") {
  SECTION("multiplicity one, width zero is the plain diagonal") {
    SpectrumSpec s;
    s.values = {1.0, 2.0};
    SpdMatrix A = interval_spread(s);
    REQUIRE(A.dim() == 2);
    CHECK(A(0, 0) == 1.0);
    CHECK(A(1, 1) == 2.0);
  }
  SECTION("three-point uniform spacing") {
    SpectrumSpec s;
    s.values = {1.0};
    s.multiplicity = 3;
    s.width = 2e-8;
    SpdMatrix A = interval_spread(s);
    REQUIRE(A.dim() == 3);
    CHECK(A(0, 0) == Approx(1.0 - 1e-8).epsilon(1e-15));
    CHECK(A(1, 1) == Approx(1.0).epsilon(1e-15));
    CHECK(A(2, 2) == Approx(1.0 + 1e-8).epsilon(1e-15));
  }
  SECTION("model spectrum, multiplicity 11, width 1e-14") {
    SpectrumSpec s;
    s.values = model_spectrum(48, 0.8, 0.001, 1.0);
    s.multiplicity = 11;
    s.width = 1e-14;
    SpdMatrix A = interval_spread(s);
    REQUIRE(A.dim() == 48 * 11);
    for (std::size_t i = 0; i < A.dim(); ++i) {
      double v = A(i, i);
      double target = s.values[i / 11];
      CHECK(std::abs(v - target) <= 5e-15 * (1.0 + 1e-9));
    }
  }
  SECTION("overlapping intervals are rejected") {
    SpectrumSpec s;
    s.values = {1.0, 1.0 + 1e-9};
    s.multiplicity = 2;
    s.width = 1e-8;
    CHECK_THROWS_MATCHES(interval_spread(s), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.code() == Errc::OverlappingIntervals;
                         }));
  }
  SECTION("half-width convention doubles the span") {
    SpectrumSpec s;
    s.values = {1.0};
    s.multiplicity = 2;
    s.width = 1e-8;
    s.width_is_half = true;
    SpdMatrix A = interval_spread(s);
    CHECK(A(0, 0) == Approx(1.0 - 1e-8).epsilon(1e-15));
    CHECK(A(1, 1) == Approx(1.0 + 1e-8).epsilon(1e-15));
  }
}

TEST_CASE("spectral data on a small diagonal") {
  SpdMatrix A = SpdMatrix::diagonal({3.0, 1.0, 2.0});
  const SpectralData& sd = spectral_data(A);
  REQUIRE(sd.eigenvalues.size() == 3);
  CHECK(sd.eigenvalues[0] == Approx(1.0));
  CHECK(sd.eigenvalues[1] == Approx(2.0));
  CHECK(sd.eigenvalues[2] == Approx(3.0));
  CHECK(sd.norm2 == Approx(3.0));
  CHECK(sd.kappa == Approx(3.0));
  CHECK(sd.positive_definite);

  SpdMatrix B = SpdMatrix::diagonal({-1.0, 2.0});
  CHECK_FALSE(spectral_data(B).positive_definite);
}
