#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cgfp/rng.hpp"
#include "cgfp/spd.hpp"

namespace cgfp {

// Target spectrum for the interval-spread construction: `multiplicity`
// eigenvalues spread uniformly across an interval of full width `width`
// about each value.
struct SpectrumSpec {
  std::vector<double> values;  // ascending, strictly positive
  int multiplicity = 1;
  double width = 0.0;
  bool width_is_half = false;  // alternative reading: values span value +/- width
};

namespace detail {

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

inline bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    std::size_t pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos) continue;
    if (line[pos] == '%') continue;
    return true;
  }
  return false;
}

}  // namespace detail

// Matrix Market reader: coordinate or array format, field real, symmetry
// symmetric or general.  1-based indices; %-comment lines skipped; duplicate
// coordinate entries are summed.
inline SpdMatrix parse_matrix_market(std::istream& in) {
  std::string banner;
  if (!std::getline(in, banner)) fail(Errc::MalformedHeader, "empty stream");
  std::istringstream bs(banner);
  std::string tag, object, format, field, symmetry;
  bs >> tag >> object >> format >> field >> symmetry;
  if (detail::lower(tag) != "%%matrixmarket")
    fail(Errc::MalformedHeader, "missing %%MatrixMarket banner");
  if (detail::lower(object) != "matrix") fail(Errc::MalformedHeader, "object must be 'matrix'");
  format = detail::lower(format);
  field = detail::lower(field);
  symmetry = detail::lower(symmetry);
  if (format != "coordinate" && format != "array")
    fail(Errc::MalformedHeader, "format must be coordinate or array");
  if (field != "real") fail(Errc::MalformedHeader, "field must be real");
  if (symmetry != "symmetric" && symmetry != "general")
    fail(Errc::MalformedHeader, "symmetry must be symmetric or general");

  std::string line;
  if (!detail::next_data_line(in, line)) fail(Errc::MalformedHeader, "missing size line");
  std::istringstream sz(line);

  if (format == "coordinate") {
    long rows = 0, cols = 0, nnz = -1;
    sz >> rows >> cols >> nnz;
    if (rows <= 0 || cols <= 0 || nnz < 0) fail(Errc::MalformedHeader, "bad size line");
    if (rows != cols) fail(Errc::NotSquare, "matrix is " + std::to_string(rows) + "x" + std::to_string(cols));
    const std::size_t n = static_cast<std::size_t>(rows);
    Mat<double> A(n, n, 0.0);
    double maxabs = 0.0;
    for (long e = 0; e < nnz; ++e) {
      if (!detail::next_data_line(in, line))
        fail(Errc::MalformedHeader, "expected " + std::to_string(nnz) + " entries");
      std::istringstream es(line);
      long i = 0, j = 0;
      double v = 0.0;
      if (!(es >> i >> j >> v)) fail(Errc::MalformedHeader, "bad entry line: " + line);
      if (i < 1 || j < 1 || i > rows || j > rows)
        fail(Errc::MalformedHeader, "index out of range: " + line);
      A(i - 1, j - 1) += v;
      maxabs = std::max(maxabs, std::abs(A(i - 1, j - 1)));
      if (symmetry == "symmetric" && i != j) A(j - 1, i - 1) += v;
    }
    if (symmetry == "general") {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          if (std::abs(A(i, j) - A(j, i)) > 1e-12 * maxabs)
            fail(Errc::NotSymmetric, "entries (" + std::to_string(i + 1) + "," +
                                         std::to_string(j + 1) + ") mismatch");
    }
    return SpdMatrix(std::move(A));
  }

  // array format: dense column-major; symmetric variant lists the lower
  // triangle of each column.
  long rows = 0, cols = 0;
  sz >> rows >> cols;
  if (rows <= 0 || cols <= 0) fail(Errc::MalformedHeader, "bad size line");
  if (rows != cols) fail(Errc::NotSquare, "matrix is " + std::to_string(rows) + "x" + std::to_string(cols));
  const std::size_t n = static_cast<std::size_t>(rows);
  Mat<double> A(n, n, 0.0);
  auto read_value = [&](double& v) {
    if (!detail::next_data_line(in, line)) fail(Errc::MalformedHeader, "truncated array data");
    std::istringstream es(line);
    if (!(es >> v)) fail(Errc::MalformedHeader, "bad array value: " + line);
  };
  double maxabs = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t i0 = (symmetry == "symmetric") ? j : 0;
    for (std::size_t i = i0; i < n; ++i) {
      double v;
      read_value(v);
      A(i, j) = v;
      if (symmetry == "symmetric") A(j, i) = v;
      maxabs = std::max(maxabs, std::abs(v));
    }
  }
  if (symmetry == "general") {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (std::abs(A(i, j) - A(j, i)) > 1e-12 * maxabs)
          fail(Errc::NotSymmetric, "entries (" + std::to_string(i + 1) + "," +
                                       std::to_string(j + 1) + ") mismatch");
  }
  return SpdMatrix(std::move(A));
}

// Writes the lower triangle in coordinate/symmetric format with round-trip
// exact (%.17g) values.
inline void write_matrix_market(const SpdMatrix& A, std::ostream& out) {
  const std::size_t n = A.dim();
  std::size_t nnz = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      if (A(i, j) != 0.0) ++nnz;
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << n << " " << n << " " << nnz << "\n";
  char buf[64];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      if (A(i, j) != 0.0) {
        std::snprintf(buf, sizeof buf, "%zu %zu %.17g\n", i + 1, j + 1, A(i, j));
        out << buf;
      }
}

// D^{-1/2} A D^{-1/2} with D = diag(A).
inline SpdMatrix diagonal_prescale(const SpdMatrix& A) {
  const std::size_t n = A.dim();
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(A(i, i) > 0.0)) fail(Errc::NonPositiveDiagonal, "diagonal entry " + std::to_string(i + 1));
    s[i] = std::sqrt(A(i, i));
  }
  Mat<double> M(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) M(i, j) = A(i, j) / (s[i] * s[j]);
  return SpdMatrix(std::move(M));
}

inline SpdMatrix normalize_to_unit_norm(const SpdMatrix& A) {
  double nrm = A.norm2();
  if (nrm == 0.0) fail(Errc::ZeroMatrix, "cannot normalize the zero matrix");
  const std::size_t n = A.dim();
  Mat<double> M(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) M(i, j) = A(i, j) / nrm;
  return SpdMatrix(std::move(M));
}

namespace detail {

// Haar-distributed orthogonal matrix: QR of a standard-normal matrix with the
// sign convention that R has positive diagonal.
inline Eigen::MatrixXd haar_orthogonal(std::size_t n, SplitMix64& rng) {
  Eigen::MatrixXd G(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) G(i, j) = rng.next_gaussian();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ();
  Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (std::size_t j = 0; j < n; ++j)
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
  return Q;
}

}  // namespace detail

// Model spectrum: lambda_1 and lambda_n given, interior eigenvalues
// lambda_i = lambda_1 + ((i-1)/(n-1)) (lambda_n - lambda_1) rho^(n-i),
// clustered at the lower end for rho < 1.
inline std::vector<double> model_spectrum(std::size_t n, double rho, double lambda1, double lambdan) {
  if (!(lambda1 > 0.0) || !(lambda1 < lambdan))
    fail(Errc::BadSpectrum, "need 0 < lambda1 < lambdan");
  if (n < 2) fail(Errc::BadSpectrum, "need n >= 2");
  std::vector<double> lam(n);
  lam[0] = lambda1;
  lam[n - 1] = lambdan;
  for (std::size_t i = 2; i <= n - 1; ++i)
    lam[i - 1] = lambda1 + (double(i - 1) / double(n - 1)) * (lambdan - lambda1) *
                     std::pow(rho, double(n - i));
  return lam;
}

// Dense model problem: spectrum above, Haar-random eigenvectors, seeded
// standard-normal solution, b = A x_true, zero initial guess.  A is formed
// once as V diag(lambda) V^T in working precision.
inline Problem model_problem(std::size_t n, double rho, double lambda1, double lambdan,
                             std::uint64_t seed) {
  std::vector<double> lam = model_spectrum(n, rho, lambda1, lambdan);
  SplitMix64 rng(seed);
  Eigen::MatrixXd V = detail::haar_orthogonal(n, rng);
  Eigen::VectorXd L(n);
  for (std::size_t i = 0; i < n; ++i) L(i) = lam[i];
  Eigen::MatrixXd A = V * L.asDiagonal() * V.transpose();

  Mat<double> M(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) M(i, j) = A(i, j);

  Vec<double> x_true(n);
  for (std::size_t i = 0; i < n; ++i) x_true[i] = rng.next_gaussian();

  Problem p = Problem::from_solution(SpdMatrix(std::move(M)), std::move(x_true),
                                     "model(n=" + std::to_string(n) + ",rho=" + std::to_string(rho) + ")");
  return p;
}

// Diagonal matrix with `multiplicity` eigenvalues spread uniformly across an
// interval about each target value.
inline SpdMatrix interval_spread(const SpectrumSpec& spec) {
  if (spec.values.empty()) fail(Errc::BadSpectrum, "empty spectrum");
  if (spec.multiplicity < 1) fail(Errc::BadSpectrum, "multiplicity must be >= 1");
  if (spec.width < 0.0) fail(Errc::BadSpectrum, "width must be >= 0");
  double full_width = spec.width_is_half ? 2.0 * spec.width : spec.width;
  for (std::size_t i = 0; i < spec.values.size(); ++i) {
    if (!(spec.values[i] > 0.0)) fail(Errc::BadSpectrum, "spectrum values must be positive");
    if (i > 0) {
      double gap = spec.values[i] - spec.values[i - 1];
      if (!(full_width < gap))
        fail(Errc::OverlappingIntervals,
             "interval width " + std::to_string(full_width) + " >= gap " + std::to_string(gap));
    }
  }
  std::vector<double> d;
  d.reserve(spec.values.size() * spec.multiplicity);
  for (double lam : spec.values) {
    if (spec.multiplicity == 1 || full_width == 0.0) {
      for (int m = 0; m < spec.multiplicity; ++m) d.push_back(lam);
    } else {
      double lo = lam - 0.5 * full_width;
      double step = full_width / double(spec.multiplicity - 1);
      for (int m = 0; m < spec.multiplicity; ++m) d.push_back(lo + step * double(m));
    }
  }
  return SpdMatrix::diagonal(d);
}

// Problem on a matrix with a seeded random solution (used for the exact-CG
// interval studies, where the same solution must be shared across widths).
inline Problem problem_with_random_solution(SpdMatrix A, std::uint64_t seed, std::string label = "") {
  SplitMix64 rng(seed);
  Vec<double> x(A.dim());
  for (auto& xi : x) xi = rng.next_gaussian();
  return Problem::from_solution(std::move(A), std::move(x), std::move(label));
}

}  // namespace cgfp
