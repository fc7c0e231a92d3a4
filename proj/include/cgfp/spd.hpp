#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "cgfp/errors.hpp"
#include "cgfp/linalg.hpp"

namespace cgfp {

struct SpectralData {
  std::vector<double> eigenvalues;  // ascending
  Mat<double> eigenvectors;         // column i pairs with eigenvalues[i]
  double norm2 = 0.0;               // spectral norm = max |eigenvalue|
  double kappa = 0.0;
  bool positive_definite = false;
};

// Dense symmetric matrix with lazily cached spectral data.  Symmetry is
// enforced on construction by averaging (A + A^T)/2, so A(i,j) == A(j,i)
// holds bitwise afterwards.
class SpdMatrix {
 public:
  static constexpr std::size_t kMaxEigenDim = 4096;

  SpdMatrix() = default;
  explicit SpdMatrix(Mat<double> entries) : a_(std::move(entries)) {
    if (a_.rows() != a_.cols()) fail(Errc::NotSquare, "matrix must be square");
    for (std::size_t i = 0; i < a_.rows(); ++i)
      for (std::size_t j = i + 1; j < a_.cols(); ++j) {
        double m = 0.5 * (a_(i, j) + a_(j, i));
        a_(i, j) = m;
        a_(j, i) = m;
      }
  }

  static SpdMatrix diagonal(const std::vector<double>& d) {
    Mat<double> m(d.size(), d.size(), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return SpdMatrix(std::move(m));
  }

  std::size_t dim() const { return a_.rows(); }
  const Mat<double>& mat() const { return a_; }
  double operator()(std::size_t i, std::size_t j) const { return a_(i, j); }

  const SpectralData& spectral() const {
    if (!spec_) {
      if (dim() > kMaxEigenDim)
        fail(Errc::DimensionTooLarge, "eigendecomposition limited to n <= 4096");
      auto spec = std::make_shared<SpectralData>();
      const std::size_t n = dim();
      Eigen::MatrixXd A(n, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) A(i, j) = a_(i, j);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
      if (es.info() != Eigen::Success) fail(Errc::Breakdown, "eigendecomposition failed");
      spec->eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);
      spec->eigenvectors = Mat<double>(n, n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) spec->eigenvectors(i, j) = es.eigenvectors()(i, j);
      spec->norm2 = std::max(std::abs(spec->eigenvalues.front()), std::abs(spec->eigenvalues.back()));
      spec->positive_definite = spec->eigenvalues.front() > 0.0;
      spec->kappa = spec->positive_definite ? spec->eigenvalues.back() / spec->eigenvalues.front() : 0.0;
      spec_ = std::move(spec);
    }
    return *spec_;
  }

  double norm2() const { return spectral().norm2; }
  double kappa() const { return spectral().kappa; }

  // A^{-1} y through the cached eigendecomposition: V diag(1/lambda) V^T y.
  Vec<double> apply_inverse(const Vec<double>& y) const {
    const SpectralData& s = spectral();
    if (!s.positive_definite) fail(Errc::NotPositiveDefinite, "apply_inverse needs SPD matrix");
    const std::size_t n = dim();
    Vec<double> c(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += s.eigenvectors(i, j) * y[i];
      c[j] = acc / s.eigenvalues[j];
    }
    Vec<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += s.eigenvectors(i, j) * c[j];
      out[i] = acc;
    }
    return out;
  }

 private:
  Mat<double> a_;
  mutable std::shared_ptr<SpectralData> spec_;
};

inline const SpectralData& spectral_data(const SpdMatrix& A) { return A.spectral(); }

// A linear system with known solution; b = A x_true is formed in working
// precision, and that rounding is part of the problem definition.
struct Problem {
  SpdMatrix A;
  Vec<double> x_true;
  Vec<double> b;
  Vec<double> x0;
  std::string label;

  static Problem from_solution(SpdMatrix A, Vec<double> x_true, std::string label = "") {
    Problem p;
    p.b = matvec(A.mat(), x_true);
    p.A = std::move(A);
    p.x_true = std::move(x_true);
    p.x0.assign(p.x_true.size(), 0.0);
    p.label = std::move(label);
    return p;
  }
};

}  // namespace cgfp
