#pragma once

// Small dense-matrix kernel shared by every other header. Matrices are plain
// Eigen dynamic matrices; everything here targets the n <= ~64 envelope, so
// dense storage and O(n^3) factorizations are fine throughout.

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "etlqg/errors.hpp"

namespace etlqg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kPsdTol = 1e-9;   // eigenvalue / pivot floor for PSD
inline constexpr double kPdTol = 1e-12;   // smallest eigenvalue for PD

inline void require_square(const Matrix& m, const char* name) {
  require(m.rows() == m.cols(), ErrorCode::DimensionMismatch,
          std::string(name) + " must be square, got " +
              std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

inline void require_dims(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                         const char* name) {
  require(m.rows() == rows && m.cols() == cols, ErrorCode::DimensionMismatch,
          std::string(name) + " must be " + std::to_string(rows) + "x" +
              std::to_string(cols) + ", got " + std::to_string(m.rows()) +
              "x" + std::to_string(m.cols()));
}

// (M + M^T)/2. Covariance-style recursions drift out of symmetry by O(eps)
// per step; every symmetric quantity is passed through this on update.
inline Matrix symmetrized(const Matrix& m) {
  require_square(m, "matrix");
  return 0.5 * (m + m.transpose());
}

inline double min_eigenvalue_symmetric(const Matrix& m) {
  require_square(m, "matrix");
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// x^T M x, with M symmetrized first.
inline double quadratic_form(const Vector& x, const Matrix& m) {
  require_square(m, "matrix");
  require(x.size() == m.rows(), ErrorCode::DimensionMismatch,
          "quadratic_form: vector length " + std::to_string(x.size()) +
              " vs matrix " + std::to_string(m.rows()));
  const Matrix ms = symmetrized(m);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < ms.rows(); ++i)
    for (Eigen::Index j = 0; j < ms.cols(); ++j) acc += x(i) * ms(i, j) * x(j);
  return acc;
}

// tr(M1 * M2) without forming the product: sum of M1 .* M2^T.
inline double trace_product(const Matrix& m1, const Matrix& m2) {
  require_square(m1, "m1");
  require_square(m2, "m2");
  require(m1.rows() == m2.rows(), ErrorCode::DimensionMismatch,
          "trace_product: sizes differ");
  return m1.cwiseProduct(m2.transpose()).sum();
}

// Lower-triangular L with L L^T ~= M for symmetric PSD M. A pivot that falls
// below tolerance zeroes its column and the elimination continues, so
// rank-deficient covariances factor cleanly (the trailing residual at that
// point is at noise level for any PSD input). Pivots below -kPsdTol raise
// NotPSD.
inline Matrix cholesky_factor(const Matrix& m_in) {
  require_square(m_in, "matrix");
  const Eigen::Index n = m_in.rows();
  const Matrix m = symmetrized(m_in);
  Matrix lower = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = m(j, j) - lower.row(j).head(j).squaredNorm();
    if (d < -kPsdTol) {
      fail(ErrorCode::NotPSD, "cholesky_factor: negative pivot " +
                                  std::to_string(d) + " at column " +
                                  std::to_string(j));
    }
    if (d <= kPsdTol) {
      // Semidefinite direction: leave the column zero.
      continue;
    }
    lower(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double s = lower.row(i).head(j).dot(lower.row(j).head(j));
      lower(i, j) = (m(i, j) - s) / lower(j, j);
    }
  }
  return lower;
}

inline bool is_psd(const Matrix& m, double tol = kPsdTol) {
  return min_eigenvalue_symmetric(m) >= -tol;
}

// Scratch buffers for the covariance recursion; reusing them keeps the
// per-schedule evaluation allocation-free. Single-owner, never shared.
struct MatrixWorkspace {
  Matrix tmp_nn_a;
  Matrix tmp_nn_b;

  explicit MatrixWorkspace(Eigen::Index n = 0)
      : tmp_nn_a(Matrix::Zero(n, n)), tmp_nn_b(Matrix::Zero(n, n)) {}

  void resize(Eigen::Index n) {
    tmp_nn_a.resize(n, n);
    tmp_nn_b.resize(n, n);
  }
};

}  // namespace etlqg
