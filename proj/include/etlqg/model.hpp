#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "etlqg/errors.hpp"
#include "etlqg/linalg.hpp"

namespace etlqg {

// Plant, cost weights, noise statistics and the per-transmission penalty.
// Immutable after validate_model(); all downstream recursions assume the
// symmetric members have been symmetrized and checked.
struct SystemModel {
  Matrix A;        // n x n state transition
  Matrix B;        // n x m input map
  Matrix Q;        // n x n stage state weight, PSD
  Matrix QT;       // n x n terminal weight, PSD
  Matrix R;        // m x m input weight, PD
  Matrix Sigma_w;  // n x n process-noise covariance, PSD
  double lambda = 0.0;  // per-transmission penalty
  int T = 0;            // horizon length
  Vector x0_mean;
  Matrix x0_cov;
  std::optional<std::uint64_t> seed;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
};

// Checks dimensions, symmetrizes the symmetric inputs, and verifies the
// definiteness assumptions (Q, QT, Sigma_w, x0_cov PSD; R PD; lambda >= 0;
// T >= 1). Returns the cleaned-up model. Idempotent.
inline SystemModel validate_model(SystemModel model) {
  require_square(model.A, "A");
  const auto n = model.A.rows();
  require(n >= 1, ErrorCode::DimensionMismatch, "A must be at least 1x1");
  require(model.B.rows() == n, ErrorCode::DimensionMismatch,
          "B must have n rows");
  const auto m = model.B.cols();
  require(m >= 1, ErrorCode::DimensionMismatch, "B must have at least 1 column");
  require_dims(model.Q, n, n, "Q");
  require_dims(model.QT, n, n, "QT");
  require_dims(model.R, m, m, "R");
  require_dims(model.Sigma_w, n, n, "Sigma_w");
  require(model.x0_mean.size() == n, ErrorCode::DimensionMismatch,
          "x0_mean must have length n");
  require_dims(model.x0_cov, n, n, "x0_cov");
  require(model.lambda >= 0.0, ErrorCode::InvalidArgument, "lambda must be >= 0");
  require(model.T >= 1, ErrorCode::NonPositiveHorizon, "horizon T must be >= 1");

  model.Q = symmetrized(model.Q);
  model.QT = symmetrized(model.QT);
  model.R = symmetrized(model.R);
  model.Sigma_w = symmetrized(model.Sigma_w);
  model.x0_cov = symmetrized(model.x0_cov);

  const auto check_psd = [](const Matrix& mat, const char* name) {
    const double lo = min_eigenvalue_symmetric(mat);
    require(lo >= -kPsdTol, ErrorCode::NotPSD,
            std::string(name) + " is not PSD (min eigenvalue " +
                std::to_string(lo) + ")");
  };
  check_psd(model.Q, "Q");
  check_psd(model.QT, "QT");
  check_psd(model.Sigma_w, "Sigma_w");
  check_psd(model.x0_cov, "x0_cov");

  const double r_lo = min_eigenvalue_symmetric(model.R);
  require(r_lo > kPdTol, ErrorCode::NotPD,
          "R is not PD (min eigenvalue " + std::to_string(r_lo) + ")");
  return model;
}

namespace detail {

// Accepts a scalar, a flat array (column vector) or nested row-major arrays.
inline Matrix matrix_from_json(const nlohmann::json& j, const char* key) {
  if (j.is_number()) {
    Matrix m(1, 1);
    m(0, 0) = j.get<double>();
    return m;
  }
  require(j.is_array() && !j.empty(), ErrorCode::InvalidArgument,
          std::string("model key '") + key + "' must be a number or array");
  if (j[0].is_number()) {
    Matrix m(static_cast<Eigen::Index>(j.size()), 1);
    for (std::size_t i = 0; i < j.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = j[i].get<double>();
    return m;
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    require(j[r].is_array() && static_cast<Eigen::Index>(j[r].size()) == cols,
            ErrorCode::InvalidArgument,
            std::string("model key '") + key + "' has ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

inline Vector vector_from_json(const nlohmann::json& j, const char* key) {
  Matrix m = matrix_from_json(j, key);
  require(m.cols() == 1, ErrorCode::InvalidArgument,
          std::string("model key '") + key + "' must be a vector");
  return m.col(0);
}

}  // namespace detail

// Model JSON schema: "A", "B", "Q", "QT", "R", "Sigma_w" (row-major nested
// arrays; scalars accepted for 1x1), "lambda", "T", "x0_mean", "x0_cov",
// optional "seed". QT defaults to Q, x0_mean to zero, x0_cov to identity.
inline SystemModel model_from_json(const nlohmann::json& j) {
  for (const char* key : {"A", "B", "Q", "R", "Sigma_w", "lambda", "T"}) {
    require(j.contains(key), ErrorCode::InvalidArgument,
            std::string("model JSON missing required key '") + key + "'");
  }
  SystemModel model;
  model.A = detail::matrix_from_json(j["A"], "A");
  model.B = detail::matrix_from_json(j["B"], "B");
  model.Q = detail::matrix_from_json(j["Q"], "Q");
  model.QT = j.contains("QT") ? detail::matrix_from_json(j["QT"], "QT") : model.Q;
  model.R = detail::matrix_from_json(j["R"], "R");
  model.Sigma_w = detail::matrix_from_json(j["Sigma_w"], "Sigma_w");
  model.lambda = j["lambda"].get<double>();
  model.T = j["T"].get<int>();
  const auto n = model.A.rows();
  model.x0_mean = j.contains("x0_mean")
                      ? detail::vector_from_json(j["x0_mean"], "x0_mean")
                      : Vector(Vector::Zero(n));
  model.x0_cov = j.contains("x0_cov")
                     ? detail::matrix_from_json(j["x0_cov"], "x0_cov")
                     : Matrix(Matrix::Identity(n, n));
  if (j.contains("seed")) model.seed = j["seed"].get<std::uint64_t>();
  return validate_model(model);
}

inline nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

inline nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

inline nlohmann::json model_to_json(const SystemModel& model) {
  nlohmann::json j;
  j["A"] = matrix_to_json(model.A);
  j["B"] = matrix_to_json(model.B);
  j["Q"] = matrix_to_json(model.Q);
  j["QT"] = matrix_to_json(model.QT);
  j["R"] = matrix_to_json(model.R);
  j["Sigma_w"] = matrix_to_json(model.Sigma_w);
  j["lambda"] = model.lambda;
  j["T"] = model.T;
  j["x0_mean"] = vector_to_json(model.x0_mean);
  j["x0_cov"] = matrix_to_json(model.x0_cov);
  if (model.seed) j["seed"] = *model.seed;
  return j;
}

inline SystemModel load_model(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoError, "cannot open model file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::IoError, "cannot parse model file " + path + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace etlqg
