#include "etlqg/model.hpp"

#include <gtest/gtest.h>

#include "tests/helpers.hpp"

namespace etlqg {
namespace {

TEST(ValidateModel, AcceptsCaseStudyShape) {
  SystemModel m;
  m.A = Matrix::Identity(2, 2);
  m.B = Matrix(2, 1);
  m.B << 0, 1;
  m.Q = Matrix::Identity(2, 2);
  m.QT = m.Q;
  m.R = Matrix::Identity(1, 1);
  m.Sigma_w = 0.5 * Matrix::Identity(2, 2);
  m.lambda = 100.0;
  m.T = 25;
  m.x0_mean = Vector::Zero(2);
  m.x0_cov = Matrix::Identity(2, 2);
  EXPECT_NO_THROW(validate_model(m));
}

TEST(ValidateModel, RejectsSingularR) {
  SystemModel m = test::scalar_example_model();
  m.R = Matrix::Zero(1, 1);
  try {
    validate_model(m);
    FAIL() << "expected NotPD";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotPD);
  }
}

TEST(ValidateModel, RejectsIndefiniteQ) {
  SystemModel m;
  m.A = Matrix::Identity(2, 2);
  m.B = Matrix::Ones(2, 1);
  m.Q = Matrix::Identity(2, 2);
  m.Q(1, 1) = -0.5;
  m.QT = Matrix::Identity(2, 2);
  m.R = Matrix::Identity(1, 1);
  m.Sigma_w = Matrix::Identity(2, 2);
  m.lambda = 1.0;
  m.T = 3;
  m.x0_mean = Vector::Zero(2);
  m.x0_cov = Matrix::Identity(2, 2);
  try {
    validate_model(m);
    FAIL() << "expected NotPSD";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotPSD);
    EXPECT_NE(std::string(e.what()).find("Q"), std::string::npos);
  }
}

TEST(ValidateModel, RejectsNonPositiveHorizon) {
  SystemModel m = test::scalar_example_model();
  m.T = 0;
  try {
    validate_model(m);
    FAIL() << "expected NonPositiveHorizon";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveHorizon);
  }
}

TEST(ValidateModel, RejectsDimensionMismatch) {
  SystemModel m = test::scalar_example_model();
  m.B = Matrix::Ones(2, 1);
  try {
    validate_model(m);
    FAIL() << "expected DimensionMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(ValidateModel, Idempotent) {
  SystemModel m = test::scalar_example_model();
  m.Q(0, 0) = 1.0;
  const SystemModel once = validate_model(m);
  const SystemModel twice = validate_model(once);
  EXPECT_TRUE(once.Q.isApprox(twice.Q, 0.0));
  EXPECT_TRUE(once.Sigma_w.isApprox(twice.Sigma_w, 0.0));
  EXPECT_EQ(once.T, twice.T);
}

TEST(ValidateModel, SymmetrizesInputs) {
  SystemModel m;
  m.A = Matrix::Identity(2, 2);
  m.B = Matrix::Ones(2, 1);
  m.Q = Matrix(2, 2);
  m.Q << 1, 0.2, 0.0, 1;  // asymmetric on purpose
  m.QT = Matrix::Identity(2, 2);
  m.R = Matrix::Identity(1, 1);
  m.Sigma_w = Matrix::Identity(2, 2);
  m.lambda = 0.0;
  m.T = 2;
  m.x0_mean = Vector::Zero(2);
  m.x0_cov = Matrix::Identity(2, 2);
  const SystemModel v = validate_model(m);
  EXPECT_DOUBLE_EQ(v.Q(0, 1), 0.1);
  EXPECT_DOUBLE_EQ(v.Q(1, 0), 0.1);
}

TEST(ModelJson, FullRoundTrip) {
  const SystemModel m = test::double_integrator_model();
  const SystemModel loaded = model_from_json(model_to_json(m));
  EXPECT_TRUE(loaded.A.isApprox(m.A, 0.0));
  EXPECT_TRUE(loaded.B.isApprox(m.B, 0.0));
  EXPECT_TRUE(loaded.Sigma_w.isApprox(m.Sigma_w, 0.0));
  EXPECT_EQ(loaded.T, m.T);
  EXPECT_DOUBLE_EQ(loaded.lambda, m.lambda);
}

TEST(ModelJson, DefaultsApplied) {
  nlohmann::json j;
  j["A"] = {{1.0, 0.1}, {0.0, 1.0}};
  j["B"] = {{0.005}, {0.1}};
  j["Q"] = {{1.0, 0.0}, {0.0, 1.0}};
  j["R"] = 1.0;
  j["Sigma_w"] = {{0.5, 0.0}, {0.0, 0.5}};
  j["lambda"] = 100.0;
  j["T"] = 25;
  const SystemModel m = model_from_json(j);
  EXPECT_TRUE(m.QT.isApprox(m.Q, 0.0));
  EXPECT_EQ(m.x0_mean.norm(), 0.0);
  EXPECT_TRUE(m.x0_cov.isApprox(Matrix::Identity(2, 2), 0.0));
  EXPECT_FALSE(m.seed.has_value());
}

TEST(ModelJson, ScalarEntriesAccepted) {
  nlohmann::json j;
  j["A"] = 1.0;
  j["B"] = 1.0;
  j["Q"] = 1.0;
  j["R"] = 1.0;
  j["Sigma_w"] = 0.5;
  j["lambda"] = 0.3;
  j["T"] = 2;
  j["seed"] = 42;
  const SystemModel m = model_from_json(j);
  EXPECT_EQ(m.n(), 1);
  EXPECT_EQ(m.m(), 1);
  EXPECT_EQ(m.seed.value(), 42u);
}

TEST(ModelJson, MissingKeyRejected) {
  nlohmann::json j;
  j["A"] = 1.0;
  try {
    model_from_json(j);
    FAIL() << "expected InvalidArgument";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
}

}  // namespace
}  // namespace etlqg
