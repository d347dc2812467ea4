// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The taidlab Authors

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "taidlab/error.hpp"
#include "taidlab/prob.hpp"

namespace taidlab {
namespace {

std::vector<double> as_vec(std::span<const double> s) { return {s.begin(), s.end()}; }

TEST(Softmax, UniformForEqualLogits) {
  const ProbVector p = softmax(LogitVector({0, 0, 0}));
  for (double x : p.probs()) EXPECT_NEAR(x, 1.0 / 3.0, 1e-15);
}

TEST(Softmax, TwoTokenValue) {
  const ProbVector p = softmax(LogitVector({2, 0}));
  EXPECT_NEAR(p.probs()[0], 0.880797, 1e-6);
  EXPECT_NEAR(p.probs()[1], 0.119203, 1e-6);
  EXPECT_NEAR(p.probs()[0], std::exp(2.0) / (std::exp(2.0) + 1.0), 1e-15);
}

TEST(Softmax, LargeLogitsStayFinite) {
  const ProbVector p = softmax(LogitVector({1000, 0}));
  EXPECT_EQ(p.probs()[0], 1.0);
  EXPECT_EQ(p.probs()[1], 0.0);
}

TEST(Softmax, RejectsNonFiniteAndShortInput) {
  EXPECT_THROW(LogitVector({1.0, NAN}), Error);
  EXPECT_THROW(LogitVector({1.0, INFINITY}), Error);
  EXPECT_THROW(LogitVector({1.0}), Error);
  try {
    LogitVector({NAN, 0});
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidInput);
  }
}

TEST(LogSoftmax, Examples) {
  auto a = log_softmax(LogitVector({0, 0}));
  EXPECT_NEAR(a[0], -std::log(2.0), 1e-15);
  EXPECT_NEAR(a[1], -std::log(2.0), 1e-15);
  auto b = log_softmax(LogitVector({1, 0}));
  const double l = std::log1p(std::exp(-1.0));
  EXPECT_NEAR(b[0], -l, 1e-15);
  EXPECT_NEAR(b[1], -1.0 - l, 1e-15);
  for (double x : log_softmax(LogitVector({5, 5, 5, 5}))) EXPECT_NEAR(x, -std::log(4.0), 1e-15);
}

TEST(Interpolate, Endpoints) {
  const auto s = LogitVector({1, -1});
  const auto t = LogitVector({9, 9});
  EXPECT_NEAR(interpolate_logits(s, t, InterpolationParam(0)).probs()[0], 0.880797, 1e-6);
  EXPECT_NEAR(interpolate_logits(LogitVector({9, 9}), LogitVector({2, 0}), InterpolationParam(1))
                  .probs()[0],
              0.880797, 1e-6);
}

TEST(Interpolate, Midpoint) {
  const ProbVector p =
      interpolate_logits(LogitVector({0, 0}), LogitVector({2, 0}), InterpolationParam(0.5));
  EXPECT_NEAR(p.probs()[0], 0.731059, 1e-6);
  EXPECT_NEAR(p.probs()[1], 0.268941, 1e-6);
}

TEST(Interpolate, Errors) {
  try {
    InterpolationParam(1.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidParameter);
  }
  EXPECT_THROW(InterpolationParam(-0.01), Error);
  EXPECT_THROW(InterpolationParam(NAN), Error);
  try {
    interpolate_logits(LogitVector({0, 0}), LogitVector({0, 0, 0}), InterpolationParam(0.5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimension);
  }
}

TEST(ProbVector, ValidatesSimplex) {
  EXPECT_NO_THROW(ProbVector::from_probs({0.25, 0.75}));
  EXPECT_THROW(ProbVector::from_probs({0.5, 0.6}), Error);
  EXPECT_THROW(ProbVector::from_probs({-0.1, 1.1}), Error);
}

// Properties over random logits.
class ProbProperties : public ::testing::Test {
 protected:
  std::mt19937_64 gen{2024};
  std::uniform_int_distribution<int> vocab{2, 64};
  std::normal_distribution<double> logit{0.0, 10.0};

  std::vector<double> draw(int v) {
    std::vector<double> out(static_cast<std::size_t>(v));
    for (double& x : out) x = logit(gen);
    return out;
  }
};

TEST_F(ProbProperties, SimplexAndShiftInvariance) {
  for (int trial = 0; trial < 1000; ++trial) {
    const auto l = draw(vocab(gen));
    const auto p = as_vec(softmax(LogitVector(l)).probs());
    double sum = 0;
    for (double x : p) {
      EXPECT_GE(x, 0.0);
      sum += x;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    auto shifted = l;
    const double c = logit(gen) * 10;
    for (double& x : shifted) x += c;
    const auto ps = as_vec(softmax(LogitVector(shifted)).probs());
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(p[i], ps[i], 1e-12);
  }
}

TEST_F(ProbProperties, MatchesOracleAndLogSoftmaxConsistent) {
  for (int trial = 0; trial < 500; ++trial) {
    const auto l = draw(vocab(gen));
    const auto p = as_vec(softmax(LogitVector(l)).probs());
    const auto lp = log_softmax(LogitVector(l));
    const auto ref = oracle::probs(l);
    for (std::size_t i = 0; i < p.size(); ++i) {
      EXPECT_NEAR(p[i], static_cast<double>(ref[i]), 1e-14);
      if (ref[i] > 1e-300L) EXPECT_NEAR(lp[i], static_cast<double>(std::log(ref[i])), 1e-10);
    }
  }
}

TEST_F(ProbProperties, InterpolationEndpoints) {
  for (int trial = 0; trial < 500; ++trial) {
    const int v = vocab(gen);
    const LogitVector s(draw(v)), t(draw(v));
    const auto p0 = as_vec(interpolate_logits(s, t, InterpolationParam(0)).probs());
    const auto p1 = as_vec(interpolate_logits(s, t, InterpolationParam(1)).probs());
    const auto ps = as_vec(softmax(s).probs());
    const auto pt = as_vec(softmax(t).probs());
    for (std::size_t i = 0; i < p0.size(); ++i) {
      EXPECT_NEAR(p0[i], ps[i], 1e-12);
      EXPECT_NEAR(p1[i], pt[i], 1e-12);
    }
  }
}

TEST(Sigmoid, StableAtExtremes) {
  EXPECT_DOUBLE_EQ(sigmoid(0.0), 0.5);
  EXPECT_EQ(sigmoid(-1000.0), 0.0);
  EXPECT_EQ(sigmoid(1000.0), 1.0);
  EXPECT_NEAR(sigmoid(0.005), 1.0 / (1.0 + std::exp(-0.005)), 1e-16);
}

}  // namespace
}  // namespace taidlab
