// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The taidlab Authors

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "taidlab/error.hpp"
#include "taidlab/models.hpp"
#include "taidlab/objectives.hpp"
#include "taidlab/rng.hpp"
#include "taidlab/trainer.hpp"

namespace taidlab {
namespace {

TabularModel random_table(std::size_t vocab, int order, std::uint64_t seed, double scale = 1.0) {
  TabularModel model(vocab, order, 0);
  Rng rng(seed);
  for (double& x : model.logits().data()) x = scale * rng.normal();
  return model;
}

Corpus small_corpus(std::size_t vocab, int order, std::uint64_t seed) {
  return generate_corpus(seed, vocab, order, 1.0, 400, 2);
}

TrainConfig gd(TrainObjective objective, double lr, std::int64_t steps, std::size_t batch = 16) {
  TrainConfig c;
  c.objective = objective;
  c.learning_rate = lr;
  c.steps = steps;
  c.batch_size = batch;
  c.seed = 3;
  return c;
}

TEST(Train, ZeroStepsReturnsStudentUnchanged) {
  const TabularModel teacher = random_table(5, 1, 1);
  const TabularModel student = random_table(5, 1, 2);
  const TrainResult r = train(teacher, student, small_corpus(5, 1, 3), gd(TrainObjective::kKl, 0.5, 0));
  EXPECT_TRUE(r.records.empty());
  const auto& out = std::get<TabularModel>(r.student);
  for (std::size_t i = 0; i < out.logits().data().size(); ++i) {
    EXPECT_EQ(out.logits().data()[i], student.logits().data()[i]);
  }
}

TEST(Train, StudentEqualToTeacherIsFixedPoint) {
  const TabularModel teacher = random_table(6, 1, 4);
  const TrainResult r = train(teacher, teacher, small_corpus(6, 1, 5), gd(TrainObjective::kKl, 0.5, 1));
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_NEAR(r.records[0].objective, 0.0, 1e-14);
  EXPECT_NEAR(r.records[0].grad_norm, 0.0, 1e-14);
}

TEST(Train, SingleRowKlConverges) {
  const TabularModel teacher = random_table(4, 0, 6, 2.0);
  const TabularModel student(4, 0, 0);
  const TrainResult r = train(teacher, student, small_corpus(4, 0, 7), gd(TrainObjective::kKl, 0.5, 500));
  const std::vector<std::span<const Token>> ctx{std::span<const Token>{}};
  const EvalSummary e = evaluate(r.student, teacher, ctx);
  EXPECT_LT(e.mean_kl, 1e-6);
  EXPECT_LT(r.records.back().kl_to_teacher, 1e-6);
}

// With an order-0 student every batch position shares row 0, so the row
// gradient is the batch gradient summed over positions.
TEST(Train, OneStepMovesLogitsByNegativeGradient) {
  const TabularModel teacher = random_table(5, 0, 8);
  const TabularModel student = random_table(5, 0, 9);
  const Corpus corpus = small_corpus(5, 0, 10);
  for (TrainObjective obj : {TrainObjective::kKl, TrainObjective::kRkl, TrainObjective::kGjsd,
                             TrainObjective::kSkewRkl, TrainObjective::kTaid}) {
    TrainConfig c = gd(obj, 0.3, 1, 8);
    c.scheduler.t_start = 0.35;
    const TrainResult r = train(teacher, student, corpus, c);

    Matrix s(8, 5);
    Matrix t(8, 5);
    for (std::size_t i = 0; i < 8; ++i) {
      for (std::size_t j = 0; j < 5; ++j) {
        s(i, j) = student.logits()(0, j);
        t(i, j) = teacher.logits()(0, j);
      }
    }
    const double param = obj == TrainObjective::kTaid ? 0.35 : kDefaultMixtureLambda;
    const Objective kernel = *parse_objective(train_objective_name(obj));
    const ObjectiveValue expected = evaluate_objective(kernel, TokenBatch(s, t), param);
    EXPECT_NEAR(r.records[0].objective, expected.value, 1e-15);
    const auto& out = std::get<TabularModel>(r.student);
    for (std::size_t j = 0; j < 5; ++j) {
      double g = 0.0;
      for (std::size_t i = 0; i < 8; ++i) g += expected.grad(i, j);
      EXPECT_NEAR(out.logits()(0, j), student.logits()(0, j) - 0.3 * g, 1e-14)
          << train_objective_name(obj);
    }
  }
}

TEST(Train, DeterministicRecords) {
  const TabularModel teacher = random_table(6, 1, 11);
  const LinearModel student(6, LinearFeatureMap{1, 3, 5});
  const Corpus corpus = small_corpus(6, 1, 12);
  TrainConfig c = gd(TrainObjective::kTaid, 0.5, 60);
  const TrainResult a = train(teacher, student, corpus, c);
  const TrainResult b = train(teacher, student, corpus, c);
  EXPECT_EQ(a.records, b.records);
  c.seed = 4;
  const TrainResult d = train(teacher, student, corpus, c);
  EXPECT_NE(a.records, d.records);
}

TEST(Train, TaidTraceMonotoneAndEndsAtOne) {
  const TabularModel teacher = random_table(8, 1, 13, 2.0);
  const TabularModel student(8, 1, 0);
  const Corpus corpus = small_corpus(8, 1, 14);
  for (TrainObjective obj : {TrainObjective::kTaid, TrainObjective::kTaidLinear}) {
    TrainConfig c = gd(obj, 0.5, 200);
    c.scheduler.t_start = 0.1;
    c.scheduler.alpha = 5e-3;
    const TrainResult r = train(teacher, student, corpus, c);
    ASSERT_EQ(r.records.size(), 200u);
    EXPECT_EQ(r.records.front().t, 0.1);
    for (std::size_t i = 1; i < r.records.size(); ++i) {
      EXPECT_GE(r.records[i].t, r.records[i - 1].t);
    }
    EXPECT_EQ(r.records.back().t, 1.0);
  }
}

TEST(Train, NonTaidRecordsFullTarget) {
  const TabularModel teacher = random_table(4, 0, 15);
  const TrainResult r =
      train(teacher, TabularModel(4, 0, 0), small_corpus(4, 0, 16), gd(TrainObjective::kTvd, 0.5, 5));
  for (const auto& rec : r.records) EXPECT_EQ(rec.t, 1.0);
}

TEST(Train, AdamWReducesKl) {
  const TabularModel teacher = random_table(6, 1, 17, 2.0);
  TrainConfig c = gd(TrainObjective::kKl, 0.05, 300);
  c.optimizer = OptimizerKind::kAdamW;
  const TrainResult r = train(teacher, TabularModel(6, 1, 0), small_corpus(6, 1, 18), c);
  EXPECT_LT(r.records.back().kl_to_teacher, 0.2 * r.records.front().kl_to_teacher);
}

TEST(Train, DivergenceReportsStep) {
  TabularModel teacher(4, 0, 0);
  teacher.logits()(0, 0) = 10.0;
  // Logits near the bottom of the double range; one large step overflows them.
  TabularModel student(4, 0, 0);
  for (double& x : student.logits().data()) x = -1.7e308;
  try {
    train(teacher, student, small_corpus(4, 0, 20), gd(TrainObjective::kKl, 1e308, 10));
    FAIL() << "expected divergence";
  } catch (const TrainingDiverged& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRunFailed);
    EXPECT_EQ(e.step(), 1);
    EXPECT_EQ(e.partial_records().size(), 1u);
  }
}

TEST(Train, RejectsMismatchedShapesAndBadConfig) {
  const TabularModel teacher = random_table(4, 0, 21);
  const Corpus corpus = small_corpus(4, 0, 22);
  EXPECT_THROW(train(teacher, TabularModel(5, 0, 0), corpus, gd(TrainObjective::kKl, 0.1, 1)), Error);
  EXPECT_THROW(train(teacher, TabularModel(4, 0, 0), corpus, gd(TrainObjective::kKl, 0.0, 1)), Error);
  EXPECT_THROW(train(teacher, TabularModel(4, 0, 0), corpus, gd(TrainObjective::kKl, 0.1, 1, 0)), Error);
}

TEST(Evaluate, StudentEqualReferenceIsZero) {
  const TabularModel ref = random_table(7, 1, 23);
  const Corpus corpus = small_corpus(7, 1, 24);
  const auto positions = sample_positions(corpus, 100, 1);
  const auto hist = histories_at(corpus, positions);
  const EvalSummary e = evaluate(ref, ref, hist);
  EXPECT_NEAR(e.mean_kl, 0.0, 1e-15);
  EXPECT_NEAR(e.mean_rkl, 0.0, 1e-15);
  EXPECT_NEAR(e.mean_tvd, 0.0, 1e-15);
}

TEST(Evaluate, UniformStudentAgainstNearOneHot) {
  TabularModel ref(4, 0, 0);
  for (std::size_t r = 0; r < ref.logits().rows(); ++r) {
    ref.logits()(r, 0) = 0.0;
    for (std::size_t j = 1; j < 4; ++j) ref.logits()(r, j) = -200.0;
  }
  const std::vector<std::span<const Token>> ctx{std::span<const Token>{}};
  const EvalSummary e = evaluate(TabularModel(4, 0, 0), ref, ctx);
  // Reference mass below the floor counts as 1e-12.
  EXPECT_NEAR(e.mean_kl, std::log(4.0), 1e-12);
  EXPECT_NEAR(e.mean_rkl, 0.25 * std::log(0.25) + 0.75 * std::log(0.25 / 1e-12), 1e-10);
  EXPECT_NEAR(e.mean_tvd, 0.75, 1e-15);
}

TEST(Evaluate, TvdInRangeAndEmptyRejected) {
  const Corpus corpus = small_corpus(9, 1, 25);
  const auto hist = histories_at(corpus, sample_positions(corpus, 200, 2));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const EvalSummary e = evaluate(random_table(9, 1, seed, 4.0), random_table(9, 1, seed + 100, 4.0), hist);
    EXPECT_GE(e.mean_tvd, 0.0);
    EXPECT_LE(e.mean_tvd, 1.0);
    EXPECT_GE(e.mean_kl, 0.0);
  }
  EXPECT_THROW(evaluate(TabularModel(9, 1, 0), TabularModel(9, 1, 0), {}), Error);
}

TEST(ObjectiveNames, RoundTrip) {
  for (auto name : {"KL", "RKL", "TVD", "GJSD", "SKL", "SRKL", "TAID", "TAID_LINEAR"}) {
    const auto o = parse_train_objective(name);
    ASSERT_TRUE(o.has_value());
    EXPECT_EQ(train_objective_name(*o), name);
  }
  EXPECT_FALSE(parse_train_objective("kl").has_value());
}

}  // namespace
}  // namespace taidlab
