// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The taidlab Authors

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "taidlab/analysis.hpp"
#include "taidlab/error.hpp"
#include "taidlab/rng.hpp"

namespace taidlab {
namespace {

std::vector<double> random_simplex(Rng& rng, std::size_t n) {
  std::vector<double> p(n);
  for (double& x : p) x = std::exp(2.0 * rng.normal());
  const double z = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& x : p) x /= z;
  return p;
}

// Brute-force oracle: stable sort by teacher probability, then sum bands.
std::pair<double, double> oracle_mass(const std::vector<double>& student,
                                      const std::vector<double>& teacher, std::size_t k) {
  std::vector<std::size_t> order(teacher.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return teacher[a] > teacher[b]; });
  const std::size_t v = teacher.size();
  const std::size_t tail = static_cast<std::size_t>(std::ceil(0.8 * static_cast<double>(v)));
  double head = 0.0;
  double low = 0.0;
  for (std::size_t r = 0; r < v; ++r) {
    if (r < k) head += student[order[r]];
    if (r >= tail) low += student[order[r]];
  }
  return {head, low};
}

TEST(MassReport, UniformStudent) {
  const std::vector<double> u(100, 0.01);
  std::vector<double> teacher(100);
  for (std::size_t i = 0; i < 100; ++i) teacher[i] = (100.0 - static_cast<double>(i)) / 5050.0;
  const MassReport r = mass_report(u, teacher, 10);
  EXPECT_NEAR(r.head_mass, 0.10, 1e-12);
  EXPECT_NEAR(r.tail_mass, 0.20, 1e-12);
}

TEST(MassReport, OneHotTeacherAndStudent) {
  std::vector<double> hot(20, 0.0);
  hot[7] = 1.0;
  const MassReport r = mass_report(hot, hot, 1);
  EXPECT_EQ(r.head_mass, 1.0);
  EXPECT_EQ(r.tail_mass, 0.0);
}

TEST(MassReport, TiesBrokenByIndex) {
  // Uniform teacher: ranks follow token index, so the tail is the last 20%.
  const std::vector<double> teacher(10, 0.1);
  std::vector<double> student(10, 0.0);
  student[9] = 0.5;
  student[0] = 0.5;
  const MassReport r = mass_report(student, teacher, 1);
  EXPECT_EQ(r.head_mass, 0.5);
  EXPECT_EQ(r.tail_mass, 0.5);
}

TEST(MassReport, MatchesOracle) {
  Rng rng(1);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t v = 12 + rng.below(60);
    const auto s = random_simplex(rng, v);
    const auto t = random_simplex(rng, v);
    const std::size_t k = 1 + rng.below(v / 2);
    const MassReport r = mass_report(s, t, k);
    const auto [head, tail] = oracle_mass(s, t, k);
    EXPECT_NEAR(r.head_mass, head, 1e-14);
    EXPECT_NEAR(r.tail_mass, tail, 1e-14);
  }
}

TEST(MassReport, InvariantToJointPermutation) {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t v = 30;
    const auto s = random_simplex(rng, v);
    const auto t = random_simplex(rng, v);
    std::vector<std::size_t> perm(v);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = v - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    std::vector<double> sp(v);
    std::vector<double> tp(v);
    for (std::size_t i = 0; i < v; ++i) {
      sp[i] = s[perm[i]];
      tp[i] = t[perm[i]];
    }
    const MassReport a = mass_report(s, t, 5);
    const MassReport b = mass_report(sp, tp, 5);
    EXPECT_NEAR(a.head_mass, b.head_mass, 1e-15);
    EXPECT_NEAR(a.tail_mass, b.tail_mass, 1e-15);
  }
}

TEST(MassReport, RangeErrors) {
  const std::vector<double> u(10, 0.1);
  auto expect_code = [](ErrorCode code, auto&& fn) {
    try {
      fn();
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), code);
    }
  };
  expect_code(ErrorCode::kRange, [&] { mass_report(u, u, 10); });
  expect_code(ErrorCode::kRange, [&] { mass_report(u, u, 9); });  // head overlaps the tail
  expect_code(ErrorCode::kRange, [&] { mass_report(u, u, 2, 90.0, 80.0); });
  expect_code(ErrorCode::kDimension, [&] { mass_report(std::vector<double>(9, 1.0 / 9), u, 2); });
}

TEST(DistStats, Examples) {
  const std::vector<double> u(4, 0.25);
  EXPECT_NEAR(dist_stats(u, 2).entropy, std::log(4.0), 1e-15);
  EXPECT_NEAR(dist_stats(u, 2).target_prob, 0.25, 1e-15);

  const std::vector<double> hot{0.0, 1.0, 0.0};
  EXPECT_EQ(dist_stats(hot, 1).entropy, 0.0);
  EXPECT_EQ(dist_stats(hot, 1).target_prob, 1.0);

  const std::vector<double> p{0.5, 0.25, 0.25};
  EXPECT_NEAR(dist_stats(p, 0).entropy, 1.5 * std::log(2.0), 1e-15);
  EXPECT_NEAR(dist_stats(p, 0).entropy, 1.039721, 1e-6);

  try {
    dist_stats(p, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRange);
  }
}

TEST(MeanReports, AverageOverContexts) {
  // Order-1 teacher whose rows differ; a zero student is uniform everywhere.
  TabularModel teacher(10, 1, 0);
  Rng rng(3);
  for (double& x : teacher.logits().data()) x = 3.0 * rng.normal();
  const StudentModel student = TabularModel(10, 1, 0);
  const Corpus corpus = generate_corpus(4, 10, 1, 1.0, 200, 1);
  const auto positions = all_positions(corpus);
  std::vector<std::span<const Token>> hist;
  for (const auto& pos : positions) hist.push_back(history_of(corpus, pos));
  const MassReport r = mean_mass_report(student, teacher, hist, 3);
  EXPECT_NEAR(r.head_mass, 0.3, 1e-12);
  EXPECT_NEAR(r.tail_mass, 0.2, 1e-12);

  const DistStats d = mean_dist_stats(student, corpus, positions);
  EXPECT_NEAR(d.entropy, std::log(10.0), 1e-12);
  EXPECT_NEAR(d.target_prob, 0.1, 1e-12);
  EXPECT_THROW(mean_mass_report(student, teacher, {}, 3), Error);
  EXPECT_THROW(mean_dist_stats(student, corpus, {}), Error);
}

}  // namespace
}  // namespace taidlab
