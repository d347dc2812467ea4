// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The taidlab Authors

#include "taidlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "taidlab/error.hpp"

namespace taidlab {

namespace {

std::size_t percentile_rank(double pct, std::size_t vocab) {
  // Integer-safe ceil(pct / 100 * V) for the common whole-percent case.
  const double exact = pct * static_cast<double>(vocab) / 100.0;
  const double rounded = std::round(exact);
  const double value = std::abs(exact - rounded) < 1e-9 ? rounded : std::ceil(exact);
  return std::min(vocab, static_cast<std::size_t>(value));
}

}  // namespace

MassReport mass_report(std::span<const double> student, std::span<const double> teacher,
                       std::size_t head_k, double tail_lo_pct, double tail_hi_pct) {
  const std::size_t vocab = teacher.size();
  require(student.size() == vocab, ErrorCode::kDimension,
          "student and teacher distributions differ in length");
  require(head_k < vocab, ErrorCode::kRange,
          "head_k " + std::to_string(head_k) + " must be < V = " + std::to_string(vocab));
  require(tail_lo_pct >= 0.0 && tail_lo_pct < tail_hi_pct && tail_hi_pct <= 100.0,
          ErrorCode::kRange, "tail percentiles must satisfy 0 <= lo < hi <= 100");
  const std::size_t tail_begin = percentile_rank(tail_lo_pct, vocab);
  const std::size_t tail_end = percentile_rank(tail_hi_pct, vocab);
  require(head_k <= tail_begin, ErrorCode::kRange,
          "head ranks overlap the tail band; lower head_k or raise the tail percentile");

  std::vector<std::size_t> rank(vocab);
  std::iota(rank.begin(), rank.end(), 0);
  std::stable_sort(rank.begin(), rank.end(),
                   [&](std::size_t a, std::size_t b) { return teacher[a] > teacher[b]; });
  MassReport out;
  out.head_k = head_k;
  out.tail_lo_pct = tail_lo_pct;
  out.tail_hi_pct = tail_hi_pct;
  for (std::size_t r = 0; r < head_k; ++r) out.head_mass += student[rank[r]];
  for (std::size_t r = tail_begin; r < tail_end; ++r) out.tail_mass += student[rank[r]];
  return out;
}

DistStats dist_stats(std::span<const double> dist, std::size_t target_index) {
  require(target_index < dist.size(), ErrorCode::kRange,
          "target index " + std::to_string(target_index) + " outside distribution of size " +
              std::to_string(dist.size()));
  DistStats out;
  for (double p : dist) {
    if (p > 0.0) out.entropy -= p * std::log(p);
  }
  out.entropy = std::max(0.0, out.entropy);
  out.target_prob = dist[target_index];
  return out;
}

MassReport mean_mass_report(const StudentModel& student, const TabularModel& teacher,
                            std::span<const std::span<const Token>> histories, std::size_t head_k,
                            double tail_lo_pct, double tail_hi_pct) {
  require(!histories.empty(), ErrorCode::kInvalidInput, "mass report needs at least one context");
  const std::size_t vocab = teacher.vocab();
  require(vocab_of(student) == vocab, ErrorCode::kDimension, "student and teacher vocabularies differ");
  std::vector<double> logits(vocab), q(vocab), p(vocab);
  MassReport total;
  for (const auto& history : histories) {
    forward_into(student, history, logits);
    softmax_into(logits, q);
    softmax_into(teacher.row_for(history), p);
    const MassReport one = mass_report(q, p, head_k, tail_lo_pct, tail_hi_pct);
    total.head_mass += one.head_mass;
    total.tail_mass += one.tail_mass;
  }
  const double n = static_cast<double>(histories.size());
  total.head_mass /= n;
  total.tail_mass /= n;
  total.head_k = head_k;
  total.tail_lo_pct = tail_lo_pct;
  total.tail_hi_pct = tail_hi_pct;
  return total;
}

DistStats mean_dist_stats(const StudentModel& student, const Corpus& corpus,
                          std::span<const Position> positions) {
  require(!positions.empty(), ErrorCode::kInvalidInput, "statistics need at least one position");
  const std::size_t vocab = vocab_of(student);
  std::vector<double> logits(vocab), q(vocab);
  DistStats total;
  for (Position pos : positions) {
    forward_into(student, history_of(corpus, pos), logits);
    softmax_into(logits, q);
    const DistStats one = dist_stats(q, corpus.sequences[pos.sequence][pos.position]);
    total.entropy += one.entropy;
    total.target_prob += one.target_prob;
  }
  const double n = static_cast<double>(positions.size());
  total.entropy /= n;
  total.target_prob /= n;
  return total;
}

}  // namespace taidlab
