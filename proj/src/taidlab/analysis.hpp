// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The taidlab Authors

#pragma once

#include <cstddef>
#include <span>

#include "taidlab/models.hpp"

namespace taidlab {

/// Student probability mass on the teacher's top `head_k` tokens and on the
/// teacher-ranked percentile band [tail_lo_pct, tail_hi_pct).
struct MassReport {
  double head_mass = 0.0;
  double tail_mass = 0.0;
  std::size_t head_k = 10;
  double tail_lo_pct = 80.0;
  double tail_hi_pct = 100.0;
};

struct DistStats {
  double entropy = 0.0;  // nats
  double target_prob = 0.0;
};

/// Tokens are ranked by descending teacher probability, ties by ascending index.
/// The tail covers ranks [ceil(lo/100 * V), ceil(hi/100 * V)).
MassReport mass_report(std::span<const double> student, std::span<const double> teacher,
                       std::size_t head_k = 10, double tail_lo_pct = 80.0,
                       double tail_hi_pct = 100.0);

DistStats dist_stats(std::span<const double> dist, std::size_t target_index);

/// Arithmetic mean of mass_report over contexts, student vs teacher.
MassReport mean_mass_report(const StudentModel& student, const TabularModel& teacher,
                            std::span<const std::span<const Token>> histories,
                            std::size_t head_k = 10, double tail_lo_pct = 80.0,
                            double tail_hi_pct = 100.0);

/// Mean entropy of the student and mean student probability of the observed
/// next token over `positions`.
DistStats mean_dist_stats(const StudentModel& student, const Corpus& corpus,
                          std::span<const Position> positions);

}  // namespace taidlab
