// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The taidlab Authors

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "taidlab/matrix.hpp"

namespace taidlab {

struct SymmetricEigen {
  Matrix vectors;              // column j is the eigenvector of values[j]
  std::vector<double> values;  // ascending
  int sweeps = 0;
};

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm falls below
/// `relative_tolerance * ||A||_F`.
SymmetricEigen jacobi_eigen(const Matrix& symmetric, double relative_tolerance = 1e-12);

/// Spectrum of a Gram matrix written G = V^T D V (rows of V are eigenvectors).
class GramSpectrum {
 public:
  GramSpectrum(Matrix v, std::vector<double> d);

  std::size_t size() const noexcept { return d_.size(); }
  const Matrix& v() const noexcept { return v_; }
  std::span<const double> d() const noexcept { return d_; }
  double d_min() const noexcept { return d_min_; }
  double d_max() const noexcept { return d_max_; }
  double kappa() const noexcept { return d_max_ / d_min_; }

  Matrix reconstruct() const;

 private:
  Matrix v_;
  std::vector<double> d_;
  double d_min_;
  double d_max_;
};

enum class KernelKind { kRbf, kLinear, kExplicit };

struct Kernel {
  KernelKind kind = KernelKind::kRbf;
  double bandwidth = 1.0;  // RBF: exp(-|x - x'|^2 / (2 bandwidth^2))
  Matrix gram;             // kExplicit: the Gram matrix itself

  static Kernel rbf(double bandwidth) { return {KernelKind::kRbf, bandwidth, {}}; }
  static Kernel linear() { return {KernelKind::kLinear, 1.0, {}}; }
  static Kernel explicit_gram(Matrix g) { return {KernelKind::kExplicit, 1.0, std::move(g)}; }
};

/// Decomposes a symmetric positive definite G. Fails with kInvalidKernel when
/// G is asymmetric or its smallest eigenvalue is <= 1e-12 times the largest.
GramSpectrum spectrum_from_gram(const Matrix& gram);

/// G_ij = g(x_i, x_j) / N for RBF and linear kernels; kExplicit uses the
/// supplied matrix as G and ignores `points`.
GramSpectrum gram_from_kernel(std::span<const std::vector<double>> points, const Kernel& kernel);

enum class AlphaMode { kDMin, kDMax, kFixed };
enum class SimMode { kTaid, kSelfDistill };

std::string_view alpha_mode_name(AlphaMode mode);
std::string_view sim_mode_name(SimMode mode);
std::optional<AlphaMode> parse_alpha_mode(std::string_view name);
std::optional<SimMode> parse_sim_mode(std::string_view name);

struct SimConfig {
  std::vector<double> y0;
  double epsilon = 0.1;
  int horizon = 10;  // T
  AlphaMode alpha_mode = AlphaMode::kDMin;
  double alpha_value = 0.0;  // kFixed only
  SimMode mode = SimMode::kTaid;
  // After a collapse the prediction is the trivial solution y = 0 and the
  // recursion keeps going; by default the run stops at the first collapse.
  bool continue_after_collapse = false;

  void validate(const GramSpectrum& spectrum) const;
};

struct SimStep {
  int step = 0;
  std::vector<double> y;        // y_t
  std::vector<double> y_tilde;  // intermediate teacher
  double lambda = 0.0;          // NaN when collapsed
  double r = 0.0;               // ||y_tilde|| / sqrt(N eps)
  double norm_y = 0.0;
  double norm_y_tilde = 0.0;
  double min_filter = 0.0;  // min_i d_i / (lambda + d_i); NaN when collapsed
  double max_filter = 0.0;
  bool collapsed = false;
};

struct SimTrace {
  std::vector<SimStep> steps;
  std::vector<double> final_y;  // y after the last executed update
  double r0 = 0.0;
  std::optional<int> first_collapse;

  bool completed(int horizon) const {
    return !first_collapse && static_cast<int>(steps.size()) == horizon;
  }
};

SimTrace run_recursion(const GramSpectrum& spectrum, const SimConfig& config);

/// (r0 - 1) / kappa: the number of self-distillation steps guaranteed free of
/// collapse.
double predicted_self_distill_collapse_step(double r0, double kappa);

/// ((1 + sqrt(1 + 4T(1 + kappa))) / 2) * sqrt(N eps), the initial norm above
/// which TAID never collapses (leading constant taken as 1).
double corollary_initial_norm(int horizon, double kappa, int n, double epsilon);

// Randomized trial suites.

/// G = Q^T diag(d) Q with Haar-random Q, d_min = 1 / N, d_max = kappa / N and
/// the remaining eigenvalues uniform in between.
Matrix random_gram(std::uint64_t seed, int n, double kappa);

struct TrialSpec {
  std::uint64_t seed = 0;
  int n = 8;
  double kappa = 2.0;
  int horizon = 20;
  double r0 = 5.0;
  double epsilon = 0.1;
  // When set, ||y0|| = corollary_factor * corollary_initial_norm(...) and r0 is
  // derived from it.
  std::optional<double> corollary_factor;
  AlphaMode alpha_mode = AlphaMode::kDMin;
  SimMode mode = SimMode::kTaid;
};

struct TrialRanges {
  int n_min = 4, n_max = 64;
  double kappa_min = 1.0, kappa_max = 10.0;
  int horizon_min = 10, horizon_max = 200;
  double r0_min = 1.5, r0_max = 20.0;
  double epsilon = 0.05;
};

TrialSpec random_trial(std::uint64_t seed, const TrialRanges& ranges, SimMode mode,
                       AlphaMode alpha_mode, std::optional<double> corollary_factor);

struct TrialOutcome {
  TrialSpec spec;
  double kappa = 0.0;  // measured from the decomposed Gram matrix
  double r0 = 0.0;
  int steps_run = 0;
  std::optional<int> first_collapse;
  bool completed = false;
  bool filter_ok = true;       // every d/(lambda+d) in (0, 1)
  bool floor_ok = true;        // TAID: ||y_tilde_t|| >= (t/T) ||y0||
  bool late_ok = true;         // TAID: no collapse for t > T / r0
  bool guarantee_ok = true;    // self-distill: no collapse at t <= floor((r0-1)/kappa)
  bool eventual_ok = true;     // self-distill: a collapse is observed whenever T >= 20 r0
  double floor_margin = 0.0;   // min_t ||y_tilde_t|| - (t/T) ||y0||

  bool passed() const;
};

/// The spectrum and recursion inputs a trial runs on.
struct TrialSetup {
  GramSpectrum spectrum;
  SimConfig config;
};

TrialSetup trial_setup(const TrialSpec& spec);

/// Runs and checks one trial; the trace is copied to `trace` when given.
TrialOutcome run_trial(const TrialSpec& spec, SimTrace* trace = nullptr);

}  // namespace taidlab
