// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The taidlab Authors

#include "taidlab/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "taidlab/error.hpp"
#include "taidlab/rng.hpp"

namespace taidlab {

namespace {

constexpr int kMaxJacobiSweeps = 100;
constexpr double kPdThreshold = 1e-12;

double norm2(std::span<const double> x) {
  double sum = 0.0;
  for (double v : x) sum += v * v;
  return std::sqrt(sum);
}

double off_diagonal_norm(const Matrix& a) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (i != j) sum += a(i, j) * a(i, j);
    }
  }
  return std::sqrt(sum);
}

double frobenius(const Matrix& a) {
  double sum = 0.0;
  for (double x : a.data()) sum += x * x;
  return std::sqrt(sum);
}

// out = m * x
void multiply(const Matrix& m, std::span<const double> x, std::span<double> out) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) acc += m(i, j) * x[j];
    out[i] = acc;
  }
}

// out = m^T * x
void multiply_transposed(const Matrix& m, std::span<const double> x, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out[j] += m(i, j) * x[i];
  }
}

}  // namespace

SymmetricEigen jacobi_eigen(const Matrix& symmetric, double relative_tolerance) {
  require(symmetric.rows() == symmetric.cols() && symmetric.rows() > 0, ErrorCode::kDimension,
          "eigendecomposition needs a non-empty square matrix");
  const std::size_t n = symmetric.rows();
  Matrix a = symmetric;
  Matrix v = Matrix::identity(n);
  const double threshold = relative_tolerance * frobenius(symmetric);

  int sweep = 0;
  for (; sweep < kMaxJacobiSweeps && off_diagonal_norm(a) > threshold; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation angle zeroing a(p, q); the smaller root keeps |angle| <= pi/4.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::hypot(t, 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  require(off_diagonal_norm(a) <= threshold, ErrorCode::kRunFailed,
          "Jacobi eigensolver did not converge");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  SymmetricEigen out{Matrix(n, n), std::vector<double>(n), sweep};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

GramSpectrum::GramSpectrum(Matrix v, std::vector<double> d) : v_(std::move(v)), d_(std::move(d)) {
  require(!d_.empty() && v_.rows() == d_.size() && v_.cols() == d_.size(), ErrorCode::kDimension,
          "spectrum shape mismatch");
  d_min_ = *std::min_element(d_.begin(), d_.end());
  d_max_ = *std::max_element(d_.begin(), d_.end());
  require(d_min_ > 0.0, ErrorCode::kInvalidKernel, "spectrum must be strictly positive");
}

Matrix GramSpectrum::reconstruct() const {
  const std::size_t n = size();
  Matrix g(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += v_(k, i) * d_[k] * v_(k, j);
      g(i, j) = acc;
    }
  }
  return g;
}

GramSpectrum spectrum_from_gram(const Matrix& gram) {
  require(gram.rows() == gram.cols() && gram.rows() > 0, ErrorCode::kInvalidKernel,
          "Gram matrix must be square and non-empty");
  const double scale = frobenius(gram);
  require(std::isfinite(scale) && scale > 0.0, ErrorCode::kInvalidKernel,
          "Gram matrix must be finite and non-zero");
  for (std::size_t i = 0; i < gram.rows(); ++i) {
    for (std::size_t j = i + 1; j < gram.cols(); ++j) {
      require(std::abs(gram(i, j) - gram(j, i)) <= 1e-12 * scale, ErrorCode::kInvalidKernel,
              "Gram matrix is not symmetric");
    }
  }
  SymmetricEigen eig = jacobi_eigen(gram);
  const double max_eig = eig.values.back();
  require(max_eig > 0.0 && eig.values.front() > kPdThreshold * max_eig, ErrorCode::kInvalidKernel,
          "Gram matrix is not positive definite (min eigenvalue " +
              std::to_string(eig.values.front()) + ", max " + std::to_string(max_eig) + ")");
  // Rows of V are eigenvectors.
  const std::size_t n = gram.rows();
  Matrix v(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) v(k, i) = eig.vectors(i, k);
  }
  return GramSpectrum(std::move(v), std::move(eig.values));
}

GramSpectrum gram_from_kernel(std::span<const std::vector<double>> points, const Kernel& kernel) {
  if (kernel.kind == KernelKind::kExplicit) return spectrum_from_gram(kernel.gram);
  const std::size_t n = points.size();
  require(n > 0, ErrorCode::kInvalidInput, "kernel Gram matrix needs at least one point");
  const std::size_t dim = points.front().size();
  for (const auto& x : points) {
    require(x.size() == dim, ErrorCode::kDimension, "points differ in dimension");
  }
  if (kernel.kind == KernelKind::kRbf) {
    require(kernel.bandwidth > 0.0, ErrorCode::kInvalidParameter, "RBF bandwidth must be > 0");
  }
  Matrix g(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double value = 0.0;
      if (kernel.kind == KernelKind::kLinear) {
        for (std::size_t k = 0; k < dim; ++k) value += points[i][k] * points[j][k];
      } else {
        double dist2 = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
          const double d = points[i][k] - points[j][k];
          dist2 += d * d;
        }
        value = std::exp(-dist2 / (2.0 * kernel.bandwidth * kernel.bandwidth));
      }
      g(i, j) = value / static_cast<double>(n);
    }
  }
  return spectrum_from_gram(g);
}

std::string_view alpha_mode_name(AlphaMode mode) {
  switch (mode) {
    case AlphaMode::kDMin: return "D_MIN";
    case AlphaMode::kDMax: return "D_MAX";
    case AlphaMode::kFixed: return "FIXED";
  }
  return "?";
}

std::string_view sim_mode_name(SimMode mode) {
  return mode == SimMode::kTaid ? "TAID" : "SELF_DISTILL";
}

std::optional<AlphaMode> parse_alpha_mode(std::string_view name) {
  for (AlphaMode m : {AlphaMode::kDMin, AlphaMode::kDMax, AlphaMode::kFixed}) {
    if (alpha_mode_name(m) == name) return m;
  }
  return std::nullopt;
}

std::optional<SimMode> parse_sim_mode(std::string_view name) {
  for (SimMode m : {SimMode::kTaid, SimMode::kSelfDistill}) {
    if (sim_mode_name(m) == name) return m;
  }
  return std::nullopt;
}

void SimConfig::validate(const GramSpectrum& spectrum) const {
  require(y0.size() == spectrum.size(), ErrorCode::kDimension,
          "y0 has length " + std::to_string(y0.size()) + " but the spectrum has size " +
              std::to_string(spectrum.size()));
  require(std::isfinite(epsilon) && epsilon > 0.0, ErrorCode::kInvalidParameter,
          "epsilon must be > 0");
  require(horizon >= 1, ErrorCode::kInvalidParameter, "horizon T must be >= 1");
  const double n = static_cast<double>(y0.size());
  const double norm = norm2(y0);
  require(norm * norm > n * epsilon, ErrorCode::kInvalidParameter,
          "||y0||^2 must exceed N * epsilon (the problem would start collapsed)");
  if (alpha_mode == AlphaMode::kFixed) {
    require(alpha_value >= spectrum.d_min() && alpha_value <= spectrum.d_max(),
            ErrorCode::kInvalidParameter, "fixed alpha must lie in [d_min, d_max]");
  }
}

SimTrace run_recursion(const GramSpectrum& spectrum, const SimConfig& config) {
  config.validate(spectrum);
  const std::size_t n = spectrum.size();
  const double critical = std::sqrt(static_cast<double>(n) * config.epsilon);
  const double alpha = config.alpha_mode == AlphaMode::kDMin   ? spectrum.d_min()
                       : config.alpha_mode == AlphaMode::kDMax ? spectrum.d_max()
                                                               : config.alpha_value;
  const auto d = spectrum.d();
  const double horizon = static_cast<double>(config.horizon);

  SimTrace trace;
  trace.r0 = norm2(config.y0) / critical;
  std::vector<double> y = config.y0;
  std::vector<double> z(n);
  for (int t = 0; t < config.horizon; ++t) {
    SimStep step;
    step.step = t;
    step.y = y;
    step.y_tilde.resize(n);
    if (config.mode == SimMode::kTaid) {
      const double w = static_cast<double>(t) / horizon;
      for (std::size_t i = 0; i < n; ++i) step.y_tilde[i] = (1.0 - w) * y[i] + w * config.y0[i];
    } else {
      step.y_tilde = y;
    }
    step.norm_y = norm2(step.y);
    step.norm_y_tilde = norm2(step.y_tilde);
    step.r = step.norm_y_tilde / critical;
    step.collapsed = step.r <= 1.0;
    if (step.collapsed) {
      step.lambda = std::numeric_limits<double>::quiet_NaN();
      step.min_filter = step.max_filter = std::numeric_limits<double>::quiet_NaN();
      if (!trace.first_collapse) trace.first_collapse = t;
      trace.steps.push_back(std::move(step));
      std::fill(y.begin(), y.end(), 0.0);
      if (!config.continue_after_collapse) break;
      continue;
    }
    step.lambda = alpha * critical / (step.norm_y_tilde - critical);
    // y_{t+1} = V^T D (lambda I + D)^{-1} V y_tilde
    multiply(spectrum.v(), step.y_tilde, z);
    step.min_filter = std::numeric_limits<double>::infinity();
    step.max_filter = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double filter = d[i] / (step.lambda + d[i]);
      step.min_filter = std::min(step.min_filter, filter);
      step.max_filter = std::max(step.max_filter, filter);
      z[i] *= filter;
    }
    multiply_transposed(spectrum.v(), z, y);
    trace.steps.push_back(std::move(step));
  }
  trace.final_y = y;
  return trace;
}

double predicted_self_distill_collapse_step(double r0, double kappa) {
  require(std::isfinite(r0) && r0 >= 1.0, ErrorCode::kInvalidInput,
          "r0 must be >= 1 (the problem is already collapsed below 1)");
  require(std::isfinite(kappa) && kappa >= 1.0, ErrorCode::kInvalidInput, "kappa must be >= 1");
  return (r0 - 1.0) / kappa;
}

double corollary_initial_norm(int horizon, double kappa, int n, double epsilon) {
  require(horizon >= 1, ErrorCode::kInvalidInput, "T must be >= 1");
  require(std::isfinite(kappa) && kappa >= 1.0, ErrorCode::kInvalidInput, "kappa must be >= 1");
  require(n >= 1 && std::isfinite(epsilon) && epsilon > 0.0, ErrorCode::kInvalidInput,
          "N must be >= 1 and epsilon > 0");
  const double t = static_cast<double>(horizon);
  const double factor = (1.0 + std::sqrt(1.0 + 4.0 * t * (1.0 + kappa))) / 2.0;
  return factor * std::sqrt(static_cast<double>(n) * epsilon);
}

Matrix random_gram(std::uint64_t seed, int n, double kappa) {
  require(n >= 1 && kappa >= 1.0, ErrorCode::kInvalidParameter, "need n >= 1 and kappa >= 1");
  const std::size_t size = static_cast<std::size_t>(n);
  Rng rng(seed);
  // Modified Gram-Schmidt on a Gaussian matrix gives a Haar orthogonal basis.
  Matrix q(size, size);
  for (double& x : q.data()) x = rng.normal();
  for (std::size_t i = 0; i < size; ++i) {
    auto row = q.row(i);
    for (std::size_t k = 0; k < i; ++k) {
      const auto prev = q.row(k);
      double dot = 0.0;
      for (std::size_t j = 0; j < size; ++j) dot += row[j] * prev[j];
      for (std::size_t j = 0; j < size; ++j) row[j] -= dot * prev[j];
    }
    const double norm = norm2(row);
    for (double& x : row) x /= norm;
  }
  const double d_min = 1.0 / static_cast<double>(n);
  std::vector<double> d(size);
  for (std::size_t i = 0; i < size; ++i) {
    d[i] = i == 0 ? d_min : (i == 1 ? kappa * d_min : d_min * rng.uniform(1.0, kappa));
  }
  Matrix g(size, size);
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t j = i; j < size; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < size; ++k) acc += q(k, i) * d[k] * q(k, j);
      g(i, j) = g(j, i) = acc;
    }
  }
  return g;
}

TrialSpec random_trial(std::uint64_t seed, const TrialRanges& ranges, SimMode mode,
                       AlphaMode alpha_mode, std::optional<double> corollary_factor) {
  Rng rng(derive_seed(seed, 0x7419));
  TrialSpec spec;
  spec.seed = seed;
  spec.n = static_cast<int>(rng.between(ranges.n_min, ranges.n_max));
  spec.kappa = rng.uniform(ranges.kappa_min, ranges.kappa_max);
  spec.horizon = static_cast<int>(rng.between(ranges.horizon_min, ranges.horizon_max));
  spec.r0 = rng.uniform(ranges.r0_min, ranges.r0_max);
  spec.epsilon = ranges.epsilon;
  spec.corollary_factor = corollary_factor;
  spec.alpha_mode = alpha_mode;
  spec.mode = mode;
  return spec;
}

bool TrialOutcome::passed() const {
  if (!filter_ok) return false;
  if (spec.mode == SimMode::kSelfDistill) return guarantee_ok && eventual_ok;
  if (spec.corollary_factor && !completed) return false;
  return floor_ok && late_ok;
}

TrialSetup trial_setup(const TrialSpec& spec) {
  GramSpectrum spectrum =
      spectrum_from_gram(random_gram(derive_seed(spec.seed, 1), spec.n, spec.kappa));
  const double critical = std::sqrt(static_cast<double>(spec.n) * spec.epsilon);
  const double target_norm =
      spec.corollary_factor
          ? *spec.corollary_factor * corollary_initial_norm(spec.horizon, spectrum.kappa(),
                                                            spec.n, spec.epsilon)
          : spec.r0 * critical;
  Rng rng(derive_seed(spec.seed, 2));
  SimConfig config;
  config.y0.resize(static_cast<std::size_t>(spec.n));
  for (double& x : config.y0) x = rng.normal();
  const double raw = norm2(config.y0);
  for (double& x : config.y0) x *= target_norm / raw;
  config.epsilon = spec.epsilon;
  config.horizon = spec.horizon;
  config.alpha_mode = spec.alpha_mode;
  config.mode = spec.mode;
  // TAID keeps running through an early collapse so the late-phase claim is
  // checked on every step.
  config.continue_after_collapse = spec.mode == SimMode::kTaid;
  return TrialSetup{std::move(spectrum), std::move(config)};
}

TrialOutcome run_trial(const TrialSpec& spec, SimTrace* trace_out) {
  const TrialSetup setup = trial_setup(spec);
  const GramSpectrum& spectrum = setup.spectrum;
  const SimConfig& config = setup.config;
  TrialOutcome out;
  out.spec = spec;
  out.kappa = spectrum.kappa();

  const SimTrace trace = run_recursion(spectrum, config);
  out.r0 = trace.r0;
  out.steps_run = static_cast<int>(trace.steps.size());
  out.first_collapse = trace.first_collapse;
  out.completed = trace.completed(spec.horizon);

  const double y0_norm = norm2(config.y0);
  const double horizon = static_cast<double>(spec.horizon);
  out.floor_margin = std::numeric_limits<double>::infinity();
  const double safe_steps = std::floor(predicted_self_distill_collapse_step(out.r0, out.kappa));
  for (const SimStep& step : trace.steps) {
    if (!step.collapsed && !(step.min_filter > 0.0 && step.max_filter < 1.0)) out.filter_ok = false;
    const double t = static_cast<double>(step.step);
    if (spec.mode == SimMode::kTaid) {
      const double floor = (t / horizon) * y0_norm;
      out.floor_margin = std::min(out.floor_margin, step.norm_y_tilde - floor);
      if (step.norm_y_tilde < floor * (1.0 - 1e-12)) out.floor_ok = false;
      if (step.collapsed && t > horizon / out.r0) out.late_ok = false;
    } else if (step.collapsed && t <= safe_steps) {
      out.guarantee_ok = false;
    }
  }
  if (spec.mode == SimMode::kSelfDistill && horizon >= 20.0 * out.r0 && !trace.first_collapse) {
    out.eventual_ok = false;
  }
  if (trace_out != nullptr) *trace_out = trace;
  return out;
}

}  // namespace taidlab
