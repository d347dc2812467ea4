// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The taidlab Authors

// Reference implementations for tests. They deliberately share no code with
// the library: sums run term by term in long double, softmax goes through a
// plain exp/normalize, and gradients come from central differences.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "taidlab/matrix.hpp"

namespace taidlab::oracle {

using Row = std::vector<long double>;

inline Row probs(std::span<const double> logits) {
  long double hi = logits[0];
  for (double x : logits) hi = std::max<long double>(hi, x);
  Row p(logits.size());
  long double z = 0;
  for (std::size_t i = 0; i < p.size(); ++i) z += p[i] = std::exp(static_cast<long double>(logits[i]) - hi);
  for (auto& x : p) x /= z;
  return p;
}

inline long double floored_log(long double x) { return std::log(std::max(x, 1e-12L)); }

// sum_y a(y) log(a(y) / b(y)); zero-mass terms are dropped and both log
// arguments are floored at 1e-12.
inline long double kl(const Row& a, const Row& b) {
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    s += a[i] * (floored_log(a[i]) - floored_log(b[i]));
  }
  return s;
}

inline Row mix(const Row& a, const Row& b, long double w) {
  Row r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = w * a[i] + (1 - w) * b[i];
  return r;
}

enum class Kind { kKl, kRkl, kTvd, kGjsd, kSkl, kSrkl, kTaid };

// p is the teacher distribution and q the student's, per row.
inline long double row_value(Kind kind, std::span<const double> s, std::span<const double> t,
                             double param) {
  const Row q = probs(s);
  const Row p = probs(t);
  switch (kind) {
    case Kind::kKl: return kl(p, q);
    case Kind::kRkl: return kl(q, p);
    case Kind::kTvd: {
      long double d = 0;
      for (std::size_t i = 0; i < p.size(); ++i) d += std::fabs(p[i] - q[i]);
      return d / 2;
    }
    case Kind::kGjsd: {
      const Row r = mix(p, q, param);
      return param * kl(p, r) + (1 - param) * kl(q, r);
    }
    case Kind::kSkl: return kl(p, mix(p, q, param));
    case Kind::kSrkl: return kl(q, mix(p, q, param));
    case Kind::kTaid: {
      std::vector<double> z(s.size());
      for (std::size_t i = 0; i < z.size(); ++i) z[i] = (1 - param) * s[i] + param * t[i];
      return kl(probs(z), q);
    }
  }
  return 0;
}

inline long double batch_value(Kind kind, const Matrix& student, const Matrix& teacher,
                               double param) {
  long double total = 0;
  for (std::size_t r = 0; r < student.rows(); ++r) {
    total += row_value(kind, student.row(r), teacher.row(r), param);
  }
  return total / static_cast<long double>(student.rows());
}

// Central differences of `f` over every entry of `x` with step h.
inline Matrix finite_difference(const std::function<double(const Matrix&)>& f, Matrix x,
                                double h = 1e-5) {
  Matrix g(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x.data()[i];
    x.data()[i] = keep + h;
    const double up = f(x);
    x.data()[i] = keep - h;
    const double down = f(x);
    x.data()[i] = keep;
    g.data()[i] = (up - down) / (2 * h);
  }
  return g;
}

// Central differences of a row-separable mean f(x) = mean_r f_r(x_r), where
// `f_row(r, x_r)` evaluates one term.
inline Matrix finite_difference_rows(
    const std::function<double(std::size_t, std::span<const double>)>& f_row, const Matrix& x,
    double h = 1e-5) {
  Matrix g(x.rows(), x.cols());
  std::vector<double> v(x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    std::copy(x.row(r).begin(), x.row(r).end(), v.begin());
    for (std::size_t c = 0; c < v.size(); ++c) {
      const double keep = v[c];
      v[c] = keep + h;
      const double up = f_row(r, v);
      v[c] = keep - h;
      const double down = f_row(r, v);
      v[c] = keep;
      g(r, c) = (up - down) / (2 * h) / static_cast<double>(x.rows());
    }
  }
  return g;
}

inline Matrix random_logits(std::mt19937_64& gen, std::size_t rows, std::size_t cols,
                            double scale = 3.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(rows, cols);
  for (double& x : m.data()) x = n(gen);
  return m;
}

inline long double norm(const std::vector<double>& v) {
  long double s = 0;
  for (double x : v) s += static_cast<long double>(x) * x;
  return std::sqrt(s);
}

}  // namespace taidlab::oracle
