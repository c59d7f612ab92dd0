#pragma once

// Plain-arithmetic re-derivations of the certificate formulas, using repeated
// multiplication in place of pow and spelled-out powers of two.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>

namespace formula {

struct Tuple {
  double lambda, mu, c, C;
  std::size_t m;
  double y, eps, sumsq;
};

inline double p(double b, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

inline double big_lambda(const Tuple& t) {
  const double m = static_cast<double>(t.m);
  double a = (t.lambda + t.mu) / m;
  double inv = std::min(std::min(t.lambda, t.mu), std::min(1.0 / t.lambda, 1.0 / t.mu));
  double b = inv / (2048.0 * std::max(1.0, p(t.C, 4)) * m);
  double lo = std::min(1.0, std::min(p(t.lambda, 5), p(t.mu, 5)));
  double hi = std::max(1.0, std::max(p(t.C, 20), p(t.y, 5)));
  double c = t.c * t.c * std::sqrt(t.c) * lo / (68719476736.0 * hi * p(m, 8));
  return std::min(a, std::min(b, c));
}

inline double eta_thm(const Tuple& t) {
  const double m = static_cast<double>(t.m);
  const double k = 6.0 * (1.0 + t.C * t.C) / t.eps + 1.0;
  return std::min((t.lambda + t.mu) / (8.0 * k * k * m), m / (t.lambda + t.mu));
}

inline double dmin_thm(const Tuple& t) {
  const double m = static_cast<double>(t.m);
  double mx = 4 * m * m / (t.lambda * t.lambda);
  mx = std::max(mx, 4 * m * m * p(t.C, 4) / (t.mu * t.mu));
  mx = std::max(mx, m / t.lambda);
  mx = std::max(mx, m * t.C * t.C / t.mu);
  return 32 * std::log(12 * m * m / t.eps) * mx;
}

inline double ln_rhs_thm(const Tuple& t) {
  const double m = static_cast<double>(t.m);
  const double s = t.lambda + t.mu;
  const double head = std::numbers::pi * p(t.eps, 3) * t.c * t.c * s * s /
                      (131072.0 * 27.0 * std::max(1.0, p(t.C, 4)) * p(m, 3) * (0.5 * t.sumsq + t.y * t.y));
  const double r = std::sqrt(m) + m;
  double mn = t.lambda * t.lambda / (m * m);
  mn = std::min(mn, t.mu * t.mu / (m * m * p(t.C, 4)));
  mn = std::min(mn, s * s / (p(1 + t.C * t.C, 2) * r * r));
  return head * mn;
}

inline double eta_cor(const Tuple& t) {
  const double inv = std::min(std::min(t.lambda, t.mu), std::min(1.0 / t.lambda, 1.0 / t.mu));
  return std::min(1.0, 1.0 / p(t.C, 4)) * inv * t.eps * t.eps / (2048.0 * static_cast<double>(t.m));
}

inline double dmin_cor(const Tuple& t) {
  const double hi = std::max(1.0, std::max(p(t.C, 20), p(t.y, 5)));
  const double inv5 = std::max(1.0, std::max(1.0 / p(t.lambda, 5), 1.0 / p(t.mu, 5)));
  return 68719476736.0 * hi / (t.c * t.c * std::sqrt(t.c)) * inv5 / p(t.eps, 4) * p(static_cast<double>(t.m), 8);
}

inline double radius(const Tuple& t) {
  const double m = static_cast<double>(t.m);
  const double k = std::sqrt(2.0 * std::numbers::pi) * (t.eps / 6.0) * t.c;
  return std::min(k * std::min(t.lambda, t.mu / (t.C * t.C)) / (16 * m * m),
                  k * (t.lambda + t.mu) / (16 * (1 + t.C * t.C) * (std::sqrt(m) + m) * m));
}

// Five hand-checked input tuples: lambda, mu, c, C, m, |y|, eps, sum |x_i|^2.
inline const Tuple kTuples[] = {
    {0.25, 0.25, 1.0, 1.0, 2, 1.0, 0.5, 2.0},
    {0.25, 0.5, 1.0, 1.0, 2, 1.0, 0.1, 2.0},
    {0.0703614, 0.0908815, 1.0, 1.0, 4, 1.25, 0.2, 4.0},
    {1.7, 3.2, 0.5, 2.5, 5, 4.0, 0.3, 12.0},
    {0.01, 0.002, 0.2, 0.9, 8, 0.3, 0.9, 3.0},
};

}  // namespace formula
