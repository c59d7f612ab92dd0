#pragma once

// Quantitative convergence certificate: the rate constant Lambda, step-size
// and width thresholds, the drift radius R, the high-probability events at
// initialization and the geometric risk envelope. Every formula is evaluated
// literally in binary64; non-finite or zero thresholds are flagged rather
// than clamped.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "relugd/errors.hpp"
#include "relugd/gram.hpp"
#include "relugd/linalg.hpp"
#include "relugd/network.hpp"

namespace relugd {

namespace detail {

inline void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be positive and finite");
}

inline void require_unit_open(double eps, const char* what) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError(std::string(what) + ": eps must lie in (0,1)");
}

inline double sq(double v) { return v * v; }

}  // namespace detail

struct DataRadii {
  double c;  // min_i ||x_i||
  double C;  // max_i ||x_i||
};

inline DataRadii data_radii(const Dataset& data) {
  if (data.size() == 0) throw DimensionError("data_radii: empty dataset");
  DataRadii r{euclidean_norm(data.x(0)), euclidean_norm(data.x(0))};
  for (std::size_t i = 1; i < data.size(); ++i) {
    const double n = euclidean_norm(data.x(i));
    r.c = std::min(r.c, n);
    r.C = std::max(r.C, n);
  }
  return r;
}

inline double target_norm(const Dataset& data) { return euclidean_norm(data.targets); }

// sum_i ||x_i||^2
inline double input_sum_of_squares(const Dataset& data) {
  double acc = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double n = euclidean_norm(data.x(i));
    acc += n * n;
  }
  return acc;
}

// Lambda = min{ (lambda + mu) / m,
//               min{lambda, mu, 1/lambda, 1/mu} / (2^11 max{1, C^4} m),
//               c^(5/2) min{1, lambda^5, mu^5} / (2^36 max{1, C^20, |y|^5} m^8) }
inline double capital_lambda(double lambda, double mu, double c, double C, std::size_t m, double y_norm) {
  detail::require_positive(lambda, "capital_lambda: lambda");
  detail::require_positive(mu, "capital_lambda: mu");
  detail::require_positive(c, "capital_lambda: c");
  detail::require_positive(C, "capital_lambda: C");
  if (m == 0) throw DomainError("capital_lambda: m must be >= 1");
  if (!(y_norm >= 0.0)) throw DomainError("capital_lambda: |y| must be nonnegative");
  const double md = static_cast<double>(m);
  const double first = (lambda + mu) / md;
  const double second = std::min({lambda, mu, 1.0 / lambda, 1.0 / mu}) /
                        (std::ldexp(1.0, 11) * std::max(1.0, std::pow(C, 4)) * md);
  const double third = std::pow(c, 2.5) * std::min({1.0, std::pow(lambda, 5), std::pow(mu, 5)}) /
                       (std::ldexp(1.0, 36) * std::max({1.0, std::pow(C, 20), std::pow(y_norm, 5)}) * std::pow(md, 8));
  return std::min({first, second, third});
}

struct ThresholdInputs {
  double lambda = 0.0;
  double mu = 0.0;
  double c = 0.0;
  double C = 0.0;
  std::size_t m = 0;
  double eps = 0.0;
  double sumsq_x = 0.0;  // sum_i ||x_i||^2
  double y_norm = 0.0;
};

struct Thresholds {
  // Main theorem: eta < eta_max_thm, width >= dmin_thm and
  // (1/width) ln(12 width / eps) <= ln_condition_rhs.
  double eta_max_thm = 0.0;
  double dmin_thm = 0.0;
  double ln_condition_rhs = 0.0;
  // Intermediate corollary: eta < eta_max_cor_ln and the log condition with ln_condition_rhs_cor.
  double eta_max_cor_ln = 0.0;
  double ln_condition_rhs_cor = 0.0;
  // Simplified corollary: eta <= eta_max_cor and width >= dmin_cor.
  double eta_max_cor = 0.0;
  double dmin_cor = 0.0;
};

inline Thresholds theorem_thresholds(const ThresholdInputs& in) {
  detail::require_positive(in.lambda, "theorem_thresholds: lambda");
  detail::require_positive(in.mu, "theorem_thresholds: mu");
  detail::require_positive(in.c, "theorem_thresholds: c");
  detail::require_positive(in.C, "theorem_thresholds: C");
  detail::require_unit_open(in.eps, "theorem_thresholds");
  if (in.m == 0) throw DomainError("theorem_thresholds: m must be >= 1");
  if (!(in.sumsq_x > 0.0) || !(in.y_norm >= 0.0)) throw DomainError("theorem_thresholds: invalid data norms");

  using detail::sq;
  const double lam = in.lambda;
  const double mu = in.mu;
  const double c = in.c;
  const double C = in.C;
  const double eps = in.eps;
  const double md = static_cast<double>(in.m);
  const double sum = lam + mu;
  const double C2 = C * C;
  const double C4 = std::pow(C, 4);

  Thresholds t;
  t.eta_max_thm = std::min(sum / (8.0 * sq(6.0 * (1.0 + C2) / eps + 1.0) * md), md / sum);
  t.dmin_thm = 32.0 * std::log(12.0 * md * md / eps) *
               std::max({4.0 * md * md / sq(lam), 4.0 * md * md * C4 / sq(mu), md / lam, md * C2 / mu});
  const double risk_scale = 0.5 * in.sumsq_x + sq(in.y_norm);
  t.ln_condition_rhs =
      std::numbers::pi * std::pow(eps, 3) * sq(c) * sq(sum) /
      (std::ldexp(1.0, 17) * 27.0 * std::max(1.0, C4) * std::pow(md, 3) * risk_scale) *
      std::min({sq(lam) / sq(md), sq(mu) / (sq(md) * C4), sq(sum) / (sq(1.0 + C2) * sq(std::sqrt(md) + md))});

  const double inv_min = std::min({lam, mu, 1.0 / lam, 1.0 / mu});
  t.eta_max_cor_ln = sq(eps) * inv_min / (1568.0 * std::max(1.0, C4) * md);
  t.ln_condition_rhs_cor = std::numbers::pi * std::pow(eps, 3) * sq(c) * std::min({1.0, std::pow(lam, 4), std::pow(mu, 4)}) /
                           (std::ldexp(1.0, 22) * 27.0 * std::max({1.0, std::pow(C, 16), std::pow(in.y_norm, 4)}) *
                            std::pow(md, 6));

  t.eta_max_cor = std::ldexp(1.0, -11) * std::min(1.0, 1.0 / C4) * inv_min * sq(eps) / md;
  t.dmin_cor = std::ldexp(1.0, 36) * std::max({1.0, std::pow(C, 20), std::pow(in.y_norm, 5)}) * std::pow(c, -2.5) *
               std::max({1.0, std::pow(lam, -5), std::pow(mu, -5)}) * std::pow(eps, -4) * std::pow(md, 8);
  return t;
}

// Left-hand side (1/width) ln(12 width / eps) of the main theorem's log condition.
inline double ln_condition_lhs(std::size_t width, double eps) {
  detail::require_unit_open(eps, "ln_condition_lhs");
  const double wd = static_cast<double>(width);
  return std::log(12.0 * wd / eps) / wd;
}

// Width requirement of the initialization-event lemma:
// 32 ln(2 m^2 / eps) max{4 m^2 / lambda^2, 4 m^2 C^4 / mu^2, m / lambda, m C^2 / mu}.
inline double event_width_min(double lambda, double mu, double C, std::size_t m, double eps) {
  detail::require_positive(lambda, "event_width_min: lambda");
  detail::require_positive(mu, "event_width_min: mu");
  detail::require_unit_open(eps, "event_width_min");
  const double md = static_cast<double>(m);
  return 32.0 * std::log(2.0 * md * md / eps) *
         std::max({4.0 * md * md / (lambda * lambda), 4.0 * md * md * std::pow(C, 4) / (mu * mu), md / lambda,
                   md * C * C / mu});
}

// R = min{ sqrt(2 pi) delta c min{lambda, mu / C^2} / (16 m^2),
//          sqrt(2 pi) delta c (lambda + mu) / (16 (1 + C^2)(sqrt(m) + m) m) },  delta = eps / 6.
inline double radius_R(double eps, double c, double C, double lambda, double mu, std::size_t m) {
  detail::require_unit_open(eps, "radius_R");
  detail::require_positive(c, "radius_R: c");
  detail::require_positive(C, "radius_R: C");
  detail::require_positive(lambda, "radius_R: lambda");
  detail::require_positive(mu, "radius_R: mu");
  if (m == 0) throw DomainError("radius_R: m must be >= 1");
  const double delta = eps / 6.0;
  const double md = static_cast<double>(m);
  const double root = std::sqrt(2.0 * std::numbers::pi);
  const double first = root * delta * c * std::min(lambda, mu / (C * C)) / (16.0 * md * md);
  const double second = root * delta * c * (lambda + mu) / (16.0 * (1.0 + C * C) * (std::sqrt(md) + md) * md);
  return std::min(first, second);
}

// (1 - eta * rate)^n * risk0
inline double rate_envelope(double risk0, double eta, double rate_constant, std::size_t n) {
  if (!(risk0 >= 0.0)) throw DomainError("rate_envelope: risk0 must be nonnegative");
  const double contraction = eta * rate_constant;
  if (!(contraction > 0.0 && contraction < 1.0)) throw DomainError("rate_envelope: eta * rate must lie in (0,1)");
  return std::pow(1.0 - contraction, static_cast<double>(n)) * risk0;
}

struct LogInequalityReport {
  std::size_t checked = 0;
  std::size_t violations = 0;
  double worst_margin = 0.0;  // min over the grid of x^eps / eps - ln x
};

// ln(x) <= x^eps / eps on the product grid.
inline LogInequalityReport log_inequality_check(const std::vector<double>& eps_grid, const std::vector<double>& x_grid) {
  LogInequalityReport r;
  r.worst_margin = INFINITY;
  for (double eps : eps_grid) {
    if (!(eps > 0.0)) throw DomainError("log_inequality_check: eps must be positive");
    for (double x : x_grid) {
      if (!(x > 0.0)) throw DomainError("log_inequality_check: x must be positive");
      const double margin = std::pow(x, eps) / eps - std::log(x);
      ++r.checked;
      if (margin < 0.0) ++r.violations;
      r.worst_margin = std::min(r.worst_margin, margin);
    }
  }
  return r;
}

struct RateCertificate {
  double c = 0.0;
  double C = 0.0;
  double lambda = 0.0;
  double mu = 0.0;
  std::size_t m = 0;
  std::size_t d = 0;
  double y_norm = 0.0;
  double sumsq_x = 0.0;
  double eps = 0.0;
  double capital_lambda = 0.0;
  Thresholds thresholds;
  double radius_R = 0.0;
  double event_width_min = 0.0;
  std::vector<std::string> flags;  // names of thresholds that are zero or non-finite

  // Provenance.
  GramMethod gram_method = GramMethod::closed_form;
  std::size_t mc_samples = 0;
  std::uint64_t seed = 0;
};

inline RateCertificate certify(const Dataset& data, const DeterministicGram& dg, double eps) {
  detail::require_unit_open(eps, "certify");
  RateCertificate cert;
  const auto radii = data_radii(data);
  cert.c = radii.c;
  cert.C = radii.C;
  cert.lambda = dg.lambda;
  cert.mu = dg.mu;
  cert.m = data.size();
  cert.d = data.input_dim;
  cert.y_norm = target_norm(data);
  cert.sumsq_x = input_sum_of_squares(data);
  cert.eps = eps;
  cert.gram_method = dg.method;
  cert.mc_samples = dg.samples;
  cert.seed = dg.seed;

  cert.capital_lambda = capital_lambda(dg.lambda, dg.mu, cert.c, cert.C, cert.m, cert.y_norm);
  cert.thresholds = theorem_thresholds({dg.lambda, dg.mu, cert.c, cert.C, cert.m, eps, cert.sumsq_x, cert.y_norm});
  cert.radius_R = radius_R(eps, cert.c, cert.C, dg.lambda, dg.mu, cert.m);
  cert.event_width_min = event_width_min(dg.lambda, dg.mu, cert.C, cert.m, eps);

  auto flag = [&](const char* name, double v) {
    if (!std::isfinite(v) || v == 0.0) cert.flags.emplace_back(name);
  };
  const auto& t = cert.thresholds;
  flag("capital_lambda", cert.capital_lambda);
  flag("eta_max_thm", t.eta_max_thm);
  flag("dmin_thm", t.dmin_thm);
  flag("ln_condition_rhs", t.ln_condition_rhs);
  flag("eta_max_cor_ln", t.eta_max_cor_ln);
  flag("ln_condition_rhs_cor", t.ln_condition_rhs_cor);
  flag("eta_max_cor", t.eta_max_cor);
  flag("dmin_cor", t.dmin_cor);
  flag("radius_R", cert.radius_R);
  flag("event_width_min", cert.event_width_min);
  return cert;
}

struct EventOutcome {
  bool held = false;
  double statistic = 0.0;
  double threshold = 0.0;
};

// Outcomes of the six initialization events, indexed 0..5 for A1..A6.
struct EventReport {
  std::array<EventOutcome, 6> events{};

  bool all_held() const noexcept {
    return std::all_of(events.begin(), events.end(), [](const EventOutcome& e) { return e.held; });
  }
};

// Evaluates, for a freshly initialized network,
//   A1: ||f(0) - y||^2 <= (1/2 sum_i ||x_i||^2 + ||y||^2) / eps
//   A2: max_k |Wout_k| <= (2 ln(2 width / eps) / width)^(1/2)
//   A3: max_ij |G_ij(0) - Gbar_ij| <= min{lambda, mu / C^2} / (4 m)
//   A4: sum_ij sum_k Wout_k^2 (1[|<W_k,x_i>| <= R] + 1[|<W_k,x_j>| <= R]) <= min{lambda, mu / C^2} / 4
//   A5: sum_i sum_k Wout_k^2 1[|<W_k,x_i>| <= R] <= 2 m R / (sqrt(2 pi) eps c)
//   A6: sum_k Wout_k^2 <= 1 / eps
// Boundary equality counts as held.
inline EventReport event_probe(const ShallowReluNet& net0, const Dataset& data, const DeterministicGram& dg, double eps,
                               double R) {
  detail::require_unit_open(eps, "event_probe");
  detail::require_positive(R, "event_probe: R");
  check_compatible(net0, data);
  if (net0.output_bias != 0.0 ||
      std::any_of(net0.hidden_biases.begin(), net0.hidden_biases.end(), [](double b) { return b != 0.0; })) {
    throw ContractError("event_probe: network must have zero initial biases");
  }
  const std::size_t m = data.size();
  const std::size_t width = net0.width;
  const double md = static_cast<double>(m);
  const double wd = static_cast<double>(width);
  const auto radii = data_radii(data);
  const double gap = std::min(dg.lambda, dg.mu / (radii.C * radii.C));

  EventReport rep;
  auto set = [&](std::size_t idx, double stat, double thr) { rep.events[idx] = {stat <= thr, stat, thr}; };

  const auto f = predictions(net0, data);
  set(0, squared_error(f, data), (0.5 * input_sum_of_squares(data) + std::pow(target_norm(data), 2)) / eps);

  double max_abs_w = 0.0;
  double sum_w2 = 0.0;
  for (double w : net0.output_weights) {
    max_abs_w = std::max(max_abs_w, std::abs(w));
    sum_w2 += w * w;
  }
  set(1, max_abs_w, std::sqrt(2.0 / wd * std::log(2.0 * wd / eps)));

  const auto gp = stochastic_gram(net0, data);
  double max_dev = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) max_dev = std::max(max_dev, std::abs(gp.G(i, j) - dg.Gbar(i, j)));
  set(2, max_dev, gap / (4.0 * md));

  // S_i = sum_k Wout_k^2 1[|<W_k, x_i>| <= R]
  std::vector<double> near(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < width; ++k) {
      if (std::abs(scalar_product(net0.hidden_row(k), data.x(i))) <= R) near[i] += net0.output_weights[k] * net0.output_weights[k];
    }
  }
  double a4 = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) a4 += near[i] + near[j];
  set(3, a4, gap / 4.0);

  double a5 = 0.0;
  for (double s : near) a5 += s;
  set(4, a5, 2.0 * md * R / (std::sqrt(2.0 * std::numbers::pi) * eps * radii.c));

  set(5, sum_w2, 1.0 / eps);
  return rep;
}

}  // namespace relugd
