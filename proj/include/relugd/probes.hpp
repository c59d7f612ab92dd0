#pragma once

// Monte Carlo probes for the standalone probabilistic inequalities used by
// the convergence analysis. Each probe is a pure function of its arguments
// and seed, and compares an empirical statistic with a closed-form target or
// bound under an explicit slack: 5 standard errors for mean matching and
// 3 standard errors for one-sided tail bounds. Bounds that are >= 1 (or an
// MGF bound that cannot be violated) are reported as vacuous passes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "relugd/errors.hpp"
#include "relugd/network.hpp"
#include "relugd/rng.hpp"
#include "relugd/training.hpp"

namespace relugd {

inline constexpr double kMeanSlackSE = 5.0;
inline constexpr double kTailSlackSE = 3.0;

struct ProbeResult {
  std::string name;
  std::size_t samples = 0;
  double statistic = 0.0;
  double bound_or_target = 0.0;
  double standard_error = 0.0;
  bool pass = false;
  bool vacuous = false;
  std::uint64_t seed = 0;
  std::string detail;
};

// Stream for probe `name`; distinct names get distinct streams.
inline CounterRng probe_stream(std::uint64_t seed, const std::string& name) {
  std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a
  for (unsigned char ch : name) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  return CounterRng(seed).derive(stream_tag::kProbe, h);
}

namespace detail {

struct MeanAndSE {
  double mean;
  double se;
};

// Welford accumulation, ascending sample order.
class RunningMoments {
 public:
  void push(double v) noexcept {
    ++n_;
    const double delta = v - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (v - mean_);
  }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double standard_error() const noexcept { return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

inline double binomial_se(double p, std::size_t n) { return std::sqrt(p * (1.0 - p) / static_cast<double>(n)); }

inline void require_samples(std::size_t samples, std::size_t minimum, const char* what) {
  if (samples < minimum) throw DomainError(std::string(what) + ": need at least " + std::to_string(minimum) + " samples");
}

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace detail

// E[r(X)^2] = sigma^2 / 2 for centered normal X with variance sigma^2.
inline ProbeResult rectified_second_moment(double sigma, std::size_t samples, std::uint64_t seed) {
  if (!(sigma > 0.0)) throw DomainError("rectified_second_moment: sigma must be positive");
  detail::require_samples(samples, 10000, "rectified_second_moment");
  const std::string name = "rectified_second_moment(sigma=" + detail::fmt(sigma) + ")";
  CounterRng rng = probe_stream(seed, name);
  detail::RunningMoments acc;
  for (std::size_t s = 0; s < samples; ++s) {
    const double r = rectifier(sigma * rng.normal());
    acc.push(r * r);
  }
  ProbeResult out{name, samples, acc.mean(), 0.5 * sigma * sigma, acc.standard_error(), false, false, seed, {}};
  out.seed = seed;
  out.pass = std::abs(out.statistic - out.bound_or_target) <= kMeanSlackSE * out.standard_error;
  return out;
}

// One-sided check p_hat <= bound + 3 SE of an empirical probability.
inline ProbeResult tail_probe(std::string name, std::size_t hits, std::size_t samples, double bound, std::uint64_t seed) {
  ProbeResult out;
  out.name = std::move(name);
  out.samples = samples;
  out.statistic = static_cast<double>(hits) / static_cast<double>(samples);
  out.bound_or_target = bound;
  out.standard_error = detail::binomial_se(out.statistic, samples);
  out.seed = seed;
  out.vacuous = bound >= 1.0;
  out.pass = out.vacuous || out.statistic <= bound + kTailSlackSE * out.standard_error;
  return out;
}

// P(|X| >= eps) <= 2 exp(-eps^2 / 2) for standard normal X.
inline ProbeResult gaussian_tail(double eps, std::size_t samples, std::uint64_t seed) {
  if (!(eps > 0.0)) throw DomainError("gaussian_tail: eps must be positive");
  detail::require_samples(samples, 1, "gaussian_tail");
  const std::string name = "gaussian_tail(eps=" + detail::fmt(eps) + ")";
  CounterRng rng = probe_stream(seed, name);
  std::size_t hits = 0;
  for (std::size_t s = 0; s < samples; ++s) hits += std::abs(rng.normal()) >= eps;
  return tail_probe(name, hits, samples, 2.0 * std::exp(-0.5 * eps * eps), seed);
}

// P(|X| <= eps) <= 2 eps / sqrt(2 pi) for standard normal X.
inline ProbeResult anti_concentration(double eps, std::size_t samples, std::uint64_t seed) {
  if (!(eps > 0.0)) throw DomainError("anti_concentration: eps must be positive");
  detail::require_samples(samples, 1, "anti_concentration");
  const std::string name = "anti_concentration(eps=" + detail::fmt(eps) + ")";
  CounterRng rng = probe_stream(seed, name);
  std::size_t hits = 0;
  for (std::size_t s = 0; s < samples; ++s) hits += std::abs(rng.normal()) <= eps;
  return tail_probe(name, hits, samples, 2.0 * eps / std::sqrt(2.0 * std::numbers::pi), seed);
}

// Y = sum_i sigma_i^2 Z_i^2 1[A_i] with Z_i standard normal and A_i independent
// events of probability p_i. Sub-exponential with
// nu = 2 (sum_i sigma_i^4)^(1/2) and b = 4 max_i sigma_i^2.
struct ChiSquareMixture {
  std::vector<double> sigmas;
  std::vector<double> probabilities;

  double mean() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < sigmas.size(); ++i) acc += sigmas[i] * sigmas[i] * probabilities[i];
    return acc;
  }
  double nu() const {
    double acc = 0.0;
    for (double s : sigmas) acc += std::pow(s, 4);
    return 2.0 * std::sqrt(acc);
  }
  double b() const {
    double mx = 0.0;
    for (double s : sigmas) mx = std::max(mx, s * s);
    return 4.0 * mx;
  }
  double sample(CounterRng& rng) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
      const double z = rng.normal();
      if (rng.bernoulli(probabilities[i])) acc += sigmas[i] * sigmas[i] * z * z;
    }
    return acc;
  }
  void validate() const {
    if (sigmas.empty() || sigmas.size() != probabilities.size()) throw DimensionError("ChiSquareMixture: size mismatch");
    for (double p : probabilities)
      if (!(p >= 0.0 && p <= 1.0)) throw DomainError("ChiSquareMixture: probability outside [0,1]");
    for (double s : sigmas)
      if (!(s > 0.0)) throw DomainError("ChiSquareMixture: sigma must be positive");
  }
};

// E[exp(lambda (Y - EY))] <= exp(lambda^2 nu^2 / 2) for |lambda| < 1/b, on a grid.
// The empirical MGF must stay below bound * (1 + 5 relative SE) at every point;
// the reported point is the one with the least headroom.
inline ProbeResult subexp_mgf_mixture(const ChiSquareMixture& mix, const std::vector<double>& lambda_grid,
                                      std::size_t samples, std::uint64_t seed, std::string name) {
  mix.validate();
  detail::require_samples(samples, 1, "subexp_mgf");
  const double b = mix.b();
  const double nu = mix.nu();
  for (double l : lambda_grid)
    if (!(std::abs(l) < 1.0 / b)) throw DomainError("subexp_mgf: lambda outside (-1/b, 1/b)");

  CounterRng rng = probe_stream(seed, name);
  const double mean = mix.mean();
  std::vector<detail::RunningMoments> acc(lambda_grid.size());
  for (std::size_t s = 0; s < samples; ++s) {
    const double centered = mix.sample(rng) - mean;
    for (std::size_t g = 0; g < lambda_grid.size(); ++g) acc[g].push(std::exp(lambda_grid[g] * centered));
  }

  ProbeResult out;
  out.name = std::move(name);
  out.samples = samples;
  out.seed = seed;
  out.pass = true;
  double worst = -INFINITY;
  for (std::size_t g = 0; g < lambda_grid.size(); ++g) {
    const double l = lambda_grid[g];
    const double mgf = acc[g].mean();
    const double se = acc[g].standard_error();
    const double bound = std::exp(0.5 * l * l * nu * nu);
    const double allowed = bound * (1.0 + kMeanSlackSE * se / mgf);
    const bool ok = mgf <= allowed;
    out.pass = out.pass && ok;
    const double ratio = mgf / allowed;
    if (ratio > worst) {
      worst = ratio;
      out.statistic = mgf;
      out.bound_or_target = allowed;
      out.standard_error = se;
      out.detail = "worst lambda=" + detail::fmt(l) + " exact_bound=" + detail::fmt(bound);
    }
  }
  return out;
}

// Single-term case Y = Z^2 1[A], P(A) = p: (nu, b) = (2, 4).
inline ProbeResult subexp_mgf(double p, const std::vector<double>& lambda_grid, std::size_t samples, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("subexp_mgf: p must lie in [0,1]");
  for (double l : lambda_grid)
    if (!(std::abs(l) < 0.25)) throw DomainError("subexp_mgf: lambda outside (-1/4, 1/4)");
  return subexp_mgf_mixture({{1.0}, {p}}, lambda_grid, samples, seed, "subexp_mgf(p=" + detail::fmt(p) + ")");
}

// P(|Y - EY| >= eps) <= 2 exp(-min{eps^2 / nu^2, eps / b} / 2) on a grid of eps,
// each point checked with 3 SE slack. Points whose bound is >= 1 are skipped
// as vacuous; the result is vacuous when all points are.
inline ProbeResult subexp_tail(double nu, double b, const std::function<double(CounterRng&)>& sampler, double mean,
                               const std::vector<double>& eps_grid, std::size_t samples, std::uint64_t seed,
                               std::string name) {
  if (!(nu > 0.0) || !(b > 0.0)) throw DomainError("subexp_tail: nu and b must be positive");
  detail::require_samples(samples, 1, "subexp_tail");
  CounterRng rng = probe_stream(seed, name);
  std::vector<double> deviations(samples);
  for (auto& v : deviations) v = std::abs(sampler(rng) - mean);

  ProbeResult out;
  out.name = std::move(name);
  out.samples = samples;
  out.seed = seed;
  out.pass = true;
  out.vacuous = true;
  double worst = -INFINITY;
  for (double eps : eps_grid) {
    if (!(eps > 0.0)) throw DomainError("subexp_tail: eps must be positive");
    const double bound = 2.0 * std::exp(-0.5 * std::min(eps * eps / (nu * nu), eps / b));
    if (bound >= 1.0) continue;
    out.vacuous = false;
    std::size_t hits = 0;
    for (double v : deviations) hits += v >= eps;
    const double p = static_cast<double>(hits) / static_cast<double>(samples);
    const double se = detail::binomial_se(p, samples);
    out.pass = out.pass && p <= bound + kTailSlackSE * se;
    if (p - bound > worst) {
      worst = p - bound;
      out.statistic = p;
      out.bound_or_target = bound;
      out.standard_error = se;
      out.detail = "worst eps=" + detail::fmt(eps);
    }
  }
  return out;
}

// Mean over trials of ||f(0) - y||^2 matches 1/2 sum_i ||x_i||^2 + ||y||^2
// within 5 SE, and the Markov consequence
// P(||f(0) - y||^2 <= target / eps) >= 1 - eps holds within 3 SE.
inline ProbeResult init_risk_expectation(const Dataset& data, std::size_t width, std::size_t trials, std::uint64_t seed,
                                         double markov_eps = 0.1) {
  detail::require_samples(trials, 100, "init_risk_expectation");
  if (!(markov_eps > 0.0 && markov_eps < 1.0)) throw DomainError("init_risk_expectation: eps must lie in (0,1)");
  const std::string name = "init_risk_expectation(width=" + std::to_string(width) + ")";
  const CounterRng root = probe_stream(seed, name);

  double target = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double n = euclidean_norm(data.x(i));
    target += 0.5 * n * n + data.y(i) * data.y(i);
  }
  detail::RunningMoments acc;
  std::size_t within = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto net = initialize(data.input_dim, width, root.derive(stream_tag::kTrial, t).key());
    const double err = squared_error(predictions(net, data), data);
    acc.push(err);
    within += err <= target / markov_eps;
  }
  ProbeResult out{name, trials, acc.mean(), target, acc.standard_error(), false, false, seed, {}};
  out.seed = seed;
  const double frac = static_cast<double>(within) / static_cast<double>(trials);
  const bool markov_ok = frac >= 1.0 - markov_eps - kTailSlackSE * detail::binomial_se(frac, trials);
  out.pass = std::abs(out.statistic - target) <= kMeanSlackSE * out.standard_error && markov_ok;
  out.detail = "markov_fraction=" + detail::fmt(frac) + " markov_target=" + detail::fmt(1.0 - markov_eps);
  return out;
}

// (2 ln(2 width / eps) / width)^(1/2)
inline double weight_bound_threshold(std::size_t width, double eps) {
  const double wd = static_cast<double>(width);
  return std::sqrt(2.0 / wd * std::log(2.0 * wd / eps));
}

// P(all |Wout_k| <= threshold) >= 1 - eps, checked as p_hat >= 1 - eps - 3 SE.
inline ProbeResult weight_bound_event(std::size_t width, double eps, std::size_t trials, std::uint64_t seed) {
  detail::require_samples(trials, 100, "weight_bound_event");
  if (width == 0) throw DomainError("weight_bound_event: width must be >= 1");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("weight_bound_event: eps must lie in (0,1)");
  const std::string name = "weight_bound_event(width=" + std::to_string(width) + ",eps=" + detail::fmt(eps) + ")";
  CounterRng rng = probe_stream(seed, name);
  const double threshold = weight_bound_threshold(width, eps);
  const double scale = 1.0 / std::sqrt(static_cast<double>(width));
  std::size_t held = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    bool all = true;
    for (std::size_t k = 0; k < width; ++k) all = (std::abs(rng.normal() * scale) <= threshold) && all;
    held += all;
  }
  ProbeResult out;
  out.name = name;
  out.samples = trials;
  out.statistic = static_cast<double>(held) / static_cast<double>(trials);
  out.bound_or_target = 1.0 - eps;
  out.standard_error = detail::binomial_se(out.statistic, trials);
  out.seed = seed;
  out.pass = out.statistic >= out.bound_or_target - kTailSlackSE * out.standard_error;
  return out;
}

enum class ProbeScale { quick, full };

inline std::size_t probe_samples(ProbeScale scale) { return scale == ProbeScale::quick ? 100000 : 10000000; }

// The full battery run by the command line front end. Sample-based probes use
// probe_samples(scale) draws; the initialization-risk probe always uses 1000
// trials of width 256 on a fixed dataset since each trial is a whole network.
inline std::vector<ProbeResult> probe_suite(std::uint64_t seed, ProbeScale scale) {
  const std::size_t n = probe_samples(scale);
  std::vector<ProbeResult> out;
  for (double sigma : {1.0, 2.0}) out.push_back(rectified_second_moment(sigma, n, seed));
  for (double eps : {1.0, 2.0, 3.0, 5.0}) out.push_back(gaussian_tail(eps, n, seed));
  for (double eps : {0.1, 0.5, 2.0}) out.push_back(anti_concentration(eps, n, seed));

  const std::vector<double> grid = {-0.2, -0.1, 0.0, 0.1, 0.2};
  for (double p : {0.0, 0.5, 1.0}) out.push_back(subexp_mgf(p, grid, n, seed));
  const ChiSquareMixture mix{{0.5, 1.0, 1.5}, {0.3, 0.6, 0.9}};
  out.push_back(subexp_mgf_mixture(mix, {-0.1, -0.05, 0.05, 0.1}, n, seed, "subexp_mgf_sum(n=3)"));

  std::vector<double> eps_grid;
  for (int e = 1; e <= 20; ++e) eps_grid.push_back(e);
  const ChiSquareMixture single{{1.0}, {1.0}};
  out.push_back(subexp_tail(single.nu(), single.b(), [&](CounterRng& r) { return single.sample(r); }, single.mean(),
                            eps_grid, n, seed, "subexp_tail(p=1)"));
  const ChiSquareMixture half{{1.0}, {0.5}};
  out.push_back(subexp_tail(half.nu(), half.b(), [&](CounterRng& r) { return half.sample(r); }, half.mean(), eps_grid,
                            n, seed, "subexp_tail(p=0.5)"));
  out.push_back(subexp_tail(mix.nu(), mix.b(), [&](CounterRng& r) { return mix.sample(r); }, mix.mean(), eps_grid, n,
                            seed, "subexp_tail_sum(n=3)"));

  const Dataset data(3, {1.0, 0.0, 0.0, 0.6, 0.8, 0.0, 0.0, -1.5, 0.5, 0.3, 0.3, 1.2}, {0.5, -1.0, 0.25, 2.0});
  out.push_back(init_risk_expectation(data, 256, 1000, seed));
  for (double eps : {0.1, 0.5}) out.push_back(weight_bound_event(64, eps, n, seed));
  return out;
}

}  // namespace relugd
