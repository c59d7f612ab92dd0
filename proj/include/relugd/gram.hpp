#pragma once

// Gram matrices of the training dynamics.
//
// The stochastic pair (G(n), H(n)) is read off a network snapshot:
//   G_ij = sum_k Wout_k^2 1[<W_k,x_i> + B_k >= 0 and <W_k,x_j> + B_k >= 0],
//   H_ij = <x_i, x_j> G_ij.
// Its deterministic counterpart Gbar_ij is the probability that a standard
// normal direction w has <w,x_i> >= 0 and <w,x_j> >= 0, which equals
// (pi - angle(x_i, x_j)) / (2 pi). Both are exposed, together with a Monte
// Carlo estimator of Gbar that serves as an independent cross-check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "relugd/errors.hpp"
#include "relugd/linalg.hpp"
#include "relugd/network.hpp"
#include "relugd/rng.hpp"

namespace relugd {

struct PairwiseReport {
  bool valid = true;
  std::vector<std::size_t> zero_inputs;
  std::vector<std::pair<std::size_t, std::size_t>> dependent_pairs;  // 0-based, i < j
};

// Relative tolerance on |cos angle| above which two inputs count as parallel.
inline constexpr double kParallelTolerance = 1e-12;

inline PairwiseReport check_pairwise_independence(const Dataset& data) {
  PairwiseReport report;
  const std::size_t m = data.size();
  std::vector<double> norms(m);
  for (std::size_t i = 0; i < m; ++i) {
    norms[i] = euclidean_norm(data.x(i));
    if (norms[i] == 0.0) report.zero_inputs.push_back(i);
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      if (norms[i] == 0.0 || norms[j] == 0.0) continue;
      const double ip = scalar_product(data.x(i), data.x(j));
      if (std::abs(ip) >= (1.0 - kParallelTolerance) * norms[i] * norms[j]) report.dependent_pairs.emplace_back(i, j);
    }
  }
  report.valid = report.zero_inputs.empty() && report.dependent_pairs.empty();
  return report;
}

// Throws ValidationError listing offending pairs when the data is degenerate.
inline void require_nondegenerate(const Dataset& data) {
  const auto report = check_pairwise_independence(data);
  if (report.valid) return;
  std::string msg = "dataset is degenerate:";
  for (auto i : report.zero_inputs) msg += " x" + std::to_string(i) + "=0";
  for (auto [i, j] : report.dependent_pairs) msg += " (" + std::to_string(i) + "," + std::to_string(j) + ")";
  auto pairs = report.dependent_pairs;
  for (auto i : report.zero_inputs) pairs.emplace_back(i, i);
  throw ValidationError(msg, std::move(pairs));
}

struct GramPair {
  std::size_t step = 0;
  SymMatrix G;
  SymMatrix H;
};

enum class GramMethod { closed_form, monte_carlo };

inline const char* to_string(GramMethod method) noexcept {
  return method == GramMethod::closed_form ? "closed_form" : "monte_carlo";
}

struct DeterministicGram {
  SymMatrix Gbar;
  SymMatrix Hbar;
  double lambda = 0.0;
  double mu = 0.0;
  GramMethod method = GramMethod::closed_form;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::optional<SymMatrix> standard_errors;
};

// H = <x_i, x_j> * G entrywise.
inline SymMatrix weight_by_inner_products(const SymMatrix& g, const Dataset& data) {
  const std::size_t m = data.size();
  SymMatrix h(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j) h.set(i, j, scalar_product(data.x(i), data.x(j)) * g(i, j));
  return h;
}

inline GramPair stochastic_gram(const ShallowReluNet& net, const Dataset& data, std::size_t step = 0) {
  check_compatible(net, data);
  const std::size_t m = data.size();
  const std::size_t width = net.width;

  std::vector<unsigned char> active(width * m);
  for (std::size_t k = 0; k < width; ++k)
    for (std::size_t i = 0; i < m; ++i) active[k * m + i] = pre_activation(net, k, data.x(i)) >= 0.0;

  std::vector<double> acc(m * m, 0.0);
  for (std::size_t k = 0; k < width; ++k) {
    const double w2 = net.output_weights[k] * net.output_weights[k];
    const unsigned char* a = active.data() + k * m;
    for (std::size_t i = 0; i < m; ++i) {
      if (!a[i]) continue;
      for (std::size_t j = i; j < m; ++j)
        if (a[j]) acc[i * m + j] += w2;
    }
  }

  GramPair out{step, SymMatrix(m), SymMatrix(m)};
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j) out.G.set(i, j, acc[i * m + j]);
  out.H = weight_by_inner_products(out.G, data);
  return out;
}

inline void fill_eigenvalues(DeterministicGram& dg) {
  dg.lambda = lambda_min(dg.Gbar);
  dg.mu = lambda_min(dg.Hbar);
}

inline DeterministicGram deterministic_gram_closed_form(const Dataset& data) {
  const std::size_t m = data.size();
  std::vector<double> norms(m);
  for (std::size_t i = 0; i < m; ++i) {
    norms[i] = euclidean_norm(data.x(i));
    if (norms[i] == 0.0) throw DomainError("deterministic_gram_closed_form: input " + std::to_string(i) + " is zero");
  }
  DeterministicGram dg;
  dg.Gbar = SymMatrix(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      double cosine = 1.0;
      if (i != j) cosine = std::clamp(scalar_product(data.x(i), data.x(j)) / (norms[i] * norms[j]), -1.0, 1.0);
      dg.Gbar.set(i, j, (std::numbers::pi - std::acos(cosine)) / (2.0 * std::numbers::pi));
    }
  }
  dg.Hbar = weight_by_inner_products(dg.Gbar, data);
  dg.method = GramMethod::closed_form;
  fill_eigenvalues(dg);
  return dg;
}

inline constexpr std::size_t kMinMonteCarloSamples = 1000;

// Fraction of standard normal draws w with <w,x_i> >= 0 and <w,x_j> >= 0,
// with binomial standard errors sqrt(p (1 - p) / samples).
inline DeterministicGram deterministic_gram_monte_carlo(const Dataset& data, std::size_t samples, std::uint64_t seed) {
  if (samples < kMinMonteCarloSamples) {
    throw DomainError("deterministic_gram_monte_carlo: need at least " + std::to_string(kMinMonteCarloSamples) +
                      " samples");
  }
  const std::size_t m = data.size();
  const std::size_t d = data.input_dim;
  CounterRng rng = CounterRng(seed).derive(stream_tag::kGramMonteCarlo);

  std::vector<double> w(d);
  std::vector<unsigned char> sign(m);
  std::vector<std::uint64_t> counts(m * m, 0);
  for (std::size_t s = 0; s < samples; ++s) {
    for (auto& v : w) v = rng.normal();
    for (std::size_t i = 0; i < m; ++i) sign[i] = scalar_product(w, data.x(i)) >= 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (!sign[i]) continue;
      for (std::size_t j = i; j < m; ++j)
        if (sign[j]) ++counts[i * m + j];
    }
  }

  DeterministicGram dg;
  dg.Gbar = SymMatrix(m);
  SymMatrix se(m);
  const double n = static_cast<double>(samples);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      const double p = static_cast<double>(counts[i * m + j]) / n;
      dg.Gbar.set(i, j, p);
      se.set(i, j, std::sqrt(p * (1.0 - p) / n));
    }
  }
  dg.Hbar = weight_by_inner_products(dg.Gbar, data);
  dg.method = GramMethod::monte_carlo;
  dg.samples = samples;
  dg.seed = seed;
  dg.standard_errors = std::move(se);
  fill_eigenvalues(dg);
  return dg;
}

struct GramEigenvalues {
  double lambda;
  double mu;
};

inline GramEigenvalues gram_eigenvalues(const DeterministicGram& dg) {
  return {lambda_min(dg.Gbar), lambda_min(dg.Hbar)};
}

}  // namespace relugd
