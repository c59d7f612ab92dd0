#pragma once

// One-hidden-layer rectified network with hidden and output biases, its
// realization and empirical risk, the exact risk gradient, and the softplus
// family phi_t used as a smooth gradient oracle.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "relugd/errors.hpp"
#include "relugd/linalg.hpp"

namespace relugd {

// m labelled inputs x_i in R^d. Rows of `inputs` are the x_i.
struct Dataset {
  std::size_t input_dim = 0;
  std::vector<double> inputs;   // m * d, row-major
  std::vector<double> targets;  // m

  Dataset() = default;
  Dataset(std::size_t d, std::vector<double> xs, std::vector<double> ys)
      : input_dim(d), inputs(std::move(xs)), targets(std::move(ys)) {
    validate();
  }
  Dataset(std::initializer_list<std::initializer_list<double>> xs, std::initializer_list<double> ys) {
    input_dim = xs.size() == 0 ? 0 : xs.begin()->size();
    for (const auto& row : xs) {
      if (row.size() != input_dim) throw DimensionError("Dataset: ragged inputs");
      inputs.insert(inputs.end(), row.begin(), row.end());
    }
    targets.assign(ys.begin(), ys.end());
    validate();
  }

  std::size_t size() const noexcept { return targets.size(); }
  std::span<const double> x(std::size_t i) const noexcept { return {inputs.data() + i * input_dim, input_dim}; }
  double y(std::size_t i) const noexcept { return targets[i]; }

  void validate() const {
    if (input_dim == 0) throw DimensionError("Dataset: input dimension must be >= 1");
    if (targets.empty()) throw DimensionError("Dataset: needs at least one sample");
    if (inputs.size() != targets.size() * input_dim) throw DimensionError("Dataset: inputs/targets size mismatch");
    detail::require_finite(inputs, "Dataset inputs");
    detail::require_finite(targets, "Dataset targets");
  }
};

// ((W, B), (Wout, bias_out)) with W in R^{width x d}.
struct ShallowReluNet {
  std::size_t input_dim = 0;
  std::size_t width = 0;
  std::vector<double> hidden_weights;  // width * d, row-major; row k is W_k
  std::vector<double> hidden_biases;   // width
  std::vector<double> output_weights;  // width
  double output_bias = 0.0;

  static ShallowReluNet zeros(std::size_t d, std::size_t width) {
    if (d == 0 || width == 0) throw DimensionError("ShallowReluNet: dimensions must be >= 1");
    ShallowReluNet net;
    net.input_dim = d;
    net.width = width;
    net.hidden_weights.assign(width * d, 0.0);
    net.hidden_biases.assign(width, 0.0);
    net.output_weights.assign(width, 0.0);
    return net;
  }

  std::span<const double> hidden_row(std::size_t k) const noexcept {
    return {hidden_weights.data() + k * input_dim, input_dim};
  }

  // Number of real parameters, width * d + 2 * width + 1.
  std::size_t parameter_count() const noexcept { return width * input_dim + 2 * width + 1; }

  void validate() const {
    if (input_dim == 0 || width == 0) throw DimensionError("ShallowReluNet: dimensions must be >= 1");
    if (hidden_weights.size() != width * input_dim || hidden_biases.size() != width ||
        output_weights.size() != width) {
      throw DimensionError("ShallowReluNet: inconsistent parameter sizes");
    }
    detail::require_finite(hidden_weights, "ShallowReluNet W");
    detail::require_finite(hidden_biases, "ShallowReluNet B");
    detail::require_finite(output_weights, "ShallowReluNet Wout");
    if (!std::isfinite(output_bias)) throw DomainError("ShallowReluNet: non-finite output bias");
  }

  friend bool operator==(const ShallowReluNet&, const ShallowReluNet&) = default;
};

// Partial derivatives of the empirical risk w.r.t. W, B and the output bias.
// The output weights are frozen, so there is no component for them.
struct RiskGradient {
  std::vector<double> d_hidden_weights;  // width * d
  std::vector<double> d_hidden_biases;   // width
  double d_output_bias = 0.0;
};

inline void check_compatible(const ShallowReluNet& net, const Dataset& data) {
  if (net.input_dim != data.input_dim) {
    throw DimensionError("network input dimension " + std::to_string(net.input_dim) +
                         " does not match dataset dimension " + std::to_string(data.input_dim));
  }
}

inline std::vector<double> rectifier(std::span<const double> v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] > 0.0 ? v[i] : 0.0;
  return out;
}

inline double rectifier(double z) noexcept { return z > 0.0 ? z : 0.0; }

// phi_t(z) = (1/t) ln(1 + t exp(t z)).
inline double softplus(double z, double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("softplus: t must be positive and finite");
  const double tz = t * z;
  if (tz > 30.0) return z + std::log(t) / t + std::log1p(std::exp(-tz - std::log(t))) / t;
  return std::log1p(std::exp(tz + std::log(t))) / t;
}

// phi_t'(z) = 1 / (1 + exp(-t z) / t).
inline double softplus_deriv(double z, double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("softplus_deriv: t must be positive and finite");
  const double tz = t * z;
  if (tz > 30.0) return 1.0 / (1.0 + std::exp(-tz - std::log(t)));
  const double u = std::exp(tz + std::log(t));
  return u / (1.0 + u);
}

inline double pre_activation(const ShallowReluNet& net, std::size_t k, std::span<const double> x) {
  return scalar_product(net.hidden_row(k), x) + net.hidden_biases[k];
}

// <Wout, r(W x + B)> + bias_out
inline double realize(const ShallowReluNet& net, std::span<const double> x) {
  if (x.size() != net.input_dim) throw DimensionError("realize: input length does not match network");
  double acc = 0.0;
  for (std::size_t k = 0; k < net.width; ++k) acc += net.output_weights[k] * rectifier(pre_activation(net, k, x));
  return acc + net.output_bias;
}

// Same realization with phi_t in place of the rectifier.
inline double realize_smoothed(const ShallowReluNet& net, std::span<const double> x, double t) {
  if (x.size() != net.input_dim) throw DimensionError("realize_smoothed: input length does not match network");
  double acc = 0.0;
  for (std::size_t k = 0; k < net.width; ++k) acc += net.output_weights[k] * softplus(pre_activation(net, k, x), t);
  return acc + net.output_bias;
}

// f_i = realize(net, x_i) for every sample.
inline std::vector<double> predictions(const ShallowReluNet& net, const Dataset& data) {
  check_compatible(net, data);
  std::vector<double> f(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) f[i] = realize(net, data.x(i));
  return f;
}

// ||f - y||^2
inline double squared_error(std::span<const double> f, const Dataset& data) {
  double acc = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double r = f[i] - data.y(i);
    acc += r * r;
  }
  return acc;
}

inline double empirical_risk(const ShallowReluNet& net, const Dataset& data) {
  const auto f = predictions(net, data);
  return squared_error(f, data) / static_cast<double>(data.size());
}

inline double smoothed_risk(const ShallowReluNet& net, const Dataset& data, double t) {
  if (!(t > 0.0)) throw DomainError("smoothed_risk: t must be positive");
  check_compatible(net, data);
  double acc = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double r = realize_smoothed(net, data.x(i), t) - data.y(i);
    acc += r * r;
  }
  return acc / static_cast<double>(data.size());
}

// Exact gradient with the closed-halfline indicator 1[<W_k, x_j> + B_k >= 0].
inline RiskGradient risk_gradient(const ShallowReluNet& net, const Dataset& data) {
  check_compatible(net, data);
  const std::size_t m = data.size();
  const std::size_t d = net.input_dim;
  const auto f = predictions(net, data);
  const double scale = 2.0 / static_cast<double>(m);

  RiskGradient g;
  g.d_hidden_weights.assign(net.width * d, 0.0);
  g.d_hidden_biases.assign(net.width, 0.0);

  for (std::size_t k = 0; k < net.width; ++k) {
    std::vector<double> sum_w(d, 0.0);
    double sum_b = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (pre_activation(net, k, data.x(j)) < 0.0) continue;
      const double coeff = (f[j] - data.y(j)) * net.output_weights[k];
      const auto xj = data.x(j);
      for (std::size_t l = 0; l < d; ++l) sum_w[l] += coeff * xj[l];
      sum_b += coeff;
    }
    for (std::size_t l = 0; l < d; ++l) g.d_hidden_weights[k * d + l] = scale * sum_w[l];
    g.d_hidden_biases[k] = scale * sum_b;
  }

  double sum_r = 0.0;
  for (std::size_t j = 0; j < m; ++j) sum_r += f[j] - data.y(j);
  g.d_output_bias = scale * sum_r;
  return g;
}

}  // namespace relugd
