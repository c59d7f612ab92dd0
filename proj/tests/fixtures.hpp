#pragma once

// Random test instances built from an std::mt19937_64 source, independent of
// the library's own generator.

#include <cmath>

#include "oracles.hpp"
#include "relugd/network.hpp"

namespace fixture {

inline relugd::Dataset random_dataset(oracle::Draw& draw, std::size_t d, std::size_t m, double scale = 1.0) {
  std::vector<double> xs(m * d), ys(m);
  for (auto& v : xs) v = scale * draw.normal();
  for (auto& v : ys) v = draw.normal();
  return relugd::Dataset(d, std::move(xs), std::move(ys));
}

// W, B standard normal; Wout ~ N(0, 1/width); bias_out standard normal.
inline relugd::ShallowReluNet random_net(oracle::Draw& draw, std::size_t d, std::size_t width) {
  auto net = relugd::ShallowReluNet::zeros(d, width);
  for (auto& v : net.hidden_weights) v = draw.normal();
  for (auto& v : net.hidden_biases) v = draw.normal();
  for (auto& v : net.output_weights) v = draw.normal() / std::sqrt(static_cast<double>(width));
  net.output_bias = draw.normal();
  return net;
}

inline double min_abs_preactivation(const relugd::ShallowReluNet& net, const relugd::Dataset& data) {
  double mn = INFINITY;
  for (std::size_t k = 0; k < net.width; ++k)
    for (std::size_t j = 0; j < data.size(); ++j) {
      double s = net.hidden_biases[k];
      for (std::size_t l = 0; l < net.input_dim; ++l) s += net.hidden_weights[k * net.input_dim + l] * data.x(j)[l];
      mn = std::min(mn, std::abs(s));
    }
  return mn;
}

// Loop oracle for <Wout, r(W x + B)> + bias_out.
inline double realize_loop(const relugd::ShallowReluNet& net, const std::vector<double>& x) {
  double out = net.output_bias;
  for (std::size_t k = 0; k < net.width; ++k) {
    double pre = net.hidden_biases[k];
    for (std::size_t l = 0; l < net.input_dim; ++l) pre += net.hidden_weights[k * net.input_dim + l] * x[l];
    out += net.output_weights[k] * (pre > 0.0 ? pre : 0.0);
  }
  return out;
}

inline double risk_loop(const relugd::ShallowReluNet& net, const relugd::Dataset& data) {
  double acc = 0.0;
  for (std::size_t j = 0; j < data.size(); ++j) {
    const auto xj = data.x(j);
    const double r = realize_loop(net, {xj.begin(), xj.end()}) - data.y(j);
    acc += r * r;
  }
  return acc / static_cast<double>(data.size());
}

}  // namespace fixture
