#pragma once

// Random initialization and full-batch gradient descent with frozen output
// weights. A run records, at every step, the predictions, risk, squared error
// and the largest per-neuron drift from initialization; every
// `record_gram_every` steps it also keeps a parameter snapshot and the
// smallest eigenvalues of the stochastic Gram pair.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "relugd/errors.hpp"
#include "relugd/gram.hpp"
#include "relugd/linalg.hpp"
#include "relugd/network.hpp"
#include "relugd/rng.hpp"

namespace relugd {

// W_k(0) ~ N(0, I_d), sqrt(width) * Wout_k ~ N(0, 1), B(0) = 0, bias_out(0) = 0.
inline ShallowReluNet initialize(std::size_t d, std::size_t width, std::uint64_t seed) {
  ShallowReluNet net = ShallowReluNet::zeros(d, width);
  const CounterRng root(seed);
  CounterRng hidden = root.derive(stream_tag::kHiddenWeights);
  CounterRng output = root.derive(stream_tag::kOutputWeights);
  for (auto& w : net.hidden_weights) w = hidden.normal();
  const double scale = 1.0 / std::sqrt(static_cast<double>(width));
  for (auto& w : net.output_weights) w = output.normal() * scale;
  return net;
}

// One step of
//   W_k <- W_k - (2 eta / m) sum_j (f_j - y_j) Wout_k 1[<W_k,x_j> + B_k >= 0] x_j
//   B_k <- B_k - (2 eta / m) sum_j (f_j - y_j) Wout_k 1[<W_k,x_j> + B_k >= 0]
//   bias_out <- bias_out - (2 eta / m) sum_j (f_j - y_j)
// Output weights are left untouched.
inline ShallowReluNet gd_step(const ShallowReluNet& net, const Dataset& data, double eta) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw DomainError("gd_step: eta must be finite and nonnegative");
  check_compatible(net, data);
  const std::size_t m = data.size();
  const std::size_t d = net.input_dim;
  const auto f = predictions(net, data);
  // eta * ((2/m) * sum), the same association as eta times risk_gradient, so the
  // two formulations agree bit for bit instead of drifting apart under cancellation.
  const double scale = 2.0 / static_cast<double>(m);

  ShallowReluNet next = net;
  std::vector<double> sum_w(d);
  for (std::size_t k = 0; k < net.width; ++k) {
    std::fill(sum_w.begin(), sum_w.end(), 0.0);
    double sum_b = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (pre_activation(net, k, data.x(j)) < 0.0) continue;
      const double coeff = (f[j] - data.y(j)) * net.output_weights[k];
      const auto xj = data.x(j);
      for (std::size_t l = 0; l < d; ++l) sum_w[l] += coeff * xj[l];
      sum_b += coeff;
    }
    for (std::size_t l = 0; l < d; ++l) next.hidden_weights[k * d + l] -= eta * (scale * sum_w[l]);
    next.hidden_biases[k] -= eta * (scale * sum_b);
  }
  double sum_r = 0.0;
  for (std::size_t j = 0; j < m; ++j) sum_r += f[j] - data.y(j);
  next.output_bias -= eta * (scale * sum_r);
  return next;
}

struct TrainConfig {
  double eta = 0.0;
  std::size_t steps = 0;
  std::uint64_t seed = 0;
  std::size_t width = 1;
  std::size_t record_gram_every = 0;  // 0 = never

  void validate() const {
    if (!(eta >= 0.0) || !std::isfinite(eta)) throw DomainError("TrainConfig: eta must be finite and nonnegative");
    if (width == 0) throw DomainError("TrainConfig: width must be >= 1");
  }
};

struct StepRecord {
  std::size_t n = 0;
  std::vector<double> predictions;
  double risk = 0.0;
  double squared_error = 0.0;
  double max_drift_W = 0.0;         // max_k ||W_k(n) - W_k(0)||
  double max_drift_B = 0.0;         // max_k |B_k(n) - B_k(0)|
  double max_combined_drift = 0.0;  // max_k C ||W_k(n) - W_k(0)|| + |B_k(n) - B_k(0)|
  std::optional<double> lambda_min_G;
  std::optional<double> lambda_min_H;
};

struct Snapshot {
  std::size_t n = 0;
  ShallowReluNet net;
};

struct GDTrajectory {
  double eta = 0.0;
  double data_radius_C = 0.0;
  ShallowReluNet initial;
  ShallowReluNet final_net;
  std::vector<StepRecord> records;  // steps + 1 entries, records[n].n == n
  std::vector<Snapshot> snapshots;  // every record_gram_every steps and the final step

  std::size_t steps() const noexcept { return records.empty() ? 0 : records.size() - 1; }
};

// Divergence guard: risk above this multiple of the initial risk aborts training.
inline constexpr double kDivergenceFactor = 1e3;

namespace detail {

inline StepRecord record_step(std::size_t n, const ShallowReluNet& net, const ShallowReluNet& net0,
                              const Dataset& data, double radius_C) {
  StepRecord rec;
  rec.n = n;
  rec.predictions = predictions(net, data);
  rec.squared_error = squared_error(rec.predictions, data);
  rec.risk = rec.squared_error / static_cast<double>(data.size());
  const std::size_t d = net.input_dim;
  for (std::size_t k = 0; k < net.width; ++k) {
    double sq = 0.0;
    for (std::size_t l = 0; l < d; ++l) {
      const double diff = net.hidden_weights[k * d + l] - net0.hidden_weights[k * d + l];
      sq += diff * diff;
    }
    const double dw = std::sqrt(sq);
    const double db = std::abs(net.hidden_biases[k] - net0.hidden_biases[k]);
    rec.max_drift_W = std::max(rec.max_drift_W, dw);
    rec.max_drift_B = std::max(rec.max_drift_B, db);
    rec.max_combined_drift = std::max(rec.max_combined_drift, radius_C * dw + db);
  }
  return rec;
}

}  // namespace detail

inline double max_input_norm(const Dataset& data) {
  double c = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) c = std::max(c, euclidean_norm(data.x(i)));
  return c;
}

inline GDTrajectory train(const ShallowReluNet& net0, const Dataset& data, const TrainConfig& config) {
  config.validate();
  net0.validate();
  check_compatible(net0, data);

  GDTrajectory traj;
  traj.eta = config.eta;
  traj.data_radius_C = max_input_norm(data);
  traj.initial = net0;
  traj.records.reserve(config.steps + 1);

  ShallowReluNet net = net0;
  double risk0 = 0.0;
  for (std::size_t n = 0;; ++n) {
    StepRecord rec = detail::record_step(n, net, net0, data, traj.data_radius_C);
    if (!std::isfinite(rec.risk)) throw DivergenceError("non-finite risk at step " + std::to_string(n), n);
    if (n == 0) risk0 = rec.risk;
    if (risk0 > 0.0 && rec.risk > kDivergenceFactor * risk0) {
      throw DivergenceError("risk exceeded " + std::to_string(kDivergenceFactor) + " x initial risk at step " +
                                std::to_string(n),
                            n);
    }
    const bool keep = (config.record_gram_every > 0 && n % config.record_gram_every == 0) ||
                      (config.record_gram_every > 0 && n == config.steps);
    if (keep) {
      const auto gp = stochastic_gram(net, data, n);
      rec.lambda_min_G = lambda_min(gp.G);
      rec.lambda_min_H = lambda_min(gp.H);
      traj.snapshots.push_back({n, net});
    }
    traj.records.push_back(std::move(rec));
    if (n == config.steps) break;
    net = gd_step(net, data, config.eta);
  }
  traj.final_net = std::move(net);
  return traj;
}

struct DriftStep {
  std::size_t n = 0;
  double observed_W = 0.0;
  double observed_B = 0.0;
  bool hypothesis_held = false;  // envelope held at every step before n
  bool within_W = false;
  bool within_B = false;
};

struct DriftReport {
  double bound_W = 0.0;
  double bound_B = 0.0;
  bool weight_event_held = false;  // all |Wout_k| <= (2 ln(2 width / eps) / width)^(1/2)
  bool step_size_ok = false;       // eta < m / (lambda + mu)
  std::vector<DriftStep> steps;
};

// Drift bounds
//   ||W_k(n) - W_k(0)|| <= 4 C ||f(0) - y|| / (lambda + mu) * (2 m ln(2 width / eps) / width)^(1/2)
//   |B_k(n) - B_k(0)|   <= 4 ||f(0) - y|| / (lambda + mu) * (2 m ln(2 width / eps) / width)^(1/2)
// checked against the recorded trajectory. The bound at step n is only
// guaranteed when the envelope (1 - eta (lambda + mu) / m)^k held for k < n.
inline double drift_bound_factor(double initial_error_norm, double lambda_plus_mu, std::size_t m, std::size_t width,
                                 double eps) {
  if (!(lambda_plus_mu > 0.0)) throw DomainError("weight_drift_bound: lambda + mu must be positive");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("weight_drift_bound: eps must lie in (0,1)");
  const double md = static_cast<double>(m);
  const double wd = static_cast<double>(width);
  return 4.0 * initial_error_norm / lambda_plus_mu * std::sqrt(2.0 * md * std::log(2.0 * wd / eps) / wd);
}

inline DriftReport weight_drift_bound(const GDTrajectory& traj, double eps, double lambda, double mu, double C) {
  if (traj.records.empty()) throw ContractError("weight_drift_bound: empty trajectory");
  const double sum = lambda + mu;
  const std::size_t m = traj.records.front().predictions.size();
  const std::size_t width = traj.initial.width;
  const double err0 = std::sqrt(traj.records.front().squared_error);
  const double factor = drift_bound_factor(err0, sum, m, width, eps);

  DriftReport report;
  report.bound_W = C * factor;
  report.bound_B = factor;
  const double wd = static_cast<double>(width);
  const double weight_threshold = std::sqrt(2.0 / wd * std::log(2.0 * wd / eps));
  report.weight_event_held = std::all_of(traj.initial.output_weights.begin(), traj.initial.output_weights.end(),
                                         [&](double w) { return std::abs(w) <= weight_threshold; });
  const double rate = traj.eta * sum / static_cast<double>(m);
  report.step_size_ok = traj.eta < static_cast<double>(m) / sum;

  bool envelope_so_far = true;
  for (const auto& rec : traj.records) {
    DriftStep s;
    s.n = rec.n;
    s.observed_W = rec.max_drift_W;
    s.observed_B = rec.max_drift_B;
    s.hypothesis_held = envelope_so_far;
    s.within_W = s.observed_W <= report.bound_W;
    s.within_B = s.observed_B <= report.bound_B;
    report.steps.push_back(s);
    const double factor_n = std::pow(1.0 - rate, static_cast<double>(rec.n));
    envelope_so_far = envelope_so_far && rec.squared_error <= factor_n * traj.records.front().squared_error;
  }
  return report;
}

}  // namespace relugd
