#pragma once

// Experiment plumbing shared by the command line tool and the acceptance
// runner: dataset generation, config parsing, envelope columns and the
// multi-seed convergence verification.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "relugd/certificates.hpp"
#include "relugd/errors.hpp"
#include "relugd/gram.hpp"
#include "relugd/network.hpp"
#include "relugd/rng.hpp"
#include "relugd/serialization.hpp"
#include "relugd/training.hpp"

namespace relugd {

struct GeneratorSpec {
  std::size_t d = 2;
  std::size_t m = 4;
  std::uint64_t seed = 0;
  double norm_lo = 1.0;
  double norm_hi = 1.0;
};

inline constexpr int kMaxResampleAttempts = 100;

// Inputs uniform on spheres whose radii are uniform on [norm_lo, norm_hi],
// targets standard normal. An input that is parallel to an earlier one is
// redrawn, up to kMaxResampleAttempts times.
inline Dataset generate_dataset(const GeneratorSpec& spec) {
  if (spec.d == 0 || spec.m == 0) throw DomainError("generator: d and m must be >= 1");
  if (!(spec.norm_lo > 0.0 && spec.norm_lo <= spec.norm_hi && std::isfinite(spec.norm_hi))) {
    throw DomainError("generator: norm_range must satisfy 0 < lo <= hi");
  }
  if (spec.d == 1 && spec.m >= 2) {
    throw ValidationError("generator: with d = 1 any two nonzero inputs are linearly dependent", {{0, 1}});
  }
  const CounterRng root(spec.seed);
  const CounterRng targets_root = root.derive(stream_tag::kDataTargets);
  std::vector<double> xs;
  xs.reserve(spec.m * spec.d);
  std::vector<double> dir(spec.d);
  for (std::size_t i = 0; i < spec.m; ++i) {
    CounterRng rng = root.derive(stream_tag::kDataInputs, i);
    CounterRng norms = root.derive(stream_tag::kDataNorms, i);
    bool accepted = false;
    for (int attempt = 0; attempt < kMaxResampleAttempts && !accepted; ++attempt) {
      double n2 = 0.0;
      for (auto& v : dir) {
        v = rng.normal();
        n2 += v * v;
      }
      const double radius = spec.norm_lo + (spec.norm_hi - spec.norm_lo) * norms.uniform();
      if (!(n2 > 0.0)) continue;
      const double scale = radius / std::sqrt(n2);
      for (auto& v : dir) v *= scale;
      accepted = true;
      for (std::size_t j = 0; j < i && accepted; ++j) {
        const std::span<const double> xj(xs.data() + j * spec.d, spec.d);
        const double ip = scalar_product(dir, xj);
        if (std::abs(ip) >= (1.0 - kParallelTolerance) * euclidean_norm(dir) * euclidean_norm(xj)) accepted = false;
      }
    }
    if (!accepted) throw ValidationError("generator: could not draw an independent input " + std::to_string(i), {});
    xs.insert(xs.end(), dir.begin(), dir.end());
  }
  CounterRng t = targets_root;
  std::vector<double> ys(spec.m);
  for (auto& y : ys) y = t.normal();
  Dataset data(spec.d, std::move(xs), std::move(ys));
  require_nondegenerate(data);
  return data;
}

enum class EnvelopeKind { capital_lambda, sum_over_m };

inline const char* to_string(EnvelopeKind k) noexcept {
  return k == EnvelopeKind::capital_lambda ? "capital-lambda" : "sum-over-m";
}

inline EnvelopeKind parse_envelope(const std::string& s) {
  if (s == "capital-lambda") return EnvelopeKind::capital_lambda;
  if (s == "sum-over-m") return EnvelopeKind::sum_over_m;
  throw DomainError("envelope must be capital-lambda or sum-over-m, got '" + s + "'");
}

inline GramMethod parse_gram_method(const std::string& s) {
  if (s == "closed" || s == "closed_form") return GramMethod::closed_form;
  if (s == "mc" || s == "monte_carlo") return GramMethod::monte_carlo;
  throw DomainError("gram method must be closed or mc, got '" + s + "'");
}

struct ExperimentConfig {
  std::optional<std::string> data_path;
  std::optional<GeneratorSpec> generator;
  std::size_t width = 1024;
  std::variant<double, std::string> eta = std::string("eta_max_cor");
  std::size_t steps = 100;
  double eps = 0.2;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  GramMethod gram_method = GramMethod::closed_form;
  std::size_t mc_samples = 1000000;
  std::size_t record_gram_every = 0;
  EnvelopeKind envelope = EnvelopeKind::capital_lambda;

  void validate() const {
    if (!data_path && !generator) throw DomainError("config: need either data or generator");
    if (width == 0) throw DomainError("config: width must be >= 1");
    if (trials == 0) throw DomainError("config: trials must be >= 1");
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("config: eps must lie in (0,1)");
    if (const double* e = std::get_if<double>(&eta)) {
      if (!(*e >= 0.0) || !std::isfinite(*e)) throw DomainError("config: eta must be finite and nonnegative");
    } else {
      const auto& name = std::get<std::string>(eta);
      if (name != "eta_max_cor" && name != "eta_max_thm" && name != "eta_max_cor_ln") {
        throw DomainError("config: unknown eta threshold '" + name + "'");
      }
    }
    if (gram_method == GramMethod::monte_carlo && mc_samples < kMinMonteCarloSamples) {
      throw DomainError("config: mc_samples must be >= " + std::to_string(kMinMonteCarloSamples));
    }
  }
};

inline GeneratorSpec generator_from_json(const json& j) {
  GeneratorSpec g;
  g.d = j.at("d").get<std::size_t>();
  g.m = j.at("m").get<std::size_t>();
  g.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("norm_range")) {
    const auto& r = j["norm_range"];
    if (!r.is_array() || r.size() != 2) throw DomainError("generator: norm_range must be [lo, hi]");
    g.norm_lo = r[0].get<double>();
    g.norm_hi = r[1].get<double>();
  }
  return g;
}

inline ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw DomainError("config must be a JSON object");
  if (j.contains("schema")) check_schema(j, "config");
  static const std::vector<std::string> known = {"schema", "data",       "generator",  "width",
                                                 "eta",    "steps",      "eps",        "trials",
                                                 "seed",   "gram_method", "mc_samples", "record_gram_every",
                                                 "envelope"};
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end()) throw DomainError("config: unknown key '" + key + "'");
  try {
    ExperimentConfig c;
    if (j.contains("data")) c.data_path = j["data"].get<std::string>();
    if (j.contains("generator")) c.generator = generator_from_json(j["generator"]);
    c.width = j.value("width", c.width);
    if (j.contains("eta")) {
      if (j["eta"].is_string()) {
        c.eta = j["eta"].get<std::string>();
      } else {
        c.eta = j["eta"].get<double>();
      }
    }
    c.steps = j.value("steps", c.steps);
    c.eps = j.value("eps", c.eps);
    c.trials = j.value("trials", c.trials);
    c.seed = j.value("seed", c.seed);
    if (j.contains("gram_method")) c.gram_method = parse_gram_method(j["gram_method"].get<std::string>());
    c.mc_samples = j.value("mc_samples", c.mc_samples);
    c.record_gram_every = j.value("record_gram_every", c.record_gram_every);
    if (j.contains("envelope")) c.envelope = parse_envelope(j["envelope"].get<std::string>());
    return c;
  } catch (const json::exception& e) {
    throw DomainError(std::string("config: ") + e.what());
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DomainError("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline Dataset load_dataset(const ExperimentConfig& config) {
  if (config.data_path) {
    try {
      return dataset_from_json(read_json_file(*config.data_path));
    } catch (const json::exception& e) {
      throw DomainError(std::string("dataset: ") + e.what());
    }
  }
  return generate_dataset(*config.generator);
}

inline DeterministicGram compute_gram(const Dataset& data, GramMethod method, std::size_t mc_samples,
                                      std::uint64_t seed) {
  require_nondegenerate(data);
  if (method == GramMethod::monte_carlo) return deterministic_gram_monte_carlo(data, mc_samples, seed);
  return deterministic_gram_closed_form(data);
}

inline double resolve_eta(const ExperimentConfig& config, const RateCertificate& cert) {
  if (const double* e = std::get_if<double>(&config.eta)) return *e;
  const auto& name = std::get<std::string>(config.eta);
  if (name == "eta_max_thm") return cert.thresholds.eta_max_thm;
  if (name == "eta_max_cor_ln") return cert.thresholds.eta_max_cor_ln;
  return cert.thresholds.eta_max_cor;
}

inline double rate_constant(EnvelopeKind kind, const RateCertificate& cert) {
  return kind == EnvelopeKind::capital_lambda ? cert.capital_lambda
                                              : (cert.lambda + cert.mu) / static_cast<double>(cert.m);
}

// Envelope (1 - eta rate)^n risk0 for n = 0..steps. A zero contraction gives
// the constant risk0; a contraction outside [0,1) has no envelope and yields NaN.
inline std::vector<double> envelope_series(double risk0, double eta, double rate, std::size_t steps) {
  std::vector<double> out(steps + 1);
  const double contraction = eta * rate;
  for (std::size_t n = 0; n <= steps; ++n) {
    if (contraction == 0.0) {
      out[n] = risk0;
    } else if (contraction > 0.0 && contraction < 1.0) {
      out[n] = rate_envelope(risk0, eta, rate, n);
    } else {
      out[n] = std::nan("");
    }
  }
  return out;
}

struct VerificationRun {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  bool diverged = false;
  std::size_t diverged_at = 0;
  bool envelope_capital_lambda = false;
  bool envelope_sum_over_m = false;
  bool monotone = false;
  double risk0 = 0.0;
  double final_risk = 0.0;
  // Recorded Gram steps whose combined drift max_k C ||dW_k|| + |dB_k| is at most R,
  // and whether the eigenvalue lower bounds held at all of them.
  std::size_t gram_steps_checked = 0;
  std::size_t gram_steps_total = 0;
  bool gram_lower_bounds_held = true;
  double min_ratio_G = INFINITY;  // min lambda_min(G(n)) / lambda over checked steps
  double min_ratio_H = INFINITY;
};

struct VerificationReport {
  std::size_t width = 0;
  std::size_t steps = 0;
  double eta = 0.0;
  double eps = 0.0;
  EnvelopeKind envelope = EnvelopeKind::capital_lambda;
  RateCertificate certificate;
  std::vector<VerificationRun> runs;

  double fraction(const bool VerificationRun::*field) const {
    std::size_t k = 0;
    for (const auto& r : runs) k += r.*field;
    return runs.empty() ? 0.0 : static_cast<double>(k) / static_cast<double>(runs.size());
  }
};

inline constexpr double kEigenvalueSlack = 1e-9;

// Seeded trainings from independent initializations; run t uses the seed
// CounterRng(seed).derive(trial, t).key(). Runs are executed in trial order.
inline VerificationReport verify_convergence(const Dataset& data, const DeterministicGram& dg,
                                             const ExperimentConfig& config) {
  config.validate();
  VerificationReport rep;
  rep.certificate = certify(data, dg, config.eps);
  rep.certificate.seed = config.seed;
  rep.width = config.width;
  rep.steps = config.steps;
  rep.eps = config.eps;
  rep.envelope = config.envelope;
  rep.eta = resolve_eta(config, rep.certificate);

  const double rate_cl = rate_constant(EnvelopeKind::capital_lambda, rep.certificate);
  const double rate_sm = rate_constant(EnvelopeKind::sum_over_m, rep.certificate);
  const CounterRng root(config.seed);
  TrainConfig tc{rep.eta, config.steps, 0, config.width, config.record_gram_every};

  for (std::size_t t = 0; t < config.trials; ++t) {
    VerificationRun run;
    run.trial = t;
    run.seed = root.derive(stream_tag::kTrial, t).key();
    tc.seed = run.seed;
    const auto net0 = initialize(data.input_dim, config.width, run.seed);
    try {
      const auto traj = train(net0, data, tc);
      run.risk0 = traj.records.front().risk;
      run.final_risk = traj.records.back().risk;
      const auto env_cl = envelope_series(run.risk0, rep.eta, rate_cl, config.steps);
      const auto env_sm = envelope_series(run.risk0, rep.eta, rate_sm, config.steps);
      run.envelope_capital_lambda = run.envelope_sum_over_m = run.monotone = true;
      for (std::size_t n = 0; n < traj.records.size(); ++n) {
        const auto& r = traj.records[n];
        run.envelope_capital_lambda = run.envelope_capital_lambda && r.risk <= env_cl[n];
        run.envelope_sum_over_m = run.envelope_sum_over_m && r.risk <= env_sm[n];
        if (n > 0) run.monotone = run.monotone && r.risk <= traj.records[n - 1].risk;
        if (!r.lambda_min_G) continue;
        ++run.gram_steps_total;
        if (r.max_combined_drift > rep.certificate.radius_R) continue;
        ++run.gram_steps_checked;
        run.min_ratio_G = std::min(run.min_ratio_G, *r.lambda_min_G / dg.lambda);
        run.min_ratio_H = std::min(run.min_ratio_H, *r.lambda_min_H / dg.mu);
        run.gram_lower_bounds_held = run.gram_lower_bounds_held &&
                                     *r.lambda_min_G >= dg.lambda / 2.0 - kEigenvalueSlack &&
                                     *r.lambda_min_H >= dg.mu / 2.0 - kEigenvalueSlack;
      }
    } catch (const DivergenceError& e) {
      run.diverged = true;
      run.diverged_at = e.step();
    }
    rep.runs.push_back(run);
  }
  return rep;
}

inline json to_json(const VerificationReport& rep) {
  json runs = json::array();
  for (const auto& r : rep.runs) {
    runs.push_back({{"trial", r.trial},
                    {"seed", r.seed},
                    {"diverged", r.diverged},
                    {"diverged_at", r.diverged ? json(r.diverged_at) : json(nullptr)},
                    {"envelope_held_capital_lambda", r.envelope_capital_lambda},
                    {"envelope_held_sum_over_m", r.envelope_sum_over_m},
                    {"monotone", r.monotone},
                    {"risk0", r.risk0},
                    {"final_risk", r.final_risk},
                    {"gram_steps_total", r.gram_steps_total},
                    {"gram_steps_within_R", r.gram_steps_checked},
                    {"gram_lower_bounds_held", r.gram_lower_bounds_held},
                    {"min_ratio_G", finite_or_null(r.min_ratio_G)},
                    {"min_ratio_H", finite_or_null(r.min_ratio_H)}});
  }
  const bool VerificationRun::*chosen = rep.envelope == EnvelopeKind::capital_lambda
                                            ? &VerificationRun::envelope_capital_lambda
                                            : &VerificationRun::envelope_sum_over_m;
  return {{"schema", schema_tag("verification")},
          {"trials", rep.runs.size()},
          {"width", rep.width},
          {"steps", rep.steps},
          {"eta", rep.eta},
          {"eps", rep.eps},
          {"target", 1.0 - rep.eps},
          {"envelope", to_string(rep.envelope)},
          {"fraction", rep.fraction(chosen)},
          {"fraction_capital_lambda", rep.fraction(&VerificationRun::envelope_capital_lambda)},
          {"fraction_sum_over_m", rep.fraction(&VerificationRun::envelope_sum_over_m)},
          {"fraction_monotone", rep.fraction(&VerificationRun::monotone)},
          {"fraction_diverged", rep.fraction(&VerificationRun::diverged)},
          {"rate_capital_lambda", rate_constant(EnvelopeKind::capital_lambda, rep.certificate)},
          {"rate_sum_over_m", rate_constant(EnvelopeKind::sum_over_m, rep.certificate)},
          {"certificate", to_json(rep.certificate)},
          {"runs", runs}};
}

}  // namespace relugd
