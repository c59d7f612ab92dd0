// relugd: dataset generation, training, certification, convergence
// verification and the probe suite from the command line.
//
// Exit codes: 0 success, 1 I/O or internal failure, 2 usage or validation
// error, 3 divergence, 4 probe failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "relugd/relugd.hpp"

namespace fs = std::filesystem;
using namespace relugd;

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kUsage = 2, kDiverged = 3, kProbeFailed = 4 };

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::optional<std::string> gram;
  std::optional<std::size_t> mc_samples;
  std::optional<std::string> envelope;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool needs_config) {
  auto* c = cmd->add_option("--config", f.config, "experiment config JSON");
  if (needs_config) c->required();
  cmd->add_option("--seed", f.seed, "master seed (overrides config)");
  cmd->add_option("--out", f.out, "output directory")->capture_default_str();
}

void add_gram(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--gram", f.gram, "deterministic Gram evaluation")->check(CLI::IsMember({"closed", "mc"}));
  cmd->add_option("--mc-samples", f.mc_samples, "Monte Carlo samples for --gram mc");
}

ExperimentConfig load_config(const CommonFlags& f) {
  ExperimentConfig c;
  if (!f.config.empty()) {
    c = config_from_json(read_json_file(f.config));
    // Dataset paths in a config are relative to the config file.
    if (c.data_path && fs::path(*c.data_path).is_relative())
      c.data_path = (fs::path(f.config).parent_path() / *c.data_path).string();
  }
  if (f.seed) c.seed = *f.seed;
  if (f.gram) c.gram_method = parse_gram_method(*f.gram);
  if (f.mc_samples) c.mc_samples = *f.mc_samples;
  if (f.envelope) c.envelope = parse_envelope(*f.envelope);
  return c;
}

fs::path output_file(const CommonFlags& f, const std::string& name) {
  fs::create_directories(f.out);
  return fs::path(f.out) / name;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << j.dump(2) << '\n';
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

int cmd_gen_data(const CommonFlags& f, std::optional<std::size_t> d, std::optional<std::size_t> m) {
  ExperimentConfig c = load_config(f);
  GeneratorSpec g = c.generator.value_or(GeneratorSpec{});
  if (f.seed) g.seed = *f.seed;
  if (d) g.d = *d;
  if (m) g.m = *m;
  const Dataset data = generate_dataset(g);
  const auto path = output_file(f, "dataset.json");
  write_json(path, to_json(data));
  std::cerr << "wrote " << path.string() << " (d=" << data.input_dim << ", m=" << data.size() << ")\n";
  return kOk;
}

int cmd_train(const CommonFlags& f) {
  const ExperimentConfig c = load_config(f);
  c.validate();
  const Dataset data = load_dataset(c);
  const DeterministicGram dg = compute_gram(data, c.gram_method, c.mc_samples, c.seed);
  RateCertificate cert = certify(data, dg, c.eps);
  cert.seed = c.seed;
  const double eta = resolve_eta(c, cert);
  const auto net0 = initialize(data.input_dim, c.width, c.seed);
  const auto traj = train(net0, data, {eta, c.steps, c.seed, c.width, c.record_gram_every});
  const auto env = envelope_series(traj.records.front().risk, eta, rate_constant(c.envelope, cert), c.steps);

  const auto csv_path = output_file(f, "trajectory.csv");
  std::ofstream os(csv_path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + csv_path.string());
  write_trajectory_csv(os, traj, env);
  os.close();
  const auto net_path = output_file(f, "final_net.json");
  write_json(net_path, to_json(traj.final_net));
  std::cerr << "eta=" << eta << " risk " << traj.records.front().risk << " -> " << traj.records.back().risk << "\n";
  return kOk;
}

int cmd_certify(const CommonFlags& f, const std::string& data_path, std::optional<double> eps) {
  ExperimentConfig c = load_config(f);
  if (!data_path.empty()) {
    c.data_path = data_path;
    c.generator.reset();
  }
  if (eps) c.eps = *eps;
  if (!(c.eps > 0.0 && c.eps < 1.0)) throw DomainError("eps must lie in (0,1)");
  c.validate();
  const Dataset data = load_dataset(c);
  const DeterministicGram dg = compute_gram(data, c.gram_method, c.mc_samples, c.seed);
  RateCertificate cert = certify(data, dg, c.eps);
  cert.seed = c.seed;
  write_json(output_file(f, "gram.json"), to_json(dg));
  const auto path = output_file(f, "certificate.json");
  write_json(path, to_json(cert));
  std::cerr << "lambda=" << cert.lambda << " mu=" << cert.mu << " Lambda=" << cert.capital_lambda << "\n";
  for (const auto& flag : cert.flags) std::cerr << "warning: " << flag << " is zero or non-finite\n";
  return kOk;
}

int cmd_verify(const CommonFlags& f) {
  const ExperimentConfig c = load_config(f);
  c.validate();
  const Dataset data = load_dataset(c);
  const DeterministicGram dg = compute_gram(data, c.gram_method, c.mc_samples, c.seed);
  const auto rep = verify_convergence(data, dg, c);
  const json j = to_json(rep);
  write_json(output_file(f, "verification.json"), j);
  std::cerr << "envelope held in " << j["fraction"].get<double>() * 100.0 << "% of " << rep.runs.size()
            << " runs (target " << (1.0 - c.eps) * 100.0 << "%)\n";
  return kOk;
}

int cmd_probes(const CommonFlags& f, const std::string& scale) {
  const ExperimentConfig c = load_config(f);
  const auto results = probe_suite(c.seed, scale == "full" ? ProbeScale::full : ProbeScale::quick);
  write_json(output_file(f, "probes.json"), to_json(results));
  int failed = 0;
  for (const auto& r : results) {
    std::cerr << (r.pass ? "pass " : "FAIL ") << (r.vacuous ? "(vacuous) " : "") << r.name << ": " << r.statistic
              << " vs " << r.bound_or_target << "\n";
    failed += !r.pass && !r.vacuous;
  }
  return failed ? kProbeFailed : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient descent for shallow rectified networks: training, Gram matrices, certificates, probes"};
  app.require_subcommand(1);

  CommonFlags gen_f, train_f, cert_f, verify_f, probe_f;
  std::optional<std::size_t> gen_d, gen_m;
  std::string cert_data;
  std::optional<double> cert_eps;
  std::string scale = "quick";

  auto* gen = app.add_subcommand("gen-data", "generate a validated dataset");
  add_common(gen, gen_f, false);
  gen->add_option("--d", gen_d, "input dimension (overrides config)");
  gen->add_option("--m", gen_m, "number of samples (overrides config)");

  auto* tr = app.add_subcommand("train", "run gradient descent and write the trajectory");
  add_common(tr, train_f, true);
  add_gram(tr, train_f);
  tr->add_option("--envelope", train_f.envelope, "rate constant of the envelope column")
      ->check(CLI::IsMember({"capital-lambda", "sum-over-m"}));

  auto* cert = app.add_subcommand("certify", "Gram eigenvalues and convergence thresholds for a dataset");
  add_common(cert, cert_f, false);
  add_gram(cert, cert_f);
  cert->add_option("--data", cert_data, "dataset JSON (overrides config)");
  cert->add_option("--eps", cert_eps, "failure probability in (0,1)");

  auto* ver = app.add_subcommand("verify-convergence", "multi-seed check of the convergence envelope");
  add_common(ver, verify_f, true);
  add_gram(ver, verify_f);
  ver->add_option("--envelope", verify_f.envelope, "envelope reported as 'fraction'")
      ->check(CLI::IsMember({"capital-lambda", "sum-over-m"}));

  auto* probe = app.add_subcommand("probe-lemmas", "Monte Carlo probes of the probabilistic lemmas");
  add_common(probe, probe_f, false);
  probe->add_option("--scale", scale, "quick (1e5 samples) or full (1e7)")
      ->check(CLI::IsMember({"quick", "full"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*gen) return cmd_gen_data(gen_f, gen_d, gen_m);
    if (*tr) return cmd_train(train_f);
    if (*cert) return cmd_certify(cert_f, cert_data, cert_eps);
    if (*ver) return cmd_verify(verify_f);
    if (*probe) return cmd_probes(probe_f, scale);
  } catch (const DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << "\n";
    return kDiverged;
  } catch (const ValidationError& e) {
    std::cerr << "invalid data: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}
