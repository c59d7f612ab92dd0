#pragma once

// JSON and CSV encodings of datasets, networks, Gram matrices, certificates,
// probe reports and trajectories. Every document carries a "schema" tag of
// the form "relugd.<kind>/<major>"; readers reject other kinds and unknown
// majors. Doubles are written as shortest round-trip decimals (JSON) or with
// 17 significant digits (CSV), so finite values round-trip bit-exactly.

#include <cstdio>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "relugd/certificates.hpp"
#include "relugd/errors.hpp"
#include "relugd/gram.hpp"
#include "relugd/network.hpp"
#include "relugd/probes.hpp"
#include "relugd/training.hpp"

namespace relugd {

using json = nlohmann::json;

inline constexpr int kSchemaMajor = 1;

inline std::string schema_tag(const std::string& kind) { return "relugd." + kind + "/" + std::to_string(kSchemaMajor); }

// Throws DomainError unless `tag` names `kind` with a supported major version.
inline void check_schema(const std::string& tag, const std::string& kind) {
  const std::string prefix = "relugd." + kind + "/";
  if (tag.rfind(prefix, 0) != 0) throw DomainError("expected schema " + prefix + "*, got '" + tag + "'");
  const std::string major = tag.substr(prefix.size());
  if (major != std::to_string(kSchemaMajor)) throw DomainError("unsupported " + kind + " schema major '" + major + "'");
}

inline void check_schema(const json& j, const std::string& kind) {
  if (!j.is_object() || !j.contains("schema") || !j["schema"].is_string()) {
    throw DomainError("document has no schema field (expected relugd." + kind + ")");
  }
  check_schema(j["schema"].get<std::string>(), kind);
}

namespace detail {

inline json matrix_rows(const SymMatrix& a) {
  json rows = json::array();
  for (std::size_t i = 0; i < a.order(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < a.order(); ++j) row.push_back(a(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline SymMatrix sym_from_rows(const json& rows) {
  const std::size_t n = rows.size();
  RectMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) throw DimensionError("matrix JSON is not square");
    for (std::size_t j = 0; j < n; ++j) a(i, j) = rows[i][j].get<double>();
  }
  return SymMatrix::from_square(a);
}

inline std::string csv_number(double v) {
  if (!std::isfinite(v)) return v != v ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

// ---- Dataset ---------------------------------------------------------------

inline json to_json(const Dataset& data) {
  json x = json::array();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto xi = data.x(i);
    x.push_back(std::vector<double>(xi.begin(), xi.end()));
  }
  return {{"schema", schema_tag("dataset")}, {"d", data.input_dim}, {"m", data.size()}, {"x", x}, {"y", data.targets}};
}

inline Dataset dataset_from_json(const json& j) {
  check_schema(j, "dataset");
  const auto d = j.at("d").get<std::size_t>();
  const auto m = j.at("m").get<std::size_t>();
  const auto& x = j.at("x");
  if (x.size() != m) throw DimensionError("dataset JSON: x has " + std::to_string(x.size()) + " rows, m = " + std::to_string(m));
  std::vector<double> inputs;
  inputs.reserve(m * d);
  for (const auto& row : x) {
    if (row.size() != d) throw DimensionError("dataset JSON: row length differs from d");
    for (const auto& v : row) inputs.push_back(v.get<double>());
  }
  auto y = j.at("y").get<std::vector<double>>();
  if (y.size() != m) throw DimensionError("dataset JSON: y length differs from m");
  return Dataset(d, std::move(inputs), std::move(y));
}

// ---- Network ---------------------------------------------------------------

inline json to_json(const ShallowReluNet& net) {
  json W = json::array();
  for (std::size_t k = 0; k < net.width; ++k) {
    const auto row = net.hidden_row(k);
    W.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return {{"schema", schema_tag("network")}, {"d", net.input_dim},       {"width", net.width},
          {"W", W},                          {"B", net.hidden_biases},   {"Wout", net.output_weights},
          {"bias_out", net.output_bias}};
}

inline ShallowReluNet network_from_json(const json& j) {
  check_schema(j, "network");
  ShallowReluNet net;
  net.input_dim = j.at("d").get<std::size_t>();
  net.width = j.at("width").get<std::size_t>();
  for (const auto& row : j.at("W")) {
    if (row.is_array()) {
      for (const auto& v : row) net.hidden_weights.push_back(v.get<double>());
    } else {
      net.hidden_weights.push_back(row.get<double>());
    }
  }
  net.hidden_biases = j.at("B").get<std::vector<double>>();
  net.output_weights = j.at("Wout").get<std::vector<double>>();
  net.output_bias = j.at("bias_out").get<double>();
  net.validate();
  return net;
}

// Flat parameter vector: W row-major, then B, then Wout, then bias_out.
inline std::vector<double> flatten(const ShallowReluNet& net) {
  std::vector<double> theta;
  theta.reserve(net.parameter_count());
  theta.insert(theta.end(), net.hidden_weights.begin(), net.hidden_weights.end());
  theta.insert(theta.end(), net.hidden_biases.begin(), net.hidden_biases.end());
  theta.insert(theta.end(), net.output_weights.begin(), net.output_weights.end());
  theta.push_back(net.output_bias);
  return theta;
}

inline ShallowReluNet unflatten(std::span<const double> theta, std::size_t d, std::size_t width) {
  ShallowReluNet net = ShallowReluNet::zeros(d, width);
  if (theta.size() != net.parameter_count()) throw DimensionError("unflatten: expected width*d + 2*width + 1 entries");
  auto it = theta.begin();
  std::copy_n(it, width * d, net.hidden_weights.begin());
  it += static_cast<std::ptrdiff_t>(width * d);
  std::copy_n(it, width, net.hidden_biases.begin());
  it += static_cast<std::ptrdiff_t>(width);
  std::copy_n(it, width, net.output_weights.begin());
  net.output_bias = theta.back();
  net.validate();
  return net;
}

// ---- Gram ------------------------------------------------------------------

inline json to_json(const DeterministicGram& dg) {
  json j = {{"schema", schema_tag("gram")},
            {"method", to_string(dg.method)},
            {"samples", dg.samples},
            {"seed", dg.seed},
            {"m", dg.Gbar.order()},
            {"G", detail::matrix_rows(dg.Gbar)},
            {"H", detail::matrix_rows(dg.Hbar)},
            {"lambda", dg.lambda},
            {"mu", dg.mu}};
  if (dg.standard_errors) j["standard_errors"] = detail::matrix_rows(*dg.standard_errors);
  return j;
}

inline DeterministicGram gram_from_json(const json& j) {
  check_schema(j, "gram");
  DeterministicGram dg;
  const auto method = j.at("method").get<std::string>();
  if (method == "closed_form") {
    dg.method = GramMethod::closed_form;
  } else if (method == "monte_carlo") {
    dg.method = GramMethod::monte_carlo;
  } else {
    throw DomainError("gram JSON: unknown method '" + method + "'");
  }
  dg.samples = j.at("samples").get<std::size_t>();
  dg.seed = j.at("seed").get<std::uint64_t>();
  dg.Gbar = detail::sym_from_rows(j.at("G"));
  dg.Hbar = detail::sym_from_rows(j.at("H"));
  dg.lambda = j.at("lambda").get<double>();
  dg.mu = j.at("mu").get<double>();
  if (j.contains("standard_errors")) dg.standard_errors = detail::sym_from_rows(j["standard_errors"]);
  return dg;
}

// ---- Certificate -----------------------------------------------------------

inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const RateCertificate& cert) {
  const auto& t = cert.thresholds;
  return {{"schema", schema_tag("certificate")},
          {"c", cert.c},
          {"C", cert.C},
          {"lambda", cert.lambda},
          {"mu", cert.mu},
          {"m", cert.m},
          {"d", cert.d},
          {"y_norm", cert.y_norm},
          {"sumsq_x", cert.sumsq_x},
          {"eps", cert.eps},
          {"capital_lambda", finite_or_null(cert.capital_lambda)},
          {"eta_max_thm", finite_or_null(t.eta_max_thm)},
          {"dmin_thm", finite_or_null(t.dmin_thm)},
          {"ln_condition_rhs", finite_or_null(t.ln_condition_rhs)},
          {"eta_max_cor_ln", finite_or_null(t.eta_max_cor_ln)},
          {"ln_condition_rhs_cor", finite_or_null(t.ln_condition_rhs_cor)},
          {"eta_max_cor", finite_or_null(t.eta_max_cor)},
          {"dmin_cor", finite_or_null(t.dmin_cor)},
          {"radius_R", finite_or_null(cert.radius_R)},
          {"event_width_min", finite_or_null(cert.event_width_min)},
          {"flags", cert.flags},
          {"provenance", {{"gram_method", to_string(cert.gram_method)}, {"mc_samples", cert.mc_samples}, {"seed", cert.seed}}}};
}

// ---- Probe report ----------------------------------------------------------

inline json to_json(const ProbeResult& r) {
  return {{"schema", schema_tag("probe")},
          {"name", r.name},
          {"samples", r.samples},
          {"statistic", finite_or_null(r.statistic)},
          {"bound", finite_or_null(r.bound_or_target)},
          {"se", finite_or_null(r.standard_error)},
          {"pass", r.pass},
          {"vacuous", r.vacuous},
          {"seed", r.seed},
          {"detail", r.detail}};
}

inline json to_json(const std::vector<ProbeResult>& results) {
  json arr = json::array();
  for (const auto& r : results) arr.push_back(to_json(r));
  return arr;
}

// Structural check of a probe report array; returns an empty string when valid.
inline std::string validate_probe_report(const json& report) {
  if (!report.is_array()) return "report is not an array";
  for (std::size_t i = 0; i < report.size(); ++i) {
    const auto& e = report[i];
    const std::string at = "entry " + std::to_string(i) + ": ";
    if (!e.is_object()) return at + "not an object";
    try {
      check_schema(e, "probe");
    } catch (const Error& ex) {
      return at + ex.what();
    }
    if (!e.contains("name") || !e["name"].is_string()) return at + "name must be a string";
    if (!e.contains("samples") || !e["samples"].is_number_unsigned()) return at + "samples must be unsigned";
    for (const char* key : {"statistic", "bound", "se"})
      if (!e.contains(key) || !(e[key].is_number() || e[key].is_null())) return at + key + " must be a number";
    for (const char* key : {"pass", "vacuous"})
      if (!e.contains(key) || !e[key].is_boolean()) return at + key + " must be a boolean";
    if (!e.contains("seed") || !e["seed"].is_number_unsigned()) return at + "seed must be unsigned";
  }
  return {};
}

// ---- Trajectory CSV --------------------------------------------------------

inline const std::vector<std::string>& trajectory_columns() {
  static const std::vector<std::string> cols = {"n",           "risk",        "sq_err",       "envelope",
                                                "max_drift_W", "max_drift_B", "lambda_min_G", "lambda_min_H"};
  return cols;
}

// First line is "# schema: relugd.trajectory/1", then the header row.
inline void write_trajectory_csv(std::ostream& os, const GDTrajectory& traj, const std::vector<double>& envelope) {
  if (envelope.size() != traj.records.size()) throw DimensionError("write_trajectory_csv: envelope length mismatch");
  os << "# schema: " << schema_tag("trajectory") << '\n';
  const auto& cols = trajectory_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
  os << '\n';
  for (std::size_t i = 0; i < traj.records.size(); ++i) {
    const auto& r = traj.records[i];
    os << r.n << ',' << detail::csv_number(r.risk) << ',' << detail::csv_number(r.squared_error) << ','
       << (std::isnan(envelope[i]) ? std::string() : detail::csv_number(envelope[i])) << ',' << detail::csv_number(r.max_drift_W) << ','
       << detail::csv_number(r.max_drift_B) << ',' << (r.lambda_min_G ? detail::csv_number(*r.lambda_min_G) : "")
       << ',' << (r.lambda_min_H ? detail::csv_number(*r.lambda_min_H) : "") << '\n';
  }
}

struct TrajectoryRow {
  std::size_t n = 0;
  double risk = 0.0;
  double sq_err = 0.0;
  double envelope = 0.0;  // NaN when the run has no envelope
  double max_drift_W = 0.0;
  double max_drift_B = 0.0;
  std::optional<double> lambda_min_G;
  std::optional<double> lambda_min_H;
};

inline std::vector<TrajectoryRow> read_trajectory_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw DomainError("trajectory CSV: empty input");
  const std::string prefix = "# schema: ";
  if (line.rfind(prefix, 0) != 0) throw DomainError("trajectory CSV: missing schema line");
  check_schema(line.substr(prefix.size()), "trajectory");
  if (!std::getline(is, line)) throw DomainError("trajectory CSV: missing header");
  {
    std::string expected;
    for (const auto& c : trajectory_columns()) expected += (expected.empty() ? "" : ",") + c;
    if (line != expected) throw DomainError("trajectory CSV: unexpected header '" + line + "'");
  }
  std::vector<TrajectoryRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != trajectory_columns().size()) throw DomainError("trajectory CSV: wrong column count");
    TrajectoryRow r;
    r.n = std::stoull(cells[0]);
    r.risk = std::stod(cells[1]);
    r.sq_err = std::stod(cells[2]);
    r.envelope = cells[3].empty() ? std::nan("") : std::stod(cells[3]);
    r.max_drift_W = std::stod(cells[4]);
    r.max_drift_B = std::stod(cells[5]);
    if (!cells[6].empty()) r.lambda_min_G = std::stod(cells[6]);
    if (!cells[7].empty()) r.lambda_min_H = std::stod(cells[7]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace relugd
