#include "disth2/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "disth2/report.hpp"

namespace disth2 {

namespace {

using nlohmann::json;

json parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::ParseError, "cannot open file: " + path.string());
  }
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.filename().string() + ": " + e.what());
  }
}

double require_positive(const json& j, const std::string& field, const std::string& origin) {
  if (!j.contains(field) || !j[field].is_number()) {
    throw Error(ErrorCode::ParseError, origin + ": field '" + field + "' must be a number");
  }
  const double v = j[field].get<double>();
  if (!std::isfinite(v) || v <= 0.0) {
    throw Error(ErrorCode::ParseError, origin + ": field '" + field + "' must be finite and > 0");
  }
  return v;
}

Matrix parse_inline_matrix(const json& j, const std::string& origin) {
  if (!j.is_array() || j.empty()) {
    throw Error(ErrorCode::ParseError, origin + ": matrix must be a nonempty array of rows");
  }
  const size_t rows = j.size();
  const size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) {
    throw Error(ErrorCode::ParseError, origin + ": matrix rows must be nonempty arrays");
  }
  Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      throw Error(ErrorCode::ParseError, origin + ": matrix rows have inconsistent length");
    }
    for (size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) {
        throw Error(ErrorCode::ParseError, origin + ": matrix entries must be numbers");
      }
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
  }
  if (!out.allFinite()) {
    throw Error(ErrorCode::ParseError, origin + ": matrix has non-finite entries");
  }
  return out;
}

DisturbanceSpec parse_disturbance(const json& j, const std::filesystem::path& base,
                                  const std::string& origin) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw Error(ErrorCode::ParseError, origin + ": disturbance needs a string 'kind'");
  }
  const std::string kind = j["kind"].get<std::string>();
  DisturbanceSpec spec;
  if (j.contains("scale")) {
    if (!j["scale"].is_number() || !std::isfinite(j["scale"].get<double>())) {
      throw Error(ErrorCode::ParseError, origin + ": disturbance scale must be finite");
    }
    spec.scale = j["scale"].get<double>();
  }
  if (kind == "zero") {
    spec.kind = DisturbanceSpec::Kind::Zero;
  } else if (kind == "impulse") {
    spec.kind = DisturbanceSpec::Kind::Impulse;
    if (!j.contains("channel") || !j["channel"].is_number_integer()) {
      throw Error(ErrorCode::ParseError, origin + ": impulse disturbance needs integer 'channel'");
    }
    spec.channel = j["channel"].get<int>();
  } else if (kind == "samples") {
    spec.kind = DisturbanceSpec::Kind::Samples;
    if (!j.contains("path") || !j["path"].is_string()) {
      throw Error(ErrorCode::ParseError, origin + ": samples disturbance needs string 'path'");
    }
    spec.samples_path = base / j["path"].get<std::string>();
  } else {
    throw Error(ErrorCode::ParseError,
                origin + ": disturbance kind must be zero|impulse|samples, got '" + kind + "'");
  }
  return spec;
}

}  // namespace

ProblemConfig load_config(const std::filesystem::path& path) {
  const json j = parse_file(path);
  const std::string origin = path.filename().string();
  if (!j.is_object()) {
    throw Error(ErrorCode::ParseError, origin + ": top level must be an object");
  }
  const std::filesystem::path base = path.has_parent_path()
                                         ? path.parent_path()
                                         : std::filesystem::path(".");

  ProblemConfig config;

  if (!j.contains("agent")) {
    throw Error(ErrorCode::ParseError, origin + ": missing 'agent'");
  }
  if (j["agent"].is_string()) {
    config.agent = load_agent(base / j["agent"].get<std::string>());
  } else if (j["agent"].is_object()) {
    config.agent = parse_agent_json(j["agent"].dump(), origin + ":agent");
  } else {
    throw Error(ErrorCode::ParseError, origin + ": 'agent' must be a path or an object");
  }

  if (!j.contains("graph")) {
    throw Error(ErrorCode::ParseError, origin + ": missing 'graph'");
  }
  if (j["graph"].is_string()) {
    config.graph = load_graph(base / j["graph"].get<std::string>());
  } else if (j["graph"].is_object()) {
    config.graph = parse_graph_json(j["graph"].dump(), origin + ":graph");
  } else {
    throw Error(ErrorCode::ParseError, origin + ": 'graph' must be a path or an object");
  }

  if (j.contains("gamma")) config.gamma = require_positive(j, "gamma", origin);

  if (j.contains("method")) {
    if (!j["method"].is_string()) {
      throw Error(ErrorCode::ParseError, origin + ": 'method' must be \"thm4\" or \"thm5\"");
    }
    const std::string name = j["method"].get<std::string>();
    if (name == "thm4") {
      config.method = Method::Thm4;
    } else if (name == "thm5") {
      config.method = Method::Thm5;
    } else {
      throw Error(ErrorCode::ParseError,
                  origin + ": 'method' must be \"thm4\" or \"thm5\", got '" + name + "'");
    }
  }

  if (j.contains("c")) {
    if (!j["c"].is_number() || !std::isfinite(j["c"].get<double>())) {
      throw Error(ErrorCode::ParseError, origin + ": 'c' must be a finite number");
    }
    config.c = j["c"].get<double>();
  }

  if (j.contains("gain")) {
    if (j["gain"].is_string()) {
      config.gain = load_gain(base / j["gain"].get<std::string>());
    } else {
      config.gain = parse_inline_matrix(j["gain"], origin + ":gain");
    }
  }

  if (j.contains("simulation")) {
    const json& s = j["simulation"];
    if (!s.is_object()) {
      throw Error(ErrorCode::ParseError, origin + ": 'simulation' must be an object");
    }
    SimulationConfig sim;
    sim.t_final = require_positive(s, "T", origin + ":simulation");
    sim.dt = require_positive(s, "dt", origin + ":simulation");
    if (s.contains("x0")) {
      if (!s["x0"].is_array() || s["x0"].empty()) {
        throw Error(ErrorCode::ParseError, origin + ": simulation x0 must be a nonempty array");
      }
      Vector x0(static_cast<Eigen::Index>(s["x0"].size()));
      for (size_t i = 0; i < s["x0"].size(); ++i) {
        if (!s["x0"][i].is_number()) {
          throw Error(ErrorCode::ParseError, origin + ": simulation x0 entries must be numbers");
        }
        x0[static_cast<Eigen::Index>(i)] = s["x0"][i].get<double>();
      }
      if (!x0.allFinite()) {
        throw Error(ErrorCode::ParseError, origin + ": simulation x0 must be finite");
      }
      sim.x0 = x0;
    }
    if (s.contains("disturbance")) {
      sim.disturbance = parse_disturbance(s["disturbance"], base, origin + ":simulation");
    }
    config.simulation = sim;
  }

  return config;
}

Matrix load_gain(const std::filesystem::path& path) {
  const json j = parse_file(path);
  if (!j.is_object() || !j.contains("K")) {
    throw Error(ErrorCode::ParseError,
                path.filename().string() + ": gain file needs a top-level 'K' matrix");
  }
  return parse_inline_matrix(j["K"], path.filename().string() + ":K");
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Disconnected:
      return 2;
    case ErrorCode::GammaInfeasible:
    case ErrorCode::NotSynchronizing:
    case ErrorCode::NotStable:
    case ErrorCode::RiccatiFailure:
    case ErrorCode::NoConvergence:
    case ErrorCode::NotStabilizable:
    case ErrorCode::SingularLyapunov:
    case ErrorCode::DegenerateTrajectory:
      return 3;
    case ErrorCode::NotStandardForm:
      return 4;
    default:
      return 1;
  }
}

namespace {

CommandResult error_result(const char* command, const Error& e) {
  report::Object obj;
  obj.put("schema_version", "1");
  obj.put("command", command);
  obj.put("error", error_code_name(e.code()));
  obj.put("message", std::string(e.what()));
  if (e.code() == ErrorCode::GammaInfeasible && e.has_value()) {
    obj.put("min_feasible_gamma", e.value());
  }
  if (e.mode_index >= 0) {
    obj.put("first_unstable_mode", e.mode_index);
    if (e.has_value()) obj.put("mode_lambda", e.value());
  }
  CommandResult out;
  out.exit_code = exit_code_for(e.code());
  out.report = obj.str();
  return out;
}

std::vector<double> to_std(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::string coupling_range_json(const CouplingRange& range) {
  report::Object obj;
  obj.put("lower", range.lower);
  obj.put("upper", range.upper);
  obj.put("upper_inclusive", range.upper_inclusive);
  return obj.inline_str();
}

}  // namespace

CommandResult run_spectrum(const ProblemConfig& config) {
  const Matrix l = laplacian(config.graph);
  const LaplacianSpectrum spec = spectrum(l);
  const bool connected = is_connected(config.graph);

  report::Object obj;
  obj.put("schema_version", "1");
  obj.put("command", "spectrum");
  obj.put("nodes", config.graph.node_count);
  obj.put("edge_count", config.graph.edge_count());
  obj.put("connected", connected);
  obj.put_raw("eigenvalues", report::array_json(to_std(spec.eigenvalues)));
  if (spec.size() >= 2) {
    obj.put("lambda_2", spec.eigenvalues[1]);
    obj.put("lambda_n", spec.lambda_max());
  } else {
    obj.put_null("lambda_2");
    obj.put_null("lambda_n");
  }

  CommandResult out;
  out.exit_code = connected ? 0 : 2;
  out.report = obj.str();
  return out;
}

CommandResult run_design(const ProblemConfig& config) {
  try {
    if (!config.gamma) {
      throw Error(ErrorCode::ParseError, "design: config is missing 'gamma'");
    }
    if (!config.method) {
      throw Error(ErrorCode::ParseError, "design: config is missing 'method'");
    }
    if (!is_connected(config.graph)) {
      throw Error(ErrorCode::Disconnected, "design: graph is not connected");
    }
    const LaplacianSpectrum spec = spectrum(laplacian(config.graph));
    const double gamma = *config.gamma;
    const Method method = *config.method;
    const CouplingRange range = coupling_range(method, spec.lambda2(), spec.lambda_max());

    report::Object obj;
    obj.put("schema_version", "1");
    obj.put("command", "design");
    obj.put("method", method_name(method));
    obj.put("gamma", gamma);
    obj.put("nodes", config.graph.node_count);
    obj.put("lambda_2", spec.lambda2());
    obj.put("lambda_n", spec.lambda_max());
    obj.put_raw("coupling_range", coupling_range_json(range));

    ProtocolGain gain;
    try {
      gain = design_protocol(config.agent, spec, gamma, method, config.c);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::GammaInfeasible) throw;
      obj.put("c", config.c ? *config.c : default_coupling(method, range));
      obj.put("certified", false);
      obj.put("error", error_code_name(e.code()));
      obj.put("trace_value", e.value() / static_cast<double>(spec.size() - 1));
      obj.put("trace_bound", gamma / static_cast<double>(spec.size() - 1));
      obj.put("min_feasible_gamma", e.value());
      obj.put("message", std::string(e.what()));
      CommandResult out;
      out.exit_code = 3;
      out.report = obj.str();
      return out;
    }

    const CostReport cert = certify_network(config.agent, spec, gain.K, gamma);
    NetworkRealization net = build_closed_loop(config.agent, config.graph, gain.K);
    const double j_global = global_cost(net);

    obj.put("c", gain.c);
    obj.put_raw("K", report::matrix_json(gain.K));
    obj.put_raw("P", report::matrix_json(gain.P));
    obj.put("trace_value", gain.trace_value);
    obj.put("trace_bound", gamma / static_cast<double>(spec.size() - 1));
    obj.put("certified", cert.certified);
    obj.put("sum_trace_certificate", cert.sum_trace);
    obj.put("certificate_eps", cert.eps);
    obj.put("J_global", j_global);
    obj.put_raw("J_modal", report::array_json(cert.J_modal));
    double worst_margin = 0.0;
    std::vector<double> margins;
    for (const CostCertificate& c : cert.per_mode_certificates) {
      margins.push_back(c.lyap_margin);
      worst_margin = std::min(worst_margin, c.lyap_margin);
    }
    obj.put_raw("certificate_lyap_margins", report::array_json(margins));
    obj.put("certificate_slack", gamma - cert.sum_trace);

    CommandResult out;
    out.exit_code = 0;
    out.report = obj.str();
    return out;
  } catch (const Error& e) {
    return error_result("design", e);
  }
}

CommandResult run_verify(const ProblemConfig& config, const Matrix& k) {
  try {
    if (!config.gamma) {
      throw Error(ErrorCode::ParseError, "verify: config is missing 'gamma'");
    }
    if (!is_connected(config.graph)) {
      throw Error(ErrorCode::Disconnected, "verify: graph is not connected");
    }
    const LaplacianSpectrum spec = spectrum(laplacian(config.graph));
    const double gamma = *config.gamma;

    const SyncReport sync = check_synchronization(config.agent, spec, k);

    report::Object obj;
    obj.put("schema_version", "1");
    obj.put("command", "verify");
    obj.put("gamma", gamma);
    obj.put_raw("K", report::matrix_json(k));
    obj.put("synchronized", sync.synchronized);
    obj.put_raw("mode_lambdas", report::array_json(sync.lambdas));
    obj.put_raw("mode_stable", report::array_json(sync.mode_stable));

    if (!sync.synchronized) {
      for (size_t i = 0; i < sync.mode_stable.size(); ++i) {
        if (!sync.mode_stable[i]) {
          obj.put("first_unstable_mode", static_cast<int>(i + 2));
          break;
        }
      }
      obj.put("certified", false);
      obj.put("error", error_code_name(ErrorCode::NotSynchronizing));
      CommandResult out;
      out.exit_code = 3;
      out.report = obj.str();
      return out;
    }

    const CostReport cert = certify_network(config.agent, spec, k, gamma);
    NetworkRealization net = build_closed_loop(config.agent, config.graph, k);
    const double j_quad = global_quadrature_cost(net);
    const double gap = std::abs(j_quad - cert.J_global) / std::max(1.0, cert.J_global);
    const bool agree = gap <= kOracleRelTol;

    obj.put("certified", cert.certified);
    obj.put("sum_trace_certificate", cert.sum_trace);
    obj.put("J_global", cert.J_global);
    obj.put_raw("J_modal", report::array_json(cert.J_modal));
    obj.put("quadrature_cost", j_quad);
    obj.put("oracle_relative_gap", gap);
    obj.put("oracle_tolerance", kOracleRelTol);
    obj.put("oracle_agreement", agree);

    CommandResult out;
    out.exit_code = agree ? 0 : 5;
    out.report = obj.str();
    return out;
  } catch (const Error& e) {
    return error_result("verify", e);
  }
}

CommandResult run_simulate(const ProblemConfig& config) {
  try {
    if (!config.simulation) {
      throw Error(ErrorCode::ParseError, "simulate: config is missing the 'simulation' block");
    }
    if (!is_connected(config.graph)) {
      throw Error(ErrorCode::Disconnected, "simulate: graph is not connected");
    }

    Matrix k;
    if (config.gain) {
      k = *config.gain;
    } else if (config.gamma && config.method) {
      const LaplacianSpectrum spec = spectrum(laplacian(config.graph));
      k = design_protocol(config.agent, spec, *config.gamma, *config.method, config.c).K;
    } else {
      throw Error(ErrorCode::ParseError,
                  "simulate: config needs 'gain', or 'gamma' and 'method' to design one");
    }

    NetworkRealization net = build_closed_loop(config.agent, config.graph, k);
    const SimulationConfig& sim = *config.simulation;
    Vector x0 = sim.x0 ? *sim.x0 : Vector::Zero(net.Atilde.rows());

    const Trajectory traj = simulate(net, x0, sim.disturbance, sim.t_final, sim.dt);

    report::Object obj;
    obj.put("schema_version", "1");
    obj.put("command", "simulate");
    obj.put_raw("K", report::matrix_json(k));
    obj.put("T", sim.t_final);
    obj.put("dt", sim.dt);
    obj.put("samples", static_cast<int>(traj.times.size()));

    bool degenerate = false;
    try {
      const SyncMetrics metrics = sync_metrics(traj);
      obj.put("final_disagreement", metrics.final_disagreement);
      obj.put("fitted_decay_rate", metrics.fitted_decay_rate);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateTrajectory) throw;
      degenerate = true;
      obj.put("final_disagreement", traj.disagreement[traj.disagreement.size() - 1]);
      obj.put_null("fitted_decay_rate");
    }
    obj.put("degenerate", degenerate);
    if (degenerate) {
      obj.put("note", "disagreement stayed below 1e-14; decay rate undefined");
    }

    CommandResult out;
    out.exit_code = 0;
    out.report = obj.str();
    std::ostringstream csv;
    write_trajectory_csv(traj, csv);
    out.csv = csv.str();
    return out;
  } catch (const Error& e) {
    return error_result("simulate", e);
  }
}

}  // namespace disth2
