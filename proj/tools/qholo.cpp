// qholo: JSON-configured experiment runner around the qholo library.
// Subcommands: evolve (phase/concurrence time series), constraint (holonomic
// residual report), sweep (echo-protocol null-time sweep).
#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "qholo/qholo.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Configuration problems exit with code 2; numerical failures with code 3.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

double number_at(const json& j, const std::string& key) {
  require(j.contains(key) && j[key].is_number(), "expected number field \"" + key + "\"");
  return j[key].get<double>();
}

double number_or(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  require(j[key].is_number(), "field \"" + key + "\" must be a number");
  return j[key].get<double>();
}

int integer_or(const json& j, const std::string& key, int fallback) {
  if (!j.contains(key)) return fallback;
  require(j[key].is_number_integer(), "field \"" + key + "\" must be an integer");
  return j[key].get<int>();
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

qholo::Potential parse_potential(const json& j) {
  require(j.is_object() && j.contains("kind") && j["kind"].is_string(),
          "\"potential\" must be an object with a \"kind\" string");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "constant") {
    return qholo::ConstantPotential{number_at(j, "value")};
  }
  if (kind == "power_law") {
    const double lambda = number_at(j, "lambda");
    const double alpha = number_at(j, "alpha");
    require(alpha > 0.0, "power_law: \"alpha\" must be > 0");
    return qholo::PowerLawPotential{lambda, alpha};
  }
  if (kind == "laurent") {
    require(j.contains("coefficients") && j["coefficients"].is_object(),
            "laurent: expected object field \"coefficients\" mapping n -> c_n");
    qholo::LaurentPotential laurent;
    for (const auto& [key, value] : j["coefficients"].items()) {
      int n = 0;
      try {
        std::size_t used = 0;
        n = std::stoi(key, &used);
        require(used == key.size(), "");
      } catch (...) {
        throw ConfigError("laurent: coefficient key \"" + key + "\" is not an integer");
      }
      require(n >= 1, "laurent: term orders must be >= 1");
      require(value.is_number(), "laurent: coefficient for n = " + key + " must be a number");
      laurent.coefficients[n] = value.get<double>();
    }
    require(!laurent.coefficients.empty(), "laurent: needs at least one coefficient");
    return laurent;
  }
  throw ConfigError("unknown potential kind \"" + kind + "\"");
}

qholo::Vec3 parse_vec3(const json& j, const std::string& what) {
  require(j.is_array() && j.size() == 3 && j[0].is_number() && j[1].is_number() &&
              j[2].is_number(),
          what + " must be an array of 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

qholo::StateConfiguration parse_configuration(const json& j) {
  require(j.is_object(), "configuration must be an object");
  for (const char* key : {"r_a1", "r_a2", "r_b1", "r_b2"})
    require(j.contains(key), std::string("configuration: missing \"") + key + "\"");
  return {parse_vec3(j["r_a1"], "r_a1"), parse_vec3(j["r_a2"], "r_a2"),
          parse_vec3(j["r_b1"], "r_b1"), parse_vec3(j["r_b2"], "r_b2")};
}

qholo::SampledTrajectory load_sampled_csv(const fs::path& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open trajectory CSV " + path.string());
  qholo::SampledTrajectory s;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::vector<double> fields;
    std::string cell;
    bool numeric = true;
    while (std::getline(row, cell, ',')) {
      try {
        std::size_t used = 0;
        fields.push_back(std::stod(cell, &used));
      } catch (...) {
        numeric = false;
        break;
      }
    }
    if (!numeric && s.times.empty()) continue;  // header line
    require(numeric && fields.size() == 13,
            "trajectory CSV rows need 13 numeric fields: t plus 12 coordinates");
    s.times.push_back(fields[0]);
    s.configurations.push_back({{fields[1], fields[2], fields[3]},
                                {fields[4], fields[5], fields[6]},
                                {fields[7], fields[8], fields[9]},
                                {fields[10], fields[11], fields[12]}});
  }
  return s;
}

qholo::Trajectory parse_trajectory(const json& j, const fs::path& base_dir) {
  require(j.is_object() && j.contains("kind") && j["kind"].is_string(),
          "\"trajectory\" must be an object with a \"kind\" string");
  const std::string kind = j["kind"].get<std::string>();
  qholo::Trajectory traj;
  if (kind == "static") {
    require(j.contains("configuration"), "static trajectory: missing \"configuration\"");
    traj = qholo::StaticTrajectory{parse_configuration(j["configuration"])};
  } else if (kind == "collinear_static") {
    traj = qholo::CollinearStaticTrajectory{number_at(j, "x"), number_at(j, "dx")};
  } else if (kind == "rotating_approach") {
    traj = qholo::RotatingApproachTrajectory{number_at(j, "L"), number_at(j, "v"),
                                             number_at(j, "omega"), number_at(j, "x0")};
  } else if (kind == "sampled") {
    require(j.contains("csv") && j["csv"].is_string(),
            "sampled trajectory: expected string field \"csv\"");
    fs::path csv = j["csv"].get<std::string>();
    if (csv.is_relative()) csv = base_dir / csv;
    traj = load_sampled_csv(csv);
  } else {
    throw ConfigError("unknown trajectory kind \"" + kind + "\"");
  }
  try {
    qholo::validate(traj);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return traj;
}

qholo::QuadratureSpec parse_quadrature(const json& root) {
  qholo::QuadratureSpec spec;
  if (!root.contains("quadrature")) return spec;
  const json& j = root["quadrature"];
  require(j.is_object(), "\"quadrature\" must be an object");
  spec.absolute_tolerance = number_or(j, "absolute_tolerance", spec.absolute_tolerance);
  spec.relative_tolerance = number_or(j, "relative_tolerance", spec.relative_tolerance);
  if (j.contains("max_subdivisions")) {
    require(j["max_subdivisions"].is_number_integer(), "\"max_subdivisions\" must be an integer");
    spec.max_subdivisions = j["max_subdivisions"].get<long>();
  }
  require(spec.absolute_tolerance > 0 && spec.relative_tolerance > 0 &&
              spec.max_subdivisions >= 2,
          "quadrature: tolerances must be positive and max_subdivisions >= 2");
  return spec;
}

std::vector<double> parse_grid(const json& j, const std::string& what) {
  std::vector<double> grid;
  if (j.is_array()) {
    for (const auto& v : j) {
      require(v.is_number(), what + ": entries must be numbers");
      grid.push_back(v.get<double>());
    }
  } else if (j.is_object()) {
    const double start = number_at(j, "start");
    const double stop = number_at(j, "stop");
    const int count = integer_or(j, "count", 0);
    require(count >= 1, what + ": \"count\" must be >= 1");
    std::string spacing = "linear";
    if (j.contains("spacing")) {
      require(j["spacing"].is_string(), what + ": \"spacing\" must be a string");
      spacing = j["spacing"].get<std::string>();
    }
    if (spacing == "linear") {
      for (int i = 0; i < count; ++i)
        grid.push_back(count == 1 ? start : start + (stop - start) * i / double(count - 1));
    } else if (spacing == "geometric") {
      require(start > 0 && stop > 0, what + ": geometric spacing needs positive endpoints");
      for (int i = 0; i < count; ++i)
        grid.push_back(count == 1 ? start
                                  : start * std::pow(stop / start, i / double(count - 1)));
    } else {
      throw ConfigError(what + ": spacing must be \"linear\" or \"geometric\"");
    }
  } else {
    throw ConfigError(what + " must be an array or a {start, stop, count} object");
  }
  require(!grid.empty(), what + " must not be empty");
  return grid;
}

json load_config(const fs::path& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open config file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
}

void write_output(const std::string& body, const std::string& output_path) {
  if (output_path.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream out(output_path, std::ios::binary);
  if (!out.good()) throw std::runtime_error("cannot open output file " + output_path);
  out << body;
}

// ---------------------------------------------------------------------------

std::string run_evolve(const json& cfg, const fs::path& base_dir) {
  require(cfg.contains("potential"), "evolve: missing \"potential\"");
  require(cfg.contains("trajectory"), "evolve: missing \"trajectory\"");
  require(cfg.contains("times"), "evolve: missing \"times\"");
  const qholo::Potential potential = parse_potential(cfg["potential"]);
  const qholo::Trajectory traj = parse_trajectory(cfg["trajectory"], base_dir);
  const qholo::QuadratureSpec spec = parse_quadrature(cfg);
  const std::vector<double> times = parse_grid(cfg["times"], "\"times\"");
  for (const double t : times) require(t >= 0.0 && std::isfinite(t), "times must be finite and >= 0");

  const double t_max = qholo::horizon(traj);
  // One cumulative integral per basis state plus one for the entangling
  // combination; times are usually sampled densely, so prefixes get reused.
  using qholo::detail::distances_at_unchecked;
  auto theta = [&](int k) {
    return qholo::CumulativeIntegral(
        [&traj, &potential, k](double tau) {
          return qholo::eval(potential, distances_at_unchecked(traj, tau)[k]);
        },
        0.0, spec);
  };
  auto theta11 = theta(0), theta12 = theta(1), theta21 = theta(2), theta22 = theta(3);
  qholo::CumulativeIntegral phase(
      [&traj, &potential](double tau) {
        return qholo::constraint_residual(distances_at_unchecked(traj, tau), potential);
      },
      0.0, spec);

  std::ostringstream out;
  out << "t,phi,concurrence\n";
  for (const double t : times) {
    qholo::detail::require_in_horizon(t, t_max);
    const double phi = phase(t);
    qholo::TwoQubitState state;
    state.amplitudes[0] = 0.5 * std::polar(1.0, -theta11(t));
    state.amplitudes[1] = 0.5 * std::polar(1.0, -theta12(t));
    state.amplitudes[2] = 0.5 * std::polar(1.0, -theta21(t));
    state.amplitudes[3] = 0.5 * std::polar(1.0, -theta22(t));
    out << format_double(t) << ',' << format_double(phi) << ','
        << format_double(qholo::concurrence(state)) << '\n';
  }
  return out.str();
}

std::string constraint_report(const qholo::StateConfiguration& cfg,
                              const qholo::Potential& potential, double tolerance,
                              double step) {
  const double h = qholo::constraint_residual(cfg, potential);
  const double gradient_norm = qholo::constraint_gradient(cfg, potential, step).norm();
  std::ostringstream out;
  out << "{\"h\": " << format_double(h) << ", \"gradient_norm\": " << format_double(gradient_norm)
      << ", \"in_constraint_set\": " << (std::abs(h) <= tolerance ? "true" : "false") << "}";
  return out.str();
}

std::string run_constraint(const json& cfg, const fs::path&) {
  require(cfg.contains("potential"), "constraint: missing \"potential\"");
  const qholo::Potential potential = parse_potential(cfg["potential"]);
  const double tolerance = number_or(cfg, "tolerance", 1e-10);
  const double step = number_or(cfg, "gradient_step", 0.0);
  require(tolerance > 0.0, "\"tolerance\" must be positive");

  std::vector<qholo::StateConfiguration> configurations;
  if (cfg.contains("configuration")) {
    configurations.push_back(parse_configuration(cfg["configuration"]));
  } else if (cfg.contains("configurations")) {
    require(cfg["configurations"].is_array(), "\"configurations\" must be an array");
    for (const auto& c : cfg["configurations"]) configurations.push_back(parse_configuration(c));
  } else {
    throw ConfigError("constraint: missing \"configuration\" or \"configurations\"");
  }
  require(!configurations.empty(), "constraint: no configurations given");
  for (const auto& c : configurations)
    require(qholo::valid(c), "constraint: configuration has a non-positive cross distance");

  std::ostringstream out;
  if (configurations.size() == 1 && cfg.contains("configuration")) {
    out << constraint_report(configurations.front(), potential, tolerance, step) << '\n';
  } else {
    out << "[\n";
    for (std::size_t i = 0; i < configurations.size(); ++i)
      out << "  " << constraint_report(configurations[i], potential, tolerance, step)
          << (i + 1 < configurations.size() ? ",\n" : "\n");
    out << "]\n";
  }
  return out.str();
}

std::string run_sweep(const json& cfg, const fs::path&, int threads) {
  require(cfg.contains("echo") && cfg["echo"].is_object(), "sweep: missing \"echo\" object");
  const json& e = cfg["echo"];
  qholo::EchoParams base;
  base.initial_separation = number_at(e, "L");
  base.state_separation = number_at(e, "x0");
  base.leading_term = integer_or(e, "leading_term", 1);
  base.probe_term = integer_or(e, "probe_term", 2);
  base.leading_coefficient = number_or(e, "c_leading", 1.0);
  base.probe_coefficient = number_or(e, "c_probe", 1.0);
  require(base.initial_separation > 0.0, "echo: \"L\" must be > 0");
  require(base.state_separation > 0.0, "echo: \"x0\" must be > 0");
  require(base.leading_term >= 1, "echo: \"leading_term\" must be >= 1");
  require(base.probe_term > base.leading_term, "echo: \"probe_term\" must exceed \"leading_term\"");

  require(e.contains("v_grid"), "echo: missing \"v_grid\"");
  require(e.contains("omega_grid"), "echo: missing \"omega_grid\"");
  const std::vector<double> speeds = parse_grid(e["v_grid"], "\"v_grid\"");
  const std::vector<double> omegas = parse_grid(e["omega_grid"], "\"omega_grid\"");
  for (const double v : speeds) require(v > 0.0, "echo: all v must be > 0");
  for (const double w : omegas) require(w > 0.0, "echo: all omega must be > 0");

  const qholo::QuadratureSpec spec = parse_quadrature(cfg);
  const auto records = qholo::sweep(base, omegas, speeds, threads, spec);
  std::ostringstream out;
  qholo::write_sweep_csv(out, records, /*log10_column=*/true);
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "qholo: entanglement generated between two two-state bodies by a\n"
      "distance-dependent potential; holonomic constraint diagnostics; echo\n"
      "protocol sweeps isolating subleading multipole phases."};
  app.require_subcommand(1);
  app.footer("Config format: see docs/config_schema.json in the source tree.");

  std::string config_path;
  std::string output_path;
  int threads = 0;

  CLI::App* cmd_evolve =
      app.add_subcommand("evolve", "Phase and concurrence time series (CSV: t,phi,concurrence)");
  CLI::App* cmd_constraint =
      app.add_subcommand("constraint", "Holonomic residual report (JSON: h, gradient_norm, "
                                       "in_constraint_set)");
  CLI::App* cmd_sweep = app.add_subcommand(
      "sweep", "Echo-protocol (omega, v) sweep (CSV: omega,v,t_star,t_bar,phi2,converged,log10_phi2)");
  for (CLI::App* cmd : {cmd_evolve, cmd_constraint, cmd_sweep}) {
    cmd->add_option("--config", config_path, "JSON experiment configuration")->required();
    cmd->add_option("--output", output_path,
                    "Output path (default: \"output\" field in the config, else stdout)");
  }
  cmd_sweep->add_option("--threads", threads, "Worker threads for the sweep (0 = all cores)")
      ->envname("QHOLO_THREADS");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const fs::path config_file = config_path;
    const json cfg = load_config(config_file);
    require(cfg.is_object(), "config root must be a JSON object");
    if (output_path.empty() && cfg.contains("output")) {
      require(cfg["output"].is_string(), "\"output\" must be a string");
      output_path = cfg["output"].get<std::string>();
    }
    const fs::path base_dir = config_file.has_parent_path() ? config_file.parent_path() : ".";

    std::string body;
    if (cmd_evolve->parsed()) {
      body = run_evolve(cfg, base_dir);
    } else if (cmd_constraint->parsed()) {
      body = run_constraint(cfg, base_dir);
    } else {
      body = run_sweep(cfg, base_dir, threads);
    }
    write_output(body, output_path);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "qholo: config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "qholo: " << e.what() << '\n';
    return 3;
  }
}
