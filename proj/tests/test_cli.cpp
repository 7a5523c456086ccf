#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kWorkDir = fs::temp_directory_path() / "qholo_cli_test";

int run(const std::string& args) {
  const std::string cmd = std::string(QHOLO_BINARY) + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

fs::path write_file(const std::string& name, const std::string& body) {
  const fs::path path = kWorkDir / name;
  std::ofstream out(path);
  out << body;
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream body;
  body << in.rdbuf();
  return body.str();
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

struct WorkDirSetup {
  WorkDirSetup() {
    fs::remove_all(kWorkDir);
    fs::create_directories(kWorkDir);
  }
} setup;

}  // namespace

TEST_CASE("help lists the subcommands and the schema location") {
  const fs::path out = kWorkDir / "help.txt";
  REQUIRE(std::system((std::string(QHOLO_BINARY) + " --help > " + out.string()).c_str()) == 0);
  const std::string help = slurp(out);
  for (const char* needle : {"evolve", "constraint", "sweep", "config_schema.json"})
    CHECK(help.find(needle) != std::string::npos);
}

TEST_CASE("evolve: constant potential never entangles") {
  const fs::path cfg = write_file("evolve_const.json", R"({
    "potential": {"kind": "constant", "value": 3.7},
    "trajectory": {"kind": "collinear_static", "x": 1.0, "dx": 0.01},
    "times": [0.0, 1.5, 30.0]
  })");
  const fs::path out = kWorkDir / "evolve_const.csv";
  REQUIRE(run("evolve --config " + cfg.string() + " --output " + out.string()) == 0);
  const auto rows = csv_rows(out);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"t", "phi", "concurrence"});
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(std::stod(rows[i][1]) == 0.0);
    CHECK(std::stod(rows[i][2]) == 0.0);
  }
}

TEST_CASE("evolve: collinear ladder phase values") {
  const fs::path cfg = write_file("evolve_ladder.json", R"({
    "potential": {"kind": "power_law", "lambda": 1.0, "alpha": 1.0},
    "trajectory": {"kind": "collinear_static", "x": 1.0, "dx": 0.01},
    "times": [0.0, 1.0]
  })");
  const fs::path out = kWorkDir / "evolve_ladder.csv";
  REQUIRE(run("evolve --config " + cfg.string() + " --output " + out.string()) == 0);
  const auto rows = csv_rows(out);
  REQUIRE(rows.size() == 3);
  CHECK(std::stod(rows[1][1]) == 0.0);
  CHECK(std::abs(std::stod(rows[2][1]) - 1.0 / 5151.0) < 1e-12);
}

TEST_CASE("evolve: output path from the config and stdout fallback") {
  const fs::path out = kWorkDir / "from_config.csv";
  const fs::path cfg = write_file("evolve_outfield.json", std::string(R"({
    "potential": {"kind": "constant", "value": 1.0},
    "trajectory": {"kind": "collinear_static", "x": 1.0, "dx": 0.0},
    "times": [0.0],
    "output": ")") + out.string() + "\"}");
  REQUIRE(run("evolve --config " + cfg.string()) == 0);
  CHECK(fs::exists(out));

  const fs::path redirected = kWorkDir / "stdout.csv";
  const fs::path cfg2 = write_file("evolve_stdout.json", R"({
    "potential": {"kind": "constant", "value": 1.0},
    "trajectory": {"kind": "collinear_static", "x": 1.0, "dx": 0.0},
    "times": [0.0]
  })");
  REQUIRE(std::system((std::string(QHOLO_BINARY) + " evolve --config " + cfg2.string() + " > " +
                       redirected.string() + " 2>/dev/null")
                          .c_str()) == 0);
  CHECK(csv_rows(redirected).size() == 2);
}

TEST_CASE("evolve: sampled trajectory from CSV") {
  write_file("traj.csv",
             "t,a1x,a1y,a1z,a2x,a2y,a2z,b1x,b1y,b1z,b2x,b2y,b2z\n"
             "0,0,0,0,1,0,0,0,0,2,1,0,2\n"
             "5,0,0,0,1,0,0,0,0,3,1,0,3\n");
  const fs::path cfg = write_file("evolve_sampled.json", R"({
    "potential": {"kind": "power_law", "lambda": 1.0, "alpha": 1.0},
    "trajectory": {"kind": "sampled", "csv": "traj.csv"},
    "times": [0.0, 2.5, 4.9]
  })");
  const fs::path out = kWorkDir / "evolve_sampled.csv";
  REQUIRE(run("evolve --config " + cfg.string() + " --output " + out.string()) == 0);
  CHECK(csv_rows(out).size() == 4);
}

TEST_CASE("exit code 2: malformed JSON, no output written") {
  const fs::path cfg = write_file("broken.json", "{ not json");
  const fs::path out = kWorkDir / "broken.csv";
  CHECK(run("evolve --config " + cfg.string() + " --output " + out.string()) == 2);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("exit code 2: missing file, missing fields, bad values") {
  CHECK(run("evolve --config " + (kWorkDir / "nonexistent.json").string()) == 2);
  const fs::path no_times = write_file("no_times.json", R"({
    "potential": {"kind": "constant", "value": 1.0},
    "trajectory": {"kind": "collinear_static", "x": 1.0, "dx": 0.0}
  })");
  CHECK(run("evolve --config " + no_times.string()) == 2);
  const fs::path bad_alpha = write_file("bad_alpha.json", R"({
    "potential": {"kind": "power_law", "lambda": 1.0, "alpha": -2.0},
    "trajectory": {"kind": "collinear_static", "x": 1.0, "dx": 0.0},
    "times": [0.0]
  })");
  CHECK(run("evolve --config " + bad_alpha.string()) == 2);
  CHECK(run("evolve") == 2);  // missing --config
}

TEST_CASE("exit code 3: time beyond the trajectory horizon") {
  const fs::path cfg = write_file("beyond.json", R"({
    "potential": {"kind": "power_law", "lambda": 1.0, "alpha": 1.0},
    "trajectory": {"kind": "rotating_approach", "L": 1.0, "v": 0.1, "omega": 0.0, "x0": 0.1},
    "times": [0.0, 12.0]
  })");
  const fs::path out = kWorkDir / "beyond.csv";
  CHECK(run("evolve --config " + cfg.string() + " --output " + out.string()) == 3);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("constraint: symmetric configuration sits in the constraint set") {
  const fs::path cfg = write_file("constraint_sym.json", R"({
    "potential": {"kind": "power_law", "lambda": 1.0, "alpha": 1.0},
    "configuration": {
      "r_a1": [0, 0, 0], "r_a2": [0, 0, 1],
      "r_b1": [0.7, 0.4, 2], "r_b2": [-0.7, -0.4, 2]
    }
  })");
  const fs::path out = kWorkDir / "constraint_sym.json.out";
  REQUIRE(run("constraint --config " + cfg.string() + " --output " + out.string()) == 0);
  const json report = json::parse(slurp(out));
  CHECK(report["in_constraint_set"].get<bool>());
  CHECK(std::abs(report["h"].get<double>()) < 1e-15);
}

TEST_CASE("constraint: generic configuration violates, constant potential never does") {
  const fs::path generic = write_file("constraint_generic.json", R"({
    "potential": {"kind": "power_law", "lambda": 1.0, "alpha": 1.0},
    "configuration": {
      "r_a1": [0, 0, 0], "r_a2": [-0.01, 0, 0],
      "r_b1": [1, 0, 0], "r_b2": [1.01, 0, 0]
    }
  })");
  const fs::path out = kWorkDir / "constraint_generic.out";
  REQUIRE(run("constraint --config " + generic.string() + " --output " + out.string()) == 0);
  const json report = json::parse(slurp(out));
  CHECK_FALSE(report["in_constraint_set"].get<bool>());
  CHECK(std::abs(report["h"].get<double>() - 1.0 / 5151.0) < 1e-12);
  CHECK(report["gradient_norm"].get<double>() > 0.0);

  const fs::path constant = write_file("constraint_const.json", R"({
    "potential": {"kind": "constant", "value": 42.0},
    "configuration": {
      "r_a1": [0, 0, 0], "r_a2": [-0.01, 0, 0],
      "r_b1": [1, 0, 0], "r_b2": [1.01, 0, 0]
    }
  })");
  REQUIRE(run("constraint --config " + constant.string() + " --output " + out.string()) == 0);
  const json const_report = json::parse(slurp(out));
  CHECK(const_report["in_constraint_set"].get<bool>());
  CHECK(const_report["gradient_norm"].get<double>() < 1e-10);
}

TEST_CASE("constraint: several configurations produce an array report") {
  const fs::path cfg = write_file("constraint_multi.json", R"({
    "potential": {"kind": "laurent", "coefficients": {"1": 1.0, "2": 0.5}},
    "configurations": [
      {"r_a1": [0, 0, 0], "r_a2": [0, 0, 1], "r_b1": [0.5, 0, 2], "r_b2": [-0.5, 0, 2]},
      {"r_a1": [0, 0, 0], "r_a2": [-0.01, 0, 0], "r_b1": [1, 0, 0], "r_b2": [1.01, 0, 0]}
    ]
  })");
  const fs::path out = kWorkDir / "constraint_multi.out";
  REQUIRE(run("constraint --config " + cfg.string() + " --output " + out.string()) == 0);
  const json report = json::parse(slurp(out));
  REQUIRE(report.is_array());
  REQUIRE(report.size() == 2);
  CHECK(report[0]["in_constraint_set"].get<bool>());
  CHECK_FALSE(report[1]["in_constraint_set"].get<bool>());
}

TEST_CASE("sweep: single-point grids produce a single converged row") {
  const fs::path cfg = write_file("sweep_single.json", R"({
    "echo": {
      "L": 1.0, "x0": 0.1,
      "v_grid": [0.05], "omega_grid": [0.2]
    }
  })");
  const fs::path out = kWorkDir / "sweep_single.csv";
  REQUIRE(run("sweep --config " + cfg.string() + " --output " + out.string()) == 0);
  const auto rows = csv_rows(out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::vector<std::string>{"omega", "v", "t_star", "t_bar", "phi2", "converged",
                                            "log10_phi2"});
  REQUIRE(rows[1].size() == 7);
  const double t_star = std::stod(rows[1][2]);
  const double t_bar = std::stod(rows[1][3]);
  const double phi2 = std::stod(rows[1][4]);
  CHECK(rows[1][5] == "1");
  CHECK(t_star > 0.0);
  CHECK(t_star < t_bar);
  CHECK(std::abs(std::stod(rows[1][6]) - std::log10(std::abs(phi2))) < 1e-12);
}

TEST_CASE("sweep: grid generators and per-record failure flags") {
  const fs::path cfg = write_file("sweep_grid.json", R"({
    "echo": {
      "L": 1.0, "x0": 0.1,
      "v_grid": {"start": 0.05, "stop": 0.4, "count": 4, "spacing": "geometric"},
      "omega_grid": [0.2]
    }
  })");
  const fs::path out = kWorkDir / "sweep_grid.csv";
  REQUIRE(run("sweep --config " + cfg.string() + " --output " + out.string()) == 0);
  const auto rows = csv_rows(out);
  REQUIRE(rows.size() == 5);
  CHECK(rows[1][5] == "1");   // v = 0.05 nulls before collision
  CHECK(rows[4][5] == "0");   // v = 0.4 collides first; flagged, not fatal
  CHECK(rows[4][2] == "nan");
}

TEST_CASE("sweep: rejects empty or non-positive grids") {
  const fs::path cfg = write_file("sweep_bad.json", R"({
    "echo": {"L": 1.0, "x0": 0.1, "v_grid": [-0.05], "omega_grid": [0.2]}
  })");
  CHECK(run("sweep --config " + cfg.string()) == 2);
}

TEST_CASE("re-running a command byte-reproduces the output") {
  const fs::path cfg = write_file("repro.json", R"({
    "echo": {
      "L": 1.0, "x0": 0.1,
      "v_grid": {"start": 0.03, "stop": 0.06, "count": 4},
      "omega_grid": [0.1, 0.2]
    }
  })");
  const fs::path out1 = kWorkDir / "repro1.csv";
  const fs::path out2 = kWorkDir / "repro2.csv";
  REQUIRE(run("sweep --config " + cfg.string() + " --output " + out1.string() + " --threads 1") == 0);
  REQUIRE(run("sweep --config " + cfg.string() + " --output " + out2.string() + " --threads 2") == 0);
  CHECK(slurp(out1) == slurp(out2));
  REQUIRE(run("sweep --config " + cfg.string() + " --output " + out2.string() + " --threads 1") == 0);
  CHECK(slurp(out1) == slurp(out2));
}
