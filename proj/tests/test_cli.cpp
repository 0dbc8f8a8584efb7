#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifndef PEAKGAIN_CLI_PATH
#error "PEAKGAIN_CLI_PATH must be defined by the build"
#endif
#ifndef PEAKGAIN_SYSTEMS_DIR
#error "PEAKGAIN_SYSTEMS_DIR must be defined by the build"
#endif

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir() {
  const fs::path dir =
      fs::temp_directory_path() / ("peakgain_cli_" + std::to_string(getpid()));
  fs::create_directories(dir);
  return dir;
}

RunResult run_cli(const std::string& args) {
  static const fs::path dir = scratch_dir();
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string(PEAKGAIN_CLI_PATH) + " " + args + " > " +
                          out.string() + " 2> " + err.string();
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string system_file(const std::string& name) {
  return std::string(PEAKGAIN_SYSTEMS_DIR) + "/" + name;
}

fs::path write_file(const std::string& name, const std::string& content) {
  static const fs::path dir = scratch_dir();
  const fs::path p = dir / name;
  std::ofstream f(p);
  f << content;
  return p;
}

// Reads "<label>: <number>" from CLI output.
double printed_value(const std::string& text, const std::string& label) {
  const auto pos = text.find(label);
  REQUIRE(pos != std::string::npos);
  const auto colon = text.find(':', pos);
  REQUIRE(colon != std::string::npos);
  return std::stod(text.substr(colon + 1));
}

int count_lines(const std::string& text) {
  int lines = 0;
  for (char c : text) {
    if (c == '\n') ++lines;
  }
  return lines;
}

}  // namespace

TEST_CASE("exact subcommand prints the l1 norm", "[cli]") {
  const RunResult r = run_cli("exact " + system_file("high_damping.json"));
  REQUIRE(r.exit_code == 0);
  const double value = printed_value(r.out, "l1 norm");
  REQUIRE(std::abs(value - 0.3177) < 1e-3);
}

TEST_CASE("missing keys are named with exit code 2", "[cli]") {
  const fs::path bad = write_file(
      "missing_c.json", R"({"A": [[0, 1], [-4, -4]], "B": [0, 1]})");
  const RunResult r = run_cli("exact " + bad.string());
  REQUIRE(r.exit_code == 2);
  REQUIRE(r.err.find("\"C\"") != std::string::npos);
}

TEST_CASE("malformed files get parse diagnostics", "[cli]") {
  const fs::path bad = write_file("broken.json", "{ not json ]");
  const RunResult r = run_cli("exact " + bad.string());
  REQUIRE(r.exit_code == 2);
  REQUIRE(r.err.find("parse") != std::string::npos);
}

TEST_CASE("unstable systems are rejected naming the eigenvalue", "[cli]") {
  const fs::path unstable = write_file(
      "unstable.json",
      R"({"A": [[0, 1], [4, -4]], "B": [0, 1], "C": [1, 1]})");
  const RunResult r = run_cli("exact " + unstable.string());
  REQUIRE(r.exit_code == 2);
  REQUIRE(r.err.find("eigenvalue") != std::string::npos);
  REQUIRE(r.err.find("0.8284") != std::string::npos);
}

TEST_CASE("star subcommand reports kappa and the bound", "[cli]") {
  const RunResult r =
      run_cli("star " + system_file("high_damping.json") + " --degree 1");
  REQUIRE(r.exit_code == 0);
  REQUIRE(std::abs(printed_value(r.out, "kappa") - 4.0) < 1e-3);
  REQUIRE(std::abs(printed_value(r.out, "star norm") - 0.35355) < 1e-4);

  const RunResult verbose = run_cli("star " + system_file("stiff.json") +
                                    " --degree 1 --grid 16 --verbose");
  REQUIRE(verbose.exit_code == 0);
  REQUIRE(verbose.out.find("alpha") != std::string::npos);
  REQUIRE(count_lines(verbose.out) > 16);  // sweep table printed
}

TEST_CASE("degree 2 on a one-state system is rejected", "[cli]") {
  const fs::path scalar = write_file(
      "scalar.json", R"({"A": [[-1]], "B": [1], "C": [1]})");
  const RunResult r = run_cli("star " + scalar.string() + " --degree 2");
  REQUIRE(r.exit_code == 2);
  REQUIRE(r.err.find("degree 2") != std::string::npos);

  // Degree 1 still works and matches the closed form H* = 1.
  const RunResult ok = run_cli("star " + scalar.string() + " --degree 1");
  REQUIRE(ok.exit_code == 0);
  REQUIRE(std::abs(printed_value(ok.out, "star norm") - 1.0) < 1e-4);
}

TEST_CASE("worstcase writes a trajectory CSV", "[cli]") {
  static const fs::path dir = scratch_dir();
  const fs::path csv = dir / "traj.csv";
  const RunResult r = run_cli("worstcase " + system_file("high_damping.json") +
                              " --out " + csv.string());
  REQUIRE(r.exit_code == 0);
  REQUIRE(std::abs(printed_value(r.out, "peak output") - 0.3097) < 0.01);

  std::ifstream in(csv);
  std::string header;
  REQUIRE(std::getline(in, header));
  REQUIRE(header == "t,x1,x2,u,y");
  std::string row;
  int rows = 0;
  while (std::getline(in, row)) {
    if (!row.empty()) ++rows;
  }
  REQUIRE(rows == 5001);  // horizon 5, dt 1e-3, inclusive endpoints
}

TEST_CASE("short horizons warn that the peak was not reached", "[cli]") {
  const RunResult r = run_cli("worstcase " + system_file("high_damping.json") +
                              " --horizon 0.001");
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.err.find("may not have been reached") != std::string::npos);
}

TEST_CASE("tailsplit subcommand prints the decomposition", "[cli]") {
  const RunResult r = run_cli("tailsplit " + system_file("low_damping.json") +
                              " --t0 5 --degree 1");
  REQUIRE(r.exit_code == 0);
  const double head = printed_value(r.out, "head");
  const double tail = printed_value(r.out, "tail bound");
  const double total = printed_value(r.out, "total");
  REQUIRE(std::abs(head + tail - total) < 1e-9);
  REQUIRE(std::abs(total - 4.4043) < 0.05);
}

TEST_CASE("reachset emits boundary CSV for planar systems", "[cli]") {
  static const fs::path dir = scratch_dir();
  const fs::path csv = dir / "boundary.csv";
  const RunResult r = run_cli("reachset " + system_file("high_damping.json") +
                              " --degree 1 --samples 360 --out " +
                              csv.string());
  REQUIRE(r.exit_code == 0);
  std::ifstream in(csv);
  std::string header;
  REQUIRE(std::getline(in, header));
  REQUIRE(header == "theta,x1,x2");
  int rows = 0;
  std::string row;
  while (std::getline(in, row)) {
    if (!row.empty()) ++rows;
  }
  REQUIRE(rows == 360);

  const fs::path cube = write_file(
      "three_state.json",
      R"({"A": [[-1,0,0],[0,-2,0],[0,0,-3]], "B": [1,1,1], "C": [1,1,1]})");
  const RunResult rejected = run_cli("reachset " + cube.string());
  REQUIRE(rejected.exit_code == 2);
}

TEST_CASE("report runs every method and writes the machine file", "[cli]") {
  static const fs::path dir = scratch_dir();
  const fs::path json_path = dir / "report.json";
  const RunResult r = run_cli("report " + system_file("high_damping.json") +
                              " --out " + json_path.string());
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.out.find("exact l1") != std::string::npos);
  REQUIRE(r.err.find("WARNING") == std::string::npos);

  std::ifstream in(json_path);
  nlohmann::json report;
  in >> report;
  REQUIRE(report["system_name"] == "high-damping");
  REQUIRE(std::abs(report["exact"]["value"].get<double>() - 0.317668) < 1e-4);
  REQUIRE(std::abs(report["star_d1"].get<double>() - 0.353553) < 1e-3);
  REQUIRE(std::abs(report["star_d2"].get<double>() - 0.446898) < 5e-3);
  REQUIRE(std::abs(report["lower_bound"].get<double>() - 0.3097) < 0.01);
  REQUIRE(report["tail_split_rows"].size() == 2);
  REQUIRE(report["ordering_violations"].empty());
  REQUIRE(report["errors"].empty());
  REQUIRE(report.contains("settings"));
  REQUIRE(report.contains("timings"));
}

TEST_CASE("missing subcommand is an input error", "[cli]") {
  const RunResult r = run_cli("");
  REQUIRE(r.exit_code == 2);
}
