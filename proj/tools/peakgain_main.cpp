// peakgain: certified peak-to-peak (l1) gain bounds for SISO LTI systems.
//
// Subcommands:
//   exact      adaptive quadrature of |h| with a certified tail bound
//   star       star-norm upper bound via degree-1 or degree-2 ellipsoids
//   worstcase  bang-bang lower bound trajectory
//   tailsplit  head quadrature + shifted-system star-norm tail
//   reachset   boundary of the optimal inescapable set as CSV (n = 2)
//   report     all methods, human table + machine-readable file
//
// Exit codes: 0 success, 2 input validation, 3 numerical failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "peakgain/linalg.hpp"
#include "peakgain/model.hpp"
#include "peakgain/oracle.hpp"
#include "peakgain/starnorm.hpp"
#include "peakgain/tailsplit.hpp"

namespace {

using nlohmann::json;
using namespace peakgain;

// Thrown for anything wrong with user-supplied input (exit code 2).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_vector(const json& node, const std::string& key) {
  std::vector<double> out;
  if (!node.is_array()) {
    throw InputError("key \"" + key + "\" must be an array of numbers");
  }
  for (const json& item : node) {
    if (item.is_number()) {
      out.push_back(item.get<double>());
    } else if (item.is_array() && item.size() == 1 && item[0].is_number()) {
      out.push_back(item[0].get<double>());  // accept column form [[b1],...]
    } else {
      throw InputError("key \"" + key + "\" must contain only numbers");
    }
  }
  return out;
}

LtiSystem load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open system file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("malformed system file " + path + ": " + e.what());
  }
  for (const char* key : {"A", "B", "C"}) {
    if (!j.contains(key)) {
      throw InputError("system file " + path + ": missing \"" + key +
                       "\" key");
    }
  }
  if (!j["A"].is_array() || j["A"].empty()) {
    throw InputError("key \"A\" must be a non-empty array of rows");
  }
  const std::size_t n = j["A"].size();
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double> row =
        parse_vector(j["A"][i], "A[" + std::to_string(i) + "]");
    if (row.size() != n) {
      throw InputError("key \"A\" must be a square matrix: row " +
                       std::to_string(i) + " has " +
                       std::to_string(row.size()) + " entries, expected " +
                       std::to_string(n));
    }
    for (std::size_t k = 0; k < n; ++k) a(i, k) = row[k];
  }
  const std::vector<double> bvec = parse_vector(j["B"], "B");
  const std::vector<double> cvec = [&] {
    // Accept either [c1,...,cn] or the explicit row form [[c1,...,cn]].
    if (j["C"].is_array() && j["C"].size() == 1 && j["C"][0].is_array()) {
      return parse_vector(j["C"][0], "C");
    }
    return parse_vector(j["C"], "C");
  }();
  if (bvec.size() != n) {
    throw InputError("key \"B\" must have " + std::to_string(n) +
                     " entries, got " + std::to_string(bvec.size()));
  }
  if (cvec.size() != n) {
    throw InputError("key \"C\" must have " + std::to_string(n) +
                     " entries, got " + std::to_string(cvec.size()));
  }
  std::string name = j.value("name", std::filesystem::path(path).stem().string());
  try {
    return make_system(a, Matrix::column(bvec), Matrix::row(cvec), name);
  } catch (const UnstableSystem& e) {
    throw InputError(std::string(e.what()));
  } catch (const std::invalid_argument& e) {
    throw InputError("system file " + path + ": " + e.what());
  }
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

void write_trajectory_csv(const std::string& path, const WorstCaseRun& run,
                          std::size_t n) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open output file: " + path);
  out << "t";
  for (std::size_t i = 1; i <= n; ++i) out << ",x" << i;
  out << ",u,y\n";
  out.precision(12);
  for (const TrajectorySample& s : run.trajectory) {
    out << s.t;
    for (double xi : s.x) out << "," << xi;
    out << "," << s.u << "," << s.y << "\n";
  }
}

int cmd_exact(const std::string& file, double tol) {
  const LtiSystem sys = load_system(file);
  const L1Estimate est = l1_exact(sys, tol);
  std::printf("system:            %s\n", sys.name.c_str());
  std::printf("l1 norm:           %.10f\n", est.value);
  std::printf("truncation time:   %.6f\n", est.truncation_time);
  std::printf("tail bound:        %.3e\n", est.tail_bound);
  std::printf("quadrature error:  %.3e\n", est.quadrature_error);
  return 0;
}

int cmd_star(const std::string& file, int degree, std::size_t grid,
             std::size_t refine, bool verbose) {
  const LtiSystem sys = load_system(file);
  if (degree == 2 && sys.n < 2) {
    throw InputError(
        "degree 2 requires at least two states: the lifted system and its "
        "S-procedure structure are empty for n = 1");
  }
  const SweepResult result = sweep(sys, degree, grid, refine);
  std::printf("system:     %s\n", sys.name.c_str());
  std::printf("degree:     %d\n", degree);
  std::printf("kappa:      %.10f\n", result.kappa);
  std::printf("best alpha: %.10f\n", result.best.alpha);
  std::printf("star norm:  %.10f\n", result.star_norm);
  if (verbose) {
    std::printf("\n%4s  %14s  %8s  %14s  %-14s %10s\n", "idx", "alpha",
                "feasible", "n_alpha", "status", "gap");
    for (std::size_t i = 0; i < result.points.size(); ++i) {
      const SweepPoint& pt = result.points[i];
      std::printf("%4zu  %14.8f  %8s  %14.8f  %-14s %10.2e\n", i, pt.alpha,
                  pt.feasible ? "yes" : "no",
                  pt.feasible ? pt.n_alpha : std::nan(""),
                  to_string(pt.solver_status), pt.duality_gap);
    }
  }
  return 0;
}

int cmd_worstcase(const std::string& file, double dt,
                  std::optional<double> horizon,
                  const std::optional<std::string>& out) {
  const LtiSystem sys = load_system(file);
  if (!(dt > 0.0)) throw InputError("--dt must be positive");
  const double t_end = horizon.value_or(default_horizon(sys));
  if (!(t_end > 0.0)) throw InputError("--horizon must be positive");
  const Matrix shape = worst_case_default_shape(sys);
  const WorstCaseRun run = worst_case(sys, shape, dt, t_end);
  std::printf("system:      %s\n", sys.name.c_str());
  std::printf("dt:          %g\n", run.dt);
  std::printf("horizon:     %g\n", run.horizon);
  std::printf("peak output: %.10f\n", run.peak_output);
  std::printf("peak time:   %.6f\n", run.peak_time);
  if (run.peak_time >= 0.9 * run.horizon) {
    std::fprintf(stderr,
                 "warning: peak occurs at %.3f of the horizon; the true peak "
                 "may not have been reached, increase --horizon\n",
                 run.peak_time / run.horizon);
  }
  if (out) {
    write_trajectory_csv(*out, run, sys.n);
    std::printf("trajectory:  %s\n", out->c_str());
  }
  return 0;
}

int cmd_tailsplit(const std::string& file, double t0, int degree,
                  double quad_tol) {
  const LtiSystem sys = load_system(file);
  if (!(t0 > 0.0)) throw InputError("--t0 must be positive");
  if (degree == 2 && sys.n < 2) {
    throw InputError("degree 2 requires at least two states");
  }
  const TailSplitResult r = tail_split(sys, t0, degree, quad_tol);
  std::printf("system:     %s\n", sys.name.c_str());
  std::printf("t0:         %g\n", r.t0);
  std::printf("degree:     %d\n", r.degree);
  std::printf("head:       %.10f\n", r.head);
  std::printf("tail bound: %.10f\n", r.tail_bound);
  std::printf("total:      %.10f\n", r.total);
  return 0;
}

int cmd_reachset(const std::string& file, int degree, std::size_t samples,
                 const std::optional<std::string>& out) {
  const LtiSystem sys = load_system(file);
  if (sys.n != 2) {
    throw InputError("reachset requires a two-state system (got n = " +
                     std::to_string(sys.n) + ")");
  }
  if (samples == 0) throw InputError("--samples must be positive");
  const SweepResult result = sweep(sys, degree);
  const std::vector<std::array<double, 3>> boundary =
      ellipsoid_boundary(result.best, degree, samples);
  std::ostringstream csv;
  csv.precision(12);
  csv << "theta,x1,x2\n";
  for (const std::array<double, 3>& row : boundary) {
    csv << row[0] << "," << row[1] << "," << row[2] << "\n";
  }
  if (out) {
    std::ofstream f(*out);
    if (!f) throw InputError("cannot open output file: " + *out);
    f << csv.str();
    std::printf("wrote %zu boundary points to %s (degree %d, alpha %.8f)\n",
                boundary.size(), out->c_str(), degree, result.best.alpha);
  } else {
    std::cout << csv.str();
  }
  return 0;
}

struct SectionOutcome {
  bool ok = false;
  double value = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;
  std::string error;
};

template <typename Fn>
SectionOutcome run_section(Fn&& fn) {
  SectionOutcome outcome;
  const auto start = std::chrono::steady_clock::now();
  try {
    outcome.value = fn();
    outcome.ok = true;
  } catch (const std::exception& e) {
    outcome.error = e.what();
  }
  outcome.seconds = elapsed_seconds(start);
  return outcome;
}

int cmd_report(const std::string& file, const std::optional<std::string>& out,
               double exact_tol, std::size_t grid, std::size_t refine,
               double dt) {
  const LtiSystem sys = load_system(file);

  L1Estimate est;
  const SectionOutcome exact = run_section([&] {
    est = l1_exact(sys, exact_tol);
    return est.value;
  });
  const SectionOutcome d1 = run_section(
      [&] { return sweep(sys, 1, grid, refine).star_norm; });
  SectionOutcome d2;
  if (sys.n >= 2) {
    d2 = run_section([&] { return sweep(sys, 2, grid, refine).star_norm; });
  } else {
    d2.error = "degree 2 requires at least two states";
  }
  const double horizon = default_horizon(sys);
  const SectionOutcome lower = run_section([&] {
    return worst_case(sys, worst_case_default_shape(sys), dt, horizon)
        .peak_output;
  });

  struct TailRow {
    double t0;
    int degree;
    SectionOutcome outcome;
  };
  std::vector<TailRow> tail_rows;
  const double t0 = 1.0 / std::abs(sys.max_real_eigenvalue);
  for (int degree : {1, 2}) {
    if (degree == 2 && sys.n < 2) continue;
    TailRow row;
    row.t0 = t0;
    row.degree = degree;
    row.outcome =
        run_section([&] { return tail_split(sys, t0, degree).total; });
    tail_rows.push_back(row);
  }

  // Machine-checked ordering invariant: lower <= exact <= both upper bounds.
  std::vector<std::string> violations;
  if (lower.ok && exact.ok && lower.value > est.value + exact_tol) {
    violations.push_back("lower_bound > exact");
  }
  if (exact.ok && d1.ok && est.value > d1.value * (1.0 + 1e-9) + exact_tol) {
    violations.push_back("exact > star_d1");
  }
  if (exact.ok && d2.ok && est.value > d2.value * (1.0 + 1e-9) + exact_tol) {
    violations.push_back("exact > star_d2");
  }

  std::printf("system: %s (n = %zu)\n\n", sys.name.c_str(), sys.n);
  std::printf("  %-22s %14s  %10s\n", "method", "value", "seconds");
  auto print_row = [](const char* label, const SectionOutcome& s) {
    if (s.ok) {
      std::printf("  %-22s %14.6f  %10.3f\n", label, s.value, s.seconds);
    } else {
      std::printf("  %-22s %14s  %10.3f  [failed: %s]\n", label, "-",
                  s.seconds, s.error.c_str());
    }
  };
  print_row("exact l1", exact);
  print_row("star degree 1", d1);
  print_row("star degree 2", d2);
  print_row("worst-case lower", lower);
  for (const TailRow& row : tail_rows) {
    char label[64];
    std::snprintf(label, sizeof label, "tail-split t0=%g d=%d", row.t0,
                  row.degree);
    print_row(label, row.outcome);
  }
  for (const std::string& v : violations) {
    std::fprintf(stderr,
                 "WARNING: bound ordering invariant violated: %s -- results "
                 "are inconsistent and should not be trusted\n",
                 v.c_str());
  }

  json report;
  report["system_name"] = sys.name;
  report["exact"] = exact.ok
                        ? json{{"value", est.value},
                               {"tolerance", exact_tol},
                               {"truncation_time", est.truncation_time},
                               {"tail_bound", est.tail_bound},
                               {"quadrature_error", est.quadrature_error}}
                        : json(nullptr);
  report["star_d1"] = d1.ok ? json(d1.value) : json(nullptr);
  report["star_d2"] = d2.ok ? json(d2.value) : json(nullptr);
  report["lower_bound"] = lower.ok ? json(lower.value) : json(nullptr);
  report["tail_split_rows"] = json::array();
  for (const TailRow& row : tail_rows) {
    report["tail_split_rows"].push_back(
        {{"t0", row.t0},
         {"degree", row.degree},
         {"total", row.outcome.ok ? json(row.outcome.value) : json(nullptr)}});
  }
  report["settings"] = {{"exact_tolerance", exact_tol},
                        {"grid_points", grid},
                        {"refine_iterations", refine},
                        {"dt", dt},
                        {"horizon", horizon},
                        {"tail_split_t0", t0}};
  report["timings"] = {{"exact", exact.seconds},
                       {"star_d1", d1.seconds},
                       {"star_d2", d2.seconds},
                       {"lower_bound", lower.seconds}};
  report["ordering_violations"] = violations;
  json errors = json::object();
  if (!exact.ok) errors["exact"] = exact.error;
  if (!d1.ok) errors["star_d1"] = d1.error;
  if (!d2.ok) errors["star_d2"] = d2.error;
  if (!lower.ok) errors["lower_bound"] = lower.error;
  for (const TailRow& row : tail_rows) {
    if (!row.outcome.ok) {
      errors["tail_split_d" + std::to_string(row.degree)] = row.outcome.error;
    }
  }
  report["errors"] = errors;

  if (out) {
    std::ofstream f(*out);
    if (!f) throw InputError("cannot open output file: " + *out);
    f << report.dump(2) << "\n";
    std::printf("\nmachine report: %s\n", out->c_str());
  }

  const bool all_ok = exact.ok && d1.ok && lower.ok &&
                      (sys.n < 2 || d2.ok) &&
                      std::all_of(tail_rows.begin(), tail_rows.end(),
                                  [](const TailRow& r) { return r.outcome.ok; });
  return all_ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "peakgain: certified bounds on the peak-to-peak (l1) gain of stable "
      "SISO LTI systems"};
  app.require_subcommand(1);

  std::string file;
  double tol = 1e-6;
  int degree = 1;
  std::size_t grid = 64, refine = 40, samples = 360;
  bool verbose = false;
  double dt = 1e-3, t0 = 0.0, quad_tol = 1e-9;
  std::optional<double> horizon;
  std::optional<std::string> out;

  CLI::App* exact = app.add_subcommand("exact", "exact l1 norm by quadrature");
  exact->add_option("system", file, "system description file")->required();
  exact->add_option("--tol", tol, "relative tolerance (default 1e-6)");

  CLI::App* star = app.add_subcommand("star", "star-norm upper bound");
  star->add_option("system", file)->required();
  star->add_option("--degree", degree, "Lyapunov degree, 1 or 2")
      ->check(CLI::IsMember({1, 2}));
  star->add_option("--grid", grid, "alpha sweep grid points (default 64)");
  star->add_option("--refine", refine, "refinement iterations (default 40)");
  star->add_flag("--verbose", verbose, "print the full sweep table");

  CLI::App* wc = app.add_subcommand("worstcase", "bang-bang lower bound");
  wc->add_option("system", file)->required();
  wc->add_option("--dt", dt, "integration step (default 1e-3)");
  wc->add_option("--horizon", horizon,
                 "simulation horizon (default 10/|max real eigenvalue|)");
  wc->add_option("--out", out, "trajectory CSV path");

  CLI::App* ts = app.add_subcommand("tailsplit", "head + certified tail");
  ts->add_option("system", file)->required();
  ts->add_option("--t0", t0, "split time")->required();
  ts->add_option("--degree", degree, "tail star-norm degree, 1 or 2")
      ->check(CLI::IsMember({1, 2}));
  ts->add_option("--quad-tol", quad_tol, "head quadrature tolerance");

  CLI::App* reach = app.add_subcommand(
      "reachset", "boundary of the optimal inescapable set (n = 2)");
  reach->add_option("system", file)->required();
  reach->add_option("--degree", degree, "Lyapunov degree, 1 or 2")
      ->check(CLI::IsMember({1, 2}));
  reach->add_option("--samples", samples, "boundary directions (default 360)");
  reach->add_option("--out", out, "boundary CSV path (default: stdout)");

  CLI::App* report = app.add_subcommand("report", "run all methods");
  report->add_option("system", file)->required();
  report->add_option("--tol", tol, "exact-norm tolerance");
  report->add_option("--grid", grid, "alpha sweep grid points");
  report->add_option("--refine", refine, "refinement iterations");
  report->add_option("--dt", dt, "worst-case integration step");
  report->add_option("--out", out, "machine-readable report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (exact->parsed()) return cmd_exact(file, tol);
    if (star->parsed()) return cmd_star(file, degree, grid, refine, verbose);
    if (wc->parsed()) return cmd_worstcase(file, dt, horizon, out);
    if (ts->parsed()) return cmd_tailsplit(file, t0, degree, quad_tol);
    if (reach->parsed()) return cmd_reachset(file, degree, samples, out);
    if (report->parsed())
      return cmd_report(file, out, tol, grid, refine, dt);
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const UnstableSystem& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  }
  return 0;
}
