// Reproduction command line: `table1`, `sweep`, `conjecture`, `invariants`.
//
// Exit codes: 0 success, 2 invalid arguments, 3 I/O or internal failure,
// 4 invariant violation, 5 non-convergence beyond the --min-converged
// threshold.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "mmes/experiments.hpp"
#include "mmes/measures.hpp"
#include "mmes/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalidArgs = 2;
constexpr int kExitIo = 3;
constexpr int kExitInvariant = 4;
constexpr int kExitNonConverged = 5;

// "5", "4,6,9" or "4..9" (inclusive).
std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> values;
  const auto parse_one = [](const std::string& token) {
    std::size_t used = 0;
    const int v = std::stoi(token, &used);
    if (used != token.size()) throw std::invalid_argument("bad integer '" + token + "'");
    return v;
  };
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const int lo = parse_one(text.substr(0, dots));
    const int hi = parse_one(text.substr(dots + 2));
    if (hi < lo) throw std::invalid_argument("empty range '" + text + "'");
    for (int v = lo; v <= hi; ++v) values.push_back(v);
    return values;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string token =
        text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    values.push_back(parse_one(token));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return values;
}

// "0.001,0.01,0.1" or "log:1e-3:30:25".
std::vector<double> parse_budget_grid(const std::string& text) {
  if (text.rfind("log:", 0) == 0) {
    double lo = 0.0, hi = 0.0;
    int count = 0;
    if (std::sscanf(text.c_str(), "log:%lf:%lf:%d", &lo, &hi, &count) != 3) {
      throw std::invalid_argument("bad grid spec '" + text + "'; want log:LO:HI:COUNT");
    }
    return mmes::log_budget_grid(lo, hi, count);
  }
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string token =
        text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    std::size_t used = 0;
    values.push_back(std::stod(token, &used));
    if (used != token.size()) throw std::invalid_argument("bad number '" + token + "'");
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return values;
}

struct CommonOpts {
  std::string n_spec;
  int n_a = 0;  // 0 = balanced, floor(n/2)
  double budget = 10.0;
  std::string grid_spec;
  std::string mode = "restricted";
  int restarts = 64;
  std::uint64_t seed = 0;
  double tol = 1e-10;
  long max_iterations = 20000;
  std::string out;
  std::string format = "csv";
  int jobs = 0;
  double min_converged = 0.05;
};

void add_common_flags(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--mode", o.mode, "optimization family")
      ->check(CLI::IsMember({"restricted", "general"}))
      ->capture_default_str();
  cmd->add_option("--restarts", o.restarts, "multistart restarts per optimization")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--seed", o.seed, "master RNG seed")->capture_default_str();
  cmd->add_option("--tol", o.tol, "simplex convergence tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--max-iterations", o.max_iterations, "simplex iteration budget per restart")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--out", o.out, "output file path (stdout only when omitted)");
  cmd->add_option("--format", o.format, "output file format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  cmd->add_option("--jobs", o.jobs, "worker threads (0 = MMES_JOBS or hardware)")
      ->envname("MMES_JOBS")
      ->capture_default_str();
  cmd->add_option("--min-converged", o.min_converged,
                  "minimum accepted converged-restart fraction")
      ->capture_default_str();
}

mmes::OptConfig opt_config_from(const CommonOpts& o) {
  mmes::OptConfig cfg;
  cfg.restarts = o.restarts;
  cfg.max_iterations = static_cast<int>(o.max_iterations);
  cfg.convergence_tol = o.tol;
  cfg.seed = o.seed;
  cfg.jobs = o.jobs;
  return cfg;
}

mmes::OptimizationMode mode_from(const CommonOpts& o) {
  return o.mode == "general" ? mmes::OptimizationMode::general
                             : mmes::OptimizationMode::restricted;
}

// <out>.csv / <out>.json pair for commands that persist both.
std::pair<std::string, std::string> sibling_paths(const std::string& out) {
  std::string stem = out;
  const auto dot = stem.find_last_of('.');
  const auto sep = stem.find_last_of('/');
  if (dot != std::string::npos && (sep == std::string::npos || dot > sep)) {
    const std::string ext = stem.substr(dot);
    if (ext == ".csv" || ext == ".json") stem = stem.substr(0, dot);
  }
  return {stem + ".csv", stem + ".json"};
}

int check_convergence(const std::vector<double>& fractions, double threshold) {
  for (double f : fractions) {
    if (f < threshold) {
      std::fprintf(stderr,
                   "warning: converged-restart fraction %.3f below threshold %.3f; "
                   "raise --restarts or --max-iterations\n",
                   f, threshold);
      return kExitNonConverged;
    }
  }
  return kExitOk;
}

int cmd_table1(const CommonOpts& o, int alpha_restarts) {
  mmes::Table1Options topt;
  topt.opt = opt_config_from(o);
  topt.mode = mode_from(o);
  topt.alpha_restarts = alpha_restarts;
  topt.plateau_budget = o.budget;

  const std::vector<int> ns = parse_int_list(o.n_spec.empty() ? "4..9" : o.n_spec);
  for (int n : ns) {
    if (n < 4 || n > 9) {
      throw std::invalid_argument("table1: n must lie in 4..9, got " + std::to_string(n));
    }
  }

  const auto rows = mmes::run_table1(ns, topt);
  const std::string csv = mmes::table1_csv(rows);
  std::fputs(csv.c_str(), stdout);

  if (!o.out.empty()) {
    const auto [csv_path, json_path] = sibling_paths(o.out);
    mmes::write_file_atomic(csv_path, csv);
    mmes::write_file_atomic(json_path,
                            mmes::records_to_json(mmes::table1_records(rows, topt)));
    std::fprintf(stderr, "wrote %s and %s\n", csv_path.c_str(), json_path.c_str());
  }

  std::vector<double> fractions;
  for (const auto& r : rows) {
    const mmes::SweepPoint plateau{topt.plateau_budget, r.chi_min_n10,
                                   r.chi_converged_fraction};
    mmes::check_emitted_chi(mmes::SystemShape(r.n, r.n_a), {plateau});
    fractions.insert(fractions.end(), {r.alpha_tilde_converged_fraction,
                                       r.chi_converged_fraction, r.beta_converged_fraction});
  }
  return check_convergence(fractions, o.min_converged);
}

int cmd_sweep(const CommonOpts& o, bool gnuplot, bool budget_given) {
  const std::vector<int> ns = parse_int_list(o.n_spec.empty() ? "4" : o.n_spec);
  if (ns.size() != 1) throw std::invalid_argument("sweep: exactly one --n value expected");
  const int n = ns[0];
  const mmes::SystemShape shape(n, o.n_a > 0 ? o.n_a : n / 2);

  std::vector<double> grid;
  if (!o.grid_spec.empty()) {
    grid = parse_budget_grid(o.grid_spec);
  } else if (budget_given) {
    grid = {o.budget};
  } else {
    grid = mmes::log_budget_grid();
  }

  const mmes::OptConfig cfg = opt_config_from(o);
  const auto points = mmes::run_sweep(shape, grid, mode_from(o), cfg);
  const std::string csv = mmes::sweep_csv(points);
  std::fputs(csv.c_str(), stdout);

  if (!o.out.empty()) {
    if (o.format == "json") {
      mmes::write_file_atomic(o.out,
                              mmes::records_to_json(
                                  mmes::sweep_records(shape, points, mode_from(o), cfg)));
    } else {
      mmes::write_file_atomic(o.out, csv);
      if (gnuplot) {
        const auto [csv_path, json_path] = sibling_paths(o.out);
        (void)json_path;
        mmes::write_file_atomic(csv_path + ".gp", mmes::sweep_gnuplot_script(csv_path));
      }
    }
    std::fprintf(stderr, "wrote %s\n", o.out.c_str());
  }

  mmes::check_emitted_chi(shape, points);
  std::vector<double> fractions;
  for (const auto& p : points) fractions.push_back(p.converged_fraction);
  return check_convergence(fractions, o.min_converged);
}

int cmd_conjecture(const CommonOpts& o) {
  const std::vector<int> nas = parse_int_list(o.n_spec.empty() ? "2..4" : o.n_spec);
  const mmes::OptConfig cfg = opt_config_from(o);
  const auto rows = mmes::run_conjecture(nas, cfg);

  const std::string csv = mmes::conjecture_csv(rows);
  std::fputs(csv.c_str(), stdout);
  for (const auto& r : rows) {
    std::printf("n_a=%d: alpha_tilde(%d,%d) = %.6f vs conjectured %d (dev %.2e); "
                "ratio = %.6f vs %d/%d (dev %.2e)\n",
                r.n_a, 2 * r.n_a + 1, r.n_a, r.alpha_tilde_odd, r.n_a - 1, r.odd_deviation,
                r.ratio, 2 * r.n_a, 2 * r.n_a - 1, r.ratio_deviation);
  }

  if (!o.out.empty()) {
    if (o.format == "json") {
      mmes::write_file_atomic(o.out, mmes::records_to_json(mmes::conjecture_records(rows, cfg)));
    } else {
      mmes::write_file_atomic(o.out, csv);
    }
    std::fprintf(stderr, "wrote %s\n", o.out.c_str());
  }

  std::vector<double> fractions;
  for (const auto& r : rows) {
    fractions.push_back(r.even_converged_fraction);
    fractions.push_back(r.odd_converged_fraction);
  }
  return check_convergence(fractions, o.min_converged);
}

int cmd_invariants(const CommonOpts& o, int samples, bool negative_control) {
  const std::vector<int> ns = parse_int_list(o.n_spec.empty() ? "2..9" : o.n_spec);
  const auto report = mmes::run_invariants(ns, samples, o.seed, negative_control);
  const std::string text = report.text();
  std::fputs(text.c_str(), stdout);
  if (!o.out.empty()) {
    mmes::write_file_atomic(o.out, text);
    std::fprintf(stderr, "wrote %s\n", o.out.c_str());
  }
  return report.all_pass() ? kExitOk : kExitInvariant;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-state entanglement frustration reproduction"};
  app.set_version_flag("--version", MMES_VERSION_STRING);
  app.set_config("--config", "", "key = value configuration file");
  app.require_subcommand(1);

  CommonOpts table_opts, sweep_opts, conj_opts, inv_opts;
  int alpha_restarts = 8;
  bool gnuplot = false;
  int samples = 100;
  bool no_negative_control = false;

  CLI::App* table = app.add_subcommand(
      "table1", "summary table over balanced bipartitions: alpha, alpha_tilde, chi_min(N), beta");
  table->add_option("--n", table_opts.n_spec, "mode counts, e.g. 4..9 or 4,6,8")
      ->default_str("4..9");
  table->add_option("--N", table_opts.budget, "plateau-proxy energy budget")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  table->add_option("--alpha-restarts", alpha_restarts,
                    "restarts per point of the low-N slope grid")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_common_flags(table, table_opts);

  CLI::App* sweep = app.add_subcommand("sweep", "chi_min over an energy-budget grid");
  sweep->add_option("--n", sweep_opts.n_spec, "mode count")->default_str("4");
  sweep->add_option("--na", sweep_opts.n_a, "subsystem size (default: floor(n/2))")
      ->check(CLI::PositiveNumber);
  auto* budget_opt = sweep->add_option("--N", sweep_opts.budget, "single energy budget");
  budget_opt->check(CLI::NonNegativeNumber);
  sweep->add_option("--N-grid", sweep_opts.grid_spec,
                    "budget grid: comma list or log:LO:HI:COUNT (default log:1e-3:30:25)");
  sweep->add_flag("--gnuplot", gnuplot, "also emit a gnuplot script next to the CSV");
  add_common_flags(sweep, sweep_opts);

  CLI::App* conj = app.add_subcommand(
      "conjecture", "check the conjectured slope relations at (2n_A, n_A) and (2n_A+1, n_A)");
  conj->add_option("--na", conj_opts.n_spec, "subsystem sizes, e.g. 2..4")->default_str("2..4");
  add_common_flags(conj, conj_opts);

  CLI::App* inv = app.add_subcommand("invariants", "randomized algebraic-identity suite");
  inv->add_option("--n", inv_opts.n_spec, "mode counts, e.g. 2..9")->default_str("2..9");
  inv->add_option("--samples", samples, "random instances per mode count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  inv->add_flag("--no-negative-control", no_negative_control,
                "skip the corrupted-CM detection check");
  inv->add_option("--seed", inv_opts.seed, "master RNG seed")->capture_default_str();
  inv->add_option("--out", inv_opts.out, "report file path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);  // prints the error or the requested help text
    return rc == 0 ? kExitOk : kExitInvalidArgs;
  }

  try {
    if (table->parsed()) return cmd_table1(table_opts, alpha_restarts);
    if (sweep->parsed()) return cmd_sweep(sweep_opts, gnuplot, budget_opt->count() > 0);
    if (conj->parsed()) return cmd_conjecture(conj_opts);
    if (inv->parsed()) return cmd_invariants(inv_opts, samples, !no_negative_control);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInvalidArgs;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "invariant violation: %s\n", e.what());
    return kExitInvariant;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return kExitIo;
  }
  return kExitOk;
}
