#pragma once

// Reproduction drivers: the summary table over balanced bipartitions, the
// chi_min(N) sweeps, the slope-conjecture check, and the randomized
// invariant suite, plus the flat-file result persistence they share.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mmes/optimizer.hpp"
#include "mmes/types.hpp"

namespace mmes {

enum class RecordKind { alpha_tilde, beta, chi_min, alpha, conjecture, invariant };

std::string to_string(RecordKind kind);
RecordKind record_kind_from_string(const std::string& text);

// One published number with enough provenance to regenerate it.
struct ResultRecord {
  RecordKind kind = RecordKind::invariant;
  int n = 0;
  int n_a = 0;
  std::optional<double> mean_excitations;  // the budget N, when applicable
  double value = 0.0;
  std::optional<double> tolerance_target;
  std::uint64_t seed = 0;   // config fingerprint: seed + restarts + tol
  int restarts = 0;
  double tol = 0.0;
  std::string timestamp;    // ISO-8601 UTC
  std::string version;

  bool operator==(const ResultRecord&) const = default;
};

ResultRecord make_record(RecordKind kind, int n, int n_a, std::optional<double> mean_excitations,
                         double value, std::optional<double> tolerance_target,
                         const OptConfig& config);

// JSON persistence: an array of record objects, lossless for doubles.
std::string records_to_json(const std::vector<ResultRecord>& records);
std::vector<ResultRecord> records_from_json(const std::string& text);

enum class OutputFormat { csv, json };

// --- summary table -------------------------------------------------------

struct Table1Row {
  int n = 0;
  int n_a = 0;
  double alpha = 0.0;          // fitted low-N slope of chi_min - 1
  double alpha_tilde = 0.0;    // minimized quadratic-order bound
  double chi_min_n10 = 0.0;    // plateau proxy, chi_min at N = 10
  double beta = 0.0;           // plateau bound
  // provenance kept out of the CSV, carried in the JSON records
  double alpha_residual_rms = 0.0;
  double alpha_tilde_converged_fraction = 0.0;
  double chi_converged_fraction = 0.0;
  double beta_converged_fraction = 0.0;
};

struct Table1Options {
  OptConfig opt;                   // alpha_tilde / beta / chi_min budgets
  int alpha_restarts = 8;          // cheaper multistart for the slope grid
  std::vector<double> alpha_grid;  // empty = default_alpha_grid()
  double plateau_budget = 10.0;
  OptimizationMode mode = OptimizationMode::restricted;
};

Table1Row run_table1_row(int n, const Table1Options& options);
std::vector<Table1Row> run_table1(const std::vector<int>& n_values, const Table1Options& options);
std::string table1_csv(const std::vector<Table1Row>& rows);
std::vector<Table1Row> table1_rows_from_csv(const std::string& csv);
std::vector<ResultRecord> table1_records(const std::vector<Table1Row>& rows,
                                         const Table1Options& options);

// --- chi_min(N) sweeps ----------------------------------------------------

struct SweepPoint {
  double mean_excitations = 0.0;
  double chi_min = 0.0;
  double converged_fraction = 0.0;
};

// Logarithmic budget grid, endpoints included; the sweep default.
std::vector<double> log_budget_grid(double lo = 1e-3, double hi = 30.0, int count = 25);

std::vector<SweepPoint> run_sweep(const SystemShape& shape, const std::vector<double>& budgets,
                                  OptimizationMode mode, const OptConfig& config);
std::string sweep_csv(const std::vector<SweepPoint>& points);
std::vector<SweepPoint> sweep_points_from_csv(const std::string& csv);
std::vector<ResultRecord> sweep_records(const SystemShape& shape,
                                        const std::vector<SweepPoint>& points,
                                        OptimizationMode mode, const OptConfig& config);
std::string sweep_gnuplot_script(const std::string& csv_path);

// Every emitted chi_min must sit in [1 - 1e-6, 1/min_purity(n_A, N)];
// a point outside that band is an invariant violation (throws domain_error).
void check_emitted_chi(const SystemShape& shape, const std::vector<SweepPoint>& points);

// --- slope conjecture -----------------------------------------------------

struct ConjectureRow {
  int n_a = 0;
  double alpha_tilde_even = 0.0;    // shape (2 n_A, n_A)
  double alpha_tilde_odd = 0.0;     // shape (2 n_A + 1, n_A)
  double conjectured_odd = 0.0;     // n_A - 1
  double odd_deviation = 0.0;
  double ratio = 0.0;               // even / odd
  double conjectured_ratio = 0.0;   // 2 n_A / (2 n_A - 1)
  double ratio_deviation = 0.0;
  double even_converged_fraction = 0.0;
  double odd_converged_fraction = 0.0;
};

std::vector<ConjectureRow> run_conjecture(const std::vector<int>& n_a_values,
                                          const OptConfig& config);
std::string conjecture_csv(const std::vector<ConjectureRow>& rows);
std::vector<ConjectureRow> conjecture_rows_from_csv(const std::string& csv);
std::vector<ResultRecord> conjecture_records(const std::vector<ConjectureRow>& rows,
                                             const OptConfig& config);

// --- randomized invariant suite -------------------------------------------

struct InvariantCheck {
  std::string name;
  bool pass = false;
  double worst_residual = 0.0;
  double tolerance = 0.0;
};

struct InvariantReport {
  std::vector<InvariantCheck> checks;
  std::vector<int> n_values;
  int samples = 0;
  std::uint64_t seed = 0;

  bool all_pass() const;
  std::string text() const;  // the pass/fail report, one line per check
};

// Runs every algebraic identity on `samples` random instances per mode
// count. The negative control corrupts one CM entry by 1e-3 and passes
// iff the purity check catches it.
InvariantReport run_invariants(const std::vector<int>& n_values, int samples, std::uint64_t seed,
                               bool include_negative_control = true);

// --- persistence helpers ---------------------------------------------------

std::string iso8601_timestamp_utc();
std::string format_number(double value);  // 9 significant digits, period separator

// Write-temp-then-rename; throws std::runtime_error on any I/O failure.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace mmes
