// Acceptance gate: one pass/fail line per criterion, exit 0 only if all
// pass. Expensive optimization results are computed once and shared across
// criteria. Total runtime is dominated by the chi_min cascades and the
// slope fits; expect 10-15 minutes single-threaded.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmes/experiments.hpp"
#include "mmes/optimizer.hpp"
#include "mmes/types.hpp"

using namespace mmes;

namespace {

struct ShapeTarget {
  int n;
  int n_a;
  double alpha_tilde;  // exact 2 n_A (n_A - 1) / (n - 1)
  double beta;
  double chi_n10;
  int chi_restarts;  // multistart budget for the chi_min(N=10) search
};

// Published values for the balanced bipartitions n = 4..9. The (8,4) search
// has the rarest global basin and gets a doubled budget.
const std::vector<ShapeTarget> kTargets = {
    {4, 2, 1.333333, 1.666667, 1.663650, 32},  //
    {5, 2, 1.000000, 1.333333, 1.332326, 32},  //
    {6, 3, 2.400000, 2.795085, 2.780918, 32},  //
    {7, 3, 2.000000, 2.213586, 2.203228, 32},  //
    {8, 4, 3.428571, 6.074700, 5.980689, 64},  //
    {9, 4, 3.000000, 3.491497, 3.470522, 32},
};

constexpr double kPlateauBudget = 10.0;

struct Gate {
  int passed = 0;
  int failed = 0;

  void report(int index, bool ok, const std::string& what) {
    std::printf("[%s] criterion %2d: %s\n", ok ? "PASS" : "FAIL", index, what.c_str());
    std::fflush(stdout);
    (ok ? passed : failed) += 1;
  }
};

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

OptConfig config_with(int restarts, int jobs = 1, std::uint64_t seed = 0) {
  OptConfig cfg;
  cfg.restarts = restarts;
  cfg.jobs = jobs;
  cfg.seed = seed;
  return cfg;
}

std::string fmt(double v) { return format_number(v); }

}  // namespace

int main() {
  Gate gate;
  const double t_start = now_seconds();

  // ---- shared computations -------------------------------------------------

  // alpha_tilde at the default 64-restart budget (criteria 1, 5, 6, 10)
  std::vector<OptResult> alpha_tilde(kTargets.size());
  for (std::size_t i = 0; i < kTargets.size(); ++i) {
    alpha_tilde[i] =
        compute_alpha_tilde(SystemShape(kTargets[i].n, kTargets[i].n_a), config_with(64));
  }
  std::printf("-- alpha_tilde sweep done (%.0f s)\n", now_seconds() - t_start);
  std::fflush(stdout);

  // chi_min(N=10) cascades: restricted search, then the general-mode and
  // beta searches warm-started from the restricted optimum (criteria 2-4)
  std::vector<OptResult> chi_restricted_res(kTargets.size());
  std::vector<OptResult> chi_general_res(kTargets.size());
  std::vector<OptResult> beta_res(kTargets.size());
  for (std::size_t i = 0; i < kTargets.size(); ++i) {
    const ShapeTarget& t = kTargets[i];
    const SystemShape shape(t.n, t.n_a);
    const double t0 = now_seconds();

    chi_restricted_res[i] = compute_chi_min(shape, EnergyBudget(kPlateauBudget),
                                            OptimizationMode::restricted,
                                            config_with(t.chi_restarts));

    OptConfig general_cfg = config_with(16);
    Eigen::VectorXd start(t.n * t.n + t.n);
    start.head(t.n * t.n) = chi_restricted_res[i].best_params;
    start.tail(t.n).setConstant(0.5 * std::acosh(2.0 * kPlateauBudget + 1.0));
    general_cfg.warm_starts = {start};
    chi_general_res[i] =
        compute_chi_min(shape, EnergyBudget(kPlateauBudget), OptimizationMode::general,
                        general_cfg);

    OptConfig beta_cfg = config_with(t.chi_restarts);
    beta_cfg.warm_starts = {chi_restricted_res[i].best_params};
    beta_res[i] = compute_beta(shape, beta_cfg);

    std::printf("-- (%d,%d) cascade done: chi=%s general=%s beta=%s (%.0f s)\n", t.n, t.n_a,
                fmt(chi_restricted_res[i].best_value).c_str(),
                fmt(chi_general_res[i].best_value).c_str(), fmt(beta_res[i].best_value).c_str(),
                now_seconds() - t0);
    std::fflush(stdout);
  }

  // ---- criterion 1: published alpha_tilde values ------------------------------------
  {
    bool ok = true;
    std::string detail;
    for (std::size_t i = 0; i < kTargets.size(); ++i) {
      const double tol = kTargets[i].n <= 7 ? 1e-3 : 5e-3;
      const double err = std::abs(alpha_tilde[i].best_value - kTargets[i].alpha_tilde);
      if (err > tol) {
        ok = false;
        detail += " (" + std::to_string(kTargets[i].n) + "," + std::to_string(kTargets[i].n_a) +
                  "): " + fmt(alpha_tilde[i].best_value) + " vs " + fmt(kTargets[i].alpha_tilde);
      }
    }
    gate.report(1, ok, "alpha_tilde matches the published table" +
                           (ok ? std::string() : " --" + detail));
  }

  // ---- criterion 2: published beta values -------------------------------------------
  {
    bool ok = true;
    std::string detail;
    for (std::size_t i = 0; i < kTargets.size(); ++i) {
      const double tol = kTargets[i].n <= 7 ? 2e-3 : 5e-2;
      const double err = std::abs(beta_res[i].best_value - kTargets[i].beta);
      if (err > tol) {
        ok = false;
        detail += " (" + std::to_string(kTargets[i].n) + "," + std::to_string(kTargets[i].n_a) +
                  "): " + fmt(beta_res[i].best_value) + " vs " + fmt(kTargets[i].beta);
      }
    }
    gate.report(2, ok,
                "beta matches the published table" + (ok ? std::string() : " --" + detail));
  }

  // ---- criterion 3: published chi_min(N=10), general never above restricted --
  {
    bool ok = true;
    std::string detail;
    for (std::size_t i = 0; i < kTargets.size(); ++i) {
      const double rel =
          std::abs(chi_restricted_res[i].best_value - kTargets[i].chi_n10) / kTargets[i].chi_n10;
      const bool general_ok =
          chi_general_res[i].best_value <= chi_restricted_res[i].best_value + 1e-3;
      if (rel > 0.01 || !general_ok) {
        ok = false;
        detail += " (" + std::to_string(kTargets[i].n) + "," + std::to_string(kTargets[i].n_a) +
                  "): restricted " + fmt(chi_restricted_res[i].best_value) + " general " +
                  fmt(chi_general_res[i].best_value) + " target " + fmt(kTargets[i].chi_n10);
      }
    }
    gate.report(3, ok, "chi_min(N=10) matches the published table (rel 1%), general mode never "
                       "above restricted + 1e-3" +
                           (ok ? std::string() : " --" + detail));
  }

  // ---- criterion 4: ordering 1 < chi_min <= beta + 1e-3 ---------------------
  {
    bool ok = true;
    std::string detail;
    for (std::size_t i = 0; i < kTargets.size(); ++i) {
      const double chi_v = chi_restricted_res[i].best_value;
      if (!(chi_v > 1.0) || !(chi_v <= beta_res[i].best_value + 1e-3)) {
        ok = false;
        detail += " (" + std::to_string(kTargets[i].n) + "," + std::to_string(kTargets[i].n_a) +
                  "): chi " + fmt(chi_v) + " beta " + fmt(beta_res[i].best_value);
      }
    }
    gate.report(4, ok, "ordering 1 < chi_min(N=10) <= beta + 1e-3 for every shape" +
                           (ok ? std::string() : " --" + detail));
  }

  // ---- criterion 5: odd-shape conjecture ------------------------------------
  {
    // kTargets interleaves even (2 n_A, n_A) and odd (2 n_A + 1, n_A) shapes
    bool ok = true;
    std::string detail;
    for (int n_a : {2, 3, 4}) {
      const std::size_t even_idx = static_cast<std::size_t>(2 * (n_a - 2));
      const std::size_t odd_idx = even_idx + 1;
      const double odd_val = alpha_tilde[odd_idx].best_value;
      const double even_val = alpha_tilde[even_idx].best_value;
      const double odd_err = std::abs(odd_val - (n_a - 1.0));
      const double ratio_err = std::abs(even_val / odd_val - 2.0 * n_a / (2.0 * n_a - 1.0));
      if (odd_err > 5e-3 || ratio_err > 5e-3) {
        ok = false;
        detail += " n_A=" + std::to_string(n_a) + ": odd " + fmt(odd_val) + " ratio " +
                  fmt(even_val / odd_val);
      }
    }
    gate.report(5, ok, "alpha_tilde(2n_A+1, n_A) = n_A - 1 and even/odd ratio = 2n_A/(2n_A-1), "
                       "both within 5e-3" +
                           (ok ? std::string() : " --" + detail));
  }

  // ---- criterion 6: fitted slope vs alpha_tilde ------------------------------
  {
    bool ok = true;
    std::string detail;
    for (std::size_t i = 0; i < kTargets.size(); ++i) {
      const SlopeEstimate est = estimate_alpha(SystemShape(kTargets[i].n, kTargets[i].n_a),
                                               default_alpha_grid(),
                                               OptimizationMode::restricted, config_with(8));
      const double rel = std::abs(est.slope - alpha_tilde[i].best_value) /
                         alpha_tilde[i].best_value;
      if (rel > 0.05) {
        ok = false;
        detail += " (" + std::to_string(kTargets[i].n) + "," + std::to_string(kTargets[i].n_a) +
                  "): slope " + fmt(est.slope) + " vs " + fmt(alpha_tilde[i].best_value);
      }
    }
    gate.report(6, ok, "fitted low-energy slope within 5% of alpha_tilde for every shape" +
                           (ok ? std::string() : " --" + detail));
    std::printf("-- slope fits done (%.0f s total)\n", now_seconds() - t_start);
    std::fflush(stdout);
  }

  // ---- criterion 7: no frustration at n_A = 1 --------------------------------
  {
    bool ok = true;
    std::string detail;
    for (int n : {2, 3}) {
      for (double budget : {0.1, 1.0, 10.0}) {
        const OptResult res = compute_chi_min(SystemShape(n, 1), EnergyBudget(budget),
                                              OptimizationMode::general, config_with(8));
        if (std::abs(res.best_value - 1.0) > 1e-3) {
          ok = false;
          detail += " (" + std::to_string(n) + ",1) N=" + fmt(budget) + ": " +
                    fmt(res.best_value);
        }
      }
    }
    gate.report(7, ok, "chi_min((2,1), N) and ((3,1), N) equal 1 within 1e-3 for N in "
                       "{0.1, 1, 10}" +
                           (ok ? std::string() : " --" + detail));
  }

  // ---- criterion 8: randomized invariant suite -------------------------------
  {
    const double t0 = now_seconds();
    const InvariantReport report = run_invariants({2, 3, 4, 5, 6, 7, 8, 9}, 100, 0);
    const double elapsed = now_seconds() - t0;
    const bool ok = report.all_pass() && elapsed < 60.0;
    gate.report(8, ok,
                "invariant suite passes on 100 samples per n in 2..9 in " + fmt(elapsed) +
                    " s (< 60 s)");
    if (!report.all_pass()) std::printf("%s", report.text().c_str());
  }

  // ---- criterion 9: sweep shape ----------------------------------------------
  {
    bool ok = true;
    std::string detail;

    // low-energy band |chi - 1 - alpha N| < 0.1 alpha N for (4,2) and (6,2)
    const struct {
      int n;
      double alpha;
    } band_shapes[] = {{4, 4.0 / 3.0}, {6, 0.8}};
    for (const auto& bs : band_shapes) {
      for (double budget : {0.002, 0.005, 0.01}) {
        const OptResult res = compute_chi_min(SystemShape(bs.n, 2), EnergyBudget(budget),
                                              OptimizationMode::restricted, config_with(32));
        const double dev = std::abs(res.best_value - 1.0 - bs.alpha * budget);
        if (dev >= 0.1 * bs.alpha * budget) {
          ok = false;
          detail += " band(" + std::to_string(bs.n) + ",2) N=" + fmt(budget) + ": chi " +
                    fmt(res.best_value);
        }
      }
    }

    // plateau |chi(30) - chi(10)| < 1e-2 for (4,2) and (6,2)
    double chi10_62 = 0.0;
    for (const auto& bs : band_shapes) {
      const OptResult at10 = compute_chi_min(SystemShape(bs.n, 2), EnergyBudget(10.0),
                                             OptimizationMode::restricted, config_with(32));
      const OptResult at30 = compute_chi_min(SystemShape(bs.n, 2), EnergyBudget(30.0),
                                             OptimizationMode::restricted, config_with(32));
      if (bs.n == 6) chi10_62 = at10.best_value;
      if (std::abs(at30.best_value - at10.best_value) >= 1e-2) {
        ok = false;
        detail += " plateau(" + std::to_string(bs.n) + ",2): chi(10) " + fmt(at10.best_value) +
                  " chi(30) " + fmt(at30.best_value);
      }
    }

    // strict decrease of chi_min(N=10) along n = 4, 6, 9 at n_A = 2
    const double chi10_42 = chi_restricted_res[0].best_value;  // (4,2) from the cascade
    const OptResult res92 = compute_chi_min(SystemShape(9, 2), EnergyBudget(10.0),
                                            OptimizationMode::restricted, config_with(32));
    if (!(chi10_42 > chi10_62 && chi10_62 > res92.best_value)) {
      ok = false;
      detail += " ordering: " + fmt(chi10_42) + ", " + fmt(chi10_62) + ", " +
                fmt(res92.best_value);
    }

    gate.report(9, ok, "sweeps show the linear low-energy band, the high-energy plateau, and "
                       "chi_min decreasing in n at fixed n_A = 2" +
                           (ok ? std::string() : " --" + detail));
  }

  // ---- criterion 10: bit-identical results across worker counts --------------
  {
    bool ok = true;
    std::string detail;
    for (std::size_t i = 0; i < kTargets.size(); ++i) {
      const OptResult rerun = compute_alpha_tilde(SystemShape(kTargets[i].n, kTargets[i].n_a),
                                                  config_with(64, /*jobs=*/3));
      const bool same_values = rerun.per_restart_values == alpha_tilde[i].per_restart_values;
      const bool same_best = rerun.best_value == alpha_tilde[i].best_value &&
                             rerun.best_params == alpha_tilde[i].best_params;
      if (!same_values || !same_best) {
        ok = false;
        detail += " (" + std::to_string(kTargets[i].n) + "," + std::to_string(kTargets[i].n_a) +
                  ")";
      }
    }
    gate.report(10, ok, "alpha_tilde reruns with jobs=3 are bit-identical to jobs=1" +
                            (ok ? std::string() : " --" + detail));
  }

  const bool all_ok = gate.failed == 0;
  std::printf("ACCEPTANCE: %s (%d/%d criteria, %.0f s)\n", all_ok ? "PASS" : "FAIL", gate.passed,
              gate.passed + gate.failed, now_seconds() - t_start);
  return all_ok ? 0 : 1;
}
