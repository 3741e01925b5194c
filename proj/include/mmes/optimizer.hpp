#pragma once

// Seeded multi-start minimization over the unitary-group chart (plus
// per-mode squeezing parameters in general mode).
//
// Determinism contract: a given (problem, OptConfig) pair always produces
// the same OptResult, bit for bit, independent of the worker count. Every
// restart derives its own RNG stream from the master seed and its index;
// the reduction picks the smallest value, breaking ties by the lowest
// restart index.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "mmes/types.hpp"

namespace mmes {

struct OptConfig {
  int restarts = 64;
  int max_iterations = 20000;     // simplex iterations per restart
  double convergence_tol = 1e-10; // objective-decrease tolerance
  std::uint64_t seed = 0;
  double init_scale = 1.0;        // spread of the random generator parameters
  double penalty_weight = 1e6;    // energy-constraint penalty (general mode)
  int jobs = 0;                   // worker threads; 0 = MMES_JOBS env or hardware

  // Restart i < warm_starts.size() starts from warm_starts[i] instead of a
  // random draw (each must match the objective dimension). Used to chain
  // related problems: the chi optimum at large N seeds the plateau-bound
  // search, a restricted optimum seeds the general-mode search.
  std::vector<Eigen::VectorXd> warm_starts;

  void validate() const;
};

// Minimization problem. operator() may return +infinity for infeasible
// points; it must never return NaN. clone() provides an equivalent
// evaluator with its own scratch space, one per worker thread.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual int dim() const = 0;
  virtual double operator()(const Eigen::VectorXd& x) = 0;
  virtual std::unique_ptr<Objective> clone() const = 0;

  // Draw the restart's initial point. The default fills every coordinate
  // uniformly from [-init_scale, init_scale]; problem-specific overrides
  // may center selected coordinates elsewhere.
  virtual void initial_point(std::uint64_t restart_seed, double init_scale,
                             Eigen::VectorXd& x0) const;
};

struct OptResult {
  double best_value = 0.0;
  Eigen::VectorXd best_params;
  int restart_index = -1;
  long iterations_used = 0;  // simplex iterations spent by the best restart
  bool converged = false;
  std::vector<double> per_restart_values;
  std::vector<char> per_restart_converged;

  double converged_fraction() const;
};

OptResult multistart_minimize(const Objective& objective, const OptConfig& config);

// Convenience adapter for stateless callables (the callable must be
// thread-safe; it is shared across workers).
OptResult multistart_minimize(const std::function<double(const Eigen::VectorXd&)>& objective,
                              int dim, const OptConfig& config);

enum class OptimizationMode { restricted, general };

// min over U(n) of E[tr(Z_A^2)]: the low-energy frustration slope.
OptResult compute_alpha_tilde(const SystemShape& shape, const OptConfig& config);

// 2^{-n_A} min over U(n) of E[det(W_A)^{-1/2}]: the high-energy plateau
// bound. best_value and per_restart_values carry the 2^{-n_A} factor.
OptResult compute_beta(const SystemShape& shape, const OptConfig& config);

// min chi at budget N. Restricted mode optimizes over U(n) with the
// uniform squeezing pinned at saturation, cosh(2r) = 2N+1. General mode
// optimizes over U(n) and n per-mode squeezing parameters, enforcing the
// per-mode energy bound by a quadratic exterior penalty.
OptResult compute_chi_min(const SystemShape& shape, const EnergyBudget& budget,
                          OptimizationMode mode, const OptConfig& config);

struct SlopeEstimate {
  double slope = 0.0;          // origin-constrained least squares on chi_min - 1
  double residual_rms = 0.0;
  bool monotone = true;        // chi_min nondecreasing across the grid
  std::vector<double> grid;
  std::vector<double> chi_values;
  std::vector<double> converged_fractions;
};

// chi_min on a small-N grid, fitted through the origin; approximates the
// N -> 0 derivative of chi_min.
SlopeEstimate estimate_alpha(const SystemShape& shape, const std::vector<double>& n_grid,
                             OptimizationMode mode, const OptConfig& config);

// The grid used when none is given: 0.002, 0.004, ..., 0.02.
std::vector<double> default_alpha_grid();

}  // namespace mmes
