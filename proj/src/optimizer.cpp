#include "mmes/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

#include "mmes/bipartitions.hpp"
#include "mmes/gaussian.hpp"
#include "mmes/measures.hpp"

namespace mmes {

namespace {

struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t s) : state(s) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform_pm(double scale) { return (2.0 * uniform01() - 1.0) * scale; }
};

std::uint64_t derive_restart_seed(std::uint64_t master, int index) {
  SplitMix64 mix(master ^ (0xD1B54A32D192ED03ull * static_cast<std::uint64_t>(index) +
                           0x8CB92BA72F3D8DD7ull));
  return mix.next();
}

double checked_eval(Objective& obj, const Eigen::VectorXd& x) {
  const double f = obj(x);
  if (std::isnan(f) || f == -kInfiniteCost) {
    throw std::runtime_error("multistart_minimize: objective returned a non-cost value");
  }
  return f;
}

struct NmOutcome {
  Eigen::VectorXd x;
  double f = kInfiniteCost;
  long iterations = 0;
  bool converged = false;
};

// Simplex minimization with dimension-adaptive reflection/expansion/
// contraction/shrink coefficients. Points may evaluate to +infinity; such
// vertices simply sort last and get reflected away.
NmOutcome nelder_mead(Objective& obj, const Eigen::VectorXd& x0, double step, long max_iterations,
                      double ftol) {
  const int d = obj.dim();
  const double refl = 1.0;
  const double expa = d >= 2 ? 1.0 + 2.0 / d : 2.0;
  const double contr = d >= 2 ? 0.75 - 0.5 / d : 0.5;
  const double shrink = d >= 2 ? 1.0 - 1.0 / d : 0.5;

  std::vector<Eigen::VectorXd> xs(d + 1);
  std::vector<double> fs(d + 1);
  xs[0] = x0;
  fs[0] = checked_eval(obj, xs[0]);
  for (int i = 1; i <= d; ++i) {
    xs[i] = x0;
    xs[i][i - 1] += step;
    fs[i] = checked_eval(obj, xs[i]);
  }

  std::vector<int> ord(d + 1);
  std::iota(ord.begin(), ord.end(), 0);
  auto sort_order = [&] {
    std::sort(ord.begin(), ord.end(), [&](int a, int b) {
      if (fs[a] != fs[b]) return fs[a] < fs[b];
      return a < b;  // deterministic tie-break
    });
  };

  Eigen::VectorXd centroid(d), xr(d), xe(d), xc(d);
  NmOutcome out;
  long iter = 0;
  bool converged = false;
  for (; iter < max_iterations; ++iter) {
    sort_order();
    const double fb = fs[ord[0]];
    const double fw = fs[ord[d]];
    if (std::isfinite(fb) && fw - fb <= ftol) {
      converged = true;
      break;
    }

    centroid.setZero();
    for (int i = 0; i < d; ++i) centroid += xs[ord[i]];
    centroid /= static_cast<double>(d);
    const Eigen::VectorXd& xw = xs[ord[d]];

    xr = centroid + refl * (centroid - xw);
    const double fr = checked_eval(obj, xr);
    const double fsw = fs[ord[d - 1]];

    if (fr < fb) {
      xe = centroid + expa * (xr - centroid);
      const double fe = checked_eval(obj, xe);
      if (fe < fr) {
        xs[ord[d]] = xe;
        fs[ord[d]] = fe;
      } else {
        xs[ord[d]] = xr;
        fs[ord[d]] = fr;
      }
    } else if (fr < fsw) {
      xs[ord[d]] = xr;
      fs[ord[d]] = fr;
    } else {
      bool do_shrink = false;
      if (fr < fw) {
        xc = centroid + contr * (xr - centroid);
        const double fc = checked_eval(obj, xc);
        if (fc <= fr) {
          xs[ord[d]] = xc;
          fs[ord[d]] = fc;
        } else {
          do_shrink = true;
        }
      } else {
        xc = centroid - contr * (centroid - xw);
        const double fc = checked_eval(obj, xc);
        if (fc < fw) {
          xs[ord[d]] = xc;
          fs[ord[d]] = fc;
        } else {
          do_shrink = true;
        }
      }
      if (do_shrink) {
        const Eigen::VectorXd xb = xs[ord[0]];
        for (int i = 1; i <= d; ++i) {
          xs[ord[i]] = xb + shrink * (xs[ord[i]] - xb);
          fs[ord[i]] = checked_eval(obj, xs[ord[i]]);
        }
      }
    }
  }

  sort_order();
  out.x = xs[ord[0]];
  out.f = fs[ord[0]];
  out.iterations = iter;
  out.converged = converged && std::isfinite(out.f);
  return out;
}

struct RestartOutcome {
  double value = kInfiniteCost;
  Eigen::VectorXd params;
  long iterations = 0;
  bool converged = false;
};

// One restart: a fresh start point, then simplex cycles that re-seed the
// simplex around the incumbent with shrinking steps until the cycle gain
// drops below the convergence tolerance or the iteration budget runs out.
RestartOutcome run_restart(Objective& obj, const OptConfig& config, int index,
                           std::uint64_t seed) {
  const int d = obj.dim();
  Eigen::VectorXd x0(d);

  double f0;
  if (index < static_cast<int>(config.warm_starts.size())) {
    x0 = config.warm_starts[index];
    f0 = checked_eval(obj, x0);
  } else {
    obj.initial_point(seed, config.init_scale, x0);
    f0 = checked_eval(obj, x0);
    for (int attempt = 1; attempt < 16 && !std::isfinite(f0); ++attempt) {
      // start landed on a singular point; redraw deterministically
      obj.initial_point(seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(attempt),
                        config.init_scale, x0);
      f0 = checked_eval(obj, x0);
    }
  }

  RestartOutcome out;
  out.params = x0;
  out.value = f0;

  long budget = config.max_iterations;
  // warm starts sit near an optimum of a related problem: open with a
  // smaller simplex so the first cycle cannot jump out of the basin
  double step = (index < static_cast<int>(config.warm_starts.size()) ? 0.05 : 0.25) *
                config.init_scale;
  constexpr int kMaxCycles = 8;
  for (int cycle = 0; cycle < kMaxCycles && budget > 0; ++cycle) {
    NmOutcome nm = nelder_mead(obj, out.params, step, budget, config.convergence_tol);
    budget -= nm.iterations;
    out.iterations += nm.iterations;
    out.converged = nm.converged;
    const double gain = out.value - nm.f;
    if (nm.f < out.value) {
      out.value = nm.f;
      out.params = nm.x;
    }
    if (!(gain > std::max(config.convergence_tol,
                          std::abs(out.value) * 1e-14)) && cycle > 0) {
      break;
    }
    step *= 0.3;
  }
  return out;
}

int resolve_jobs(int requested, int restarts) {
  int jobs = requested;
  if (jobs <= 0) {
    if (const char* env = std::getenv("MMES_JOBS")) {
      jobs = std::atoi(env);
    }
  }
  if (jobs <= 0) {
    jobs = static_cast<int>(std::thread::hardware_concurrency());
  }
  jobs = std::max(1, jobs);
  return std::min(jobs, restarts);
}

class FunctionObjective final : public Objective {
 public:
  FunctionObjective(std::function<double(const Eigen::VectorXd&)> fn, int dim)
      : fn_(std::move(fn)), dim_(dim) {}

  int dim() const override { return dim_; }
  double operator()(const Eigen::VectorXd& x) override { return fn_(x); }
  std::unique_ptr<Objective> clone() const override {
    return std::make_unique<FunctionObjective>(fn_, dim_);
  }

 private:
  std::function<double(const Eigen::VectorXd&)> fn_;
  int dim_;
};

// Shared scratch for objectives living on the U(n) exponential chart.
struct UnitaryChartScratch {
  Eigen::MatrixXcd h, u;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver;
  Eigen::MatrixXd x, y;

  void compute_xy(Eigen::Ref<const Eigen::VectorXd> params, int n) {
    detail::unitary_from_generator_raw(params, n, h, solver, u);
    x = u.real();
    y = u.imag();
  }
};

class ZObjectiveFn final : public Objective {
 public:
  explicit ZObjectiveFn(const SystemShape& shape)
      : shape_(shape), subsets_(enumerate_bipartitions(shape)) {}

  int dim() const override { return shape_.n * shape_.n; }

  double operator()(const Eigen::VectorXd& p) override {
    chart_.compute_xy(p, shape_.n);
    detail::z_matrix_raw(chart_.x, chart_.y, z_);
    return detail::mean_tr_z2(z_, subsets_, scratch_);
  }

  std::unique_ptr<Objective> clone() const override {
    return std::make_unique<ZObjectiveFn>(shape_);
  }

 private:
  SystemShape shape_;
  std::vector<Bipartition> subsets_;
  UnitaryChartScratch chart_;
  Eigen::MatrixXd z_, scratch_;
};

class WObjectiveFn final : public Objective {
 public:
  WObjectiveFn(const SystemShape& shape, double det_floor)
      : shape_(shape), det_floor_(det_floor), subsets_(enumerate_bipartitions(shape)) {}

  int dim() const override { return shape_.n * shape_.n; }

  double operator()(const Eigen::VectorXd& p) override {
    chart_.compute_xy(p, shape_.n);
    detail::w_matrix_raw(chart_.x, chart_.y, w_);
    return detail::mean_w_invsqrt_det(w_, subsets_, det_floor_, ws_);
  }

  std::unique_ptr<Objective> clone() const override {
    return std::make_unique<WObjectiveFn>(shape_, det_floor_);
  }

 private:
  SystemShape shape_;
  double det_floor_;
  std::vector<Bipartition> subsets_;
  UnitaryChartScratch chart_;
  Eigen::MatrixXd w_;
  detail::SubsetWorkspace ws_;
};

class ChiRestrictedFn final : public Objective {
 public:
  ChiRestrictedFn(const SystemShape& shape, double mean_excitations)
      : shape_(shape),
        n_plus_half_(mean_excitations + 0.5),
        cosh2r_(2.0 * mean_excitations + 1.0),
        sinh2r_(std::sqrt(std::max(0.0, cosh2r_ * cosh2r_ - 1.0))),
        subsets_(enumerate_bipartitions(shape)) {}

  int dim() const override { return shape_.n * shape_.n; }

  double operator()(const Eigen::VectorXd& p) override {
    chart_.compute_xy(p, shape_.n);
    detail::z_matrix_raw(chart_.x, chart_.y, z_);
    return detail::chi_uniform_raw(z_, subsets_, cosh2r_, sinh2r_, n_plus_half_, ws_);
  }

  std::unique_ptr<Objective> clone() const override {
    return std::make_unique<ChiRestrictedFn>(shape_, n_plus_half_ - 0.5);
  }

 private:
  SystemShape shape_;
  double n_plus_half_;
  double cosh2r_;  // pinned at the energy-saturation value 2N+1
  double sinh2r_;
  std::vector<Bipartition> subsets_;
  UnitaryChartScratch chart_;
  Eigen::MatrixXd z_;
  detail::SubsetWorkspace ws_;
};

class ChiGeneralFn final : public Objective {
 public:
  ChiGeneralFn(const SystemShape& shape, double mean_excitations, double penalty_weight)
      : shape_(shape),
        mean_excitations_(mean_excitations),
        penalty_weight_(penalty_weight),
        saturation_r_(0.5 * std::acosh(2.0 * mean_excitations + 1.0)),
        subsets_(enumerate_bipartitions(shape)) {}

  int dim() const override { return shape_.n * shape_.n + shape_.n; }

  double operator()(const Eigen::VectorXd& p) override {
    const int n = shape_.n;
    chart_.compute_xy(p.head(n * n), n);
    k_diag_ = p.tail(n).array().exp();
    detail::pure_cm_raw(chart_.x, chart_.y, k_diag_, r_scratch_, v_);
    const auto value = detail::chi_mean_raw(v_, subsets_, mean_excitations_ + 0.5, ws_);
    if (!value) return kInfiniteCost;

    double penalty = 0.0;
    const double cap = mean_excitations_ + 0.5;
    for (int k = 0; k < n; ++k) {
      const double energy = 0.5 * (v_(k, k) + v_(n + k, n + k));
      const double excess = energy - cap;
      if (excess > 0.0) penalty += penalty_weight_ * excess * excess;
    }
    return *value + penalty;
  }

  // Generator parameters are drawn as usual; the squeezing block starts
  // around the saturation radius, where the energy bound binds at optima.
  void initial_point(std::uint64_t restart_seed, double init_scale,
                     Eigen::VectorXd& x0) const override {
    SplitMix64 rng(restart_seed);
    const int n = shape_.n;
    for (int i = 0; i < n * n; ++i) x0[i] = rng.uniform_pm(init_scale);
    for (int k = 0; k < n; ++k) {
      x0[n * n + k] = saturation_r_ + rng.uniform_pm(0.25 * init_scale);
    }
  }

  std::unique_ptr<Objective> clone() const override {
    return std::make_unique<ChiGeneralFn>(shape_, mean_excitations_, penalty_weight_);
  }

 private:
  SystemShape shape_;
  double mean_excitations_;
  double penalty_weight_;
  double saturation_r_;
  std::vector<Bipartition> subsets_;
  UnitaryChartScratch chart_;
  Eigen::VectorXd k_diag_;
  Eigen::MatrixXd r_scratch_, v_;
  detail::SubsetWorkspace ws_;
};

}  // namespace

void OptConfig::validate() const {
  if (restarts < 1) throw std::invalid_argument("OptConfig: restarts must be >= 1");
  if (max_iterations < 1) throw std::invalid_argument("OptConfig: max_iterations must be >= 1");
  if (!(convergence_tol > 0.0)) {
    throw std::invalid_argument("OptConfig: convergence_tol must be positive");
  }
  if (!(init_scale > 0.0)) throw std::invalid_argument("OptConfig: init_scale must be positive");
  if (!(penalty_weight >= 0.0)) {
    throw std::invalid_argument("OptConfig: penalty_weight must be nonnegative");
  }
  if (jobs < 0) throw std::invalid_argument("OptConfig: jobs must be >= 0");
}

void Objective::initial_point(std::uint64_t restart_seed, double init_scale,
                              Eigen::VectorXd& x0) const {
  SplitMix64 rng(restart_seed);
  for (Eigen::Index i = 0; i < x0.size(); ++i) x0[i] = rng.uniform_pm(init_scale);
}

double OptResult::converged_fraction() const {
  if (per_restart_converged.empty()) return 0.0;
  const auto hits = std::count(per_restart_converged.begin(), per_restart_converged.end(),
                               static_cast<char>(1));
  return static_cast<double>(hits) / static_cast<double>(per_restart_converged.size());
}

OptResult multistart_minimize(const Objective& objective, const OptConfig& config) {
  config.validate();
  if (objective.dim() < 1) {
    throw std::invalid_argument("multistart_minimize: objective dimension must be >= 1");
  }
  for (const auto& w : config.warm_starts) {
    if (w.size() != objective.dim()) {
      throw std::invalid_argument("multistart_minimize: warm start of size " +
                                  std::to_string(w.size()) + " for dimension " +
                                  std::to_string(objective.dim()));
    }
  }

  const int restarts = config.restarts;
  std::vector<double> values(restarts, kInfiniteCost);
  std::vector<Eigen::VectorXd> params(restarts);
  std::vector<long> iterations(restarts, 0);
  std::vector<char> converged(restarts, 0);

  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;

  auto worker = [&]() {
    std::unique_ptr<Objective> obj = objective.clone();
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= restarts) break;
      try {
        RestartOutcome rs = run_restart(*obj, config, i, derive_restart_seed(config.seed, i));
        values[i] = rs.value;
        params[i] = std::move(rs.params);
        iterations[i] = rs.iterations;
        converged[i] = rs.converged ? 1 : 0;
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(restarts);  // drain remaining work
        break;
      }
    }
  };

  const int jobs = resolve_jobs(config.jobs, restarts);
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  OptResult result;
  result.per_restart_values = values;
  result.per_restart_converged = converged;
  int best = 0;
  for (int i = 1; i < restarts; ++i) {
    if (values[i] < values[best]) best = i;  // lowest index wins ties
  }
  result.best_value = values[best];
  result.best_params = params[best];
  result.restart_index = best;
  result.iterations_used = iterations[best];
  result.converged = converged[best] != 0;
  return result;
}

OptResult multistart_minimize(const std::function<double(const Eigen::VectorXd&)>& objective,
                              int dim, const OptConfig& config) {
  return multistart_minimize(FunctionObjective(objective, dim), config);
}

OptResult compute_alpha_tilde(const SystemShape& shape, const OptConfig& config) {
  return multistart_minimize(ZObjectiveFn(shape), config);
}

OptResult compute_beta(const SystemShape& shape, const OptConfig& config) {
  OptResult result = multistart_minimize(WObjectiveFn(shape, 1e-300), config);
  const double scale = std::exp2(-shape.n_a);
  result.best_value *= scale;
  for (double& v : result.per_restart_values) v *= scale;
  return result;
}

OptResult compute_chi_min(const SystemShape& shape, const EnergyBudget& budget,
                          OptimizationMode mode, const OptConfig& config) {
  if (mode == OptimizationMode::restricted) {
    return multistart_minimize(ChiRestrictedFn(shape, budget.mean_excitations), config);
  }
  return multistart_minimize(
      ChiGeneralFn(shape, budget.mean_excitations, config.penalty_weight), config);
}

std::vector<double> default_alpha_grid() {
  std::vector<double> grid(10);
  for (int i = 0; i < 10; ++i) grid[i] = 0.002 * (i + 1);
  return grid;
}

SlopeEstimate estimate_alpha(const SystemShape& shape, const std::vector<double>& n_grid,
                             OptimizationMode mode, const OptConfig& config) {
  if (n_grid.empty()) {
    throw std::invalid_argument("estimate_alpha: empty N grid");
  }
  for (double v : n_grid) {
    if (!(v > 0.0)) throw std::invalid_argument("estimate_alpha: grid values must be positive");
  }

  SlopeEstimate est;
  est.grid = n_grid;
  for (double n_mean : n_grid) {
    OptResult r = compute_chi_min(shape, EnergyBudget(n_mean), mode, config);
    est.chi_values.push_back(r.best_value);
    est.converged_fractions.push_back(r.converged_fraction());
  }

  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    sxy += n_grid[i] * (est.chi_values[i] - 1.0);
    sxx += n_grid[i] * n_grid[i];
  }
  est.slope = sxy / sxx;

  double ss = 0.0;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    const double resid = (est.chi_values[i] - 1.0) - est.slope * n_grid[i];
    ss += resid * resid;
  }
  est.residual_rms = std::sqrt(ss / static_cast<double>(n_grid.size()));

  for (std::size_t i = 0; i + 1 < est.chi_values.size(); ++i) {
    if (est.chi_values[i + 1] < est.chi_values[i] - 1e-9) est.monotone = false;
  }
  return est;
}

}  // namespace mmes
