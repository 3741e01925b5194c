// Python bindings for the Gaussian-state entanglement toolkit. Matrices
// cross the boundary as numpy arrays (dense Eigen copies); optimizer
// configuration is exposed as a small struct with keyword-friendly fields.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmes/bipartitions.hpp"
#include "mmes/experiments.hpp"
#include "mmes/gaussian.hpp"
#include "mmes/measures.hpp"
#include "mmes/optimizer.hpp"
#include "mmes/types.hpp"
#include "mmes/version.hpp"

namespace py = pybind11;
using namespace mmes;

namespace {

OptimizationMode mode_from_string(const std::string& mode) {
  if (mode == "restricted") return OptimizationMode::restricted;
  if (mode == "general") return OptimizationMode::general;
  throw std::invalid_argument("mode must be 'restricted' or 'general', got '" + mode + "'");
}

Bipartition make_bipartition(const std::vector<int>& modes, int total_modes) {
  return Bipartition(modes, total_modes);
}

}  // namespace

PYBIND11_MODULE(_mmes, m) {
  m.doc() =
      "Pure multimode Gaussian states, bipartite purity measures, and "
      "multistart minimization of entanglement frustration objectives";
  m.attr("__version__") = MMES_VERSION_STRING;

  py::class_<OptConfig>(m, "OptConfig",
                        "Multistart Nelder-Mead configuration; identical settings reproduce "
                        "bit-identical results regardless of the worker count")
      .def(py::init<>())
      .def_readwrite("restarts", &OptConfig::restarts)
      .def_readwrite("max_iterations", &OptConfig::max_iterations)
      .def_readwrite("convergence_tol", &OptConfig::convergence_tol)
      .def_readwrite("seed", &OptConfig::seed)
      .def_readwrite("init_scale", &OptConfig::init_scale)
      .def_readwrite("penalty_weight", &OptConfig::penalty_weight)
      .def_readwrite("jobs", &OptConfig::jobs)
      .def_readwrite("warm_starts", &OptConfig::warm_starts)
      .def("__repr__", [](const OptConfig& c) {
        return "OptConfig(restarts=" + std::to_string(c.restarts) +
               ", seed=" + std::to_string(c.seed) + ", jobs=" + std::to_string(c.jobs) + ")";
      });

  py::class_<OptResult>(m, "OptResult")
      .def_readonly("best_value", &OptResult::best_value)
      .def_readonly("best_params", &OptResult::best_params)
      .def_readonly("restart_index", &OptResult::restart_index)
      .def_readonly("iterations_used", &OptResult::iterations_used)
      .def_readonly("converged", &OptResult::converged)
      .def_readonly("per_restart_values", &OptResult::per_restart_values)
      .def("converged_fraction", &OptResult::converged_fraction)
      .def("__repr__", [](const OptResult& r) {
        return "OptResult(best_value=" + format_number(r.best_value) +
               ", restart_index=" + std::to_string(r.restart_index) + ")";
      });

  py::class_<SlopeEstimate>(m, "SlopeEstimate")
      .def_readonly("slope", &SlopeEstimate::slope)
      .def_readonly("residual_rms", &SlopeEstimate::residual_rms)
      .def_readonly("monotone", &SlopeEstimate::monotone)
      .def_readonly("grid", &SlopeEstimate::grid)
      .def_readonly("chi_values", &SlopeEstimate::chi_values)
      .def_readonly("converged_fractions", &SlopeEstimate::converged_fractions);

  // --- state construction --------------------------------------------------

  m.def(
      "symplectic_form", [](int n) { return symplectic_form(n); }, py::arg("n"),
      "The 2n x 2n symplectic form [[0, I], [-I, 0]]");

  m.def(
      "unitary_from_generator",
      [](const Eigen::VectorXd& params) { return unitary_from_generator(params).matrix(); },
      py::arg("params"),
      "exp(iH) for the Hermitian H packed as n diagonal entries followed by "
      "the real and imaginary strict upper triangles (row-major); params has "
      "length n^2");

  m.def(
      "pure_cm",
      [](const Eigen::MatrixXcd& u, const Eigen::VectorXd& k_diag) {
        const UnitaryMatrix um(u);
        return build_pure_cm(symplectic_orthogonal_from_unitary(um), SqueezingSpectrum(k_diag))
            .matrix();
      },
      py::arg("u"), py::arg("k_diag"),
      "Covariance matrix (1/2) R diag(K^2, K^-2) R^T of the pure state built "
      "from a unitary u and per-mode squeezing diagonal k_diag");

  m.def(
      "uniform_squeezing_cm",
      [](const Eigen::MatrixXcd& u, double r) {
        return build_uniform_squeezing_cm(UnitaryMatrix(u), r).matrix();
      },
      py::arg("u"), py::arg("r"),
      "Covariance matrix cosh(2r)/2 I + sinh(2r)/2 Z(u) of the uniform-"
      "squeezing family member");

  m.def(
      "auxiliary_matrices",
      [](const Eigen::MatrixXcd& u) {
        const AuxiliaryMatrices aux = build_auxiliary_matrices(UnitaryMatrix(u));
        return py::make_tuple(aux.z, aux.w, aux.w_prime);
      },
      py::arg("u"), "The (Z, W, W') triple built from a unitary");

  m.def(
      "check_purity_condition",
      [](const Eigen::MatrixXd& v) {
        const PurityCheck c = check_purity_condition(v);
        return py::make_tuple(c.pure, c.residual);
      },
      py::arg("v"),
      "(pure, residual): max-norm of (2 V Omega)^2 + I and whether it is "
      "below tolerance");

  m.def(
      "mode_energy",
      [](const Eigen::MatrixXd& v, int k) { return mode_energy(CovarianceMatrix(v), k); },
      py::arg("v"), py::arg("k"),
      "(V_qq + V_pp)/2 for mode k; the budget-N constraint is <= N + 1/2");

  // --- bipartitions and measures -------------------------------------------

  m.def(
      "enumerate_bipartitions",
      [](int n, int n_a) {
        std::vector<std::vector<int>> out;
        for (const Bipartition& b : enumerate_bipartitions(SystemShape(n, n_a))) {
          out.push_back(b.modes());
        }
        return out;
      },
      py::arg("n"), py::arg("n_a"),
      "All size-n_a mode subsets in lexicographic order");

  m.def(
      "subsystem_purity",
      [](const Eigen::MatrixXd& v, const std::vector<int>& modes) {
        const CovarianceMatrix cm(v);
        return subsystem_purity(cm, make_bipartition(modes, cm.modes()));
      },
      py::arg("v"), py::arg("modes"),
      "(1/2)^{n_A} / sqrt(det V_A) of the reduced state on the given modes");

  m.def(
      "min_purity",
      [](int n_a, double mean_excitations) {
        return min_purity(n_a, EnergyBudget(mean_excitations));
      },
      py::arg("n_a"), py::arg("mean_excitations"),
      "Smallest n_a-mode purity compatible with the per-mode energy bound");

  m.def(
      "chi",
      [](const Eigen::MatrixXd& v, int n_a, double mean_excitations) {
        const CovarianceMatrix cm(v);
        return chi(cm, SystemShape(cm.modes(), n_a), EnergyBudget(mean_excitations));
      },
      py::arg("v"), py::arg("n_a"), py::arg("mean_excitations"),
      "(N + 1/2)^{n_A} E[det(V_A)^{-1/2}] averaged over all size-n_a subsets");

  m.def(
      "z_objective",
      [](const Eigen::MatrixXcd& u, int n_a) {
        const UnitaryMatrix um(u);
        return z_objective(um, SystemShape(um.modes(), n_a));
      },
      py::arg("u"), py::arg("n_a"), "E[tr(Z_A^2)], the low-energy slope objective");

  m.def(
      "w_objective",
      [](const Eigen::MatrixXcd& u, int n_a) {
        const UnitaryMatrix um(u);
        return w_objective(um, SystemShape(um.modes(), n_a));
      },
      py::arg("u"), py::arg("n_a"),
      "E[det(W_A)^{-1/2}], the high-energy plateau objective (may be inf)");

  m.def(
      "chi_restricted",
      [](const Eigen::MatrixXcd& u, double r, int n_a, double mean_excitations) {
        const UnitaryMatrix um(u);
        return chi_restricted(um, r, SystemShape(um.modes(), n_a),
                              EnergyBudget(mean_excitations));
      },
      py::arg("u"), py::arg("r"), py::arg("n_a"), py::arg("mean_excitations"),
      "chi on the uniform-squeezing family; requires cosh(2r) <= 2N + 1");

  m.def("det_second_order", &det_second_order, py::arg("m"), py::arg("eps"),
        "1 + eps tr(M) + (eps^2/2)(tr(M)^2 - tr(M^2)); remainder of "
        "det(I + eps M) is cubic");

  // --- optimization ----------------------------------------------------------

  m.def(
      "compute_alpha_tilde",
      [](int n, int n_a, const OptConfig& config) {
        return compute_alpha_tilde(SystemShape(n, n_a), config);
      },
      py::arg("n"), py::arg("n_a"), py::arg("config") = OptConfig{},
      "min over U(n) of E[tr(Z_A^2)]");

  m.def(
      "compute_beta",
      [](int n, int n_a, const OptConfig& config) {
        return compute_beta(SystemShape(n, n_a), config);
      },
      py::arg("n"), py::arg("n_a"), py::arg("config") = OptConfig{},
      "2^{-n_A} min over U(n) of E[det(W_A)^{-1/2}]");

  m.def(
      "compute_chi_min",
      [](int n, int n_a, double mean_excitations, const std::string& mode,
         const OptConfig& config) {
        return compute_chi_min(SystemShape(n, n_a), EnergyBudget(mean_excitations),
                               mode_from_string(mode), config);
      },
      py::arg("n"), py::arg("n_a"), py::arg("mean_excitations"),
      py::arg("mode") = "restricted", py::arg("config") = OptConfig{},
      "min chi at budget N over the uniform-squeezing family ('restricted') "
      "or with free per-mode squeezing ('general')");

  m.def(
      "estimate_alpha",
      [](int n, int n_a, const std::vector<double>& grid, const std::string& mode,
         const OptConfig& config) {
        return estimate_alpha(SystemShape(n, n_a),
                              grid.empty() ? default_alpha_grid() : grid, mode_from_string(mode),
                              config);
      },
      py::arg("n"), py::arg("n_a"), py::arg("grid") = std::vector<double>{},
      py::arg("mode") = "restricted", py::arg("config") = OptConfig{},
      "Low-energy slope of chi_min - 1, fitted through the origin on the "
      "given budget grid (default 0.002 .. 0.02)");

  // --- diagnostics -----------------------------------------------------------

  m.def(
      "run_invariants",
      [](const std::vector<int>& n_values, int samples, std::uint64_t seed) {
        const InvariantReport report = run_invariants(n_values, samples, seed);
        py::dict out;
        out["all_pass"] = report.all_pass();
        out["text"] = report.text();
        py::list checks;
        for (const InvariantCheck& c : report.checks) {
          py::dict d;
          d["name"] = c.name;
          d["pass"] = c.pass;
          d["worst_residual"] = c.worst_residual;
          d["tolerance"] = c.tolerance;
          checks.append(d);
        }
        out["checks"] = checks;
        return out;
      },
      py::arg("n_values") = std::vector<int>{2, 3, 4}, py::arg("samples") = 25,
      py::arg("seed") = 0,
      "Randomized algebraic-identity suite; returns a dict with 'all_pass', "
      "'text' and per-check entries");
}
