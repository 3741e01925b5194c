#pragma once

// Scalar entanglement cost functions. All averages run over the complete
// lexicographic list of size-n_A bipartitions (exact arithmetic mean, never
// sampled) so every value is deterministic.
//
// Cost values are extended reals: finite values are nonnegative, and
// +infinity signals a singular det(W_A) (reachable, e.g. at U = I).

#include <Eigen/Dense>

#include <limits>
#include <optional>
#include <vector>

#include "mmes/bipartitions.hpp"
#include "mmes/gaussian.hpp"
#include "mmes/types.hpp"

namespace mmes {

inline constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

// Purity of the reduced state on modes A: (1/2)^{n_A} / sqrt(det V_A),
// evaluated through a Cholesky log-determinant. Lies in (0, 1].
double subsystem_purity(const CovarianceMatrix& v, const Bipartition& a);

// Smallest purity reachable by an n_A-mode subsystem under the per-mode
// energy bound: (1/2)^{n_A} / (N + 1/2)^{n_A}.
double min_purity(int n_a, const EnergyBudget& budget);

// Normalized potential of multipartite entanglement,
// chi = (N + 1/2)^{n_A} E[det(V_A)^{-1/2}]. At least 1 for every state that
// satisfies the energy constraint at budget N; feasibility itself is not
// checked here (see mode_energy).
double chi(const CovarianceMatrix& v, const SystemShape& shape, const EnergyBudget& budget);

// E[tr(Z_A^2)]: the low-energy frustration slope objective. Range [0, 2 n_A].
double z_objective(const UnitaryMatrix& u, const SystemShape& shape);

// E[det(W_A)^{-1/2}]: the high-energy plateau objective. Each term is >= 1
// (W is an orthogonal projector, so W_A has spectrum in [0, 1]); dets below
// det_floor yield kInfiniteCost.
double w_objective(const UnitaryMatrix& u, const SystemShape& shape, double det_floor = 1e-300);

// chi evaluated on the uniform-squeezing family without building the CM:
// (2N+1)^{n_A} E[det(cosh(2r) I + sinh(2r) Z_A)^{-1/2}]. Requires the
// energy-feasibility condition cosh(2r) <= 2N + 1.
double chi_restricted(const UnitaryMatrix& u, double r, const SystemShape& shape,
                      const EnergyBudget& budget);

// Quadratic expansion of det(I + eps M):
// 1 + eps tr(M) + (eps^2 / 2) (tr(M)^2 - tr(M^2)). The second-order
// coefficient is the elementary symmetric polynomial e_2 of eps M, so the
// remainder is cubic in eps (and zero for 2 x 2 matrices).
double det_second_order(const Eigen::MatrixXd& m, double eps);

namespace detail {

// Reused factorization buffers for the per-bipartition determinants.
struct SubsetWorkspace {
  Eigen::MatrixXd sub;
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
};

// Mean over subsets of ||Z_A||_F^2.
double mean_tr_z2(const Eigen::MatrixXd& z, const std::vector<Bipartition>& subsets,
                  Eigen::MatrixXd& scratch);

// Mean over subsets of det(W_A)^{-1/2}; kInfiniteCost once any det < floor.
double mean_w_invsqrt_det(const Eigen::MatrixXd& w, const std::vector<Bipartition>& subsets,
                          double det_floor, SubsetWorkspace& ws);

// (2N+1)^{n_A} E[det(c I + s Z_A)^{-1/2}] with c = cosh 2r, s = sinh 2r.
double chi_uniform_raw(const Eigen::MatrixXd& z, const std::vector<Bipartition>& subsets,
                       double cosh2r, double sinh2r, double n_plus_half, SubsetWorkspace& ws);

// (N+1/2)^{n_A} E[det(V_A)^{-1/2}] on a raw CM; nullopt if some V_A is not
// positive definite.
std::optional<double> chi_mean_raw(const Eigen::MatrixXd& v, const std::vector<Bipartition>& subsets,
                                   double n_plus_half, SubsetWorkspace& ws);

}  // namespace detail

}  // namespace mmes
