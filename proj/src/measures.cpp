#include "mmes/measures.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mmes {

namespace {

// 2 * sum(log diag L) of an LLT factor, or nullopt when the factorization
// failed (matrix not positive definite within round-off).
std::optional<double> logdet_pd(const Eigen::MatrixXd& m, Eigen::LLT<Eigen::MatrixXd>& llt) {
  llt.compute(m);
  if (llt.info() != Eigen::Success) return std::nullopt;
  double acc = 0.0;
  const auto& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    if (!(l(i, i) > 0.0)) return std::nullopt;
    acc += std::log(l(i, i));
  }
  return 2.0 * acc;
}

void require_shape_match(int u_modes, const SystemShape& shape, const char* what) {
  if (u_modes != shape.n) {
    throw std::invalid_argument(std::string(what) + ": operand has " + std::to_string(u_modes) +
                                " modes, shape expects " + std::to_string(shape.n));
  }
}

}  // namespace

double subsystem_purity(const CovarianceMatrix& v, const Bipartition& a) {
  if (a.total_modes() != v.modes()) {
    throw std::invalid_argument("subsystem_purity: bipartition does not match the CM dimension");
  }
  detail::SubsetWorkspace ws;
  detail::extract_submatrix_raw(v.matrix(), a.phase_space_indices(), ws.sub);
  const auto logdet = logdet_pd(ws.sub, ws.llt);
  if (!logdet) {
    throw std::domain_error("subsystem_purity: V_A is not positive definite");
  }
  const int n_a = a.subsystem_size();
  return std::exp(-n_a * std::log(2.0) - 0.5 * *logdet);
}

double min_purity(int n_a, const EnergyBudget& budget) {
  if (n_a < 1) throw std::invalid_argument("min_purity: n_a must be >= 1");
  return std::exp(n_a * std::log(0.5 / (budget.mean_excitations + 0.5)));
}

double chi(const CovarianceMatrix& v, const SystemShape& shape, const EnergyBudget& budget) {
  require_shape_match(v.modes(), shape, "chi");
  const auto subsets = enumerate_bipartitions(shape);
  detail::SubsetWorkspace ws;
  const auto value =
      detail::chi_mean_raw(v.matrix(), subsets, budget.mean_excitations + 0.5, ws);
  if (!value) {
    throw std::domain_error("chi: some V_A is not positive definite");
  }
  return *value;
}

double z_objective(const UnitaryMatrix& u, const SystemShape& shape) {
  require_shape_match(u.modes(), shape, "z_objective");
  Eigen::MatrixXd z;
  detail::z_matrix_raw(u.real_part(), u.imag_part(), z);
  const auto subsets = enumerate_bipartitions(shape);
  Eigen::MatrixXd scratch;
  return detail::mean_tr_z2(z, subsets, scratch);
}

double w_objective(const UnitaryMatrix& u, const SystemShape& shape, double det_floor) {
  require_shape_match(u.modes(), shape, "w_objective");
  Eigen::MatrixXd w;
  detail::w_matrix_raw(u.real_part(), u.imag_part(), w);
  const auto subsets = enumerate_bipartitions(shape);
  detail::SubsetWorkspace ws;
  return detail::mean_w_invsqrt_det(w, subsets, det_floor, ws);
}

double chi_restricted(const UnitaryMatrix& u, double r, const SystemShape& shape,
                      const EnergyBudget& budget) {
  require_shape_match(u.modes(), shape, "chi_restricted");
  const double c = std::cosh(2.0 * r);
  const double bound = 2.0 * budget.mean_excitations + 1.0;
  if (c > bound * (1.0 + 1e-12) + 1e-12) {
    throw std::domain_error("chi_restricted: cosh(2r) = " + std::to_string(c) +
                            " violates the energy bound 2N+1 = " + std::to_string(bound));
  }
  Eigen::MatrixXd z;
  detail::z_matrix_raw(u.real_part(), u.imag_part(), z);
  const auto subsets = enumerate_bipartitions(shape);
  detail::SubsetWorkspace ws;
  return detail::chi_uniform_raw(z, subsets, c, std::sinh(2.0 * r),
                                 budget.mean_excitations + 0.5, ws);
}

double det_second_order(const Eigen::MatrixXd& m, double eps) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("det_second_order: matrix must be square");
  }
  const double tr = m.trace();
  const double tr_m2 = m.cwiseProduct(m.transpose()).sum();
  return 1.0 + eps * tr + 0.5 * eps * eps * (tr * tr - tr_m2);
}

namespace detail {

double mean_tr_z2(const Eigen::MatrixXd& z, const std::vector<Bipartition>& subsets,
                  Eigen::MatrixXd& scratch) {
  double acc = 0.0;
  for (const auto& a : subsets) {
    extract_submatrix_raw(z, a.phase_space_indices(), scratch);
    acc += scratch.squaredNorm();  // tr(Z_A^2) = ||Z_A||_F^2 for symmetric Z_A
  }
  return acc / static_cast<double>(subsets.size());
}

double mean_w_invsqrt_det(const Eigen::MatrixXd& w, const std::vector<Bipartition>& subsets,
                          double det_floor, SubsetWorkspace& ws) {
  double acc = 0.0;
  for (const auto& a : subsets) {
    extract_submatrix_raw(w, a.phase_space_indices(), ws.sub);
    ws.lu.compute(ws.sub);
    const double det = ws.lu.determinant();
    if (!(det >= det_floor)) return kInfiniteCost;
    acc += 1.0 / std::sqrt(det);
  }
  return acc / static_cast<double>(subsets.size());
}

double chi_uniform_raw(const Eigen::MatrixXd& z, const std::vector<Bipartition>& subsets,
                       double cosh2r, double sinh2r, double n_plus_half, SubsetWorkspace& ws) {
  const int n_a = subsets.front().subsystem_size();
  const double log_norm = n_a * std::log(2.0 * n_plus_half);
  double acc = 0.0;
  for (const auto& a : subsets) {
    extract_submatrix_raw(z, a.phase_space_indices(), ws.sub);
    ws.sub *= sinh2r;
    ws.sub.diagonal().array() += cosh2r;
    const auto logdet = logdet_pd(ws.sub, ws.llt);
    if (!logdet) {
      // cosh(2r) I + sinh(2r) Z_A has spectrum >= e^{-2|r|}; a failure here
      // is pure round-off, treat as singular.
      return kInfiniteCost;
    }
    acc += std::exp(log_norm - 0.5 * *logdet);
  }
  return acc / static_cast<double>(subsets.size());
}

std::optional<double> chi_mean_raw(const Eigen::MatrixXd& v, const std::vector<Bipartition>& subsets,
                                   double n_plus_half, SubsetWorkspace& ws) {
  const int n_a = subsets.front().subsystem_size();
  const double log_norm = n_a * std::log(n_plus_half);
  double acc = 0.0;
  for (const auto& a : subsets) {
    extract_submatrix_raw(v, a.phase_space_indices(), ws.sub);
    const auto logdet = logdet_pd(ws.sub, ws.llt);
    if (!logdet) return std::nullopt;
    acc += std::exp(log_norm - 0.5 * *logdet);
  }
  return acc / static_cast<double>(subsets.size());
}

}  // namespace detail

}  // namespace mmes
