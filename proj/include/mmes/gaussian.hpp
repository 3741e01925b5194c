#pragma once

// Pure multimode Gaussian states through their covariance matrices.
//
// Conventions used throughout:
//   * canonical ordering (q_1 ... q_n, p_1 ... p_n); row/col k is q_k and
//     row/col n+k is p_k (0-based indices in code),
//   * symplectic form Omega = [[0, I_n], [-I_n, 0]],
//   * hbar = 1, unit frequency, zero first moments. The vacuum CM is I/2.
//
// A pure-state CM is V = 1/2 R T^2 R^T with T = diag(K, K^{-1}), K diagonal
// positive, and R = [[X, Y], [-Y, X]] symplectic orthogonal, where
// U = X + iY is unitary.

#include <Eigen/Dense>

#include <optional>

#include "mmes/types.hpp"

namespace mmes {

// n x n complex unitary, the variable the entanglement measures are
// optimized over. The constructor rejects matrices that fail U'U = I.
class UnitaryMatrix {
 public:
  explicit UnitaryMatrix(Eigen::MatrixXcd u, double tol = Tolerances{}.algebraic);

  int modes() const { return static_cast<int>(u_.rows()); }
  const Eigen::MatrixXcd& matrix() const { return u_; }
  Eigen::MatrixXd real_part() const { return u_.real(); }
  Eigen::MatrixXd imag_part() const { return u_.imag(); }

 private:
  Eigen::MatrixXcd u_;
};

// 2n x 2n block matrix [[X, Y], [-Y, X]]; orthogonal and symplectic at once.
class SymplecticOrthogonal {
 public:
  explicit SymplecticOrthogonal(Eigen::MatrixXd r, double tol = Tolerances{}.algebraic);

  int modes() const { return static_cast<int>(r_.rows()) / 2; }
  const Eigen::MatrixXd& matrix() const { return r_; }

 private:
  Eigen::MatrixXd r_;
};

// Diagonal of the squeezing matrix K (all entries > 0). uniform_r is set
// when the spectrum was built as K = e^r I.
struct SqueezingSpectrum {
  Eigen::VectorXd k_diag;
  std::optional<double> uniform_r;

  explicit SqueezingSpectrum(Eigen::VectorXd k);
  static SqueezingSpectrum uniform(int n, double r);

  int modes() const { return static_cast<int>(k_diag.size()); }
};

// Covariance matrix of a pure n-mode Gaussian state. Construction checks
// symmetry, positive definiteness, the purity condition (2 V Omega)^2 = -I
// and det(V) = 4^{-n}.
class CovarianceMatrix {
 public:
  explicit CovarianceMatrix(Eigen::MatrixXd v, const Tolerances& tols = Tolerances{});

  int modes() const { return static_cast<int>(v_.rows()) / 2; }
  int dim() const { return static_cast<int>(v_.rows()); }
  const Eigen::MatrixXd& matrix() const { return v_; }

 private:
  Eigen::MatrixXd v_;
};

// Involution Z = 2W - I and the complementary rank-n projectors W, W'
// associated with a unitary U. Submatrices of Z control the low-energy
// frustration slope, submatrices of W the high-energy plateau.
struct AuxiliaryMatrices {
  Eigen::MatrixXd z;
  Eigen::MatrixXd w;
  Eigen::MatrixXd w_prime;
};

struct PurityCheck {
  bool pure;
  double residual;  // max-norm of (2 V Omega)^2 + I
};

// The symplectic form Omega = [[0, I_n], [-I_n, 0]].
Eigen::MatrixXd symplectic_form(int n);

// Exponential chart of U(n): params (length n^2) fills a Hermitian H with
// n diagonal entries, then the real and imaginary parts of the strict
// upper triangle in row-major order; returns exp(iH).
UnitaryMatrix unitary_from_generator(const Eigen::VectorXd& params);

SymplecticOrthogonal symplectic_orthogonal_from_unitary(const UnitaryMatrix& u);

CovarianceMatrix build_pure_cm(const SymplecticOrthogonal& r, const SqueezingSpectrum& k);

// Uniform-squeezing family: V = cosh(2r)/2 I + sinh(2r)/2 Z(U). Agrees with
// build_pure_cm(R(U), e^r I); every mode carries energy cosh(2r)/2.
CovarianceMatrix build_uniform_squeezing_cm(const UnitaryMatrix& u, double r);

AuxiliaryMatrices build_auxiliary_matrices(const UnitaryMatrix& u);

// (V_{k,k} + V_{n+k,n+k}) / 2 for 0-based mode k. The energy constraint at
// budget N reads mode_energy <= N + 1/2 for every mode.
double mode_energy(const CovarianceMatrix& v, int k);

// Purity test usable on arbitrary (also invalid) matrices: reports the
// max-norm residual of (2 V Omega)^2 + I and whether it is below tol.
PurityCheck check_purity_condition(const Eigen::MatrixXd& v, double tol = Tolerances{}.purity);

namespace detail {

// Allocation-light kernels shared with the optimizer hot path. No input
// validation; callers guarantee shapes and unitarity.

// exp(i H(params)) via the self-adjoint eigendecomposition of H.
void unitary_from_generator_raw(Eigen::Ref<const Eigen::VectorXd> params, int n,
                                Eigen::MatrixXcd& h_scratch,
                                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>& solver,
                                Eigen::MatrixXcd& u_out);

// Z = [[XX' - YY', -XY' - YX'], [-YX' - XY', YY' - XX']].
void z_matrix_raw(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, Eigen::MatrixXd& z_out);

// W = [[XX', -XY'], [-YX', YY']].
void w_matrix_raw(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, Eigen::MatrixXd& w_out);

// V = 1/2 R diag(t2, 1/t2) R^T with t2_k = k_k^2, R = [[X, Y], [-Y, X]].
void pure_cm_raw(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const Eigen::VectorXd& k_diag,
                 Eigen::MatrixXd& scratch, Eigen::MatrixXd& v_out);

}  // namespace detail

}  // namespace mmes
