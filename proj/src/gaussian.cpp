#include "mmes/gaussian.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace mmes {

namespace {

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

void require_square(const Eigen::MatrixXcd& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw std::invalid_argument(std::string(what) + ": expected a nonempty square matrix");
  }
}

}  // namespace

UnitaryMatrix::UnitaryMatrix(Eigen::MatrixXcd u, double tol) : u_(std::move(u)) {
  require_square(u_, "UnitaryMatrix");
  const int n = static_cast<int>(u_.rows());
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  const double res = (u_.adjoint() * u_ - id).cwiseAbs().maxCoeff();
  if (res > tol) {
    throw std::invalid_argument("UnitaryMatrix: U'U - I residual " + std::to_string(res) +
                                " exceeds tolerance");
  }
}

SymplecticOrthogonal::SymplecticOrthogonal(Eigen::MatrixXd r, double tol) : r_(std::move(r)) {
  if (r_.rows() != r_.cols() || r_.rows() == 0 || r_.rows() % 2 != 0) {
    throw std::invalid_argument("SymplecticOrthogonal: expected a 2n x 2n matrix");
  }
  const int d = static_cast<int>(r_.rows());
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd omega = symplectic_form(d / 2);
  const double ortho = max_abs(r_.transpose() * r_ - id);
  const double sympl = max_abs(r_ * omega * r_.transpose() - omega);
  if (ortho > tol || sympl > tol) {
    throw std::invalid_argument("SymplecticOrthogonal: orthogonality residual " +
                                std::to_string(ortho) + ", symplecticity residual " +
                                std::to_string(sympl));
  }
}

SqueezingSpectrum::SqueezingSpectrum(Eigen::VectorXd k) : k_diag(std::move(k)) {
  if (k_diag.size() == 0) {
    throw std::invalid_argument("SqueezingSpectrum: empty diagonal");
  }
  if ((k_diag.array() <= 0.0).any()) {
    throw std::invalid_argument("SqueezingSpectrum: K must be positive definite diagonal");
  }
}

SqueezingSpectrum SqueezingSpectrum::uniform(int n, double r) {
  if (n < 1) throw std::invalid_argument("SqueezingSpectrum::uniform: n must be positive");
  SqueezingSpectrum s(Eigen::VectorXd::Constant(n, std::exp(r)));
  s.uniform_r = r;
  return s;
}

CovarianceMatrix::CovarianceMatrix(Eigen::MatrixXd v, const Tolerances& tols) : v_(std::move(v)) {
  if (v_.rows() != v_.cols() || v_.rows() == 0 || v_.rows() % 2 != 0) {
    throw std::invalid_argument("CovarianceMatrix: expected a 2n x 2n matrix");
  }
  const int n = static_cast<int>(v_.rows()) / 2;
  const double asym = max_abs(v_ - v_.transpose());
  if (asym > tols.symmetry) {
    throw std::invalid_argument("CovarianceMatrix: asymmetry " + std::to_string(asym));
  }
  Eigen::LLT<Eigen::MatrixXd> llt(v_);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("CovarianceMatrix: not positive definite");
  }
  // det(V) = 4^{-n}, checked in log space to avoid underflow at large n.
  double logdet = 0.0;
  for (int i = 0; i < 2 * n; ++i) logdet += std::log(llt.matrixL()(i, i));
  logdet *= 2.0;
  const double det_rel = std::abs(std::expm1(logdet + n * std::log(4.0)));
  if (det_rel > tols.det) {
    throw std::invalid_argument("CovarianceMatrix: det(V)*4^n deviates from 1 by " +
                                std::to_string(det_rel));
  }
  const PurityCheck pc = check_purity_condition(v_, tols.purity);
  if (!pc.pure) {
    throw std::invalid_argument("CovarianceMatrix: purity residual " + std::to_string(pc.residual));
  }
}

Eigen::MatrixXd symplectic_form(int n) {
  if (n < 1) throw std::invalid_argument("symplectic_form: n must be positive");
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  omega.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  omega.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
  return omega;
}

UnitaryMatrix unitary_from_generator(const Eigen::VectorXd& params) {
  const auto len = params.size();
  const int n = static_cast<int>(std::llround(std::sqrt(static_cast<double>(len))));
  if (n < 1 || static_cast<Eigen::Index>(n) * n != len) {
    throw std::invalid_argument("unitary_from_generator: parameter count " + std::to_string(len) +
                                " is not n^2");
  }
  Eigen::MatrixXcd h(n, n), u(n, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver;
  detail::unitary_from_generator_raw(params, n, h, solver, u);
  return UnitaryMatrix(std::move(u));
}

SymplecticOrthogonal symplectic_orthogonal_from_unitary(const UnitaryMatrix& u) {
  const int n = u.modes();
  Eigen::MatrixXd r(2 * n, 2 * n);
  const Eigen::MatrixXd x = u.real_part();
  const Eigen::MatrixXd y = u.imag_part();
  r.topLeftCorner(n, n) = x;
  r.topRightCorner(n, n) = y;
  r.bottomLeftCorner(n, n) = -y;
  r.bottomRightCorner(n, n) = x;
  return SymplecticOrthogonal(std::move(r));
}

CovarianceMatrix build_pure_cm(const SymplecticOrthogonal& r, const SqueezingSpectrum& k) {
  const int n = r.modes();
  if (k.modes() != n) {
    throw std::invalid_argument("build_pure_cm: R is for " + std::to_string(n) +
                                " modes but K has " + std::to_string(k.modes()) + " entries");
  }
  Eigen::VectorXd t2(2 * n);
  t2.head(n) = k.k_diag.array().square();
  t2.tail(n) = k.k_diag.array().square().inverse();
  const Eigen::MatrixXd& rm = r.matrix();
  Eigen::MatrixXd v = 0.5 * rm * t2.asDiagonal() * rm.transpose();
  v = 0.5 * (v + v.transpose());  // strip round-off asymmetry
  return CovarianceMatrix(std::move(v));
}

CovarianceMatrix build_uniform_squeezing_cm(const UnitaryMatrix& u, double r) {
  const int n = u.modes();
  Eigen::MatrixXd z(2 * n, 2 * n);
  const Eigen::MatrixXd x = u.real_part();
  const Eigen::MatrixXd y = u.imag_part();
  detail::z_matrix_raw(x, y, z);
  Eigen::MatrixXd v = 0.5 * std::cosh(2.0 * r) * Eigen::MatrixXd::Identity(2 * n, 2 * n) +
                      0.5 * std::sinh(2.0 * r) * z;
  return CovarianceMatrix(std::move(v));
}

AuxiliaryMatrices build_auxiliary_matrices(const UnitaryMatrix& u) {
  const int n = u.modes();
  const Eigen::MatrixXd x = u.real_part();
  const Eigen::MatrixXd y = u.imag_part();
  AuxiliaryMatrices aux;
  aux.z.resize(2 * n, 2 * n);
  aux.w.resize(2 * n, 2 * n);
  detail::z_matrix_raw(x, y, aux.z);
  detail::w_matrix_raw(x, y, aux.w);
  aux.w_prime = Eigen::MatrixXd::Identity(2 * n, 2 * n) - aux.w;
  return aux;
}

double mode_energy(const CovarianceMatrix& v, int k) {
  const int n = v.modes();
  if (k < 0 || k >= n) {
    throw std::out_of_range("mode_energy: mode index " + std::to_string(k) + " out of range [0," +
                            std::to_string(n) + ")");
  }
  return 0.5 * (v.matrix()(k, k) + v.matrix()(n + k, n + k));
}

PurityCheck check_purity_condition(const Eigen::MatrixXd& v, double tol) {
  if (v.rows() != v.cols() || v.rows() == 0 || v.rows() % 2 != 0) {
    throw std::invalid_argument("check_purity_condition: expected a 2n x 2n matrix");
  }
  const int n = static_cast<int>(v.rows()) / 2;
  const Eigen::MatrixXd omega = symplectic_form(n);
  const Eigen::MatrixXd m = 2.0 * v * omega;
  const double residual =
      (m * m + Eigen::MatrixXd::Identity(2 * n, 2 * n)).cwiseAbs().maxCoeff();
  return PurityCheck{residual < tol, residual};
}

namespace detail {

void unitary_from_generator_raw(Eigen::Ref<const Eigen::VectorXd> params, int n,
                                Eigen::MatrixXcd& h_scratch,
                                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>& solver,
                                Eigen::MatrixXcd& u_out) {
  using cd = std::complex<double>;
  h_scratch.resize(n, n);
  int re = n;                       // real parts of the strict upper triangle
  int im = n + n * (n - 1) / 2;     // imaginary parts, same traversal order
  for (int i = 0; i < n; ++i) {
    h_scratch(i, i) = cd(params[i], 0.0);
    for (int j = i + 1; j < n; ++j) {
      const cd hij(params[re++], params[im++]);
      h_scratch(i, j) = hij;
      h_scratch(j, i) = std::conj(hij);
    }
  }
  solver.compute(h_scratch);
  const auto& evals = solver.eigenvalues();
  const auto& q = solver.eigenvectors();
  Eigen::VectorXcd phases(n);
  for (int i = 0; i < n; ++i) {
    phases[i] = std::polar(1.0, evals[i]);
  }
  u_out.noalias() = q * phases.asDiagonal() * q.adjoint();
}

void z_matrix_raw(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, Eigen::MatrixXd& z_out) {
  const int n = static_cast<int>(x.rows());
  z_out.resize(2 * n, 2 * n);
  auto tl = z_out.topLeftCorner(n, n);
  auto tr = z_out.topRightCorner(n, n);
  tl.noalias() = x * x.transpose();
  tl.noalias() -= y * y.transpose();
  tr.noalias() = x * y.transpose();
  tr.noalias() += y * x.transpose();
  tr = -tr;
  z_out.bottomLeftCorner(n, n) = tr.transpose();
  z_out.bottomRightCorner(n, n) = -tl;
}

void w_matrix_raw(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, Eigen::MatrixXd& w_out) {
  const int n = static_cast<int>(x.rows());
  w_out.resize(2 * n, 2 * n);
  w_out.topLeftCorner(n, n).noalias() = x * x.transpose();
  w_out.topRightCorner(n, n).noalias() = -(x * y.transpose());
  w_out.bottomLeftCorner(n, n) = w_out.topRightCorner(n, n).transpose();
  w_out.bottomRightCorner(n, n).noalias() = y * y.transpose();
}

void pure_cm_raw(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const Eigen::VectorXd& k_diag,
                 Eigen::MatrixXd& scratch, Eigen::MatrixXd& v_out) {
  const int n = static_cast<int>(x.rows());
  scratch.resize(2 * n, 2 * n);
  scratch.topLeftCorner(n, n) = x;
  scratch.topRightCorner(n, n) = y;
  scratch.bottomLeftCorner(n, n) = -y;
  scratch.bottomRightCorner(n, n) = x;
  Eigen::VectorXd t2(2 * n);
  t2.head(n) = k_diag.array().square();
  t2.tail(n) = k_diag.array().square().inverse();
  v_out.noalias() = 0.5 * (scratch * t2.asDiagonal()) * scratch.transpose();
  v_out = 0.5 * (v_out + v_out.transpose()).eval();
}

}  // namespace detail

}  // namespace mmes
