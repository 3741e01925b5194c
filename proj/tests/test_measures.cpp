#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

#include "mmes/bipartitions.hpp"
#include "mmes/gaussian.hpp"
#include "mmes/measures.hpp"
#include "mmes/types.hpp"

using namespace mmes;

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

// Balanced beam splitter on two modes. Sends the uniform two-mode squeezed
// input into a two-mode squeezed-vacuum state, for which every reduced
// quantity has a textbook closed form.
UnitaryMatrix balanced_beam_splitter() {
  Eigen::MatrixXcd u(2, 2);
  u << 1.0, kI, kI, 1.0;
  return UnitaryMatrix(u / std::sqrt(2.0));
}

UnitaryMatrix identity_unitary(int n) {
  return UnitaryMatrix(Eigen::MatrixXcd::Identity(n, n));
}

Eigen::VectorXd pseudo_random_params(int count, unsigned seed) {
  Eigen::VectorXd p(count);
  unsigned state = seed;
  for (int i = 0; i < count; ++i) {
    state = state * 1664525u + 1013904223u;
    p[i] = (static_cast<double>(state) / 4294967296.0 - 0.5) * 2.0;
  }
  return p;
}

// chi evaluated the slow, obvious way: enumerate subsets, slice the CM with
// extract_submatrix, take determinants through Eigen directly.
double chi_bruteforce(const CovarianceMatrix& v, const SystemShape& shape, double budget) {
  const std::vector<Bipartition> subsets = enumerate_bipartitions(shape);
  double acc = 0.0;
  for (const Bipartition& a : subsets) {
    const Eigen::MatrixXd sub = extract_submatrix(v.matrix(), a);
    acc += 1.0 / std::sqrt(sub.determinant());
  }
  return std::pow(budget + 0.5, shape.n_a) * acc / static_cast<double>(subsets.size());
}

}  // namespace

TEST_CASE("subsystem_purity: product states are unentangled") {
  // vacuum
  const CovarianceMatrix vac(0.5 * Eigen::MatrixXd::Identity(8, 8));
  CHECK(subsystem_purity(vac, Bipartition({0, 1}, 4)) == doctest::Approx(1.0).epsilon(1e-13));

  // squeezed product state (U = I): still pure on every subsystem
  const CovarianceMatrix prod = build_uniform_squeezing_cm(identity_unitary(4), 0.8);
  CHECK(subsystem_purity(prod, Bipartition({0, 3}, 4)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("subsystem_purity: two-mode squeezed vacuum oracle") {
  // Balanced beam splitter on uniform squeezing r gives reduced single-mode
  // purity 1 / cosh(2r).
  for (double r : {0.3, 0.9, 1.5}) {
    const CovarianceMatrix v = build_uniform_squeezing_cm(balanced_beam_splitter(), r);
    const double p = subsystem_purity(v, Bipartition({0}, 2));
    CHECK(p == doctest::Approx(1.0 / std::cosh(2.0 * r)).epsilon(1e-12));
    // complementary subsystem has the same purity (state is pure)
    CHECK(subsystem_purity(v, Bipartition({1}, 2)) == doctest::Approx(p).epsilon(1e-12));
  }
}

TEST_CASE("subsystem_purity rejects mismatched bipartitions") {
  const CovarianceMatrix vac(0.5 * Eigen::MatrixXd::Identity(8, 8));
  CHECK_THROWS_AS(subsystem_purity(vac, Bipartition({0}, 3)), std::invalid_argument);
}

TEST_CASE("min_purity closed form") {
  // n_a = 2, N = 10: (1/2)^2 / (10.5)^2 = 1/441
  CHECK(min_purity(2, EnergyBudget(10.0)) ==
        doctest::Approx(0.0022675736961451248).epsilon(1e-14));
  // N = 0 admits only the vacuum: min purity 1
  CHECK(min_purity(3, EnergyBudget(0.0)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(min_purity(0, EnergyBudget(1.0)), std::invalid_argument);
}

TEST_CASE("chi: vacuum saturates the upper bound (2N+1)^{n_A}") {
  const CovarianceMatrix vac(0.5 * Eigen::MatrixXd::Identity(8, 8));
  CHECK(chi(vac, SystemShape{4, 2}, EnergyBudget(1.0)) ==
        doctest::Approx(9.0).epsilon(1e-13));
  CHECK(chi(vac, SystemShape{4, 1}, EnergyBudget(2.0)) ==
        doctest::Approx(5.0).epsilon(1e-13));
}

TEST_CASE("chi: beam-splitter state at energy saturation reaches 1") {
  // cosh(2r) = 2N + 1 makes the two-mode squeezed vacuum hit the purity
  // bound: chi = 1 exactly.
  const double budget = 1.0;
  const double r = 0.5 * std::acosh(2.0 * budget + 1.0);
  const CovarianceMatrix v = build_uniform_squeezing_cm(balanced_beam_splitter(), r);
  CHECK(chi(v, SystemShape{2, 1}, EnergyBudget(budget)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("chi agrees with a brute-force evaluation") {
  const UnitaryMatrix u = unitary_from_generator(pseudo_random_params(25, 7u));
  const CovarianceMatrix v = build_uniform_squeezing_cm(u, 0.6);
  const SystemShape shape{5, 2};
  CHECK(chi(v, shape, EnergyBudget(3.0)) ==
        doctest::Approx(chi_bruteforce(v, shape, 3.0)).epsilon(1e-12));
}

TEST_CASE("chi stays within its proven range on random feasible states") {
  for (unsigned seed : {3u, 4u, 5u}) {
    const UnitaryMatrix u = unitary_from_generator(pseudo_random_params(36, seed));
    const double budget = 2.0;
    const double r = 0.4 * std::acosh(2.0 * budget + 1.0);  // strictly feasible
    const CovarianceMatrix v = build_uniform_squeezing_cm(u, r);
    const SystemShape shape{6, 3};
    const double val = chi(v, shape, EnergyBudget(budget));
    CHECK(val >= 1.0 - 1e-12);
    CHECK(val <= std::pow(2.0 * budget + 1.0, shape.n_a) + 1e-9);
  }
}

TEST_CASE("z_objective: closed forms at the extremes") {
  // U = I gives Z_A = diag(+-1): tr(Z_A^2) = 2 n_A for every subset.
  CHECK(z_objective(identity_unitary(4), SystemShape{4, 2}) ==
        doctest::Approx(4.0).epsilon(1e-13));
  // the balanced beam splitter zeroes every 1-mode Z_A block
  CHECK(z_objective(balanced_beam_splitter(), SystemShape{2, 1}) ==
        doctest::Approx(0.0).epsilon(1e-13));
}

TEST_CASE("z_objective matches the UU^T combinatorial identity") {
  // For Z built from U: E[tr Z_A^2] = (p1 - p2) sum_k 2 |(U U^T)_kk|^2
  //                                   + 2 n_A p2 / ... with
  // p1 = n_A/n, p2 = n_A(n_A-1)/(n(n-1)); second term 2 n p2 in total.
  for (unsigned seed : {11u, 12u}) {
    const int n = 6;
    const SystemShape shape{n, 2};
    const UnitaryMatrix u = unitary_from_generator(pseudo_random_params(n * n, seed));
    const Eigen::MatrixXcd uut = u.matrix() * u.matrix().transpose();
    const double p1 = static_cast<double>(shape.n_a) / n;
    const double p2 =
        static_cast<double>(shape.n_a) * (shape.n_a - 1) / (static_cast<double>(n) * (n - 1));
    double diag2 = 0.0;
    for (int k = 0; k < n; ++k) diag2 += 2.0 * std::norm(uut(k, k));
    const double expected = (p1 - p2) * diag2 + 2.0 * n * p2;
    CHECK(z_objective(u, shape) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("z_objective range and phase invariance") {
  const UnitaryMatrix u = unitary_from_generator(pseudo_random_params(16, 23u));
  const SystemShape shape{4, 2};
  const double base = z_objective(u, shape);
  CHECK(base >= 0.0);
  CHECK(base <= 2.0 * shape.n_a + 1e-13);

  // a global phase leaves |(UU^T)_kk| and Z unchanged
  const UnitaryMatrix phased(std::polar(1.0, 0.37) * u.matrix());
  CHECK(z_objective(phased, shape) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("w_objective: extremes and the beam-splitter oracle") {
  // U = I makes W_A singular for every proper subset: infinite cost.
  CHECK(w_objective(identity_unitary(4), SystemShape{4, 2}) == kInfiniteCost);
  // balanced beam splitter: W_A = I/2 on single modes, det = 1/4,
  // E[det^{-1/2}] = 2.
  CHECK(w_objective(balanced_beam_splitter(), SystemShape{2, 1}) ==
        doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("w_objective terms are at least 1 when finite") {
  for (unsigned seed : {31u, 32u}) {
    const UnitaryMatrix u = unitary_from_generator(pseudo_random_params(25, seed));
    const double val = w_objective(u, SystemShape{5, 2});
    if (std::isfinite(val)) CHECK(val >= 1.0 - 1e-12);
  }
}

TEST_CASE("chi_restricted equals chi on the uniform-squeezing family") {
  const UnitaryMatrix u = unitary_from_generator(pseudo_random_params(36, 51u));
  const SystemShape shape{6, 3};
  const double budget = 4.0;
  const double r = 0.45 * std::acosh(2.0 * budget + 1.0);
  const CovarianceMatrix v = build_uniform_squeezing_cm(u, r);
  CHECK(chi_restricted(u, r, shape, EnergyBudget(budget)) ==
        doctest::Approx(chi(v, shape, EnergyBudget(budget))).epsilon(1e-10));
}

TEST_CASE("chi_restricted rejects infeasible squeezing") {
  const UnitaryMatrix u = balanced_beam_splitter();
  const double budget = 1.0;
  const double r_max = 0.5 * std::acosh(2.0 * budget + 1.0);
  CHECK_NOTHROW(chi_restricted(u, r_max, SystemShape{2, 1}, EnergyBudget(budget)));
  CHECK_THROWS_AS(chi_restricted(u, r_max * 1.01, SystemShape{2, 1}, EnergyBudget(budget)),
                  std::domain_error);
}

TEST_CASE("det_second_order: exact for 2 x 2 matrices") {
  // det(I + eps I_2) = (1 + eps)^2 = 1 + 2 eps + eps^2; at eps = 0.1: 1.21.
  CHECK(det_second_order(Eigen::MatrixXd::Identity(2, 2), 0.1) ==
        doctest::Approx(1.21).epsilon(1e-15));

  Eigen::MatrixXd m(2, 2);
  m << 0.3, -1.2, 0.7, 0.4;
  const double eps = 0.05;
  const Eigen::MatrixXd full = Eigen::MatrixXd::Identity(2, 2) + eps * m;
  CHECK(det_second_order(m, eps) == doctest::Approx(full.determinant()).epsilon(1e-14));
}

TEST_CASE("det_second_order: remainder is cubic and halves by 8") {
  // On traceless symmetric matrices (the case the measures feed in), the
  // remainder det(I + eps M) - expansion must shrink by ~2^3 when eps halves.
  std::mt19937_64 rng(99);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 4; ++trial) {
    Eigen::MatrixXd m(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = gauss(rng);
    m.diagonal().array() -= m.trace() / 4.0;

    const double eps = 1e-2;
    const auto remainder = [&](double e) {
      return (Eigen::MatrixXd::Identity(4, 4) + e * m).determinant() - det_second_order(m, e);
    };
    const double r1 = remainder(eps);
    const double r2 = remainder(eps / 2.0);
    if (std::abs(r1) > 1e-10) {  // skip accidental near-zero cubic coefficient
      const double factor = r1 / r2;
      CHECK(factor == doctest::Approx(8.0).epsilon(0.25));
    }
  }
}

TEST_CASE("detail kernels agree with their checked wrappers") {
  const UnitaryMatrix u = unitary_from_generator(pseudo_random_params(25, 61u));
  const SystemShape shape{5, 2};
  const std::vector<Bipartition> subsets = enumerate_bipartitions(shape);
  const AuxiliaryMatrices aux = build_auxiliary_matrices(u);

  Eigen::MatrixXd scratch;
  CHECK(detail::mean_tr_z2(aux.z, subsets, scratch) ==
        doctest::Approx(z_objective(u, shape)).epsilon(1e-13));

  detail::SubsetWorkspace ws;
  CHECK(detail::mean_w_invsqrt_det(aux.w, subsets, 1e-300, ws) ==
        doctest::Approx(w_objective(u, shape)).epsilon(1e-13));

  const double r = 0.3;
  const double budget = 5.0;
  CHECK(detail::chi_uniform_raw(aux.z, subsets, std::cosh(2.0 * r), std::sinh(2.0 * r),
                                budget + 0.5, ws) ==
        doctest::Approx(chi_restricted(u, r, shape, EnergyBudget(budget))).epsilon(1e-13));

  const CovarianceMatrix v = build_uniform_squeezing_cm(u, r);
  const auto mean = detail::chi_mean_raw(v.matrix(), subsets, budget + 0.5, ws);
  REQUIRE(mean.has_value());
  CHECK(*mean == doctest::Approx(chi(v, shape, EnergyBudget(budget))).epsilon(1e-13));
}

TEST_CASE("chi_mean_raw reports non-positive-definite submatrices") {
  Eigen::MatrixXd bad = -Eigen::MatrixXd::Identity(4, 4);
  const std::vector<Bipartition> subsets = enumerate_bipartitions(SystemShape{2, 1});
  detail::SubsetWorkspace ws;
  CHECK_FALSE(detail::chi_mean_raw(bad, subsets, 1.5, ws).has_value());
}
