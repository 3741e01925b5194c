#pragma once

#include <stdexcept>
#include <string>

namespace mmes {

// Numerical tolerances used by the validating constructors and the
// self-check routines. Algebraic identities (unitarity, orthogonality,
// projector relations) hold to ~1e-14 for freshly constructed objects;
// the defaults leave headroom for error accumulated in 2n x 2n products.
struct Tolerances {
  double symmetry = 1e-12;   // |V - V^T|
  double algebraic = 1e-10;  // U'U = I, R'R = I, Z^2 = I, ...
  double purity = 1e-8;      // |(2 V Omega)^2 + I|
  double det = 1e-8;         // relative error of det(V) * 4^n vs 1
};

// Number of modes n and subsystem size n_A of the bipartitions under
// study. Only n_A <= n - n_A is considered; the complement carries the
// same purity, so larger subsystems are redundant.
struct SystemShape {
  int n;
  int n_a;

  SystemShape(int n_, int n_a_) : n(n_), n_a(n_a_) {
    if (n_a < 1 || 2 * n_a > n) {
      throw std::invalid_argument("SystemShape: require 1 <= n_a <= n/2, got n=" +
                                  std::to_string(n_) + " n_a=" + std::to_string(n_a_));
    }
  }
};

// Mean number of excitations allowed per mode. The admissible states are
// those whose per-mode energy (q and p variances averaged) stays below
// N + 1/2.
struct EnergyBudget {
  double mean_excitations;

  explicit EnergyBudget(double n_mean) : mean_excitations(n_mean) {
    if (!(n_mean >= 0.0)) {
      throw std::invalid_argument("EnergyBudget: mean excitations must be >= 0");
    }
  }
};

}  // namespace mmes
