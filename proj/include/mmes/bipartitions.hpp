#pragma once

#include <Eigen/Dense>

#include <vector>

#include "mmes/types.hpp"

namespace mmes {

// A subset A of the n modes (0-based, strictly increasing). The associated
// phase-space rows/columns are {k : k in A} followed by {n + k : k in A},
// which keeps the q/p block structure intact on submatrices.
class Bipartition {
 public:
  Bipartition(std::vector<int> modes, int total_modes);

  const std::vector<int>& modes() const { return modes_; }
  int subsystem_size() const { return static_cast<int>(modes_.size()); }
  int total_modes() const { return n_; }
  const std::vector<int>& phase_space_indices() const { return indices_; }

  // The complementary subset of modes.
  Bipartition complement() const;

 private:
  std::vector<int> modes_;
  int n_;
  std::vector<int> indices_;
};

// All C(n, n_A) subsets in lexicographic order. The averages computed by
// the entanglement measures iterate this exact order, so results are
// deterministic and bit-stable.
std::vector<Bipartition> enumerate_bipartitions(const SystemShape& shape);

// 2n_A x 2n_A submatrix of a 2n x 2n matrix, rows/columns selected by a's
// phase-space indices.
Eigen::MatrixXd extract_submatrix(const Eigen::MatrixXd& m, const Bipartition& a);

namespace detail {

// Gather m(idx, idx) into out (preallocated idx.size()^2 scratch).
void extract_submatrix_raw(const Eigen::MatrixXd& m, const std::vector<int>& idx,
                           Eigen::MatrixXd& out);

}  // namespace detail

}  // namespace mmes
