#include "mmes/bipartitions.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace mmes {

Bipartition::Bipartition(std::vector<int> modes, int total_modes)
    : modes_(std::move(modes)), n_(total_modes) {
  if (modes_.empty()) {
    throw std::invalid_argument("Bipartition: empty mode subset");
  }
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    if (modes_[i] < 0 || modes_[i] >= n_) {
      throw std::invalid_argument("Bipartition: mode index " + std::to_string(modes_[i]) +
                                  " out of range [0," + std::to_string(n_) + ")");
    }
    if (i > 0 && modes_[i] <= modes_[i - 1]) {
      throw std::invalid_argument("Bipartition: mode indices must be strictly increasing");
    }
  }
  indices_.reserve(2 * modes_.size());
  for (int k : modes_) indices_.push_back(k);
  for (int k : modes_) indices_.push_back(n_ + k);
}

Bipartition Bipartition::complement() const {
  std::vector<int> rest;
  rest.reserve(n_ - modes_.size());
  std::size_t j = 0;
  for (int k = 0; k < n_; ++k) {
    if (j < modes_.size() && modes_[j] == k) {
      ++j;
    } else {
      rest.push_back(k);
    }
  }
  return Bipartition(std::move(rest), n_);
}

std::vector<Bipartition> enumerate_bipartitions(const SystemShape& shape) {
  std::vector<Bipartition> out;
  std::vector<int> current(shape.n_a);
  for (int i = 0; i < shape.n_a; ++i) current[i] = i;
  while (true) {
    out.emplace_back(current, shape.n);
    // next lexicographic combination
    int i = shape.n_a - 1;
    while (i >= 0 && current[i] == shape.n - shape.n_a + i) --i;
    if (i < 0) break;
    ++current[i];
    for (int j = i + 1; j < shape.n_a; ++j) current[j] = current[j - 1] + 1;
  }
  return out;
}

Eigen::MatrixXd extract_submatrix(const Eigen::MatrixXd& m, const Bipartition& a) {
  if (m.rows() != m.cols() || m.rows() != 2 * a.total_modes()) {
    throw std::invalid_argument("extract_submatrix: matrix is " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()) + " but the bipartition expects dimension " +
                                std::to_string(2 * a.total_modes()));
  }
  Eigen::MatrixXd out;
  detail::extract_submatrix_raw(m, a.phase_space_indices(), out);
  return out;
}

namespace detail {

void extract_submatrix_raw(const Eigen::MatrixXd& m, const std::vector<int>& idx,
                           Eigen::MatrixXd& out) {
  const int d = static_cast<int>(idx.size());
  out.resize(d, d);
  for (int j = 0; j < d; ++j) {
    const auto col = m.col(idx[j]);
    for (int i = 0; i < d; ++i) {
      out(i, j) = col(idx[i]);
    }
  }
}

}  // namespace detail

}  // namespace mmes
