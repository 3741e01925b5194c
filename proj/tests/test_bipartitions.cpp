#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "mmes/bipartitions.hpp"
#include "mmes/types.hpp"

using namespace mmes;

TEST_CASE("Bipartition exposes modes and phase-space indices") {
  const Bipartition a({0, 2}, 4);
  CHECK(a.subsystem_size() == 2);
  CHECK(a.total_modes() == 4);
  CHECK(a.modes() == std::vector<int>{0, 2});
  // q-indices first, then the matching p-indices shifted by n
  CHECK(a.phase_space_indices() == std::vector<int>{0, 2, 4, 6});
}

TEST_CASE("Bipartition complement") {
  const Bipartition a({0, 2}, 5);
  const Bipartition b = a.complement();
  CHECK(b.modes() == std::vector<int>{1, 3, 4});
  CHECK(b.total_modes() == 5);
  CHECK(b.complement().modes() == a.modes());
}

TEST_CASE("Bipartition rejects malformed subsets") {
  CHECK_THROWS_AS(Bipartition({}, 4), std::invalid_argument);        // empty
  CHECK_THROWS_AS(Bipartition({1, 0}, 4), std::invalid_argument);    // not increasing
  CHECK_THROWS_AS(Bipartition({0, 0}, 4), std::invalid_argument);    // duplicate
  CHECK_THROWS_AS(Bipartition({-1}, 4), std::invalid_argument);      // negative
  CHECK_THROWS_AS(Bipartition({4}, 4), std::invalid_argument);       // out of range
}

TEST_CASE("enumerate_bipartitions lists subsets lexicographically") {
  const std::vector<Bipartition> all = enumerate_bipartitions(SystemShape{4, 2});
  REQUIRE(all.size() == 6);
  const std::vector<std::vector<int>> expected = {{0, 1}, {0, 2}, {0, 3},
                                                  {1, 2}, {1, 3}, {2, 3}};
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(all[i].modes() == expected[i]);
  }
}

TEST_CASE("enumerate_bipartitions counts match binomials") {
  CHECK(enumerate_bipartitions(SystemShape{9, 4}).size() == 126);  // C(9,4)
  CHECK(enumerate_bipartitions(SystemShape{7, 3}).size() == 35);   // C(7,3)
  CHECK(enumerate_bipartitions(SystemShape{5, 1}).size() == 5);
}

TEST_CASE("enumerate_bipartitions validates the shape") {
  CHECK_THROWS_AS(enumerate_bipartitions(SystemShape{4, 0}), std::invalid_argument);
  CHECK_THROWS_AS(enumerate_bipartitions(SystemShape{4, 4}), std::invalid_argument);
  CHECK_THROWS_AS(enumerate_bipartitions(SystemShape{1, 1}), std::invalid_argument);
}

TEST_CASE("extract_submatrix against a hand-traced oracle") {
  // m(i, j) = 10 i + j makes every entry identify its source coordinates.
  Eigen::MatrixXd m(8, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) m(i, j) = 10.0 * i + j;

  const Bipartition a({1, 3}, 4);  // phase-space indices {1, 3, 5, 7}
  const Eigen::MatrixXd sub = extract_submatrix(m, a);
  REQUIRE(sub.rows() == 4);
  REQUIRE(sub.cols() == 4);
  Eigen::MatrixXd expected(4, 4);
  expected << 11, 13, 15, 17,  //
      31, 33, 35, 37,          //
      51, 53, 55, 57,          //
      71, 73, 75, 77;
  CHECK((sub - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("extract_submatrix rejects a dimension mismatch") {
  const Bipartition a({0}, 3);  // expects a 6 x 6 matrix
  CHECK_THROWS_AS(extract_submatrix(Eigen::MatrixXd::Zero(4, 4), a), std::invalid_argument);
}

TEST_CASE("extract_submatrix_raw matches the checked wrapper") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Random(10, 10);
  const Bipartition a({0, 2, 4}, 5);
  Eigen::MatrixXd out(6, 6);
  detail::extract_submatrix_raw(m, a.phase_space_indices(), out);
  CHECK((out - extract_submatrix(m, a)).cwiseAbs().maxCoeff() == 0.0);
}
