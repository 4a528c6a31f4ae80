#include <doctest.h>

#include <cmath>

#include "driftkan/error.hpp"
#include "driftkan/metrics.hpp"
#include "driftkan/rng.hpp"
#include "support/exhaustive.hpp"
#include "support/kan_fixtures.hpp"
#include "support/oracles.hpp"

using namespace driftkan;
using Boundaries = std::vector<std::size_t>;

TEST_CASE("boundary F1 on hand cases") {
  const auto s = boundary_f1({10, 20}, {11, 35}, 1);
  CHECK(s.precision == 0.5);
  CHECK(s.recall == 0.5);
  CHECK(s.f1 == 0.5);
  CHECK(boundary_f1({3, 9, 14}, {3, 9, 14}, 0).f1 == 1.0);
  CHECK(boundary_f1({}, {}, 1).f1 == 1.0);
  CHECK(boundary_f1({}, {4}, 1).f1 == 0.0);
  CHECK(boundary_f1({4}, {}, 1).f1 == 0.0);
  // One predicted boundary cannot claim two true ones.
  const auto shared = boundary_f1({4, 5}, {5}, 1);
  CHECK(shared.precision == 1.0);
  CHECK(shared.recall == 0.5);
  CHECK_THROWS_AS(boundary_f1({5, 4}, {4}, 1), Error);
}

TEST_CASE("boundary F1 swaps precision and recall with its arguments") {
  Rng rng(6);
  for (int trial = 0; trial < 300; ++trial) {
    Boundaries a, b;
    for (std::size_t i = 1; i < 30; ++i) {
      if (rng.uniform() < 0.2) a.push_back(i);
      if (rng.uniform() < 0.2) b.push_back(i);
    }
    const std::size_t tol = rng.next_u64() % 3;
    const auto ab = boundary_f1(a, b, tol), ba = boundary_f1(b, a, tol);
    CHECK(ab.precision == doctest::Approx(ba.recall));
    CHECK(ab.recall == doctest::Approx(ba.precision));
    CHECK(ab.f1 == doctest::Approx(oracle::matching_f1(a, b, tol)));
  }
}

TEST_CASE("ARI hand cases") {
  CHECK(adjusted_rand_index({1, 1, 2, 2}, {1, 1, 2, 2}) == doctest::Approx(1.0));
  CHECK(adjusted_rand_index({1, 1, 2, 2}, {2, 2, 1, 1}) == doctest::Approx(1.0));
  CHECK(adjusted_rand_index({1, 1, 2, 2}, {1, 2, 1, 2}) ==
        doctest::Approx(oracle::pair_count_ari({1, 1, 2, 2}, {1, 2, 1, 2})));
  CHECK(adjusted_rand_index({1, 1, 2, 2}, {1, 2, 1, 2}) == doctest::Approx(-0.5));
  CHECK_THROWS_AS(adjusted_rand_index({1, 2}, {1}), Error);
  CHECK_THROWS_AS(adjusted_rand_index({1}, {1}), Error);
}

TEST_CASE("ARI is invariant under relabeling and near zero for independent labels") {
  Rng rng(12);
  double mean = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> a(60), b(60), renamed(60);
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = static_cast<int>(rng.next_u64() % 4);
      b[i] = static_cast<int>(rng.next_u64() % 4);
      renamed[i] = 10 - 3 * a[i];
    }
    CHECK(adjusted_rand_index(renamed, b) == doctest::Approx(adjusted_rand_index(a, b)).epsilon(1e-12));
    mean += adjusted_rand_index(a, b) / 200.0;
  }
  CHECK(std::abs(mean) < 0.02);
}

TEST_CASE("exhaustive small cases agree with enumeration oracles") {
  const auto ari = exhaustive::ari_against_pair_counts(6, 3);
  CHECK(ari.cases > 0);
  CHECK(ari.worst <= 1e-12);
  const auto f1 = exhaustive::f1_against_matching(6, 2);
  CHECK(f1.cases > 0);
  CHECK(f1.worst <= 1e-12);
}

TEST_CASE("rmse") {
  Matrix a(1, 1), b(1, 1);
  a << 0;
  b << 2;
  CHECK(rmse(a, b) == 2.0);
  CHECK(rmse(a, a) == 0.0);
  Rng rng(2);
  const Matrix x = fixtures::random_matrix(rng, 7, 4, -3, 3), y = fixtures::random_matrix(rng, 7, 4, -3, 3);
  double sq = 0.0;
  for (Eigen::Index i = 0; i < 7; ++i)
    for (Eigen::Index j = 0; j < 4; ++j) sq += (x(i, j) - y(i, j)) * (x(i, j) - y(i, j));
  CHECK(std::abs(rmse(x, y) - std::sqrt(sq / 28.0)) <= 1e-12);
  CHECK(rmse(x, y) == rmse(y, x));
  CHECK(rmse(2.5 * x, 2.5 * y) == doctest::Approx(2.5 * rmse(x, y)).epsilon(1e-12));
  try {
    rmse(x, Matrix::Zero(7, 3));
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("time-step ground truth on patches") {
  CHECK(patch_boundaries_from_steps({400, 800}, 20, 60) == Boundaries{20, 40});
  CHECK(patch_boundaries_from_steps({409}, 20, 60) == Boundaries{20});
  CHECK(patch_boundaries_from_steps({410}, 20, 60) == Boundaries{21});
  CHECK(patch_boundaries_from_steps({0, 5, 1200}, 20, 60).empty());
  CHECK(patch_boundaries_from_steps({400, 401}, 20, 60) == Boundaries{20});

  const std::vector<int> steps{0, 0, 0, 1, 1, 1, 1, 2, 2};
  CHECK(patch_labels_from_steps(steps, 3, 3) == std::vector<int>{0, 1, 2});
  CHECK(patch_labels_from_steps({0, 1, 1, 0}, 2, 2) == std::vector<int>{0, 0});
  CHECK_THROWS_AS(patch_labels_from_steps(steps, 3, 4), Error);
  CHECK_THROWS_AS(patch_boundaries_from_steps({1}, 0, 4), Error);
}
