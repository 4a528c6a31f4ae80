#include <doctest.h>

#include "driftkan/error.hpp"
#include "driftkan/patching.hpp"
#include "driftkan/rng.hpp"

using namespace driftkan;

namespace {

SeriesMatrix column(std::initializer_list<double> values) {
  SeriesMatrix s;
  s.values.resize(static_cast<Eigen::Index>(values.size()), 1);
  Eigen::Index i = 0;
  for (double v : values) s.values(i++, 0) = v;
  s.channel_names = {"c0"};
  return s;
}

Patch single_channel(std::initializer_list<double> values) {
  Patch p;
  p.data = column(values).values;
  return p;
}

}  // namespace

TEST_CASE("patchify splits exactly when w divides l") {
  const auto set = patchify(column({1, 2, 3, 4, 5, 6}), 2);
  CHECK(set.n == 3);
  CHECK(set.dim == 2);
  CHECK(set.dropped_tail == 0);
  CHECK(set.data(0, 0) == 1);
  CHECK(set.data(0, 1) == 2);
  CHECK(set.data(2, 0) == 5);
  CHECK(set.data(2, 1) == 6);
}

TEST_CASE("patchify drops the tail unless strict") {
  const auto s = column({1, 2, 3, 4, 5, 6, 7});
  const auto set = patchify(s, 2);
  CHECK(set.n == 3);
  CHECK(set.dropped_tail == 1);
  CHECK_THROWS_AS(patchify(s, 2, true), Error);
  try {
    patchify(s, 2, true);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IndivisibleLength);
  }
  try {
    patchify(s, 8);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::WidthTooLarge);
  }
}

TEST_CASE("flattening is time-major and patch i only sees its own steps") {
  SeriesMatrix s;
  s.values.resize(6, 2);
  for (Eigen::Index t = 0; t < 6; ++t) {
    s.values(t, 0) = static_cast<double>(10 * t);
    s.values(t, 1) = static_cast<double>(10 * t + 1);
  }
  s.channel_names = {"a", "b"};
  const auto set = patchify(s, 3);
  CHECK(set.data.row(1) == (Vector(6) << 30, 31, 40, 41, 50, 51).finished().transpose());
  CHECK(join_patches(set) == s.values);
  const Patch p = set.patch(1);
  CHECK(p.index == 2);
  CHECK(Patch::unflatten(p.flatten(), 3, 2, 2).data == p.data);
}

TEST_CASE("normalization of a known patch") {
  const Patch raw = single_channel({1, 2, 3});
  const NormStats st = patch_stats(raw);
  CHECK(st.mean(0) == doctest::Approx(2.0));
  CHECK(st.std(0) == doctest::Approx(0.816497).epsilon(1e-6));
  const Patch norm = normalize_patch(raw, st);
  CHECK(norm.data(0, 0) == doctest::Approx(-1.224745).epsilon(1e-6));
  CHECK(norm.data(1, 0) == doctest::Approx(0.0));
  CHECK(norm.data(2, 0) == doctest::Approx(1.224745).epsilon(1e-6));
}

TEST_CASE("constant channels normalise to zeros with the floor as std") {
  const Patch raw = single_channel({5, 5, 5});
  const NormStats st = patch_stats(raw);
  CHECK(st.std(0) == kNormEps);
  CHECK(normalize_patch(raw, st).data.isZero(0.0));
  CHECK(denormalize_patch(normalize_patch(raw, st), st).data == raw.data);
}

TEST_CASE("denormalize examples") {
  NormStats st{Vector::Constant(1, 2.0), Vector::Constant(1, 1.0)};
  CHECK(denormalize_patch(single_channel({0, 0, 0}), st).data == single_channel({2, 2, 2}).data);
  NormStats known{Vector::Constant(1, 2.0), Vector::Constant(1, 0.816497)};
  const Patch back = denormalize_patch(single_channel({-1.224745, 0, 1.224745}), known);
  CHECK(back.data(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(back.data(2, 0) == doctest::Approx(3.0).epsilon(1e-6));
  NormStats identity{Vector::Zero(1), Vector::Ones(1)};
  const Patch p = single_channel({0.3, -7, 2});
  CHECK(denormalize_patch(p, identity).data == p.data);
  NormStats wrong{Vector::Zero(2), Vector::Ones(2)};
  CHECK_THROWS_AS(denormalize_patch(p, wrong), Error);
}

TEST_CASE("normalized patch sets have zero mean and unit std per channel") {
  Rng rng(1);
  SeriesMatrix s;
  s.values.resize(100, 3);
  for (Eigen::Index i = 0; i < s.values.rows(); ++i) {
    s.values(i, 0) = rng.normal(50.0, 3.0);
    s.values(i, 1) = 4.0;  // constant
    s.values(i, 2) = rng.uniform(-1e3, 1e3);
  }
  const auto set = normalize_patches(patchify(s, 10));
  CHECK(set.normalized);
  REQUIRE(set.stats.size() == set.n);
  for (std::size_t i = 0; i < set.n; ++i) {
    const Patch p = set.patch(i);
    for (Eigen::Index c = 0; c < 3; ++c) {
      const auto col = p.data.col(c);
      const double mean = col.mean();
      const double sd = std::sqrt((col.array() - mean).square().mean());
      CHECK(std::abs(mean) < 1e-9);
      if (c == 1)
        CHECK(col.isZero(0.0));
      else
        CHECK(std::abs(sd - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("normalize then denormalize restores random patches") {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    Patch p;
    p.data.resize(8, 3);
    for (Eigen::Index i = 0; i < p.data.size(); ++i) p.data.data()[i] = rng.normal(rng.uniform(-100, 100), 10.0);
    if (trial % 5 == 0) p.data.col(1).setConstant(rng.normal());
    const NormStats st = patch_stats(p);
    const Patch back = denormalize_patch(normalize_patch(p, st), st);
    CHECK((back.data - p.data).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("serial and threaded normalisation agree") {
  Rng rng(2);
  SeriesMatrix s;
  s.values.resize(400, 5);
  for (Eigen::Index i = 0; i < s.values.size(); ++i) s.values.data()[i] = rng.normal();
  const auto raw = patchify(s, 8);
  const auto a = normalize_patches(raw);
  const auto b = normalize_patches(raw);
  CHECK(a.data == b.data);
  // Row-by-row reference.
  for (std::size_t i = 0; i < raw.n; ++i) {
    const Patch p = raw.patch(i);
    CHECK(normalize_patch(p, patch_stats(p)).flatten().transpose() == a.data.row(static_cast<Eigen::Index>(i)));
  }
}

TEST_CASE("patch_set_from_matrix wraps rows as-is") {
  Matrix m = Matrix::Random(5, 4);
  const auto set = patch_set_from_matrix(m);
  CHECK(set.n == 5);
  CHECK(set.dim == 4);
  CHECK(set.data == m);
}
