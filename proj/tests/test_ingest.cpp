#include <doctest.h>

#include <Eigen/SVD>

#include <cmath>

#include "driftkan/error.hpp"
#include "driftkan/ingest.hpp"
#include "driftkan/rng.hpp"
#include "support/temp_dir.hpp"

using namespace driftkan;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidFormat;
}

SyntheticSpec two_regimes(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.length = 120;
  spec.channels = 3;
  spec.noise_sigma = 0.1;
  spec.seed = seed;
  RegimeSpec a, b;
  a.duration = 60;
  b.duration = 60;
  b.family = GeneratorFamily::LinearRecurrence;
  spec.regimes = {a, b};
  return spec;
}

}  // namespace

TEST_CASE("rng streams are reproducible and roughly standard normal") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK(Rng(42).next_u64() != c.next_u64());
  Rng g(9);
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = g.normal();
    sum += x;
    sq += x * x;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sq / n - 1.0) < 0.01);
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
}

TEST_CASE("load_csv without header generates channel names") {
  TempDir dir;
  const auto path = dir.write("a.csv", "1,2\n3,4\n5,6\n");
  const auto s = load_csv(path, false);
  CHECK(s.length() == 3);
  CHECK(s.channels() == 2);
  CHECK(s.channel_names == std::vector<std::string>{"c0", "c1"});
  CHECK(s.values(2, 1) == 6.0);
}

TEST_CASE("load_csv passes header names through") {
  TempDir dir;
  const auto s = load_csv(dir.write("h.csv", "a,b\n1,2\n3,4\n5,6\n7,8\n"), true);
  CHECK(s.length() == 4);
  CHECK(s.channel_names == std::vector<std::string>{"a", "b"});
}

TEST_CASE("load_csv drops a flagged timestamp column") {
  TempDir dir;
  const auto s = load_csv(dir.write("t.csv", "time,x,y\n0,1,2\n1,3,4\n"), true, 0);
  CHECK(s.channels() == 2);
  CHECK(s.channel_names == std::vector<std::string>{"x", "y"});
  CHECK(s.values(1, 0) == 3.0);
}

TEST_CASE("load_csv reports malformed input with locations") {
  TempDir dir;
  SUBCASE("ragged row") {
    try {
      load_csv(dir.write("r.csv", "1,2\n3,4,5\n"), false);
      FAIL("no error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::RaggedRows);
      CHECK(e.row() == 2);
    }
  }
  SUBCASE("non-numeric cell") {
    try {
      load_csv(dir.write("p.csv", "1,2\n3,x\n"), false);
      FAIL("no error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParseError);
      CHECK(e.row() == 2);
      CHECK(e.col() == 2);
    }
  }
  SUBCASE("blank cell is an error, not a zero") {
    CHECK(code_of([&] { load_csv(dir.write("b.csv", "1,2\n3,\n"), false); }) == ErrorCode::ParseError);
  }
  SUBCASE("non-finite value") {
    CHECK(code_of([&] { load_csv(dir.write("n.csv", "1,2\n3,nan\n"), false); }) == ErrorCode::ParseError);
  }
  SUBCASE("missing file") {
    CHECK(code_of([&] { load_csv(dir.file("nope.csv"), false); }) == ErrorCode::FileNotFound);
  }
  SUBCASE("header only") {
    CHECK(code_of([&] { load_csv(dir.write("e.csv", "a,b\n"), true); }) == ErrorCode::EmptyInput);
  }
}

TEST_CASE("save_csv then load_csv round-trips values") {
  TempDir dir;
  Rng rng(3);
  SeriesMatrix s;
  s.values.resize(50, 4);
  for (Eigen::Index i = 0; i < s.values.size(); ++i) s.values.data()[i] = rng.normal(0.0, 100.0);
  s.channel_names = {"w", "x", "y", "z"};
  save_csv(dir.file("s.csv"), s);
  const auto back = load_csv(dir.file("s.csv"), true);
  CHECK(back.channel_names == s.channel_names);
  CHECK(((back.values - s.values).cwiseAbs().array() <= 1e-9 * (1.0 + s.values.cwiseAbs().array())).all());
}

TEST_CASE("generate_synthetic is deterministic in the seed") {
  const auto [s1, t1] = generate_synthetic(two_regimes(7));
  const auto [s2, t2] = generate_synthetic(two_regimes(7));
  const auto [s3, t3] = generate_synthetic(two_regimes(8));
  CHECK(s1.values == s2.values);
  CHECK(t1.labels == t2.labels);
  CHECK(s1.values != s3.values);
  CHECK(s1.values.allFinite());
}

TEST_CASE("ground truth follows cumulative durations") {
  const auto [s, truth] = generate_synthetic(two_regimes(1));
  CHECK(truth.boundaries == std::vector<std::size_t>{60});
  REQUIRE(truth.labels.size() == 120);
  for (std::size_t t = 0; t < 120; ++t) CHECK(truth.labels[t] == (t < 60 ? 0 : 1));
}

TEST_CASE("regimes sharing an id reuse the same generator") {
  SyntheticSpec spec;
  spec.length = 90;
  spec.channels = 2;
  spec.seed = 5;
  RegimeSpec a, b;
  a.duration = b.duration = 30;
  a.id = 0;
  b.id = 1;
  a.period = b.period = 10;
  spec.regimes = {a, b, a};
  const auto [s, truth] = generate_synthetic(spec);
  CHECK(truth.boundaries == std::vector<std::size_t>{30, 60});
  CHECK(truth.labels.front() == 0);
  CHECK(truth.labels.back() == 0);
  // Period 10 divides 60, so the recurrence of regime 0 repeats exactly without noise.
  CHECK((s.values.middleRows(0, 30) - s.values.middleRows(60, 30)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("noise-free sinusoid values are bounded by the amplitude sum") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SyntheticSpec spec;
    spec.length = 200;
    spec.channels = 4;
    spec.seed = seed;
    RegimeSpec r;
    r.duration = 200;
    r.components = 3;
    spec.regimes = {r};
    const auto params = draw_sinusoid_params(seed, 0, 4, 3);
    double bound = 0.0;
    for (double a : params.amplitudes) bound += std::abs(a);
    r.sinusoid = params;
    spec.regimes = {r};
    const auto [s, truth] = generate_synthetic(spec);
    CHECK(s.values.cwiseAbs().maxCoeff() <= bound + 1e-12);
  }
}

TEST_CASE("invalid synthetic specs are rejected") {
  auto spec = two_regimes(1);
  spec.length = 119;
  CHECK(code_of([&] { generate_synthetic(spec); }) == ErrorCode::InvalidSpec);
  spec = two_regimes(1);
  spec.regimes.clear();
  CHECK(code_of([&] { validate(spec); }) == ErrorCode::InvalidSpec);
  spec = two_regimes(1);
  spec.noise_sigma = -1.0;
  CHECK(code_of([&] { validate(spec); }) == ErrorCode::InvalidSpec);
}

TEST_CASE("subspace fixture rows lie in their concept's span") {
  const auto fx = generate_subspace_patches(10, 2, 12, 2, 4);
  CHECK(fx.patches.rows() == 20);
  CHECK(fx.labels.front() == 0);
  CHECK(fx.labels.back() == 1);
  for (int c = 0; c < 2; ++c) {
    const Matrix block = fx.patches.middleRows(c * 10, 10);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(block);
    const auto& sv = svd.singularValues();
    CHECK(sv(2) < 1e-9 * sv(0));
  }
}
