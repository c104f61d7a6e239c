#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "regseg/error.hpp"
#include "regseg/simgen.hpp"
#include "regseg/timeseries.hpp"
#include "support.hpp"

using namespace regseg;

namespace {

std::filesystem::path write_file(const std::string& name, const std::string& text) {
  const auto path = testing::scratch_dir("ts") / name;
  std::ofstream(path) << text;
  return path;
}

MultiSeries univariate(std::vector<double> v) { return make_series(Matrix::from_column(v)); }

MultiSeries random_series(std::size_t n, std::size_t p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(3.0, 2.0);
  Matrix m(n, p);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < p; ++c) m(r, c) = g(rng);
  return make_series(std::move(m));
}

}  // namespace

TEST_CASE("load_csv reads a small file") {
  const auto s = load_csv(write_file("small.csv", "t,x\n1,0.5\n2,-0.1\n3,0.2\n"), true);
  CHECK(s.length() == 3);
  CHECK(s.dims() == 1);
  CHECK(s.dim_names == std::vector<std::string>{"x"});
  CHECK(s.values(1, 0) == -0.1);
  CHECK(s.time_index == std::vector<std::string>{"1", "2", "3"});
}

TEST_CASE("load_csv without header names columns x1..xp") {
  const auto s = load_csv(write_file("nohdr.csv", "10,1,2\n20,3,4\n"), false);
  CHECK(s.dims() == 2);
  CHECK(s.dim_names == std::vector<std::string>{"x1", "x2"});
  CHECK(s.values(1, 1) == 4.0);
}

TEST_CASE("load_csv rejects bad input") {
  SUBCASE("duplicated timestamp") {
    CHECK_THROWS_AS(load_csv(write_file("dup.csv", "t,x\n1,0.5\n1,0.1\n"), true), ValidationError);
  }
  SUBCASE("decreasing timestamps") {
    CHECK_THROWS_AS(load_csv(write_file("dec.csv", "t,x\n2,0.5\n1,0.1\n"), true), ValidationError);
  }
  SUBCASE("single row") { CHECK_THROWS_AS(load_csv(write_file("one.csv", "t,x\n1,0.5\n"), true), ValidationError); }
  SUBCASE("unparsable value reports its line") {
    try {
      load_csv(write_file("bad.csv", "t,x\n1,0.5\n2,abc\n3,1\n"), true);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("ragged row reports its line") {
    try {
      load_csv(write_file("ragged.csv", "t,x,y\n1,0.5,1\n2,1\n"), true);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("non-finite value") {
    CHECK_THROWS_AS(load_csv(write_file("inf.csv", "t,x\n1,inf\n2,1\n"), true), ValidationError);
  }
}

TEST_CASE("timestamps compare lexicographically when not numeric") {
  const auto s = load_csv(write_file("stamps.csv",
                                     "time,a\n2020-01-02 10:00,1\n2020-01-02 10:01,2\n2020-01-02 10:02,3\n"),
                          true);
  CHECK(s.length() == 3);
  CHECK(s.time_index[2] == "2020-01-02 10:02");
}

TEST_CASE("simulated 3-column series survives a save/load round trip") {
  auto sim = gen_bivariate_gaussian(2, 2, {180, 180}, 5);
  Matrix m(360, 3);
  for (std::size_t r = 0; r < 360; ++r) {
    m(r, 0) = sim.series.values(r, 0);
    m(r, 1) = sim.series.values(r, 1);
    m(r, 2) = sim.series.values(r, 0) - sim.series.values(r, 1);
  }
  const auto s = make_series(std::move(m), {"a", "b", "c"});
  const auto path = testing::scratch_dir("ts") / "roundtrip.csv";
  save_csv(s, path);
  const auto back = load_csv(path, true);
  CHECK(back.length() == 360);
  CHECK(back.dims() == 3);
  CHECK(back.values == s.values);
  CHECK(back.dim_names == s.dim_names);
  CHECK(back.time_index == s.time_index);
}

TEST_CASE("standardize gives mean 0 and sd 1") {
  const auto z = standardize(univariate({1, 2, 3}));
  CHECK(z.values(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(z.values(1, 0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(z.values(2, 0) == doctest::Approx(1.0).epsilon(1e-12));

  const auto s = standardize(random_series(500, 3, 9));
  for (std::size_t c = 0; c < 3; ++c) {
    const auto col = s.column(c);
    const double m = testing::sample_mean(col);
    double ss = 0.0;
    for (double v : col) ss += (v - m) * (v - m);
    CHECK(std::abs(m) < 1e-10);
    CHECK(std::abs(std::sqrt(ss / 499.0) - 1.0) < 1e-10);
  }
}

TEST_CASE("standardize is idempotent") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto once = standardize(random_series(50 + seed * 7, 1 + seed % 4, seed));
    const auto twice = standardize(once);
    for (std::size_t i = 0; i < once.values.data().size(); ++i)
      CHECK(std::abs(once.values.data()[i] - twice.values.data()[i]) < 1e-10);
  }
}

TEST_CASE("standardize names the constant column") {
  auto s = make_series(Matrix::from_rows({{1, 5}, {2, 5}, {3, 5}}), {"ok", "flat"});
  try {
    standardize(s);
    FAIL("expected a degenerate-input error");
  } catch (const DegenerateInputError& e) {
    CHECK(std::string(e.what()).find("flat") != std::string::npos);
  }
}

TEST_CASE("embed_lags") {
  SUBCASE("r = 1") {
    const auto e = embed_lags(univariate({1, 2, 3, 4, 5}), 1);
    CHECK(e.values == Matrix::from_rows({{1, 2}, {2, 3}, {3, 4}, {4, 5}}));
    CHECK(e.time_index == std::vector<std::string>{"1", "2", "3", "4"});
  }
  SUBCASE("r = N - 1 leaves one row") {
    const auto e = embed_lags(univariate({1, 2, 3}), 2);
    CHECK(e.values == Matrix::from_rows({{1, 2, 3}}));
  }
  SUBCASE("invalid lags") {
    CHECK_THROWS_AS(embed_lags(univariate({1, 2, 3}), 0), ParameterError);
    CHECK_THROWS_AS(embed_lags(univariate({1, 2, 3}), 3), SizeError);
    CHECK_THROWS_AS(embed_lags(random_series(10, 2, 1), 1), ValidationError);
  }
  SUBCASE("rows are contiguous subsequences") {
    const auto s = random_series(40, 1, 3);
    for (std::size_t r = 1; r <= 5; ++r) {
      const auto e = embed_lags(s, r);
      REQUIRE(e.length() == 40 - r);
      for (std::size_t t = 0; t < e.length(); ++t)
        for (std::size_t j = 0; j <= r; ++j) CHECK(e.values(t, j) == s.values(t + j, 0));
    }
  }
}

TEST_CASE("block_permute stays inside windows") {
  const auto s = random_series(100, 2, 4);
  const auto [out, perm] = block_permute(s, 30, 77);
  for (std::size_t i = 0; i < 100; ++i) CHECK(perm.mapping[i] / 30 == i / 30);
  std::set<std::size_t> last(perm.mapping.begin() + 90, perm.mapping.end());
  CHECK(last.size() == 10);
  CHECK(*last.begin() == 90);
  for (std::size_t i = 0; i < 100; ++i) CHECK(out.values(i, 1) == s.values(perm.mapping[i], 1));
}

TEST_CASE("block_permute with window 1 is the identity") {
  const auto s = random_series(25, 2, 8);
  const auto [out, perm] = block_permute(s, 1, 3);
  CHECK(out.values == s.values);
  for (std::size_t i = 0; i < 25; ++i) CHECK(perm.mapping[i] == i);
}

TEST_CASE("block_permute is deterministic and invertible") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const std::size_t n = 20 + seed * 5;
    const std::size_t window = 1 + seed % n;
    const auto s = random_series(n, 2, seed);
    const auto [a, pa] = block_permute(s, window, seed);
    const auto [b, pb] = block_permute(s, window, seed);
    CHECK(a == b);
    CHECK(pa.mapping == pb.mapping);
    CHECK(unpermute(a, pa) == s);
    const auto inv = pa.inverse();
    for (std::size_t i = 0; i < n; ++i) CHECK(pa.mapping[inv[i]] == i);
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<int> shuffled(n);
    for (std::size_t i = 0; i < n; ++i) shuffled[i] = idx[pa.mapping[i]];
    CHECK(unpermute_values<int>(shuffled, pa) == idx);
  }
  const auto s = random_series(12, 1, 1);
  CHECK_THROWS_AS(block_permute(s, 0, 1), ParameterError);
  CHECK_THROWS_AS(block_permute(s, 13, 1), ParameterError);
}

TEST_CASE("full-window permutation is roughly uniform") {
  // Each of 4 items should land in each slot about a quarter of the time.
  const auto s = univariate({0, 1, 2, 3});
  std::array<std::array<int, 4>, 4> hits{};
  const int trials = 8000;
  for (int t = 0; t < trials; ++t) {
    const auto [out, perm] = block_permute(s, 4, static_cast<std::uint64_t>(t));
    for (std::size_t i = 0; i < 4; ++i) ++hits[i][perm.mapping[i]];
  }
  for (const auto& row : hits)
    for (int h : row) CHECK(std::abs(h / static_cast<double>(trials) - 0.25) < 0.03);
}
