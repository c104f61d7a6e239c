#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "regseg/error.hpp"
#include "regseg/simgen.hpp"
#include "support.hpp"

using namespace regseg;

namespace {

// Contiguous per-state stretches of one column.
std::vector<std::vector<double>> stretches(const LabeledSeries& s, int state, std::size_t col = 0) {
  std::vector<std::vector<double>> out;
  for (std::size_t t = 0; t < s.truth.size(); ++t) {
    if (s.truth[t] != state) continue;
    if (t == 0 || s.truth[t - 1] != state) out.emplace_back();
    out.back().push_back(s.series.values(t, col));
  }
  return out;
}

Cov2 empirical_covariance(const LabeledSeries& s, int state) {
  double n = 0, s00 = 0, s01 = 0, s11 = 0, m0 = 0, m1 = 0;
  for (std::size_t t = 0; t < s.truth.size(); ++t) {
    if (s.truth[t] != state) continue;
    n += 1;
    m0 += s.series.values(t, 0);
    m1 += s.series.values(t, 1);
  }
  m0 /= n;
  m1 /= n;
  for (std::size_t t = 0; t < s.truth.size(); ++t) {
    if (s.truth[t] != state) continue;
    const double a = s.series.values(t, 0) - m0, b = s.series.values(t, 1) - m1;
    s00 += a * a;
    s01 += a * b;
    s11 += b * b;
  }
  return {{{s00 / (n - 1), s01 / (n - 1)}, {s01 / (n - 1), s11 / (n - 1)}}};
}

double frobenius(const Cov2& a, const Cov2& b) {
  double s = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) s += (a[i][j] - b[i][j]) * (a[i][j] - b[i][j]);
  return std::sqrt(s);
}

std::size_t count_state(const std::vector<int>& truth, int state) {
  std::size_t n = 0;
  for (int l : truth) n += l == state ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("period layouts") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = gen_switching_periods(10, {200, 400}, seed);
    CHECK(p.truth.size() >= 2000);
    CHECK(p.truth.size() <= 4000);
    REQUIRE(p.change_points.size() == 9);
    CHECK(p.truth.front() == 0);
    for (std::size_t t = 1; t < p.truth.size(); ++t) {
      const bool boundary = std::find(p.change_points.begin(), p.change_points.end(), t) != p.change_points.end();
      CHECK((p.truth[t] != p.truth[t - 1]) == boundary);
    }
    std::size_t prev = 0;
    for (std::size_t cp : p.change_points) {
      CHECK(cp - prev >= 200);
      CHECK(cp - prev <= 400);
      prev = cp;
    }
  }
  const auto fixed = gen_switching_periods(2, {5, 5}, 1);
  CHECK(fixed.truth == std::vector<int>{0, 0, 0, 0, 0, 1, 1, 1, 1, 1});
  CHECK(fixed.change_points == std::vector<std::size_t>{5});

  const auto a = gen_switching_periods(10, {200, 400}, 3);
  const auto b = gen_switching_periods(10, {200, 400}, 3);
  CHECK(a.truth == b.truth);
  CHECK(a.change_points == b.change_points);
  CHECK_THROWS_AS(gen_switching_periods(10, {400, 200}, 1), ParameterError);
  CHECK_THROWS_AS(gen_switching_periods(10, {0, 2}, 1), ParameterError);
}

TEST_CASE("period lengths cover the range uniformly") {
  std::vector<std::size_t> hits(5, 0);
  const auto p = gen_switching_periods(5001, {1, 5}, 11);
  std::size_t prev = 0;
  for (std::size_t cp : p.change_points) {
    ++hits[cp - prev - 1];
    prev = cp;
  }
  for (std::size_t h : hits) CHECK(std::abs(static_cast<double>(h) / 5000.0 - 0.2) <= 0.03);
}

TEST_CASE("Gaussian case covariances") {
  const auto c1 = case_covariances(1);
  CHECK(c1[0][0][1] == 0.3);
  CHECK(c1[1][0][1] == 0.7);
  CHECK(case_covariances(2)[1][1][0] == -0.7);
  const auto c3 = case_covariances(3);
  CHECK(c3[0][0][0] == 1.0);
  CHECK(c3[0][1][1] == 2.25);
  CHECK(c3[1][0][0] == 2.25);
  CHECK(c3[1][1][1] == 1.0);
  CHECK(c3[0][0][1] == doctest::Approx(0.6 * 1.5));
  CHECK(case_covariances(4)[1][0][1] == doctest::Approx(0.2 * 1.5));
  CHECK(case_covariances(5)[1][0][1] == -0.3);
  CHECK_THROWS_AS(case_covariances(6), ParameterError);
}

TEST_CASE("Gaussian case sample moments") {
  const auto case1 = gen_bivariate_gaussian(1, 40, {200, 400}, 5);
  REQUIRE(count_state(case1.truth, 0) >= 5000);
  const auto s0 = empirical_covariance(case1, 0);
  CHECK(std::abs(s0[0][1] / std::sqrt(s0[0][0] * s0[1][1]) - 0.3) <= 0.05);

  const auto case2 = gen_bivariate_gaussian(2, 40, {200, 400}, 6);
  const auto s1 = empirical_covariance(case2, 1);
  CHECK(std::abs(s1[0][1] / std::sqrt(s1[0][0] * s1[1][1]) + 0.7) <= 0.05);

  const auto case3 = gen_bivariate_gaussian(3, 40, {200, 400}, 7);
  const auto v = empirical_covariance(case3, 1);
  CHECK(std::abs(v[0][0] / 2.25 - 1.0) <= 0.1);
  CHECK(std::abs(v[1][1] / 1.0 - 1.0) <= 0.1);
  CHECK(case3.series.dims() == 2);
  CHECK(case3.series.length() == case3.truth.size());
}

TEST_CASE("within-state covariances converge for every case") {
  for (int c = 1; c <= 5; ++c) {
    const auto sim = gen_bivariate_gaussian(c, 80, {200, 400}, 100 + c);
    const auto target = case_covariances(c);
    for (int state = 0; state < 2; ++state) {
      CAPTURE(c);
      CAPTURE(state);
      REQUIRE(count_state(sim.truth, state) >= 10000);
      CHECK(frobenius(empirical_covariance(sim, state), target[state]) <= 0.1);
    }
  }
}

TEST_CASE("AR lag-1 autocorrelation per state") {
  const auto ar1 = gen_ar(1, 2, {10000, 10000}, 21);
  CHECK(ar1.series.dims() == 1);
  CHECK(std::abs(testing::lag1_autocorrelation(stretches(ar1, 0)) - 0.3) <= 0.05);
  CHECK(std::abs(testing::lag1_autocorrelation(stretches(ar1, 1)) - 0.7) <= 0.05);

  // Short periods: the recursion carries across switches, so each state's
  // pooled autocorrelation still settles near its coefficient.
  const auto many = gen_ar(1, 100, {200, 400}, 22);
  CHECK(std::abs(testing::lag1_autocorrelation(stretches(many, 0)) - 0.3) <= 0.05);
  CHECK(std::abs(testing::lag1_autocorrelation(stretches(many, 1)) - 0.7) <= 0.05);

  // AR(2): rho_1 = phi_1 / (1 - phi_2).
  const auto ar2 = gen_ar(2, 2, {10000, 10000}, 23);
  CHECK(std::abs(testing::lag1_autocorrelation(stretches(ar2, 0)) - 0.3 / 0.8) <= 0.05);
  CHECK(std::abs(testing::lag1_autocorrelation(stretches(ar2, 1)) - 0.5 / 0.7) <= 0.05);
}

TEST_CASE("AR parameter checks") {
  CHECK(ar_parameters(1)[0] == std::vector<double>{0.3});
  CHECK(ar_parameters(2)[1] == std::vector<double>{0.5, 0.3});
  CHECK_THROWS_AS(ar_parameters(3), ParameterError);
  CHECK(ar_is_stationary(std::vector<double>{0.7}));
  CHECK_FALSE(ar_is_stationary(std::vector<double>{1.0}));
  CHECK_FALSE(ar_is_stationary(std::vector<double>{0.6, 0.5}));
  CHECK_THROWS_AS(gen_ar({1.0}, {0.3}, 4, {10, 20}, 1), ValidationError);
  CHECK_THROWS_AS(gen_ar({0.3}, {0.3, 0.1}, 4, {10, 20}, 1), ParameterError);
}

TEST_CASE("variance switch scales each state") {
  const auto sim = gen_variance_switch(1.0, 1.5, 40, {200, 400}, 31);
  for (int state = 0; state < 2; ++state) {
    std::vector<double> xs;
    for (const auto& s : stretches(sim, state)) xs.insert(xs.end(), s.begin(), s.end());
    double ss = 0.0;
    for (double x : xs) ss += x * x;
    const double sd = std::sqrt(ss / static_cast<double>(xs.size()));
    CHECK(std::abs(sd - (state == 0 ? 1.0 : 1.5)) <= 0.05);
  }
  CHECK_THROWS_AS(gen_variance_switch(0.0, 1.0, 4, {10, 20}, 1), ParameterError);
}

TEST_CASE("simulation is a pure function of the seed") {
  for (auto kind : {ScenarioKind::Gaussian, ScenarioKind::AR, ScenarioKind::VarianceSwitch}) {
    ScenarioSpec spec;
    spec.kind = kind;
    spec.gaussian_case = 4;
    spec.ar_order = 2;
    spec.seed = 99;
    const auto a = simulate(spec);
    const auto b = simulate(spec);
    CHECK(a.series.values == b.series.values);
    CHECK(a.truth == b.truth);
    spec.seed = 100;
    CHECK_FALSE(simulate(spec).series.values == a.series.values);
  }
  ScenarioSpec spec;
  CHECK(spec.name() == "Case1");
  spec.kind = ScenarioKind::AR;
  spec.ar_order = 2;
  CHECK(spec.name() == "AR2");
}
