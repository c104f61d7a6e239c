#include "regseg/simgen.hpp"

#include <cmath>
#include <random>

#include "regseg/error.hpp"
#include "regseg/seeding.hpp"

namespace regseg {

namespace {

constexpr std::size_t kBurnIn = 100;

void check_periods(std::size_t n_periods, PeriodRange range) {
  if (n_periods < 2) throw ParameterError("need at least 2 periods");
  if (range.min_length < 1 || range.min_length > range.max_length) {
    throw ParameterError("period range must satisfy 1 <= min <= max");
  }
}

PeriodLayout draw_periods(std::size_t n_periods, PeriodRange range, Rng& rng) {
  check_periods(n_periods, range);
  std::uniform_int_distribution<std::size_t> length(range.min_length, range.max_length);
  PeriodLayout layout;
  for (std::size_t k = 0; k < n_periods; ++k) {
    if (k > 0) layout.change_points.push_back(layout.truth.size());
    layout.truth.insert(layout.truth.end(), length(rng), static_cast<int>(k % 2));
  }
  return layout;
}

struct Chol2 {
  double a, b, c;
};

Chol2 cholesky(const Cov2& s) {
  const double a = std::sqrt(s[0][0]);
  const double b = s[1][0] / a;
  const double c2 = s[1][1] - b * b;
  if (!(a > 0.0 && c2 > 0.0)) throw ParameterError("covariance matrix is not positive definite");
  return {a, b, std::sqrt(c2)};
}

Cov2 swap_variances(double s1, double s2, double r, bool swapped) {
  const double off = r * s1 * s2;
  if (!swapped) return {{{s1 * s1, off}, {off, s2 * s2}}};
  return {{{s2 * s2, off}, {off, s1 * s1}}};
}

LabeledSeries finish(Matrix values, PeriodLayout layout, std::vector<std::string> names) {
  LabeledSeries out;
  out.series = make_series(std::move(values), std::move(names));
  out.truth = std::move(layout.truth);
  out.change_points = std::move(layout.change_points);
  return out;
}

}  // namespace

std::string ScenarioSpec::name() const {
  switch (kind) {
    case ScenarioKind::Gaussian: return "Case" + std::to_string(gaussian_case);
    case ScenarioKind::AR: return "AR" + std::to_string(ar_order);
    case ScenarioKind::VarianceSwitch: return "VarianceSwitch";
  }
  return "?";
}

PeriodLayout gen_switching_periods(std::size_t n_periods, PeriodRange range, std::uint64_t seed) {
  auto rng = make_rng(seed, Stage::Simulate);
  return draw_periods(n_periods, range, rng);
}

std::array<Cov2, 2> case_covariances(int gaussian_case) {
  switch (gaussian_case) {
    case 1: return {Cov2{{{1.0, 0.3}, {0.3, 1.0}}}, Cov2{{{1.0, 0.7}, {0.7, 1.0}}}};
    case 2: return {Cov2{{{1.0, 0.3}, {0.3, 1.0}}}, Cov2{{{1.0, -0.7}, {-0.7, 1.0}}}};
    case 3: return {swap_variances(1.0, 1.5, 0.6, false), swap_variances(1.0, 1.5, 0.6, true)};
    case 4: return {swap_variances(1.0, 1.5, 0.2, false), swap_variances(1.0, 1.5, 0.2, true)};
    case 5: return {Cov2{{{1.0, 0.3}, {0.3, 1.0}}}, Cov2{{{1.0, -0.3}, {-0.3, 1.0}}}};
    default: throw ParameterError("Gaussian case must be 1..5, got " + std::to_string(gaussian_case));
  }
}

LabeledSeries gen_bivariate_gaussian(int gaussian_case, std::size_t n_periods, PeriodRange range,
                                     std::uint64_t seed) {
  const auto cov = case_covariances(gaussian_case);
  const Chol2 factor[2] = {cholesky(cov[0]), cholesky(cov[1])};
  auto rng = make_rng(seed, Stage::Simulate);
  auto layout = draw_periods(n_periods, range, rng);
  std::normal_distribution<double> z;
  Matrix values(layout.truth.size(), 2);
  for (std::size_t t = 0; t < layout.truth.size(); ++t) {
    const Chol2& f = factor[layout.truth[t]];
    const double z1 = z(rng);
    const double z2 = z(rng);
    values(t, 0) = f.a * z1;
    values(t, 1) = f.b * z1 + f.c * z2;
  }
  return finish(std::move(values), std::move(layout), {"x1", "x2"});
}

std::array<std::vector<double>, 2> ar_parameters(int order) {
  if (order == 1) return {std::vector<double>{0.3}, std::vector<double>{0.7}};
  if (order == 2) return {std::vector<double>{0.3, 0.2}, std::vector<double>{0.5, 0.3}};
  throw ParameterError("AR order must be 1 or 2, got " + std::to_string(order));
}

bool ar_is_stationary(std::span<const double> phi) {
  if (phi.size() == 1) return std::abs(phi[0]) < 1.0;
  if (phi.size() == 2) {
    return phi[0] + phi[1] < 1.0 && phi[1] - phi[0] < 1.0 && std::abs(phi[1]) < 1.0;
  }
  return false;
}

LabeledSeries gen_ar(const std::vector<double>& phi_state0, const std::vector<double>& phi_state1,
                     std::size_t n_periods, PeriodRange range, std::uint64_t seed) {
  if (phi_state0.size() != phi_state1.size() || phi_state0.empty() || phi_state0.size() > 2) {
    throw ParameterError("AR coefficients must share order 1 or 2");
  }
  if (!ar_is_stationary(phi_state0) || !ar_is_stationary(phi_state1)) {
    throw ValidationError("AR coefficients do not define a stationary process");
  }
  auto rng = make_rng(seed, Stage::Simulate);
  auto layout = draw_periods(n_periods, range, rng);
  std::normal_distribution<double> eps;
  const std::size_t order = phi_state0.size();
  std::vector<double> lag(order, 0.0);  // lag[0] = X_{t-1}
  auto step = [&](const std::vector<double>& phi) {
    double x = eps(rng);
    for (std::size_t i = 0; i < order; ++i) x += phi[i] * lag[i];
    for (std::size_t i = order; i-- > 1;) lag[i] = lag[i - 1];
    lag[0] = x;
    return x;
  };
  for (std::size_t t = 0; t < kBurnIn; ++t) step(phi_state0);
  Matrix values(layout.truth.size(), 1);
  for (std::size_t t = 0; t < layout.truth.size(); ++t) {
    values(t, 0) = step(layout.truth[t] == 0 ? phi_state0 : phi_state1);
  }
  return finish(std::move(values), std::move(layout), {"x"});
}

LabeledSeries gen_ar(int order, std::size_t n_periods, PeriodRange range, std::uint64_t seed) {
  const auto phi = ar_parameters(order);
  return gen_ar(phi[0], phi[1], n_periods, range, seed);
}

LabeledSeries gen_variance_switch(double sigma_state0, double sigma_state1, std::size_t n_periods,
                                  PeriodRange range, std::uint64_t seed) {
  if (!(sigma_state0 > 0.0 && sigma_state1 > 0.0)) throw ParameterError("standard deviations must be positive");
  auto rng = make_rng(seed, Stage::Simulate);
  auto layout = draw_periods(n_periods, range, rng);
  std::normal_distribution<double> z;
  Matrix values(layout.truth.size(), 1);
  for (std::size_t t = 0; t < layout.truth.size(); ++t) {
    values(t, 0) = (layout.truth[t] == 0 ? sigma_state0 : sigma_state1) * z(rng);
  }
  return finish(std::move(values), std::move(layout), {"x"});
}

LabeledSeries simulate(const ScenarioSpec& spec) {
  switch (spec.kind) {
    case ScenarioKind::Gaussian:
      return gen_bivariate_gaussian(spec.gaussian_case, spec.n_periods, spec.period_range, spec.seed);
    case ScenarioKind::AR: return gen_ar(spec.ar_order, spec.n_periods, spec.period_range, spec.seed);
    case ScenarioKind::VarianceSwitch:
      return gen_variance_switch(spec.sigma[0], spec.sigma[1], spec.n_periods, spec.period_range, spec.seed);
  }
  throw InternalError("unknown scenario kind");
}

}  // namespace regseg
