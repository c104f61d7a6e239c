#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "regseg/timeseries.hpp"

namespace regseg {

// Inclusive range of period lengths.
struct PeriodRange {
  std::size_t min_length = 200;
  std::size_t max_length = 400;
};

struct PeriodLayout {
  std::vector<int> truth;                 // alternating 0/1 by period, starting at 0
  std::vector<std::size_t> change_points;  // 0-based first index of periods 2..n
};

struct LabeledSeries {
  MultiSeries series;
  std::vector<int> truth;
  std::vector<std::size_t> change_points;
};

using Cov2 = std::array<std::array<double, 2>, 2>;

enum class ScenarioKind { Gaussian, AR, VarianceSwitch };

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::Gaussian;
  int gaussian_case = 1;                // 1..5
  int ar_order = 1;                     // 1 or 2
  std::array<double, 2> sigma{1.0, 1.5};  // per-state sd for VarianceSwitch
  std::size_t n_periods = 10;
  PeriodRange period_range{};
  std::uint64_t seed = 0;

  std::string name() const;
};

PeriodLayout gen_switching_periods(std::size_t n_periods, PeriodRange range, std::uint64_t seed);

// State-0 and state-1 covariance matrices of the bivariate Gaussian cases 1..5.
std::array<Cov2, 2> case_covariances(int gaussian_case);

LabeledSeries gen_bivariate_gaussian(int gaussian_case, std::size_t n_periods, PeriodRange range,
                                     std::uint64_t seed);

// AR coefficients (phi_1, ..., phi_order) per state for the built-in settings.
std::array<std::vector<double>, 2> ar_parameters(int order);

bool ar_is_stationary(std::span<const double> phi);

LabeledSeries gen_ar(int order, std::size_t n_periods, PeriodRange range, std::uint64_t seed);

// Regime-switching AR with explicit coefficients. 100 burn-in steps under the
// state-0 coefficients are discarded; the recursion carries across switches.
LabeledSeries gen_ar(const std::vector<double>& phi_state0, const std::vector<double>& phi_state1,
                     std::size_t n_periods, PeriodRange range, std::uint64_t seed);

// Independent N(0, sigma_j^2) draws with the sd switching by period.
LabeledSeries gen_variance_switch(double sigma_state0, double sigma_state1, std::size_t n_periods,
                                  PeriodRange range, std::uint64_t seed);

LabeledSeries simulate(const ScenarioSpec& spec);

}  // namespace regseg
