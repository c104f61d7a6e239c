#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace regseg {

// 0/1 event marks over N time points.
struct ExcursionSequence {
  std::vector<std::uint8_t> bits;
  std::size_t n_events = 0;

  std::size_t length() const noexcept { return bits.size(); }
  // 0-based positions of the 1s, ascending.
  std::vector<std::size_t> event_positions() const;
};

ExcursionSequence make_excursion(std::vector<std::uint8_t> bits);

// Zero-run lengths: before the first event, between consecutive events and
// after the last one. M events give M + 1 entries; sum(times) + M == N.
struct RecurrenceTimes {
  std::vector<std::size_t> times;
  std::size_t total_length = 0;
};

// Order statistic at 1-based rank ceil(q * n), clamped to [1, n].
double empirical_quantile(std::span<const double> x, double q);

// Marks x_t <= alpha-quantile or x_t >= beta-quantile.
// Requires 0 < alpha < 0.5 < beta < 1.
ExcursionSequence tail_encode(std::span<const double> x, double alpha, double beta);

// Same marking with the two thresholds supplied directly.
ExcursionSequence tail_encode_thresholds(std::span<const double> x, double lower, double upper);

// Marks the (0-based) row indices in `ball`; throws ValidationError for indices >= n.
ExcursionSequence ball_encode(std::size_t n, std::span<const std::size_t> ball);

RecurrenceTimes recurrence_times(const ExcursionSequence& e);

}  // namespace regseg
