#include "regseg/excursion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "regseg/error.hpp"

namespace regseg {

std::vector<std::size_t> ExcursionSequence::event_positions() const {
  std::vector<std::size_t> pos;
  pos.reserve(n_events);
  for (std::size_t t = 0; t < bits.size(); ++t)
    if (bits[t]) pos.push_back(t);
  return pos;
}

ExcursionSequence make_excursion(std::vector<std::uint8_t> bits) {
  ExcursionSequence e;
  for (auto& b : bits) {
    if (b > 1) throw ValidationError("excursion bits must be 0 or 1");
    e.n_events += b;
  }
  e.bits = std::move(bits);
  return e;
}

double empirical_quantile(std::span<const double> x, double q) {
  if (x.empty()) throw SizeError("quantile of an empty sequence");
  if (!(q >= 0.0 && q <= 1.0)) throw ParameterError("quantile level must lie in [0, 1]");
  const std::size_t n = x.size();
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::vector<double> sorted(x.begin(), x.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1), sorted.end());
  return sorted[rank - 1];
}

ExcursionSequence tail_encode_thresholds(std::span<const double> x, double lower, double upper) {
  std::vector<std::uint8_t> bits(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) bits[t] = (x[t] <= lower || x[t] >= upper) ? 1 : 0;
  return make_excursion(std::move(bits));
}

ExcursionSequence tail_encode(std::span<const double> x, double alpha, double beta) {
  if (!(alpha > 0.0 && alpha < 0.5 && beta > 0.5 && beta < 1.0 && alpha + (1.0 - beta) < 1.0)) {
    throw ParameterError("tail levels need 0 < alpha < 0.5 < beta < 1, got alpha=" + std::to_string(alpha) +
                         " beta=" + std::to_string(beta));
  }
  return tail_encode_thresholds(x, empirical_quantile(x, alpha), empirical_quantile(x, beta));
}

ExcursionSequence ball_encode(std::size_t n, std::span<const std::size_t> ball) {
  std::vector<std::uint8_t> bits(n, 0);
  for (std::size_t idx : ball) {
    if (idx >= n) {
      throw ValidationError("ball member " + std::to_string(idx) + " outside [0, " + std::to_string(n) + ")");
    }
    bits[idx] = 1;
  }
  return make_excursion(std::move(bits));
}

RecurrenceTimes recurrence_times(const ExcursionSequence& e) {
  RecurrenceTimes r;
  r.total_length = e.bits.size();
  r.times.reserve(e.n_events + 1);
  std::size_t run = 0;
  for (auto b : e.bits) {
    if (b) {
      r.times.push_back(run);
      run = 0;
    } else {
      ++run;
    }
  }
  r.times.push_back(run);
  return r;
}

}  // namespace regseg
