#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

namespace testing {

// Scratch directory unique to the running test process.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() /
             ("regseg_" + tag + "_" + std::to_string(static_cast<unsigned long>(::getpid())));
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::vector<std::uint8_t> bernoulli_bits(std::size_t n, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution draw(p);
  std::vector<std::uint8_t> bits(n);
  for (auto& b : bits) b = draw(rng) ? 1 : 0;
  return bits;
}

// Penalized Bernoulli loss written straight from its definition, one time
// point at a time: -2 * sum_t [E_t log p_(s_t) + (1 - E_t) log(1 - p_(s_t))]
// + phi * (number of maximal constant label runs). Rates are ones / length,
// pulled into [0.5/len, 1 - 0.5/len].
inline double brute_force_loss(const std::vector<std::uint8_t>& bits, const std::vector<int>& labels, double phi) {
  int top = 0;
  for (int l : labels) top = l > top ? l : top;
  std::vector<double> ones(static_cast<std::size_t>(top) + 1, 0.0);
  std::vector<double> len(static_cast<std::size_t>(top) + 1, 0.0);
  for (std::size_t t = 0; t < bits.size(); ++t) {
    len[static_cast<std::size_t>(labels[t])] += 1.0;
    ones[static_cast<std::size_t>(labels[t])] += bits[t];
  }
  long double ll = 0.0L;
  for (std::size_t t = 0; t < bits.size(); ++t) {
    const auto j = static_cast<std::size_t>(labels[t]);
    long double p = ones[j] / len[j];
    const long double lo = 0.5L / len[j];
    if (p < lo) p = lo;
    if (p > 1.0L - lo) p = 1.0L - lo;
    ll += bits[t] ? std::log(p) : std::log(1.0L - p);
  }
  std::size_t runs = bits.empty() ? 0 : 1;
  for (std::size_t t = 1; t < labels.size(); ++t) runs += labels[t] != labels[t - 1] ? 1 : 0;
  return static_cast<double>(-2.0L * ll + static_cast<long double>(phi) * static_cast<long double>(runs));
}

inline double sample_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sample_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = sample_mean(a), mb = sample_mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// Lag-1 autocorrelation pooled over separate contiguous stretches.
inline double lag1_autocorrelation(const std::vector<std::vector<double>>& stretches) {
  std::vector<double> pooled;
  for (const auto& s : stretches) pooled.insert(pooled.end(), s.begin(), s.end());
  const double m = sample_mean(pooled);
  double num = 0.0, den = 0.0;
  for (const auto& s : stretches) {
    for (std::size_t t = 0; t < s.size(); ++t) {
      den += (s[t] - m) * (s[t] - m);
      if (t > 0) num += (s[t] - m) * (s[t - 1] - m);
    }
  }
  return num / den;
}

// Kolmogorov-Smirnov distance between a sample on {0, 1, ...} and Geometric(p)
// with pmf p (1 - p)^r, evaluated at every integer up to the sample maximum.
inline double ks_geometric(std::vector<std::size_t> sample, double p) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double worst = 0.0;
  std::size_t below = 0;
  for (std::size_t r = 0; r <= sample.back(); ++r) {
    while (below < sample.size() && sample[below] <= r) ++below;
    const double cdf = 1.0 - std::pow(1.0 - p, static_cast<double>(r) + 1.0);
    worst = std::max(worst, std::abs(static_cast<double>(below) / n - cdf));
  }
  return worst;
}

}  // namespace testing
