#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "regseg/hfs.hpp"
#include "regseg/kmeans.hpp"
#include "regseg/matrix.hpp"

namespace regseg {

// V neighbourhoods of M points each, seeded at K-Means centroids.
// Members are 0-based row indices in ascending order; balls may overlap.
struct BallSet {
  std::vector<std::vector<std::size_t>> balls;
  Matrix centroids;
  std::size_t n_points = 0;

  std::size_t size() const noexcept { return balls.size(); }
  std::size_t ball_size() const noexcept { return balls.empty() ? 0 : balls.front().size(); }
};

// N x V per-time emission-rate estimates, one column per ball.
struct FeatureMatrix {
  Matrix values;
  std::vector<std::optional<HfsParams>> params;  // winning thresholds per column
  std::vector<std::size_t> n_switches;           // switches found per column
};

// Ball size for a ratio: ceil(ratio * n).
std::size_t ball_size_for(std::size_t n, double ratio);

// For every centroid, the M rows closest to it (ties to the lower index).
BallSet generate_balls(const Matrix& x, const Matrix& centroids, double ratio);

struct FeatureOptions {
  std::size_t n_balls = 100;
  double ratio = 0.1;
  HfsSearchOptions hfs{};
  std::size_t kmeans_restarts = 1;
};

struct FeatureExtraction {
  FeatureMatrix features;
  BallSet balls;
};

// K-Means seeding, ball construction, HFS per ball, rates expanded over time.
FeatureExtraction extract_features(const Matrix& x, const FeatureOptions& options, std::uint64_t seed);

// Expands per-state rates of a segmentation into a length-N column.
std::vector<double> expand_rates(const Segmentation& seg);

}  // namespace regseg
