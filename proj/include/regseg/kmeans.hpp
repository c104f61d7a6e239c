#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "regseg/matrix.hpp"
#include "regseg/seeding.hpp"

namespace regseg {

struct KMeansResult {
  Matrix centroids;
  std::vector<int> labels;
  double objective = 0.0;               // (weighted) within-cluster sum of squares
  std::vector<double> objective_trace;  // objective after every assignment step
  std::size_t iterations = 0;
};

inline constexpr std::size_t kLloydMaxIterations = 100;

// k-means++ seeding under the (optionally weighted) squared Euclidean distance.
// Empty `weights` means unit weights.
Matrix kmeanspp_seed(const Matrix& x, std::size_t k, std::span<const double> weights, Rng& rng);

// Lloyd iterations from the given centroids until the assignment is a fixpoint
// or max_iter is reached. Centroids are unweighted cluster means; an empty
// cluster is reseeded to the point farthest from its current centroid.
KMeansResult lloyd(const Matrix& x, Matrix centroids, std::span<const double> weights,
                   std::size_t max_iter = kLloydMaxIterations);

// Plain K-Means: best of n_restarts k-means++/Lloyd runs by objective.
KMeansResult kmeans(const Matrix& x, std::size_t k, std::uint64_t seed, std::size_t n_restarts = 1);

}  // namespace regseg
