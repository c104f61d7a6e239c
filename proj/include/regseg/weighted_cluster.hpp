#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "regseg/ballgen.hpp"
#include "regseg/hfs.hpp"
#include "regseg/kmeans.hpp"
#include "regseg/matrix.hpp"

namespace regseg {

// Feature-relevance rule driving the weight updates.
enum class WeightMethod {
  FWSA,     // between/within separation ratio
  NMI,      // normalized mutual information with the current labels
  Delta,    // |rate in cluster 1 - rate in cluster 0| per ball (k = 2 only)
  Entropy,  // exp(-entropy of the cluster labels inside each ball)
};

WeightMethod parse_weight_method(const std::string& name);
std::string to_string(WeightMethod m);

// How mutual information is scaled into [0, 1].
enum class NmiNormalization { Arithmetic, Geometric, Max, Min };

NmiNormalization parse_nmi_normalization(const std::string& name);

// Nonnegative feature weights summing to one.
struct WeightVector {
  std::vector<double> w;

  static WeightVector uniform(std::size_t v);
  std::size_t size() const noexcept { return w.size(); }
  void validate() const;
};

// Lloyd iterations under d(y, c) = sum_v w_v (y_v - c_v)^2. With init_centroids
// the run is warm-started from them; otherwise the best of n_restarts k-means++
// seedings (drawn from `seed`) is kept.
KMeansResult weighted_kmeans(const Matrix& features, std::size_t k, const WeightVector& w, std::uint64_t seed,
                             const std::optional<Matrix>& init_centroids = std::nullopt, std::size_t n_restarts = 1);

// Scales nonnegative scores to sum one; all-zero scores become uniform.
std::vector<double> normalize_scores(std::span<const double> raw);

std::vector<double> fwsa_target(const Matrix& features, std::span<const int> labels, const Matrix& centroids);

double normalized_mutual_information(std::span<const int> labels, std::span<const double> feature,
                                     NmiNormalization norm = NmiNormalization::Arithmetic);
std::vector<double> nmi_target(const Matrix& features, std::span<const int> labels,
                               NmiNormalization norm = NmiNormalization::Arithmetic);

// Per ball |p1 - p0| with p_j = share of cluster-j points that fall inside the ball.
std::vector<double> rate_deltas(const BallSet& balls, std::span<const int> labels);
std::vector<double> delta_target(const BallSet& balls, std::span<const int> labels);

// Per ball exp(-H), H the natural-log entropy of member labels.
std::vector<double> ball_purity(const BallSet& balls, std::span<const int> labels, std::size_t k);
std::vector<double> entropy_target(const BallSet& balls, std::span<const int> labels, std::size_t k);

// Convex step towards the target: w + eta (target - w), renormalized.
WeightVector update_weights(const WeightVector& w, std::span<const double> target, double eta);

struct DecodeConfig {
  WeightMethod method = WeightMethod::Entropy;
  std::size_t k = 2;
  double eta = 0.5;
  std::size_t max_iter = 50;
  double tol = 1e-6;
  std::uint64_t seed = 0;
  std::size_t n_restarts = 5;
  NmiNormalization nmi = NmiNormalization::Arithmetic;

  void validate() const;
};

struct DecodeResult {
  Segmentation segmentation;
  WeightVector weights;
  std::vector<std::vector<double>> trace;  // weights after every update
  std::vector<double> max_change;          // max |delta w| per update
  bool converged = false;
  std::size_t iterations = 0;
};

// Alternates weighted clustering of the feature rows with weight updates
// until the weights settle (max change < tol) or max_iter updates have run.
DecodeResult decode(const Matrix& features, const BallSet& balls, const DecodeConfig& config);

}  // namespace regseg
