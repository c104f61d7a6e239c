#include "regseg/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include "regseg/error.hpp"

namespace regseg {

namespace {

double distance(std::span<const double> a, std::span<const double> b, std::span<const double> w) {
  return w.empty() ? squared_distance(a, b) : weighted_squared_distance(a, b, w);
}

// Nearest centroid per row (ties to the lower index); returns the objective.
double assign(const Matrix& x, const Matrix& centroids, std::span<const double> w, std::vector<int>& labels,
              std::vector<double>& dist) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (std::size_t j = 0; j < centroids.rows(); ++j) {
      const double d = distance(x.row(i), centroids.row(j), w);
      if (d < best) {
        best = d;
        arg = static_cast<int>(j);
      }
    }
    labels[i] = arg;
    dist[i] = best;
    total += best;
  }
  return total;
}

// Cluster means; empty clusters take the row farthest from its centroid.
void update(const Matrix& x, Matrix& centroids, std::vector<int>& labels, std::vector<double>& dist) {
  const std::size_t k = centroids.rows();
  const std::size_t p = x.cols();
  Matrix sums(k, p, 0.0);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto j = static_cast<std::size_t>(labels[i]);
    ++counts[j];
    auto s = sums.row(j);
    const auto r = x.row(i);
    for (std::size_t c = 0; c < p; ++c) s[c] += r[c];
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (counts[j] > 0) {
      for (std::size_t c = 0; c < p; ++c) centroids(j, c) = sums(j, c) / static_cast<double>(counts[j]);
      continue;
    }
    std::size_t far = 0;
    double far_dist = -1.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      if (counts[static_cast<std::size_t>(labels[i])] > 1 && dist[i] > far_dist) {
        far_dist = dist[i];
        far = i;
      }
    }
    --counts[static_cast<std::size_t>(labels[far])];
    labels[far] = static_cast<int>(j);
    counts[j] = 1;
    dist[far] = 0.0;
    const auto r = x.row(far);
    std::copy(r.begin(), r.end(), centroids.row(j).begin());
  }
}

}  // namespace

Matrix kmeanspp_seed(const Matrix& x, std::size_t k, std::span<const double> weights, Rng& rng) {
  const std::size_t n = x.rows();
  if (k < 1 || k > n) throw SizeError("cluster count " + std::to_string(k) + " must lie in [1, " + std::to_string(n) + "]");
  Matrix centroids(k, x.cols());
  std::vector<bool> chosen(n, false);
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  std::size_t pick = first(rng);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t j = 0;; ++j) {
    chosen[pick] = true;
    const auto r = x.row(pick);
    std::copy(r.begin(), r.end(), centroids.row(j).begin());
    if (j + 1 == k) break;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], distance(x.row(i), centroids.row(j), weights));
      total += d2[i];
    }
    if (total > 0.0) {
      const double u = unit(rng) * total;
      double acc = 0.0;
      pick = n;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (d2[i] > 0.0 && acc >= u) {
          pick = i;
          break;
        }
      }
      if (pick == n) {
        for (std::size_t i = n; i-- > 0;)
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
      }
    } else {
      pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
    }
  }
  return centroids;
}

KMeansResult lloyd(const Matrix& x, Matrix centroids, std::span<const double> weights, std::size_t max_iter) {
  if (x.rows() == 0) throw SizeError("K-Means on an empty matrix");
  if (centroids.cols() != x.cols()) throw SizeError("centroid dimension does not match data");
  if (centroids.rows() > x.rows()) throw SizeError("more clusters than points");
  if (!weights.empty() && weights.size() != x.cols()) throw SizeError("weight vector length does not match features");

  KMeansResult res;
  const std::size_t n = x.rows();
  std::vector<int> labels(n);
  std::vector<double> dist(n);
  res.objective_trace.push_back(assign(x, centroids, weights, labels, dist));
  std::vector<int> next(n);
  for (res.iterations = 1; res.iterations <= max_iter; ++res.iterations) {
    update(x, centroids, labels, dist);
    res.objective_trace.push_back(assign(x, centroids, weights, next, dist));
    const bool fixpoint = next == labels;
    labels.swap(next);
    if (fixpoint) break;
  }
  res.iterations = std::min(res.iterations, max_iter);
  res.objective = res.objective_trace.back();
  res.centroids = std::move(centroids);
  res.labels = std::move(labels);
  return res;
}

KMeansResult kmeans(const Matrix& x, std::size_t k, std::uint64_t seed, std::size_t n_restarts) {
  if (k < 1 || k > x.rows()) {
    throw SizeError("cluster count " + std::to_string(k) + " must lie in [1, " + std::to_string(x.rows()) + "]");
  }
  Rng rng(seed);
  KMeansResult best;
  for (std::size_t r = 0; r < std::max<std::size_t>(1, n_restarts); ++r) {
    auto res = lloyd(x, kmeanspp_seed(x, k, {}, rng), {});
    if (r == 0 || res.objective < best.objective) best = std::move(res);
  }
  return best;
}

}  // namespace regseg
