#include "regseg/ballgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "regseg/error.hpp"
#include "regseg/excursion.hpp"
#include "regseg/parallel.hpp"

namespace regseg {

std::size_t ball_size_for(std::size_t n, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ParameterError("ball ratio must lie in (0, 1)");
  const auto m = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n)));
  return std::clamp<std::size_t>(m, 1, n);
}

BallSet generate_balls(const Matrix& x, const Matrix& centroids, double ratio) {
  if (centroids.cols() != x.cols()) throw SizeError("centroid dimension does not match data");
  const std::size_t n = x.rows();
  const std::size_t m = ball_size_for(n, ratio);
  BallSet set;
  set.n_points = n;
  set.centroids = centroids;
  set.balls.resize(centroids.rows());
  parallel_for(centroids.rows(), [&](std::size_t v) {
    std::vector<std::pair<double, std::size_t>> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = {squared_distance(x.row(i), centroids.row(v)), i};
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(m), d.end());
    auto& ball = set.balls[v];
    ball.resize(m);
    for (std::size_t i = 0; i < m; ++i) ball[i] = d[i].second;
    std::sort(ball.begin(), ball.end());
  });
  return set;
}

std::vector<double> expand_rates(const Segmentation& seg) {
  std::vector<double> column(seg.labels.size());
  for (std::size_t t = 0; t < column.size(); ++t) {
    const auto& rate = seg.region_rates.at(static_cast<std::size_t>(seg.labels[t]));
    if (!rate) throw InternalError("occupied region without a rate estimate");
    column[t] = *rate;
  }
  return column;
}

FeatureExtraction extract_features(const Matrix& x, const FeatureOptions& options, std::uint64_t seed) {
  const std::size_t n = x.rows();
  if (options.n_balls < 1 || options.n_balls > n) {
    throw SizeError("ball count " + std::to_string(options.n_balls) + " must lie in [1, " + std::to_string(n) + "]");
  }
  const auto clusters = kmeans(x, options.n_balls, seed, options.kmeans_restarts);

  FeatureExtraction out;
  out.balls = generate_balls(x, clusters.centroids, options.ratio);
  const std::size_t v_count = out.balls.size();
  out.features.values = Matrix(n, v_count);
  out.features.params.resize(v_count);
  out.features.n_switches.resize(v_count);
  parallel_for(v_count, [&](std::size_t v) {
    const auto e = ball_encode(n, out.balls.balls[v]);
    const auto fit = hfs_search(e, options.hfs);
    out.features.values.set_column(v, expand_rates(fit.segmentation));
    out.features.params[v] = fit.params;
    out.features.n_switches[v] = fit.segmentation.n_switches;
  });
  return out;
}

}  // namespace regseg
