#include "regseg/weighted_cluster.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "regseg/error.hpp"

namespace regseg {

namespace {

constexpr double kSeparationEps = 1e-12;

double entropy_of_counts(std::span<const std::size_t> counts, std::size_t total) {
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double q = static_cast<double>(c) / static_cast<double>(total);
    h -= q * std::log(q);
  }
  return h;
}

std::size_t label_count(std::span<const int> labels) {
  int k = 0;
  for (int l : labels) {
    if (l < 0) throw ValidationError("negative cluster label");
    k = std::max(k, l + 1);
  }
  return static_cast<std::size_t>(k);
}

void check_balls(const BallSet& balls, std::span<const int> labels) {
  if (balls.n_points != labels.size()) throw SizeError("ball set and labels cover different point counts");
}

}  // namespace

WeightMethod parse_weight_method(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "fwsa") return WeightMethod::FWSA;
  if (s == "nmi") return WeightMethod::NMI;
  if (s == "delta" || s == "methoda") return WeightMethod::Delta;
  if (s == "entropy" || s == "methodb") return WeightMethod::Entropy;
  throw ParameterError("unknown weighting method '" + name + "' (expected fwsa, nmi, delta or entropy)");
}

std::string to_string(WeightMethod m) {
  switch (m) {
    case WeightMethod::FWSA: return "FWSA";
    case WeightMethod::NMI: return "NMI";
    case WeightMethod::Delta: return "DELTA";
    case WeightMethod::Entropy: return "ENTROPY";
  }
  return "?";
}

NmiNormalization parse_nmi_normalization(const std::string& name) {
  if (name == "arithmetic") return NmiNormalization::Arithmetic;
  if (name == "geometric") return NmiNormalization::Geometric;
  if (name == "max") return NmiNormalization::Max;
  if (name == "min") return NmiNormalization::Min;
  throw ParameterError("unknown NMI normalization '" + name + "'");
}

WeightVector WeightVector::uniform(std::size_t v) {
  if (v == 0) throw SizeError("weight vector needs at least one feature");
  return {std::vector<double>(v, 1.0 / static_cast<double>(v))};
}

void WeightVector::validate() const {
  if (w.empty()) throw SizeError("empty weight vector");
  double sum = 0.0;
  for (double x : w) {
    if (!(x >= 0.0)) throw ValidationError("weights must be nonnegative");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("weights must sum to 1");
}

KMeansResult weighted_kmeans(const Matrix& features, std::size_t k, const WeightVector& w, std::uint64_t seed,
                             const std::optional<Matrix>& init_centroids, std::size_t n_restarts) {
  if (k < 1 || k > features.rows()) {
    throw SizeError("cluster count " + std::to_string(k) + " must lie in [1, " + std::to_string(features.rows()) + "]");
  }
  if (w.size() != features.cols()) throw SizeError("weight vector length does not match feature count");
  if (init_centroids) {
    if (init_centroids->rows() != k) throw SizeError("warm-start centroid count does not match k");
    return lloyd(features, *init_centroids, w.w);
  }
  Rng rng(seed);
  KMeansResult best;
  for (std::size_t r = 0; r < std::max<std::size_t>(1, n_restarts); ++r) {
    auto res = lloyd(features, kmeanspp_seed(features, k, w.w, rng), w.w);
    if (r == 0 || res.objective < best.objective) best = std::move(res);
  }
  return best;
}

std::vector<double> normalize_scores(std::span<const double> raw) {
  const double sum = std::accumulate(raw.begin(), raw.end(), 0.0);
  std::vector<double> out(raw.size());
  if (!(sum > 0.0)) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(raw.size()));
    return out;
  }
  for (std::size_t v = 0; v < raw.size(); ++v) out[v] = raw[v] / sum;
  return out;
}

std::vector<double> fwsa_target(const Matrix& features, std::span<const int> labels, const Matrix& centroids) {
  const std::size_t n = features.rows();
  const std::size_t v_count = features.cols();
  if (labels.size() != n) throw SizeError("labels do not match feature rows");
  if (centroids.cols() != v_count) throw SizeError("centroids do not match feature count");
  const std::size_t k = centroids.rows();
  std::vector<std::size_t> sizes(k, 0);
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= k) throw ValidationError("label outside [0, k)");
    ++sizes[static_cast<std::size_t>(l)];
  }
  std::vector<double> grand(v_count, 0.0);
  std::vector<double> within(v_count, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto y = features.row(i);
    const auto c = centroids.row(static_cast<std::size_t>(labels[i]));
    for (std::size_t v = 0; v < v_count; ++v) {
      grand[v] += y[v];
      within[v] += (y[v] - c[v]) * (y[v] - c[v]);
    }
  }
  for (auto& g : grand) g /= static_cast<double>(n);
  std::vector<double> raw(v_count, 0.0);
  for (std::size_t v = 0; v < v_count; ++v) {
    double between = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double d = centroids(j, v) - grand[v];
      between += static_cast<double>(sizes[j]) * d * d;
    }
    raw[v] = between / (within[v] + kSeparationEps);
  }
  return normalize_scores(raw);
}

double normalized_mutual_information(std::span<const int> labels, std::span<const double> feature,
                                     NmiNormalization norm) {
  const std::size_t n = labels.size();
  if (feature.size() != n) throw SizeError("feature length does not match labels");
  if (n == 0) return 0.0;
  const std::size_t k = label_count(labels);
  std::map<double, std::size_t> category;
  for (double y : feature) category.emplace(y, 0);
  std::size_t next = 0;
  for (auto& [value, id] : category) id = next++;
  const std::size_t c = category.size();

  std::vector<std::size_t> joint(k * c, 0);
  std::vector<std::size_t> label_counts(k, 0);
  std::vector<std::size_t> cat_counts(c, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto l = static_cast<std::size_t>(labels[i]);
    const std::size_t y = category.at(feature[i]);
    ++joint[l * c + y];
    ++label_counts[l];
    ++cat_counts[y];
  }
  const double h_label = entropy_of_counts(label_counts, n);
  const double h_feature = entropy_of_counts(cat_counts, n);
  if (h_label <= 0.0 || h_feature <= 0.0) return 0.0;

  const double total = static_cast<double>(n);
  double mi = 0.0;
  for (std::size_t l = 0; l < k; ++l) {
    for (std::size_t y = 0; y < c; ++y) {
      const std::size_t cnt = joint[l * c + y];
      if (cnt == 0) continue;
      const double pxy = static_cast<double>(cnt) / total;
      mi += pxy * std::log(pxy * total * total /
                           (static_cast<double>(label_counts[l]) * static_cast<double>(cat_counts[y])));
    }
  }
  mi = std::max(mi, 0.0);
  double scale = 0.0;
  switch (norm) {
    case NmiNormalization::Arithmetic: scale = 0.5 * (h_label + h_feature); break;
    case NmiNormalization::Geometric: scale = std::sqrt(h_label * h_feature); break;
    case NmiNormalization::Max: scale = std::max(h_label, h_feature); break;
    case NmiNormalization::Min: scale = std::min(h_label, h_feature); break;
  }
  return std::clamp(mi / scale, 0.0, 1.0);
}

std::vector<double> nmi_target(const Matrix& features, std::span<const int> labels, NmiNormalization norm) {
  if (labels.size() != features.rows()) throw SizeError("labels do not match feature rows");
  std::vector<double> raw(features.cols());
  for (std::size_t v = 0; v < features.cols(); ++v) {
    raw[v] = normalized_mutual_information(labels, features.column(v), norm);
  }
  return normalize_scores(raw);
}

std::vector<double> rate_deltas(const BallSet& balls, std::span<const int> labels) {
  check_balls(balls, labels);
  std::size_t sizes[2] = {0, 0};
  for (int l : labels) {
    if (l != 0 && l != 1) throw ParameterError("rate-delta weighting is defined for k = 2 only");
    ++sizes[l];
  }
  if (sizes[0] == 0 || sizes[1] == 0) throw DegenerateInputError("rate-delta weighting needs two non-empty clusters");
  std::vector<double> raw(balls.size());
  for (std::size_t v = 0; v < balls.size(); ++v) {
    std::size_t in[2] = {0, 0};
    for (auto idx : balls.balls[v]) ++in[labels[idx]];
    const double p0 = static_cast<double>(in[0]) / static_cast<double>(sizes[0]);
    const double p1 = static_cast<double>(in[1]) / static_cast<double>(sizes[1]);
    raw[v] = std::abs(p1 - p0);
  }
  return raw;
}

std::vector<double> delta_target(const BallSet& balls, std::span<const int> labels) {
  return normalize_scores(rate_deltas(balls, labels));
}

std::vector<double> ball_purity(const BallSet& balls, std::span<const int> labels, std::size_t k) {
  check_balls(balls, labels);
  if (k < 2) throw ParameterError("entropy weighting needs k >= 2");
  if (label_count(labels) > k) throw ValidationError("label outside [0, k)");
  std::vector<double> raw(balls.size());
  std::vector<std::size_t> counts(k);
  for (std::size_t v = 0; v < balls.size(); ++v) {
    std::fill(counts.begin(), counts.end(), 0);
    for (auto idx : balls.balls[v]) ++counts[static_cast<std::size_t>(labels[idx])];
    raw[v] = balls.balls[v].empty() ? 0.0 : std::exp(-entropy_of_counts(counts, balls.balls[v].size()));
  }
  return raw;
}

std::vector<double> entropy_target(const BallSet& balls, std::span<const int> labels, std::size_t k) {
  return normalize_scores(ball_purity(balls, labels, k));
}

WeightVector update_weights(const WeightVector& w, std::span<const double> target, double eta) {
  if (target.size() != w.size()) throw SizeError("target length does not match weight vector");
  if (!(eta >= 0.0 && eta <= 1.0)) throw ParameterError("learning rate must lie in [0, 1]");
  WeightVector out{std::vector<double>(w.size())};
  double sum = 0.0;
  for (std::size_t v = 0; v < w.size(); ++v) {
    out.w[v] = std::max(0.0, w.w[v] + eta * (target[v] - w.w[v]));
    sum += out.w[v];
  }
  if (!(sum > 0.0)) throw DegenerateInputError("weight update collapsed to zero");
  if (std::abs(sum - 1.0) > 1e-12) {
    for (auto& x : out.w) x /= sum;
  }
  return out;
}

void DecodeConfig::validate() const {
  if (k < 2) throw ParameterError("decoding needs k >= 2");
  if (!(eta >= 0.0 && eta <= 1.0)) throw ParameterError("learning rate must lie in [0, 1]");
  if (!(tol > 0.0)) throw ParameterError("tolerance must be positive");
  if (method == WeightMethod::Delta && k != 2) throw ParameterError("method DELTA requires k = 2");
}

DecodeResult decode(const Matrix& features, const BallSet& balls, const DecodeConfig& config) {
  config.validate();
  if (balls.n_points != features.rows()) throw SizeError("ball set and feature matrix cover different point counts");
  if (balls.size() != features.cols()) throw SizeError("ball count does not match feature columns");

  DecodeResult out;
  out.weights = WeightVector::uniform(features.cols());
  auto clustering = weighted_kmeans(features, config.k, out.weights, config.seed, std::nullopt, config.n_restarts);

  for (std::size_t iter = 0; iter < config.max_iter; ++iter) {
    std::vector<double> target;
    switch (config.method) {
      case WeightMethod::FWSA: target = fwsa_target(features, clustering.labels, clustering.centroids); break;
      case WeightMethod::NMI: target = nmi_target(features, clustering.labels, config.nmi); break;
      case WeightMethod::Delta: target = delta_target(balls, clustering.labels); break;
      case WeightMethod::Entropy: target = entropy_target(balls, clustering.labels, config.k); break;
    }
    auto next = update_weights(out.weights, target, config.eta);
    double change = 0.0;
    for (std::size_t v = 0; v < next.size(); ++v) change = std::max(change, std::abs(next.w[v] - out.weights.w[v]));
    out.weights = std::move(next);
    out.trace.push_back(out.weights.w);
    out.max_change.push_back(change);
    ++out.iterations;
    clustering = weighted_kmeans(features, config.k, out.weights, config.seed, clustering.centroids);
    if (change < config.tol) {
      out.converged = true;
      break;
    }
  }

  auto& seg = out.segmentation;
  seg.labels = clustering.labels;
  seg.k = static_cast<int>(config.k);
  seg.n_switches = count_switches(seg.labels);
  seg.region_rates.assign(config.k, std::nullopt);
  std::vector<double> sums(config.k, 0.0);
  std::vector<std::size_t> counts(config.k, 0);
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const auto j = static_cast<std::size_t>(seg.labels[i]);
    const auto row = features.row(i);
    sums[j] += std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(row.size());
    ++counts[j];
  }
  for (std::size_t j = 0; j < config.k; ++j) {
    if (counts[j] > 0) seg.region_rates[j] = sums[j] / static_cast<double>(counts[j]);
  }
  return out;
}

}  // namespace regseg
