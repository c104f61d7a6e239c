#include "regseg/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "regseg/error.hpp"
#include "regseg/parallel.hpp"
#include "regseg/seeding.hpp"

namespace regseg {

namespace {

double sample_sd(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (n - 1.0));
}

}  // namespace

double decoding_accuracy(std::span<const int> estimated, std::span<const int> truth) {
  if (estimated.size() != truth.size()) throw SizeError("label sequences differ in length");
  if (truth.empty()) throw SizeError("accuracy of empty label sequences");
  std::size_t agree = 0;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    if ((estimated[t] != 0 && estimated[t] != 1) || (truth[t] != 0 && truth[t] != 1)) {
      throw ValidationError("decoding accuracy expects 0/1 labels");
    }
    if (estimated[t] == truth[t]) ++agree;
  }
  const std::size_t best = std::max(agree, truth.size() - agree);
  return static_cast<double>(best) / static_cast<double>(truth.size());
}

AccuracyReport AccuracyReport::from(std::vector<double> per_rep) {
  AccuracyReport r;
  r.n_reps = per_rep.size();
  if (r.n_reps > 0) {
    r.mean = std::accumulate(per_rep.begin(), per_rep.end(), 0.0) / static_cast<double>(r.n_reps);
    r.std = r.n_reps > 1 ? sample_sd(per_rep) : 0.0;
  }
  r.per_rep = std::move(per_rep);
  return r;
}

PipelineConfig default_pipeline(const ScenarioSpec& spec) {
  PipelineConfig config;
  if (spec.kind == ScenarioKind::AR) config.lags = static_cast<std::size_t>(spec.ar_order);
  return config;
}

std::vector<PipelineResult> run_pipeline(const MultiSeries& x, const PipelineConfig& config,
                                         std::span<const WeightMethod> methods, std::uint64_t seed) {
  MultiSeries analysed = x;
  std::optional<Permutation> perm;
  if (config.lags > 0) {
    analysed = embed_lags(x, config.lags);
    auto [shuffled, p] = block_permute(analysed, config.window, derive_seed(seed, Stage::Permute));
    analysed = std::move(shuffled);
    perm = std::move(p);
  }
  if (config.standardize) analysed = standardize(analysed);

  const auto extraction = extract_features(analysed.values, config.features, derive_seed(seed, Stage::BallSeeding));

  std::vector<PipelineResult> out;
  out.reserve(methods.size());
  for (WeightMethod method : methods) {
    PipelineResult r;
    DecodeConfig dc = config.decode;
    dc.method = method;
    dc.seed = derive_seed(seed, Stage::Decode);
    r.decoding = decode(extraction.features.values, extraction.balls, dc);
    r.labels = r.decoding.segmentation.labels;
    if (perm) r.labels = unpermute_values<int>(r.labels, *perm);
    r.extraction = extraction;
    out.push_back(std::move(r));
  }
  return out;
}

PipelineResult run_pipeline(const MultiSeries& x, const PipelineConfig& config, std::uint64_t seed) {
  const WeightMethod method = config.decode.method;
  return std::move(run_pipeline(x, config, std::span<const WeightMethod>(&method, 1), seed).front());
}

std::vector<AccuracyReport> replicate_methods(const ScenarioSpec& spec, std::span<const WeightMethod> methods,
                                              std::size_t n_reps, std::uint64_t seed,
                                              const PipelineConfig& config) {
  if (n_reps < 1) throw ParameterError("need at least one replication");
  std::vector<std::vector<double>> acc(methods.size(), std::vector<double>(n_reps));
  parallel_for(n_reps, [&](std::size_t rep) {
    const std::uint64_t rep_seed = derive_seed(seed, Stage::Generic, rep);
    try {
      ScenarioSpec s = spec;
      s.seed = rep_seed;
      const auto data = simulate(s);
      const auto results = run_pipeline(data.series, config, methods, rep_seed);
      const std::span<const int> truth(data.truth.data(), results.front().labels.size());
      for (std::size_t m = 0; m < methods.size(); ++m) acc[m][rep] = decoding_accuracy(results[m].labels, truth);
    } catch (const std::exception& e) {
      throw ReplicationError("replication " + std::to_string(rep) + " (seed " + std::to_string(rep_seed) +
                                 ") failed: " + e.what(),
                             rep_seed, rep);
    }
  });
  std::vector<AccuracyReport> reports;
  for (auto& a : acc) reports.push_back(AccuracyReport::from(std::move(a)));
  return reports;
}

AccuracyReport replicate_experiment(const ScenarioSpec& spec, WeightMethod method, std::size_t n_reps,
                                    std::uint64_t seed, const PipelineConfig& config) {
  return replicate_methods(spec, std::span<const WeightMethod>(&method, 1), n_reps, seed, config).front();
}

TailReport heavy_tailedness(std::span<const double> x, std::span<const int> labels, double z) {
  if (!(z >= 0.0)) throw ParameterError("z must be nonnegative");
  if (x.size() != labels.size()) throw SizeError("series and labels differ in length");
  if (x.size() < 2) throw SizeError("heavy-tailedness needs at least 2 points");
  TailReport r;
  r.z = z;
  r.sigma = sample_sd(x);
  std::array<std::size_t, 2> size{0, 0};
  std::array<std::size_t, 2> beyond_z{0, 0};
  std::array<std::size_t, 2> beyond_one{0, 0};
  for (std::size_t t = 0; t < x.size(); ++t) {
    if (labels[t] != 0 && labels[t] != 1) throw ValidationError("heavy-tailedness expects 0/1 labels");
    const auto j = static_cast<std::size_t>(labels[t]);
    ++size[j];
    if (std::abs(x[t]) > z * r.sigma) ++beyond_z[j];
    if (std::abs(x[t]) > r.sigma) ++beyond_one[j];
  }
  if (size[0] == 0 || size[1] == 0) throw DegenerateInputError("heavy-tailedness needs both states present");
  std::array<double, 2> at_one{};
  for (std::size_t j = 0; j < 2; ++j) {
    r.tail_prob[j] = static_cast<double>(beyond_z[j]) / static_cast<double>(size[j]);
    at_one[j] = static_cast<double>(beyond_one[j]) / static_cast<double>(size[j]);
  }
  r.volatile_state = at_one[1] > at_one[0] ? 1 : 0;
  r.delta = r.tail_prob[static_cast<std::size_t>(r.volatile_state)] - r.tail_prob[1 - static_cast<std::size_t>(r.volatile_state)];
  return r;
}

double silverman_bandwidth(std::span<const double> samples) {
  if (samples.size() < 2) throw SizeError("bandwidth needs at least 2 samples");
  const double sd = sample_sd(samples);
  if (!(sd > 0.0)) throw DegenerateInputError("samples have zero variance");
  return 1.06 * sd * std::pow(static_cast<double>(samples.size()), -0.2);
}

std::vector<double> gaussian_kde(std::span<const double> samples, std::span<const double> grid) {
  const double h = silverman_bandwidth(samples);
  const double norm = 1.0 / (static_cast<double>(samples.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> density(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double acc = 0.0;
    for (double s : samples) {
      const double u = (grid[g] - s) / h;
      acc += std::exp(-0.5 * u * u);
    }
    density[g] = acc * norm;
  }
  return density;
}

}  // namespace regseg
