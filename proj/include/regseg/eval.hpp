#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "regseg/ballgen.hpp"
#include "regseg/error.hpp"
#include "regseg/simgen.hpp"
#include "regseg/timeseries.hpp"
#include "regseg/weighted_cluster.hpp"

namespace regseg {

// Fraction of agreeing positions under the better of the two 0/1 label
// alignments, so never below 0.5.
double decoding_accuracy(std::span<const int> estimated, std::span<const int> truth);

struct AccuracyReport {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (0 for a single replication)
  std::size_t n_reps = 0;
  std::vector<double> per_rep;

  static AccuracyReport from(std::vector<double> per_rep);
};

// Settings shared by the end-to-end segmentation pipeline.
struct PipelineConfig {
  FeatureOptions features{};
  DecodeConfig decode{};
  bool standardize = true;
  std::size_t lags = 0;     // > 0: univariate input is lag-embedded with this many leads
  std::size_t window = 30;  // block-permutation window used together with lags
};

// Default pipeline for a scenario: AR scenarios embed `order` lags and
// block-permute with a 30-point window; the others use the data as is.
PipelineConfig default_pipeline(const ScenarioSpec& spec);

struct PipelineResult {
  std::vector<int> labels;  // one per row of the analysed (embedded) series, original order
  FeatureExtraction extraction;
  DecodeResult decoding;
};

// standardize -> extract features -> decode for one weighting method. With
// lags > 0 the series is first embedded and block-permuted; the labels are
// mapped back to the embedded series' original order. `seed` feeds
// permutation, ball seeding and decoding through derived streams.
PipelineResult run_pipeline(const MultiSeries& x, const PipelineConfig& config, std::uint64_t seed);

// Same pipeline, decoding the one feature extraction with several methods.
std::vector<PipelineResult> run_pipeline(const MultiSeries& x, const PipelineConfig& config,
                                         std::span<const WeightMethod> methods, std::uint64_t seed);

// Per replication: simulate (seed derived from `seed` and the replication
// index), run the pipeline, score against the truth. Returns one report per
// method; all methods share each replication's data and features.
std::vector<AccuracyReport> replicate_methods(const ScenarioSpec& spec, std::span<const WeightMethod> methods,
                                              std::size_t n_reps, std::uint64_t seed,
                                              const PipelineConfig& config);

AccuracyReport replicate_experiment(const ScenarioSpec& spec, WeightMethod method, std::size_t n_reps,
                                    std::uint64_t seed, const PipelineConfig& config);

// Thrown when one replication fails; carries the derived seed that failed.
class ReplicationError : public Error {
 public:
  ReplicationError(const std::string& what, std::uint64_t seed, std::size_t replication)
      : Error(what), seed_(seed), replication_(replication) {}
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t replication() const noexcept { return replication_; }

 private:
  std::uint64_t seed_;
  std::size_t replication_;
};

struct TailReport {
  double z = 1.0;
  double sigma = 0.0;                  // pooled sample standard deviation
  std::array<double, 2> tail_prob{};  // per state P(|X| > z sigma)
  int volatile_state = 0;              // state with the larger tail mass at z = 1
  double delta = 0.0;                  // volatile minus quiet tail probability at z
};

TailReport heavy_tailedness(std::span<const double> x, std::span<const int> labels, double z);

// 1.06 * sd * n^(-1/5).
double silverman_bandwidth(std::span<const double> samples);

std::vector<double> gaussian_kde(std::span<const double> samples, std::span<const double> grid);

}  // namespace regseg
