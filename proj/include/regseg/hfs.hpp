#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "regseg/excursion.hpp"

namespace regseg {

enum class Criterion { AIC, BIC };

// What the complexity penalty counts: one geometric parameter per temporal
// segment (default) or per non-empty hidden state.
enum class ParamCount { Segments, States };

// Where a dense episode (a run of short recurrences) starts and ends in time.
//  GapMidpoint: (R - 1) / 2 points into each long gap R flanking the run,
//               so the middle of a long gap always stays in state 1; a run
//               touching the series start or end extends to it.
//  EventSpan:   exactly from the first to the last event bounding the run.
// EventSpan hugs the events, which lets the Bernoulli likelihood reward
// tiny clumps; GapMidpoint is the default.
enum class BoundaryRule { GapMidpoint, EventSpan };

Criterion parse_criterion(const std::string& name);
std::string to_string(Criterion c);
ParamCount parse_param_count(const std::string& name);
std::string to_string(ParamCount q);
BoundaryRule parse_boundary_rule(const std::string& name);
std::string to_string(BoundaryRule b);

// Hidden-state labels over time. region_rates[j] is the estimated emission
// rate of state j, or nullopt when no time point carries label j.
struct Segmentation {
  std::vector<int> labels;
  int k = 1;
  std::vector<std::optional<double>> region_rates;
  std::size_t n_switches = 0;
};

std::size_t count_switches(std::span<const int> labels);

// Level-1 threshold T on recurrence times and level-2 threshold T* on the
// length of runs of short recurrences. Both at least 1.
struct HfsParams {
  std::size_t threshold = 1;
  std::size_t run_threshold = 1;

  bool operator==(const HfsParams&) const = default;
};

struct FitReport {
  double loss = 0.0;
  Criterion criterion = Criterion::AIC;
  std::size_t q_k = 0;
  double penalty_weight = 2.0;  // phi(N)
  std::vector<double> per_region_loglik;
};

// Two-level coding of the recurrence sequence into alternating regions.
//
// A recurrence R_i counts as "short" when R_i < threshold. Every maximal run
// of short recurrences whose length reaches run_threshold becomes a dense
// episode (label 0) placed according to `rule`; every other time point gets
// label 1. With no events at all the result is a single region.
// `event_positions` are the 0-based times of the 1s, as returned by
// ExcursionSequence::event_positions().
Segmentation hfs_decode(const RecurrenceTimes& r, const HfsParams& params,
                        std::span<const std::size_t> event_positions,
                        BoundaryRule rule = BoundaryRule::GapMidpoint);

// Per-state Bernoulli MLE (ones / region length), clamped to
// [0.5/N_j, 1 - 0.5/N_j]. Empty states yield nullopt.
std::vector<std::optional<double>> geometric_mle(const ExcursionSequence& e, const Segmentation& seg);

// -2 * log-likelihood of the excursion sequence under per-state rates plus
// phi(N) * Q_k, with phi = 2 (AIC) or ln N (BIC).
FitReport segmentation_loss(const ExcursionSequence& e, const Segmentation& seg, Criterion criterion,
                            ParamCount q = ParamCount::Segments);

struct HfsSearchOptions {
  Criterion criterion = Criterion::AIC;
  ParamCount q = ParamCount::Segments;
  std::size_t grid_cap = 50;
  BoundaryRule boundary = BoundaryRule::GapMidpoint;
};

struct HfsResult {
  Segmentation segmentation;
  FitReport report;
  std::optional<HfsParams> params;  // nullopt when the single-region fit wins
  std::size_t candidates = 0;       // number of grid candidates scored
};

// Exhaustive search over (T, T*) plus the single-region candidate.
// Ties go to fewer switches, then to the smaller (T, T*).
HfsResult hfs_search(const ExcursionSequence& e, const HfsSearchOptions& options = {});

// Loss of hfs_decode(recurrence_times(e), params) evaluated from interval
// sums without materializing labels. Matches segmentation_loss on the decoded
// labels; used by the search.
double hfs_candidate_loss(const ExcursionSequence& e, const HfsParams& params, Criterion criterion,
                          ParamCount q = ParamCount::Segments, BoundaryRule rule = BoundaryRule::GapMidpoint);

// Search grid values: distinct entries >= 1, thinned to at most `cap` evenly
// ranked values.
std::vector<std::size_t> threshold_grid(std::span<const std::size_t> values, std::size_t cap);

struct PpPoint {
  std::size_t value = 0;
  double empirical = 0.0;    // fraction of recurrence times <= value
  double theoretical = 0.0;  // 1 - (1 - p)^(value + 1)
};

std::vector<PpPoint> pp_plot_data(std::span<const std::size_t> times, double p);

}  // namespace regseg
