#include "regseg/hfs.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "regseg/error.hpp"

namespace regseg {

namespace {

constexpr std::size_t kMinSearchLength = 20;

double clamp_rate(double ones, double len) {
  const double eps = 0.5 / len;
  return std::clamp(ones / len, eps, 1.0 - eps);
}

// Bernoulli log-likelihood of a region holding `ones` events in `len` points.
double region_loglik(std::size_t ones, std::size_t len) {
  if (len == 0) return 0.0;
  const double p = clamp_rate(static_cast<double>(ones), static_cast<double>(len));
  if (!(p > 0.0 && p < 1.0)) throw InternalError("clamped rate left (0, 1)");
  return static_cast<double>(ones) * std::log(p) + static_cast<double>(len - ones) * std::log(1.0 - p);
}

double penalty_weight(Criterion c, std::size_t n) {
  return c == Criterion::AIC ? 2.0 : std::log(static_cast<double>(n));
}

// Maximal run of short recurrences, expressed as the 0-based events bounding it.
struct Run {
  std::size_t first_event;
  std::size_t last_event;
  std::size_t length;
  std::size_t begin;  // first time point of the dense interval
  std::size_t end;    // last time point of the dense interval
};

std::vector<Run> short_runs(std::span<const std::size_t> times, std::size_t threshold,
                            std::span<const std::size_t> pos, std::size_t n, BoundaryRule rule) {
  const std::size_t m = times.size() - 1;
  std::vector<Run> runs;
  std::size_t i = 0;
  while (i < times.size()) {
    if (times[i] >= threshold) {
      ++i;
      continue;
    }
    const std::size_t a = i;
    while (i < times.size() && times[i] < threshold) ++i;
    const std::size_t b = i - 1;
    Run run{a == 0 ? 0 : a - 1, std::min(b, m - 1), b - a + 1, 0, 0};
    run.begin = pos[run.first_event];
    run.end = pos[run.last_event];
    if (rule == BoundaryRule::GapMidpoint) {
      // Claim (R - 1) / 2 zeros of each flanking long gap, so that the middle
      // of every long gap stays in state 1 even with episodes on both sides.
      run.begin = a == 0 ? 0 : pos[run.first_event] - (times[a - 1] - 1) / 2;
      run.end = b == m ? n - 1 : pos[run.last_event] + (times[b + 1] - 1) / 2;
    }
    runs.push_back(run);
  }
  return runs;
}

// Dense-state (label 0) totals for one candidate.
struct DenseSummary {
  std::size_t ones = 0;
  std::size_t length = 0;
  std::size_t intervals = 0;
  bool at_start = false;
  bool at_end = false;
};

std::size_t segment_count(const DenseSummary& d) {
  if (d.intervals == 0) return 1;
  return 2 * d.intervals + 1 - (d.at_start ? 1 : 0) - (d.at_end ? 1 : 0);
}

std::size_t param_count(ParamCount q, std::size_t segments, std::size_t states) {
  return q == ParamCount::Segments ? segments : states;
}

double summary_loss(const DenseSummary& d, std::size_t m, std::size_t n, Criterion criterion, ParamCount q) {
  const std::size_t states = (d.length > 0 ? 1 : 0) + (d.length < n ? 1 : 0);
  const double ll = region_loglik(d.ones, d.length) + region_loglik(m - d.ones, n - d.length);
  return -2.0 * ll + penalty_weight(criterion, n) * static_cast<double>(param_count(q, segment_count(d), states));
}

DenseSummary summarize(std::span<const Run> runs, std::size_t run_threshold, std::size_t n) {
  DenseSummary d;
  for (const Run& r : runs) {
    if (r.length < run_threshold) continue;
    d.ones += r.last_event - r.first_event + 1;
    d.length += r.end - r.begin + 1;
    ++d.intervals;
    if (r.begin == 0) d.at_start = true;
    if (r.end == n - 1) d.at_end = true;
  }
  return d;
}

void check_events(const RecurrenceTimes& r, std::span<const std::size_t> pos) {
  if (r.times.size() != pos.size() + 1) throw SizeError("recurrence times do not match event count");
  for (std::size_t i = 0; i < pos.size(); ++i) {
    if (pos[i] >= r.total_length || (i > 0 && pos[i] <= pos[i - 1])) {
      throw ValidationError("event positions must be increasing and inside the series");
    }
  }
}

Segmentation single_region(const ExcursionSequence& e) {
  Segmentation seg;
  seg.labels.assign(e.length(), 0);
  seg.k = 1;
  seg.region_rates = geometric_mle(e, seg);
  return seg;
}

}  // namespace

Criterion parse_criterion(const std::string& name) {
  if (name == "AIC" || name == "aic") return Criterion::AIC;
  if (name == "BIC" || name == "bic") return Criterion::BIC;
  throw ParameterError("unknown criterion '" + name + "' (expected AIC or BIC)");
}

std::string to_string(Criterion c) { return c == Criterion::AIC ? "AIC" : "BIC"; }

ParamCount parse_param_count(const std::string& name) {
  if (name == "segments") return ParamCount::Segments;
  if (name == "states") return ParamCount::States;
  throw ParameterError("unknown parameter count '" + name + "' (expected segments or states)");
}

std::string to_string(ParamCount q) { return q == ParamCount::Segments ? "segments" : "states"; }

BoundaryRule parse_boundary_rule(const std::string& name) {
  if (name == "midpoint") return BoundaryRule::GapMidpoint;
  if (name == "events") return BoundaryRule::EventSpan;
  throw ParameterError("unknown boundary rule '" + name + "' (expected midpoint or events)");
}

std::string to_string(BoundaryRule b) { return b == BoundaryRule::GapMidpoint ? "midpoint" : "events"; }

std::size_t count_switches(std::span<const int> labels) {
  std::size_t n = 0;
  for (std::size_t t = 1; t < labels.size(); ++t)
    if (labels[t] != labels[t - 1]) ++n;
  return n;
}

Segmentation hfs_decode(const RecurrenceTimes& r, const HfsParams& params,
                        std::span<const std::size_t> event_positions, BoundaryRule rule) {
  if (params.threshold < 1 || params.run_threshold < 1) throw ParameterError("HFS thresholds must be at least 1");
  check_events(r, event_positions);
  Segmentation seg;
  const std::size_t n = r.total_length;
  if (event_positions.empty()) {
    seg.labels.assign(n, 0);
    seg.k = 1;
    return seg;
  }
  seg.k = 2;
  seg.labels.assign(n, 1);
  for (const Run& run : short_runs(r.times, params.threshold, event_positions, n, rule)) {
    if (run.length < params.run_threshold) continue;
    std::fill(seg.labels.begin() + static_cast<std::ptrdiff_t>(run.begin),
              seg.labels.begin() + static_cast<std::ptrdiff_t>(run.end + 1), 0);
  }
  seg.n_switches = count_switches(seg.labels);
  return seg;
}

std::vector<std::optional<double>> geometric_mle(const ExcursionSequence& e, const Segmentation& seg) {
  if (seg.labels.size() != e.length()) throw SizeError("segmentation length does not match excursion sequence");
  const auto k = static_cast<std::size_t>(seg.k);
  std::vector<std::size_t> ones(k, 0);
  std::vector<std::size_t> len(k, 0);
  for (std::size_t t = 0; t < e.length(); ++t) {
    const int l = seg.labels[t];
    if (l < 0 || static_cast<std::size_t>(l) >= k) throw ValidationError("label outside [0, k)");
    ++len[static_cast<std::size_t>(l)];
    ones[static_cast<std::size_t>(l)] += e.bits[t];
  }
  std::vector<std::optional<double>> rates(k);
  for (std::size_t j = 0; j < k; ++j) {
    if (len[j] > 0) rates[j] = clamp_rate(static_cast<double>(ones[j]), static_cast<double>(len[j]));
  }
  return rates;
}

FitReport segmentation_loss(const ExcursionSequence& e, const Segmentation& seg, Criterion criterion, ParamCount q) {
  if (seg.labels.size() != e.length()) throw SizeError("segmentation must cover every time point");
  const auto k = static_cast<std::size_t>(seg.k);
  std::vector<std::size_t> ones(k, 0);
  std::vector<std::size_t> len(k, 0);
  for (std::size_t t = 0; t < e.length(); ++t) {
    const int l = seg.labels[t];
    if (l < 0 || static_cast<std::size_t>(l) >= k) throw ValidationError("label outside [0, k)");
    ++len[static_cast<std::size_t>(l)];
    ones[static_cast<std::size_t>(l)] += e.bits[t];
  }
  FitReport report;
  report.criterion = criterion;
  report.penalty_weight = penalty_weight(criterion, e.length());
  double ll = 0.0;
  std::size_t states = 0;
  for (std::size_t j = 0; j < k; ++j) {
    report.per_region_loglik.push_back(region_loglik(ones[j], len[j]));
    ll += report.per_region_loglik.back();
    if (len[j] > 0) ++states;
  }
  const std::size_t segments = e.length() == 0 ? 0 : count_switches(seg.labels) + 1;
  report.q_k = param_count(q, segments, states);
  report.loss = -2.0 * ll + report.penalty_weight * static_cast<double>(report.q_k);
  return report;
}

double hfs_candidate_loss(const ExcursionSequence& e, const HfsParams& params, Criterion criterion, ParamCount q,
                          BoundaryRule rule) {
  const auto r = recurrence_times(e);
  const auto pos = e.event_positions();
  if (pos.empty()) return segmentation_loss(e, single_region(e), criterion, q).loss;
  const auto runs = short_runs(r.times, params.threshold, pos, e.length(), rule);
  return summary_loss(summarize(runs, params.run_threshold, e.length()), pos.size(), e.length(), criterion, q);
}

std::vector<std::size_t> threshold_grid(std::span<const std::size_t> values, std::size_t cap) {
  std::vector<std::size_t> distinct;
  for (auto v : values)
    if (v >= 1) distinct.push_back(v);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (cap == 0 || distinct.size() <= cap) return distinct;
  std::vector<std::size_t> grid;
  grid.reserve(cap);
  const double step = static_cast<double>(distinct.size() - 1) / static_cast<double>(cap - 1);
  for (std::size_t i = 0; i < cap; ++i) {
    grid.push_back(distinct[static_cast<std::size_t>(std::lround(step * static_cast<double>(i)))]);
  }
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

HfsResult hfs_search(const ExcursionSequence& e, const HfsSearchOptions& options) {
  const std::size_t n = e.length();
  if (n < kMinSearchLength) {
    throw SizeError("HFS search needs at least " + std::to_string(kMinSearchLength) + " points, got " +
                    std::to_string(n));
  }
  HfsResult result;
  result.segmentation = single_region(e);
  result.report = segmentation_loss(e, result.segmentation, options.criterion, options.q);
  if (e.n_events == 0) return result;

  const auto r = recurrence_times(e);
  const auto pos = e.event_positions();
  const std::size_t m = pos.size();

  double best_loss = result.report.loss;
  std::size_t best_switches = 0;
  std::optional<HfsParams> best;

  for (std::size_t threshold : threshold_grid(r.times, options.grid_cap)) {
    const auto runs = short_runs(r.times, threshold, pos, n, options.boundary);
    std::vector<std::size_t> lengths;
    lengths.reserve(runs.size());
    for (const Run& run : runs) lengths.push_back(run.length);
    for (std::size_t run_threshold : threshold_grid(lengths, options.grid_cap)) {
      ++result.candidates;
      const DenseSummary d = summarize(runs, run_threshold, n);
      const double loss = summary_loss(d, m, n, options.criterion, options.q);
      const std::size_t switches = segment_count(d) - 1;
      if (loss < best_loss || (loss == best_loss && switches < best_switches)) {
        best_loss = loss;
        best_switches = switches;
        best = HfsParams{threshold, run_threshold};
      }
    }
  }

  if (best) {
    result.params = best;
    result.segmentation = hfs_decode(r, *best, pos, options.boundary);
    result.segmentation.region_rates = geometric_mle(e, result.segmentation);
    result.report = segmentation_loss(e, result.segmentation, options.criterion, options.q);
  }
  return result;
}

std::vector<PpPoint> pp_plot_data(std::span<const std::size_t> times, double p) {
  if (!(p > 0.0 && p < 1.0)) throw ParameterError("geometric rate must lie in (0, 1)");
  if (times.empty()) throw SizeError("P-P data needs at least one recurrence time");
  std::vector<std::size_t> sorted(times.begin(), times.end());
  std::sort(sorted.begin(), sorted.end());
  const double total = static_cast<double>(sorted.size());
  std::vector<PpPoint> out;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    const double theoretical = 1.0 - std::pow(1.0 - p, static_cast<double>(sorted[i] + 1));
    out.push_back({sorted[i], static_cast<double>(i + 1) / total, theoretical});
  }
  return out;
}

}  // namespace regseg
