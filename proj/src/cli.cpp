#include "regseg/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "regseg/ballgen.hpp"
#include "regseg/error.hpp"
#include "regseg/eval.hpp"
#include "regseg/excursion.hpp"
#include "regseg/format.hpp"
#include "regseg/hfs.hpp"
#include "regseg/seeding.hpp"
#include "regseg/simgen.hpp"
#include "regseg/timeseries.hpp"
#include "regseg/weighted_cluster.hpp"

namespace regseg::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr int kDigits = 12;

class UsageError : public Error {
 public:
  using Error::Error;
};

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
std::vector<T> parse_list(const std::string& s, const std::string& what) {
  std::vector<T> out;
  for (const auto& item : split_list(s)) {
    const double v = parse_real(item);
    if constexpr (std::is_integral_v<T>) {
      if (v != std::floor(v) || v < 0) throw UsageError(what + " expects nonnegative integers, got '" + item + "'");
    }
    out.push_back(static_cast<T>(v));
  }
  return out;
}

double rounded(double x) { return round_significant(x, kDigits); }

json rounded_array(std::span<const double> v) {
  json a = json::array();
  for (double x : v) a.push_back(rounded(x));
  return a;
}

json optional_rates(const std::vector<std::optional<double>>& rates) {
  json a = json::array();
  for (const auto& r : rates) a.push_back(r ? json(rounded(*r)) : json(nullptr));
  return a;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

void write_labels(const fs::path& path, const std::vector<std::string>& times, std::span<const int> labels) {
  if (times.size() != labels.size()) throw InternalError("label and time counts differ");
  std::ostringstream out;
  out << "time,label\n";
  for (std::size_t t = 0; t < labels.size(); ++t) out << times[t] << ',' << labels[t] << '\n';
  write_text(path, out.str());
}

struct LabelFile {
  std::vector<std::string> times;
  std::vector<int> labels;
};

LabelFile read_labels(const fs::path& path) {
  const auto s = load_csv(path, true);
  if (s.dims() != 1) throw ValidationError(path.string() + ": expected columns time,label");
  LabelFile f{s.time_index, {}};
  for (double v : s.values.data()) {
    if (v != std::floor(v) || v < 0) throw ValidationError(path.string() + ": labels must be nonnegative integers");
    f.labels.push_back(static_cast<int>(v));
  }
  return f;
}

// Labels of `reference` restricted to, and ordered like, `times`.
std::vector<int> align_labels(const LabelFile& reference, const std::vector<std::string>& times,
                              const std::string& what) {
  std::map<std::string, int> by_time;
  for (std::size_t i = 0; i < reference.times.size(); ++i) by_time.emplace(reference.times[i], reference.labels[i]);
  std::vector<int> out;
  out.reserve(times.size());
  for (const auto& t : times) {
    const auto it = by_time.find(t);
    if (it == by_time.end()) throw ValidationError(what + " has no entry for time '" + t + "'");
    out.push_back(it->second);
  }
  return out;
}

std::size_t resolve_column(const MultiSeries& s, const std::string& column) {
  if (column.empty()) return 0;
  for (std::size_t c = 0; c < s.dims(); ++c) {
    if (s.dim_names[c] == column) return c;
  }
  throw UsageError("no column named '" + column + "' (have " + std::to_string(s.dims()) + " value columns)");
}

void check_tail_levels(double alpha, double beta) {
  if (!(alpha > 0.0 && alpha < 0.5 && beta > 0.5 && beta < 1.0)) {
    throw ParameterError("tail levels need 0 < alpha < 0.5 < beta < 1, got alpha=" + format_real(alpha) +
                         ", beta=" + format_real(beta));
  }
}

// ---------------------------------------------------------------------------
// Option groups

struct HfsOpts {
  std::string criterion = "aic";
  std::string q = "segments";
  std::string boundary = "midpoint";
  std::size_t grid_cap = 50;

  HfsSearchOptions build() const {
    HfsSearchOptions o;
    o.criterion = parse_criterion(criterion);
    o.q = parse_param_count(q);
    o.boundary = parse_boundary_rule(boundary);
    o.grid_cap = grid_cap;
    if (grid_cap < 1) throw ParameterError("grid cap must be at least 1");
    return o;
  }
};

void add_hfs_options(CLI::App* app, HfsOpts& o) {
  app->add_option("--criterion", o.criterion, "Penalty: aic or bic")->capture_default_str();
  app->add_option("--q", o.q, "Penalty count: segments or states")->capture_default_str();
  app->add_option("--boundary", o.boundary, "Episode boundaries: midpoint or events")->capture_default_str();
  app->add_option("--grid-cap", o.grid_cap, "Most threshold values tried per level")->capture_default_str();
}

struct FeatureOpts {
  std::size_t n_balls = 100;
  double ratio = 0.1;
  std::size_t kmeans_restarts = 1;
  std::size_t lags = 0;
  std::size_t window = 30;
  bool no_standardize = false;
  HfsOpts hfs;
};

void add_feature_options(CLI::App* app, FeatureOpts& o) {
  app->add_option("--balls", o.n_balls, "Number of balls V")->capture_default_str();
  app->add_option("--ratio", o.ratio, "Ball size as a fraction of N")->capture_default_str();
  app->add_option("--kmeans-restarts", o.kmeans_restarts, "k-means++ restarts for ball seeding")
      ->capture_default_str();
  app->add_option("--lags", o.lags, "Lag embedding r for a univariate series (0 = off)")->capture_default_str();
  app->add_option("--window", o.window, "Block-permutation window l used with --lags")->capture_default_str();
  app->add_flag("--no-standardize", o.no_standardize, "Use the columns as given");
  add_hfs_options(app, o.hfs);
}

struct DecodeOpts {
  std::string method = "entropy";
  std::size_t k = 2;
  double eta = 0.5;
  std::size_t max_iter = 50;
  double tol = 1e-6;
  std::size_t restarts = 5;
  std::string nmi = "arithmetic";

  DecodeConfig build(WeightMethod m) const {
    DecodeConfig c;
    c.method = m;
    c.k = k;
    c.eta = eta;
    c.max_iter = max_iter;
    c.tol = tol;
    c.n_restarts = restarts;
    c.nmi = parse_nmi_normalization(nmi);
    c.validate();
    return c;
  }
};

void add_decode_options(CLI::App* app, DecodeOpts& o, bool with_method) {
  if (with_method) {
    app->add_option("--method", o.method, "Weighting: fwsa, nmi, delta or entropy")->capture_default_str();
  }
  app->add_option("--k", o.k, "Number of hidden states")->capture_default_str();
  app->add_option("--eta", o.eta, "Weight learning rate in [0, 1]")->capture_default_str();
  app->add_option("--max-iter", o.max_iter, "Weight updates at most")->capture_default_str();
  app->add_option("--tol", o.tol, "Stop when no weight moves more than this")->capture_default_str();
  app->add_option("--restarts", o.restarts, "k-means++ restarts of the first clustering")->capture_default_str();
  app->add_option("--nmi", o.nmi, "NMI scaling: arithmetic, geometric, max or min")->capture_default_str();
}

PipelineConfig pipeline_config(const FeatureOpts& f, const DecodeOpts& d, WeightMethod method) {
  PipelineConfig c;
  c.features.n_balls = f.n_balls;
  c.features.ratio = f.ratio;
  c.features.kmeans_restarts = f.kmeans_restarts;
  c.features.hfs = f.hfs.build();
  c.standardize = !f.no_standardize;
  c.lags = f.lags;
  c.window = f.window;
  c.decode = d.build(method);
  return c;
}

std::vector<WeightMethod> parse_methods(const std::string& list) {
  std::vector<WeightMethod> out;
  for (const auto& m : split_list(list)) out.push_back(parse_weight_method(m));
  if (out.empty()) throw UsageError("no weighting method given");
  return out;
}

const char* kAllMethods = "fwsa,nmi,delta,entropy";

void reject_delta_for_many_states(const std::vector<WeightMethod>& methods, std::size_t k) {
  for (auto m : methods) {
    if (m == WeightMethod::Delta && k != 2) throw ParameterError("method DELTA needs k = 2, got k = " + std::to_string(k));
  }
}

json report_json(const AccuracyReport& r) {
  json j;
  j["mean"] = rounded(r.mean);
  j["std"] = rounded(r.std);
  j["n_reps"] = r.n_reps;
  j["per_rep"] = rounded_array(r.per_rep);
  return j;
}

json hfs_params_json(const std::optional<HfsParams>& p) {
  if (!p) return nullptr;
  return json{{"threshold", p->threshold}, {"run_threshold", p->run_threshold}};
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOpts {
  std::optional<int> gaussian_case;
  std::optional<int> ar_order;
  std::string sigma;
  std::size_t periods = 10;
  std::size_t min_length = 200;
  std::size_t max_length = 400;
  std::uint64_t seed = 0;
  std::string out;
  std::string truth;
};

void cmd_simulate(const SimulateOpts& o) {
  ScenarioSpec spec;
  spec.n_periods = o.periods;
  spec.period_range = {o.min_length, o.max_length};
  spec.seed = o.seed;
  const int chosen = (o.gaussian_case ? 1 : 0) + (o.ar_order ? 1 : 0) + (o.sigma.empty() ? 0 : 1);
  if (chosen != 1) throw UsageError("give exactly one of --case, --ar or --sigma");
  if (o.gaussian_case) {
    spec.kind = ScenarioKind::Gaussian;
    spec.gaussian_case = *o.gaussian_case;
  } else if (o.ar_order) {
    spec.kind = ScenarioKind::AR;
    spec.ar_order = *o.ar_order;
  } else {
    const auto s = parse_list<double>(o.sigma, "--sigma");
    if (s.size() != 2) throw UsageError("--sigma expects two values, e.g. 1,1.5");
    spec.kind = ScenarioKind::VarianceSwitch;
    spec.sigma = {s[0], s[1]};
  }
  const auto sim = simulate(spec);
  save_csv(sim.series, o.out, kDigits);
  write_labels(o.truth, sim.series.time_index, sim.truth);
}

// ---------------------------------------------------------------------------
// segment

struct SegmentOpts {
  std::string input;
  std::string column;
  double alpha = 0.05;
  double beta = 0.95;
  HfsOpts hfs;
  std::string out;
  std::string report;
};

void cmd_segment(const SegmentOpts& o) {
  check_tail_levels(o.alpha, o.beta);
  const auto options = o.hfs.build();
  const auto x = load_csv(o.input, true);
  const std::size_t col = resolve_column(x, o.column);
  const auto values = x.column(col);
  const auto e = tail_encode(values, o.alpha, o.beta);
  const auto fit = hfs_search(e, options);
  write_labels(o.out, x.time_index, fit.segmentation.labels);
  if (o.report.empty()) return;

  json j;
  j["column"] = x.dim_names[col];
  j["alpha"] = o.alpha;
  j["beta"] = o.beta;
  j["lower_threshold"] = rounded(empirical_quantile(values, o.alpha));
  j["upper_threshold"] = rounded(empirical_quantile(values, o.beta));
  j["n_points"] = e.length();
  j["n_events"] = e.n_events;
  j["criterion"] = to_string(fit.report.criterion);
  j["q"] = to_string(options.q);
  j["boundary"] = to_string(options.boundary);
  j["loss"] = rounded(fit.report.loss);
  j["q_k"] = fit.report.q_k;
  j["penalty_weight"] = rounded(fit.report.penalty_weight);
  j["per_region_loglik"] = rounded_array(fit.report.per_region_loglik);
  j["params"] = hfs_params_json(fit.params);
  j["region_rates"] = optional_rates(fit.segmentation.region_rates);
  j["n_switches"] = fit.segmentation.n_switches;
  j["candidates"] = fit.candidates;
  write_json(o.report, j);
}

// ---------------------------------------------------------------------------
// extract-features

struct ExtractOpts {
  std::string input;
  FeatureOpts features;
  std::uint64_t seed = 0;
  std::string out;
  std::string balls_out;
};

void cmd_extract(const ExtractOpts& o) {
  const auto hfs = o.features.hfs.build();
  const auto x = load_csv(o.input, true);

  MultiSeries analysed = x;
  std::vector<std::string> times = x.time_index;
  std::optional<Permutation> perm;
  if (o.features.lags > 0) {
    const auto embedded = embed_lags(x, o.features.lags);
    times = embedded.source_index;
    auto [shuffled, p] = block_permute(embedded, o.features.window, derive_seed(o.seed, Stage::Permute));
    analysed = std::move(shuffled);
    perm = std::move(p);
  }
  if (!o.features.no_standardize) analysed = standardize(analysed);

  FeatureOptions fo;
  fo.n_balls = o.features.n_balls;
  fo.ratio = o.features.ratio;
  fo.kmeans_restarts = o.features.kmeans_restarts;
  fo.hfs = hfs;
  const auto fx = extract_features(analysed.values, fo, derive_seed(o.seed, Stage::BallSeeding));

  std::vector<std::string> names;
  for (std::size_t v = 0; v < fx.balls.size(); ++v) names.push_back("b" + std::to_string(v + 1));
  save_csv(make_series(fx.features.values, names), o.out, kDigits);

  json j;
  j["n_points"] = fx.balls.n_points;
  j["ratio"] = o.features.ratio;
  j["ball_size"] = fx.balls.ball_size();
  j["seed"] = o.seed;
  j["criterion"] = to_string(hfs.criterion);
  j["boundary"] = to_string(hfs.boundary);
  j["index_base"] = 0;
  j["time_index"] = times;
  if (perm) {
    j["window"] = perm->window;
    j["permutation"] = perm->mapping;
  } else {
    j["permutation"] = nullptr;
  }
  json balls = json::array();
  for (std::size_t v = 0; v < fx.balls.size(); ++v) {
    json b;
    b["members"] = fx.balls.balls[v];
    b["centroid"] = rounded_array(fx.balls.centroids.row(v));
    b["params"] = hfs_params_json(fx.features.params[v]);
    b["n_switches"] = fx.features.n_switches[v];
    balls.push_back(std::move(b));
  }
  j["balls"] = std::move(balls);
  write_json(o.balls_out, j);
}

// ---------------------------------------------------------------------------
// decode

struct DecodeCmdOpts {
  std::string features;
  std::string balls;
  DecodeOpts decode;
  std::uint64_t seed = 0;
  std::string out;
  std::string weights;
  std::string trace;
};

struct BallFile {
  BallSet balls;
  std::vector<std::string> times;
  std::optional<Permutation> perm;
};

BallFile read_ball_file(const fs::path& path) {
  const auto j = read_json(path);
  BallFile f;
  try {
    f.balls.n_points = j.at("n_points").get<std::size_t>();
    const auto& balls = j.at("balls");
    std::size_t dims = 0;
    for (const auto& b : balls) {
      auto members = b.at("members").get<std::vector<std::size_t>>();
      for (std::size_t m : members) {
        if (m >= f.balls.n_points) throw ValidationError(path.string() + ": ball member " + std::to_string(m) + " out of range");
      }
      f.balls.balls.push_back(std::move(members));
      if (b.contains("centroid")) dims = b.at("centroid").size();
    }
    if (dims > 0) {
      f.balls.centroids = Matrix(balls.size(), dims);
      for (std::size_t v = 0; v < balls.size(); ++v) {
        const auto c = balls[v].at("centroid").get<std::vector<double>>();
        if (c.size() != dims) throw ValidationError(path.string() + ": centroids differ in length");
        for (std::size_t d = 0; d < dims; ++d) f.balls.centroids(v, d) = c[d];
      }
    }
    if (j.contains("time_index")) f.times = j.at("time_index").get<std::vector<std::string>>();
    if (j.contains("permutation") && !j.at("permutation").is_null()) {
      Permutation p;
      p.mapping = j.at("permutation").get<std::vector<std::size_t>>();
      p.window = j.value("window", std::size_t{0});
      f.perm = std::move(p);
    }
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  if (f.perm) {
    auto sorted = f.perm->mapping;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (sorted[i] != i) throw ValidationError(path.string() + ": permutation is not a permutation");
    }
  }
  return f;
}

void cmd_decode(const DecodeCmdOpts& o) {
  auto config = o.decode.build(parse_weight_method(o.decode.method));
  config.seed = derive_seed(o.seed, Stage::Decode);
  const auto p = load_csv(o.features, true);
  const auto bf = read_ball_file(o.balls);
  if (bf.balls.n_points != p.length()) {
    throw SizeError("ball file covers " + std::to_string(bf.balls.n_points) + " points, feature matrix has " +
                    std::to_string(p.length()) + " rows");
  }
  const auto res = decode(p.values, bf.balls, config);

  std::vector<int> labels = res.segmentation.labels;
  if (bf.perm) {
    if (bf.perm->mapping.size() != labels.size()) throw SizeError("permutation length does not match features");
    labels = unpermute_values<int>(labels, *bf.perm);
  }
  const auto times = bf.times.empty() ? p.time_index : bf.times;
  if (times.size() != labels.size()) throw SizeError("time index length does not match features");
  write_labels(o.out, times, labels);

  if (!o.weights.empty()) {
    std::ostringstream w;
    w << "ball,weight\n";
    for (std::size_t v = 0; v < res.weights.size(); ++v) w << p.dim_names[v] << ',' << format_real(res.weights.w[v], kDigits) << '\n';
    write_text(o.weights, w.str());
  }
  if (!o.trace.empty()) {
    json j;
    j["method"] = to_string(config.method);
    j["k"] = config.k;
    j["eta"] = config.eta;
    j["converged"] = res.converged;
    j["iterations"] = res.iterations;
    j["n_switches"] = res.segmentation.n_switches;
    j["region_rates"] = optional_rates(res.segmentation.region_rates);
    j["max_change"] = rounded_array(res.max_change);
    json trace = json::array();
    for (const auto& w : res.trace) trace.push_back(rounded_array(w));
    j["weights"] = std::move(trace);
    write_json(o.trace, j);
  }
}

// ---------------------------------------------------------------------------
// evaluate

struct AccuracyOpts {
  std::string labels;
  std::string input;
  std::string truth;
  std::string methods = kAllMethods;
  FeatureOpts features;
  DecodeOpts decode;
  std::uint64_t seed = 0;
  std::string report;
};

void emit(const std::string& path, const json& j) {
  if (path.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    write_json(path, j);
  }
}

void cmd_accuracy(const AccuracyOpts& o) {
  if (o.labels.empty() == o.input.empty()) throw UsageError("give exactly one of --labels or --input");
  const auto truth = read_labels(o.truth);
  json j;
  if (!o.labels.empty()) {
    const auto est = read_labels(o.labels);
    const auto ref = align_labels(truth, est.times, "truth file");
    j["labels"] = report_json(AccuracyReport::from({decoding_accuracy(est.labels, ref)}));
    emit(o.report, j);
    return;
  }
  const auto methods = parse_methods(o.methods);
  reject_delta_for_many_states(methods, o.decode.k);
  const auto config = pipeline_config(o.features, o.decode, methods.front());
  const auto x = load_csv(o.input, true);
  const auto results = run_pipeline(x, config, methods, o.seed);
  const auto times = config.lags > 0 ? embed_lags(x, config.lags).source_index : x.time_index;
  const auto ref = align_labels(truth, times, "truth file");
  for (std::size_t m = 0; m < methods.size(); ++m) {
    j[to_string(methods[m])] = report_json(AccuracyReport::from({decoding_accuracy(results[m].labels, ref)}));
  }
  emit(o.report, j);
}

struct ReplicateOpts {
  std::string cases = "1,2,3,4,5";
  std::string ar;
  std::string methods = kAllMethods;
  std::size_t reps = 100;
  std::size_t periods = 10;
  std::size_t min_length = 200;
  std::size_t max_length = 400;
  FeatureOpts features;
  DecodeOpts decode;
  std::uint64_t seed = 0;
  std::string table;
  std::string report;
};

void cmd_replicate(const ReplicateOpts& o) {
  const auto methods = parse_methods(o.methods);
  reject_delta_for_many_states(methods, o.decode.k);
  std::vector<ScenarioSpec> specs;
  for (int c : parse_list<int>(o.cases, "--cases")) {
    ScenarioSpec s;
    s.kind = ScenarioKind::Gaussian;
    s.gaussian_case = c;
    specs.push_back(s);
  }
  for (int order : parse_list<int>(o.ar, "--ar")) {
    ScenarioSpec s;
    s.kind = ScenarioKind::AR;
    s.ar_order = order;
    specs.push_back(s);
  }
  if (specs.empty()) throw UsageError("no scenario selected");

  std::ostringstream table;
  table << "scenario";
  for (auto m : methods) table << ',' << to_string(m) << "_mean," << to_string(m) << "_std";
  table << '\n';
  json j;
  j["n_reps"] = o.reps;
  j["seed"] = o.seed;
  json scen = json::object();
  for (auto& spec : specs) {
    spec.n_periods = o.periods;
    spec.period_range = {o.min_length, o.max_length};
    auto config = pipeline_config(o.features, o.decode, methods.front());
    if (spec.kind == ScenarioKind::AR && config.lags == 0) config.lags = static_cast<std::size_t>(spec.ar_order);
    const auto reports = replicate_methods(spec, methods, o.reps, o.seed, config);
    table << spec.name();
    json row = json::object();
    for (std::size_t m = 0; m < methods.size(); ++m) {
      table << ',' << format_real(reports[m].mean, kDigits) << ',' << format_real(reports[m].std, kDigits);
      row[to_string(methods[m])] = report_json(reports[m]);
    }
    table << '\n';
    scen[spec.name()] = std::move(row);
  }
  j["scenarios"] = std::move(scen);
  if (!o.table.empty()) write_text(o.table, table.str());
  emit(o.report, j);
}

struct TailsOpts {
  std::string input;
  std::string labels;
  std::string columns;
  std::string z = "1,2,3";
  std::string report;
  std::string kde_dir;
  std::size_t grid_points = 401;
};

void cmd_tails(const TailsOpts& o) {
  const auto zs = parse_list<double>(o.z, "--z");
  if (zs.empty()) throw UsageError("--z needs at least one value");
  if (o.grid_points < 2) throw ParameterError("--grid-points must be at least 2");
  const auto x = load_csv(o.input, true);
  const auto lf = read_labels(o.labels);
  // Rows of the series that carry a label (a lag-embedded run labels fewer rows).
  std::map<std::string, int> by_time;
  for (std::size_t i = 0; i < lf.times.size(); ++i) by_time.emplace(lf.times[i], lf.labels[i]);
  std::vector<std::size_t> rows;
  std::vector<int> labels;
  for (std::size_t r = 0; r < x.length(); ++r) {
    const auto it = by_time.find(x.time_index[r]);
    if (it == by_time.end()) continue;
    rows.push_back(r);
    labels.push_back(it->second);
  }
  if (rows.size() != lf.times.size()) throw ValidationError("label file has times missing from the series");

  std::vector<std::size_t> cols;
  if (o.columns.empty()) {
    for (std::size_t c = 0; c < x.dims(); ++c) cols.push_back(c);
  } else {
    for (const auto& name : split_list(o.columns)) cols.push_back(resolve_column(x, name));
  }
  if (!o.kde_dir.empty()) fs::create_directories(o.kde_dir);

  json out = json::array();
  for (std::size_t c : cols) {
    std::vector<double> v;
    for (std::size_t r : rows) v.push_back(x.values(r, c));
    json col;
    col["column"] = x.dim_names[c];
    json per_z = json::array();
    for (double z : zs) {
      const auto t = heavy_tailedness(v, labels, z);
      col["sigma"] = rounded(t.sigma);
      col["volatile_state"] = t.volatile_state;
      per_z.push_back({{"z", z}, {"tail_prob", rounded_array(t.tail_prob)}, {"delta", rounded(t.delta)}});
    }
    col["tails"] = std::move(per_z);
    out.push_back(std::move(col));

    if (o.kde_dir.empty()) continue;
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double pad = 0.1 * (*hi - *lo);
    std::vector<double> grid(o.grid_points);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      grid[g] = *lo - pad + (*hi - *lo + 2.0 * pad) * static_cast<double>(g) / static_cast<double>(grid.size() - 1);
    }
    for (int state = 0; state < 2; ++state) {
      std::vector<double> samples;
      for (std::size_t i = 0; i < v.size(); ++i)
        if (labels[i] == state) samples.push_back(v[i]);
      const auto d = gaussian_kde(samples, grid);
      std::ostringstream csv;
      csv << "x,density\n";
      for (std::size_t g = 0; g < grid.size(); ++g) csv << format_real(grid[g], kDigits) << ',' << format_real(d[g], kDigits) << '\n';
      write_text(fs::path(o.kde_dir) / ("kde_" + x.dim_names[c] + "_state" + std::to_string(state) + ".csv"), csv.str());
    }
  }
  emit(o.report, json{{"columns", std::move(out)}});
}

// ---------------------------------------------------------------------------
// ppplot

struct PpOpts {
  std::string input;
  std::string column;
  double alpha = 0.05;
  double beta = 0.95;
  std::optional<double> p;
  std::string out;
};

void cmd_ppplot(const PpOpts& o) {
  check_tail_levels(o.alpha, o.beta);
  const auto x = load_csv(o.input, true);
  const auto e = tail_encode(x.column(resolve_column(x, o.column)), o.alpha, o.beta);
  const auto r = recurrence_times(e);
  // The first and last gaps are cut off by the ends of the series.
  std::vector<std::size_t> interior = r.times;
  if (interior.size() >= 3) interior = std::vector<std::size_t>(r.times.begin() + 1, r.times.end() - 1);
  const double p = o.p ? *o.p : static_cast<double>(e.n_events) / static_cast<double>(e.length());
  if (!(p > 0.0 && p < 1.0)) throw ParameterError("rate p must lie in (0, 1)");
  std::ostringstream csv;
  csv << "empirical,theoretical\n";
  for (const auto& pt : pp_plot_data(interior, p)) {
    csv << format_real(pt.empirical, kDigits) << ',' << format_real(pt.theoretical, kDigits) << '\n';
  }
  write_text(o.out, csv.str());
}

// ---------------------------------------------------------------------------

std::string read_config_value(std::string v) {
  v = trim(v);
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) v = v.substr(1, v.size() - 2);
  return v;
}

// key = value lines turned into --key=value tokens; '#' starts a comment.
std::vector<std::string> config_tokens(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    const std::string key = eq == std::string::npos ? "" : trim(line.substr(0, eq));
    if (key.empty()) throw UsageError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    tokens.push_back("--" + key + "=" + read_config_value(line.substr(eq + 1)));
  }
  return tokens;
}

// Config entries go right after the subcommand names, ahead of the command
// line flags, so that flags given later take precedence.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file");
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].starts_with("--config=")) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!path) return args;
  std::size_t at = 0;
  while (at < args.size() && at < 2 && !args[at].starts_with("-")) ++at;
  const auto tokens = config_tokens(*path);
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(at), tokens.begin(), tokens.end());
  return args;
}

int report_error(const std::string& kind, const std::string& what, int code) {
  std::cerr << "regseg: " << kind << ": " << what << '\n';
  return code;
}

}  // namespace

int run(const std::vector<std::string>& raw_args) {
  CLI::App app{"Regime segmentation from recurrence times of extreme events", "regseg"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");
  app.footer("Any subcommand accepts --config FILE with key = value lines; flags override it.");

  SimulateOpts sim;
  auto* s = app.add_subcommand("simulate", "Simulate a labelled regime-switching series");
  s->add_option("--case", sim.gaussian_case, "Bivariate Gaussian case 1..5");
  s->add_option("--ar", sim.ar_order, "Switching AR order 1 or 2");
  s->add_option("--sigma", sim.sigma, "Per-state sd of a univariate normal series, e.g. 1,1.5");
  s->add_option("--periods", sim.periods, "Number of alternating periods")->capture_default_str();
  s->add_option("--min-length", sim.min_length, "Shortest period")->capture_default_str();
  s->add_option("--max-length", sim.max_length, "Longest period")->capture_default_str();
  s->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  s->add_option("--out", sim.out, "Series CSV")->required();
  s->add_option("--truth", sim.truth, "True labels CSV")->required();

  SegmentOpts seg;
  auto* g = app.add_subcommand("segment", "Two-state segmentation of one column from its tail events");
  g->add_option("--input", seg.input, "Series CSV")->required()->check(CLI::ExistingFile);
  g->add_option("--column", seg.column, "Value column name (default: the first)");
  g->add_option("--alpha", seg.alpha, "Lower tail level")->capture_default_str();
  g->add_option("--beta", seg.beta, "Upper quantile level")->capture_default_str();
  add_hfs_options(g, seg.hfs);
  g->add_option("--out", seg.out, "Segmentation CSV (time,label)")->required();
  g->add_option("--report", seg.report, "Fit report JSON");

  ExtractOpts ex;
  auto* e = app.add_subcommand("extract-features", "Ball features: one emission-rate column per ball");
  e->add_option("--input", ex.input, "Series CSV")->required()->check(CLI::ExistingFile);
  add_feature_options(e, ex.features);
  e->add_option("--seed", ex.seed, "Random seed")->capture_default_str();
  e->add_option("--out", ex.out, "Feature matrix CSV (N rows, V columns)")->required();
  e->add_option("--balls-out", ex.balls_out, "Ball membership JSON (0-based row indices)")->required();

  DecodeCmdOpts dec;
  auto* d = app.add_subcommand("decode", "Feature-weighted K-Means on the feature matrix");
  d->add_option("--features", dec.features, "Feature matrix CSV")->required()->check(CLI::ExistingFile);
  d->add_option("--balls", dec.balls, "Ball membership JSON")->required()->check(CLI::ExistingFile);
  add_decode_options(d, dec.decode, true);
  d->add_option("--seed", dec.seed, "Random seed")->capture_default_str();
  d->add_option("--out", dec.out, "Segmentation CSV (time,label)")->required();
  d->add_option("--weights", dec.weights, "Final weights CSV");
  d->add_option("--trace", dec.trace, "Iteration trace JSON");

  auto* ev = app.add_subcommand("evaluate", "Accuracy, replication tables and tail statistics");
  ev->require_subcommand(1);

  AccuracyOpts acc;
  auto* ea = ev->add_subcommand("accuracy", "Score labels against the truth, or run the pipeline and score it");
  ea->add_option("--labels", acc.labels, "Segmentation CSV to score")->check(CLI::ExistingFile);
  ea->add_option("--input", acc.input, "Series CSV to segment and score")->check(CLI::ExistingFile);
  ea->add_option("--truth", acc.truth, "True labels CSV")->required()->check(CLI::ExistingFile);
  ea->add_option("--methods", acc.methods, "Weighting methods, comma separated")->capture_default_str();
  add_feature_options(ea, acc.features);
  add_decode_options(ea, acc.decode, false);
  ea->add_option("--seed", acc.seed, "Random seed")->capture_default_str();
  ea->add_option("--report", acc.report, "Accuracy JSON (default: stdout)");

  ReplicateOpts rep;
  auto* er = ev->add_subcommand("replicate", "Seeded replications over simulated scenarios");
  er->add_option("--cases", rep.cases, "Gaussian cases, comma separated (empty for none)")->capture_default_str();
  er->add_option("--ar", rep.ar, "AR orders, comma separated");
  er->add_option("--methods", rep.methods, "Weighting methods, comma separated")->capture_default_str();
  er->add_option("--reps", rep.reps, "Replications per scenario")->capture_default_str();
  er->add_option("--periods", rep.periods, "Periods per simulated series")->capture_default_str();
  er->add_option("--min-length", rep.min_length, "Shortest period")->capture_default_str();
  er->add_option("--max-length", rep.max_length, "Longest period")->capture_default_str();
  add_feature_options(er, rep.features);
  add_decode_options(er, rep.decode, false);
  er->add_option("--seed", rep.seed, "Random seed")->capture_default_str();
  er->add_option("--table", rep.table, "Accuracy table CSV (rows scenarios, columns methods)");
  er->add_option("--report", rep.report, "Per-replication JSON (default: stdout)");

  TailsOpts tails;
  auto* et = ev->add_subcommand("tails", "Per-state tail probabilities and kernel densities");
  et->add_option("--input", tails.input, "Series CSV")->required()->check(CLI::ExistingFile);
  et->add_option("--labels", tails.labels, "Segmentation CSV")->required()->check(CLI::ExistingFile);
  et->add_option("--columns", tails.columns, "Columns, comma separated (default: all)");
  et->add_option("--z", tails.z, "Standard-deviation multiples, comma separated")->capture_default_str();
  et->add_option("--report", tails.report, "Tail JSON (default: stdout)");
  et->add_option("--kde-dir", tails.kde_dir, "Directory for per-state density CSVs");
  et->add_option("--grid-points", tails.grid_points, "Density grid size")->capture_default_str();

  PpOpts pp;
  auto* p = app.add_subcommand("ppplot", "P-P pairs of interior recurrence times against a geometric law");
  p->add_option("--input", pp.input, "Series CSV")->required()->check(CLI::ExistingFile);
  p->add_option("--column", pp.column, "Value column name (default: the first)");
  p->add_option("--alpha", pp.alpha, "Lower tail level")->capture_default_str();
  p->add_option("--beta", pp.beta, "Upper quantile level")->capture_default_str();
  p->add_option("--p", pp.p, "Geometric rate (default: events / N)");
  p->add_option("--out", pp.out, "P-P CSV (empirical,theoretical)")->required();

  try {
    auto args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const Error& err) {
    return report_error("usage error", err.what(), kExitUsage);
  }

  try {
    if (s->parsed()) cmd_simulate(sim);
    else if (g->parsed()) cmd_segment(seg);
    else if (e->parsed()) cmd_extract(ex);
    else if (d->parsed()) cmd_decode(dec);
    else if (ea->parsed()) cmd_accuracy(acc);
    else if (er->parsed()) cmd_replicate(rep);
    else if (et->parsed()) cmd_tails(tails);
    else if (p->parsed()) cmd_ppplot(pp);
  } catch (const UsageError& err) {
    return report_error("usage error", err.what(), kExitUsage);
  } catch (const ParameterError& err) {
    return report_error("usage error", err.what(), kExitUsage);
  } catch (const std::exception& err) {
    return report_error("error", err.what(), kExitFailure);
  }
  return kExitOk;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace regseg::cli
