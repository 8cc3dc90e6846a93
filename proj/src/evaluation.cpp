#include "routecast/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <tuple>

#include "routecast/adapters.hpp"
#include "routecast/rng.hpp"

namespace routecast {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::optional<long long> to_integer(std::string_view s) {
  s = trim(s);
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    return std::nullopt;
  return v;
}

std::optional<double> to_number(std::string_view s) {
  s = trim(s);
  if (s.empty())
    return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(std::string(s), &used);
    if (used != s.size() || !std::isfinite(v))
      return std::nullopt;
    return v;
  } catch (const std::exception &) {
    return std::nullopt;
  }
}

std::string_view mode_name(GroundTruthMode m) {
  return m == GroundTruthMode::Multi ? "multi" : "single";
}

GroundTruthMode mode_from(std::string_view s) {
  if (s == "multi")
    return GroundTruthMode::Multi;
  if (s == "single")
    return GroundTruthMode::Single;
  throw Error(ErrorCode::InvalidArtifact,
              "unknown ground-truth mode '" + std::string(s) + "'");
}

json summary_json(const MetricSummary &m) {
  return {{"mean", m.mean},     {"ci_lo", m.ci_lo}, {"ci_hi", m.ci_hi},
          {"reliable", m.reliable}, {"n", m.n}};
}

MetricSummary summary_from(const json &j) {
  return {j.at("mean").get<double>(), j.at("ci_lo").get<double>(),
          j.at("ci_hi").get<double>(), j.at("reliable").get<bool>(),
          j.at("n").get<std::size_t>()};
}

json table_json(const MetricTable &t) {
  json out = json::object();
  for (const auto &[k, v] : t)
    out[k] = summary_json(v);
  return out;
}

MetricTable table_from(const json &j) {
  MetricTable t;
  for (const auto &[k, v] : j.items())
    t[k] = summary_from(v);
  return t;
}

MetricSummary summarize(const std::vector<double> &outcomes, int resamples,
                        std::uint64_t seed) {
  const auto ci = bootstrap_ci(outcomes, resamples, seed);
  return {ci.mean, ci.lo, ci.hi, ci.reliable, ci.n};
}

} // namespace

FilteredRoutes structural_filter(const std::vector<RawPrediction> &raw,
                                 std::string_view target) {
  FilteredRoutes out;
  out.trace.n_raw = static_cast<int>(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const int rank = static_cast<int>(i) + 1;
    const auto &p = raw[i];
    if (!p.route)
      out.trace.rejected.push_back({rank, std::string(to_string(p.error))});
    else if (p.route->target() != target)
      out.trace.rejected.push_back(
          {rank, std::string(to_string(ErrorCode::TargetMismatch))});
    else if (p.route->is_degenerate())
      out.trace.rejected.push_back({rank, "DegenerateRoute"});
    else
      out.routes.push_back({rank, *p.route});
  }
  out.trace.n_structurally_valid = static_cast<int>(out.routes.size());
  out.trace.n_constraint_valid = out.trace.n_structurally_valid;
  out.trace.stage = FilterStage::Structural;
  return out;
}

Constraint stock_termination_constraint(const StockSet &stock) {
  return {"stock-termination",
          [&stock](const Route &r) { return is_stock_terminated(r, stock); }};
}

FilteredRoutes constraint_filter(FilteredRoutes structural,
                                 const std::vector<Constraint> &constraints) {
  if (structural.trace.stage != FilterStage::Structural)
    throw Error(ErrorCode::InvalidArtifact,
                "constraint filtering requires a structurally filtered pool");
  std::vector<RankedRoute> kept;
  for (auto &r : structural.routes) {
    const auto failed =
        std::find_if(constraints.begin(), constraints.end(),
                     [&](const Constraint &c) { return !c.check(r.route); });
    if (failed == constraints.end())
      kept.push_back(std::move(r));
    else
      structural.trace.rejected.push_back({r.rank, failed->name});
  }
  std::sort(structural.trace.rejected.begin(), structural.trace.rejected.end(),
            [](const Rejection &a, const Rejection &b) { return a.rank < b.rank; });
  structural.routes = std::move(kept);
  structural.trace.n_constraint_valid =
      static_cast<int>(structural.routes.size());
  structural.trace.stage = FilterStage::Constraint;
  return structural;
}

FilteredRoutes filter_predictions(const std::vector<RawPrediction> &raw,
                                  std::string_view target,
                                  const std::vector<Constraint> &constraints) {
  return constraint_filter(structural_filter(raw, target), constraints);
}

std::optional<int> first_match_rank(const std::vector<RankedRoute> &filtered,
                                    const GroundTruthSet &gts) {
  for (std::size_t i = 0; i < filtered.size(); ++i)
    if (gts.contains(canonical_key(filtered[i].route)))
      return static_cast<int>(i) + 1;
  return std::nullopt;
}

TopKResult topk_accuracy(const std::vector<RankedRoute> &filtered,
                         const GroundTruthSet &gts, int k) {
  TopKResult r;
  r.first_match_rank = first_match_rank(filtered, gts);
  r.hit = r.first_match_rank && *r.first_match_rank <= k;
  return r;
}

bool str_metric(const std::vector<RankedRoute> &structural,
                const StockSet &stock) {
  return std::any_of(structural.begin(), structural.end(),
                     [&](const RankedRoute &r) {
                       return is_stock_terminated(r.route, stock);
                     });
}

PredictionSet load_predictions(std::string_view interchange,
                               std::string model_id) {
  const auto records = read_interchange_records(interchange);
  std::map<std::string, std::map<long long, RawPrediction>> grouped;
  for (const auto &rec : records) {
    const auto tid = rec.metadata.find("target_id");
    if (tid == rec.metadata.end() || tid->second.empty())
      throw ParseError(ErrorCode::SchemaError,
                       "prediction record lacks metadata 'target_id'", rec.line);
    const auto rk = rec.metadata.find("rank");
    const auto rank =
        rk == rec.metadata.end() ? std::nullopt : to_integer(rk->second);
    if (!rank || *rank < 1)
      throw ParseError(ErrorCode::SchemaError,
                       "prediction record lacks a positive integer 'rank'",
                       rec.line);
    if (model_id.empty())
      if (const auto m = rec.metadata.find("model_id"); m != rec.metadata.end())
        model_id = m->second;
    auto pred = rec.route ? RawPrediction::ok(*rec.route)
                          : RawPrediction::failed(rec.error, rec.message);
    if (!grouped[tid->second].emplace(*rank, std::move(pred)).second)
      throw ParseError(ErrorCode::SchemaError,
                       "duplicate rank " + std::to_string(*rank) +
                           " for target '" + tid->second + "'",
                       rec.line);
  }

  PredictionSet set;
  set.model_id = model_id.empty() ? "unnamed" : model_id;
  for (auto &[tid, ranked] : grouped) {
    long long expect = 1;
    auto &list = set.by_target[tid];
    for (auto &[rank, pred] : ranked) {
      if (rank != expect)
        throw ParseError(ErrorCode::SchemaError,
                         "ranks for target '" + tid +
                             "' are not contiguous from 1 (missing " +
                             std::to_string(expect) + ")");
      list.push_back(std::move(pred));
      ++expect;
    }
  }
  return set;
}

std::map<std::string, double> parse_timing(std::string_view text) {
  std::map<std::string, double> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos)
      nl = text.size();
    const auto line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty() || line.front() == '#')
      continue;
    const auto comma = line.find(',');
    if (comma == std::string_view::npos)
      throw ParseError(ErrorCode::SyntaxError,
                       "expected 'target_id,wall_seconds'", line_no);
    const auto id = trim(line.substr(0, comma));
    const auto secs = to_number(line.substr(comma + 1));
    if (!secs) {
      if (out.empty() && id == "target_id")
        continue; // header
      throw ParseError(ErrorCode::SyntaxError, "wall_seconds is not a number",
                       line_no, comma + 2);
    }
    if (*secs < 0)
      throw ParseError(ErrorCode::SchemaError, "wall_seconds is negative",
                       line_no, comma + 2);
    out[std::string(id)] = *secs;
  }
  return out;
}

CostSummary cost_summary(std::size_t n_targets, double seconds_per_target,
                         double rate_usd_per_hour) {
  if (seconds_per_target < 0 || rate_usd_per_hour < 0)
    throw Error(ErrorCode::DegenerateInput, "cost inputs must be non-negative");
  return {n_targets, seconds_per_target, rate_usd_per_hour,
          seconds_per_target * static_cast<double>(n_targets) *
              rate_usd_per_hour / 3600.0};
}

std::vector<std::string> metric_names(const std::vector<int> &k_values) {
  std::vector<std::string> out{"str"};
  for (int k : k_values)
    out.push_back("top" + std::to_string(k));
  return out;
}

std::vector<double> metric_outcomes(const std::vector<TargetResult> &results,
                                    std::string_view metric) {
  std::vector<double> out;
  out.reserve(results.size());
  if (metric == "str") {
    for (const auto &r : results)
      out.push_back(r.stock_terminated ? 1.0 : 0.0);
    return out;
  }
  const auto k = metric.starts_with("top") ? to_integer(metric.substr(3))
                                           : std::nullopt;
  if (!k || *k < 1)
    throw Error(ErrorCode::InvalidArtifact,
                "unknown metric '" + std::string(metric) + "'");
  for (const auto &r : results)
    out.push_back(r.top_k(static_cast<int>(*k)) ? 1.0 : 0.0);
  return out;
}

std::vector<TargetResult> evaluate_targets(const BenchmarkDefinition &benchmark,
                                           const PredictionSet &predictions,
                                           const StockSet &stock,
                                           const EvalOptions &options,
                                           std::vector<std::string> *warnings) {
  const std::vector<Constraint> constraints{stock_termination_constraint(stock)};
  const std::vector<RawPrediction> none;
  std::vector<std::string> missing;
  std::vector<TargetResult> out;
  out.reserve(benchmark.targets.size());

  for (const auto &t : benchmark.targets) {
    TargetResult r;
    r.target_id = t.target_id;
    r.strata = t.stats;
    const auto it = predictions.by_target.find(t.target_id);
    r.missing_predictions = it == predictions.by_target.end();
    if (r.missing_predictions)
      missing.push_back(t.target_id);
    const auto &raw = r.missing_predictions ? none : it->second;

    auto structural = structural_filter(raw, t.reference.target());
    r.stock_terminated = str_metric(structural.routes, stock);
    const auto filtered = constraint_filter(std::move(structural), constraints);
    r.first_match_rank =
        options.mode == GroundTruthMode::Multi
            ? first_match_rank(filtered.routes, t.ground_truth)
            : first_match_rank(filtered.routes, single_ground_truth(t.reference));
    r.filter_trace = filtered.trace;
    if (const auto w = options.timing.find(t.target_id);
        w != options.timing.end())
      r.wall_seconds = w->second;
    out.push_back(std::move(r));
  }

  if (warnings) {
    if (!missing.empty()) {
      std::string msg = std::string(to_string(ErrorCode::BenchmarkPredictionMismatch)) +
                        ": " + std::to_string(missing.size()) +
                        " target(s) without predictions, scored as failures:";
      for (const auto &m : missing)
        msg += " " + m;
      warnings->push_back(std::move(msg));
    }
    std::vector<std::string> extra;
    for (const auto &[tid, _] : predictions.by_target)
      if (!benchmark.find(tid))
        extra.push_back(tid);
    if (!extra.empty()) {
      std::string msg = std::string(to_string(ErrorCode::BenchmarkPredictionMismatch)) +
                        ": " + std::to_string(extra.size()) +
                        " predicted target(s) not in the benchmark, ignored:";
      for (const auto &e : extra)
        msg += " " + e;
      warnings->push_back(std::move(msg));
    }
  }
  return out;
}

void compute_aggregates(BenchmarkReport &report) {
  report.aggregates.clear();
  report.stratified.clear();
  if (report.per_target.empty())
    return;
  // One sub-seed per stratum, shared by its metrics: every metric sees the
  // same resampled target sets, so equal outcome vectors give equal CIs.
  const auto metrics = metric_names(report.k_values);
  const auto all_seed = derive_seed(report.stats_seed, "all");
  for (const auto &m : metrics)
    report.aggregates[m] = summarize(metric_outcomes(report.per_target, m),
                                     report.resamples, all_seed);

  std::map<std::string, std::vector<TargetResult>> strata;
  for (const auto &r : report.per_target) {
    strata["length=" + std::to_string(r.strata.length)].push_back(r);
    strata["topology=" + std::string(to_string(r.strata.topology))].push_back(r);
  }
  for (const auto &[name, rows] : strata) {
    const auto seed = derive_seed(report.stats_seed, name);
    for (const auto &m : metrics)
      report.stratified[name][m] =
          summarize(metric_outcomes(rows, m), report.resamples, seed);
  }
}

BenchmarkReport evaluate_benchmark(const BenchmarkDefinition &benchmark,
                                   const PredictionSet &predictions,
                                   const StockSet &stock,
                                   const EvalOptions &options) {
  if (options.resamples < 1)
    throw Error(ErrorCode::DegenerateInput, "resamples must be at least 1");
  for (int k : options.k_values)
    if (k < 1)
      throw Error(ErrorCode::DegenerateInput, "k values must be at least 1");

  BenchmarkReport report;
  report.benchmark_id = benchmark.id;
  report.model_id = predictions.model_id;
  report.mode = options.mode;
  report.k_values = options.k_values;
  std::sort(report.k_values.begin(), report.k_values.end());
  report.k_values.erase(std::unique(report.k_values.begin(), report.k_values.end()),
                        report.k_values.end());
  report.stats_seed = options.stats_seed;
  report.resamples = options.resamples;

  if (benchmark.stock.sha256 != stock.content_hash())
    report.warnings.push_back("stock digest differs from the benchmark's stock (" +
                              benchmark.stock.sha256 + ")");
  report.per_target =
      evaluate_targets(benchmark, predictions, stock, options, &report.warnings);
  if (report.per_target.empty())
    report.warnings.push_back("benchmark has no targets; aggregates omitted");
  compute_aggregates(report);

  if (options.rate_usd_per_hour) {
    double total = 0.0;
    std::size_t timed = 0;
    for (const auto &r : report.per_target)
      if (r.wall_seconds) {
        total += *r.wall_seconds;
        ++timed;
      }
    if (timed < report.per_target.size())
      report.warnings.push_back(
          std::to_string(report.per_target.size() - timed) +
          " target(s) lack timing; seconds per target averages the rest");
    const double spt = timed ? total / static_cast<double>(timed) : 0.0;
    report.cost =
        cost_summary(report.per_target.size(), spt, *options.rate_usd_per_hour);
  }
  return report;
}

json report_to_json(const BenchmarkReport &report) {
  json rows = json::array();
  for (const auto &r : report.per_target) {
    json rejected = json::array();
    for (const auto &x : r.filter_trace.rejected)
      rejected.push_back({{"rank", x.rank}, {"reason", x.reason}});
    rows.push_back({
        {"target_id", r.target_id},
        {"stock_terminated", r.stock_terminated},
        {"first_match_rank",
         r.first_match_rank ? json(*r.first_match_rank) : json(nullptr)},
        {"strata",
         {{"length", r.strata.length},
          {"topology", std::string(to_string(r.strata.topology))},
          {"n_steps", r.strata.n_steps},
          {"n_leaves", r.strata.n_leaves}}},
        {"wall_seconds", r.wall_seconds ? json(*r.wall_seconds) : json(nullptr)},
        {"filter_trace",
         {{"n_raw", r.filter_trace.n_raw},
          {"n_structurally_valid", r.filter_trace.n_structurally_valid},
          {"n_constraint_valid", r.filter_trace.n_constraint_valid},
          {"rejected", std::move(rejected)}}},
        {"missing_predictions", r.missing_predictions},
    });
  }
  json stratified = json::object();
  for (const auto &[k, t] : report.stratified)
    stratified[k] = table_json(t);
  json cost = nullptr;
  if (report.cost)
    cost = {{"n_targets", report.cost->n_targets},
            {"seconds_per_target", report.cost->seconds_per_target},
            {"rate_usd_per_hour", report.cost->rate_usd_per_hour},
            {"total_usd", report.cost->total_usd}};
  return {
      {"benchmark_id", report.benchmark_id},
      {"model_id", report.model_id},
      {"ground_truth", std::string(mode_name(report.mode))},
      {"k_values", report.k_values},
      {"stats_seed", report.stats_seed},
      {"resamples", report.resamples},
      {"per_target", std::move(rows)},
      {"aggregates", table_json(report.aggregates)},
      {"stratified", std::move(stratified)},
      {"cost", std::move(cost)},
      {"warnings", report.warnings},
  };
}

BenchmarkReport report_from_json(const json &j) {
  try {
    BenchmarkReport report;
    report.benchmark_id = j.at("benchmark_id").get<std::string>();
    report.model_id = j.at("model_id").get<std::string>();
    report.mode = mode_from(j.at("ground_truth").get<std::string>());
    report.k_values = j.at("k_values").get<std::vector<int>>();
    report.stats_seed = j.at("stats_seed").get<std::uint64_t>();
    report.resamples = j.at("resamples").get<int>();
    for (const auto &row : j.at("per_target")) {
      TargetResult r;
      r.target_id = row.at("target_id").get<std::string>();
      r.stock_terminated = row.at("stock_terminated").get<bool>();
      if (!row.at("first_match_rank").is_null())
        r.first_match_rank = row.at("first_match_rank").get<int>();
      const auto &s = row.at("strata");
      r.strata = {s.at("length").get<int>(),
                  topology_from_string(s.at("topology").get<std::string>()),
                  s.at("n_steps").get<int>(), s.at("n_leaves").get<int>()};
      if (!row.at("wall_seconds").is_null())
        r.wall_seconds = row.at("wall_seconds").get<double>();
      const auto &ft = row.at("filter_trace");
      r.filter_trace.n_raw = ft.at("n_raw").get<int>();
      r.filter_trace.n_structurally_valid =
          ft.at("n_structurally_valid").get<int>();
      r.filter_trace.n_constraint_valid = ft.at("n_constraint_valid").get<int>();
      for (const auto &x : ft.at("rejected"))
        r.filter_trace.rejected.push_back(
            {x.at("rank").get<int>(), x.at("reason").get<std::string>()});
      r.filter_trace.stage = FilterStage::Constraint;
      r.missing_predictions = row.at("missing_predictions").get<bool>();
      report.per_target.push_back(std::move(r));
    }
    report.aggregates = table_from(j.at("aggregates"));
    for (const auto &[k, t] : j.at("stratified").items())
      report.stratified[k] = table_from(t);
    if (const auto &c = j.at("cost"); !c.is_null())
      report.cost = CostSummary{c.at("n_targets").get<std::size_t>(),
                                c.at("seconds_per_target").get<double>(),
                                c.at("rate_usd_per_hour").get<double>(),
                                c.at("total_usd").get<double>()};
    report.warnings = j.at("warnings").get<std::vector<std::string>>();
    return report;
  } catch (const json::exception &e) {
    throw Error(ErrorCode::InvalidArtifact,
                std::string("malformed report: ") + e.what());
  } catch (const Error &e) {
    if (e.code() == ErrorCode::InvalidArtifact)
      throw;
    throw Error(ErrorCode::InvalidArtifact,
                std::string("malformed report: ") + e.what());
  }
}

std::vector<ParetoPoint> pareto_points(const std::vector<BenchmarkReport> &reports,
                                       std::string_view metric) {
  std::vector<ParetoPoint> out;
  for (const auto &r : reports) {
    const auto a = r.aggregates.find(std::string(metric));
    if (!r.cost || a == r.aggregates.end())
      continue;
    out.push_back({r.model_id, r.benchmark_id, std::string(metric), a->second.mean,
                   a->second.ci_lo, a->second.ci_hi, r.cost->total_usd, false});
  }
  for (auto &p : out) {
    p.on_frontier = std::none_of(out.begin(), out.end(), [&](const ParetoPoint &q) {
      return q.benchmark_id == p.benchmark_id && q.accuracy >= p.accuracy &&
             q.total_usd <= p.total_usd &&
             (q.accuracy > p.accuracy || q.total_usd < p.total_usd);
    });
  }
  std::sort(out.begin(), out.end(), [](const ParetoPoint &a, const ParetoPoint &b) {
    return std::tie(a.benchmark_id, a.total_usd, a.model_id) <
           std::tie(b.benchmark_id, b.total_usd, b.model_id);
  });
  return out;
}

PairedDiffResult compare_reports(const BenchmarkReport &a,
                                 const BenchmarkReport &b,
                                 std::string_view metric, std::uint64_t seed,
                                 int resamples) {
  std::map<std::string, std::size_t> index_b;
  for (std::size_t i = 0; i < b.per_target.size(); ++i)
    index_b[b.per_target[i].target_id] = i;
  if (index_b.size() != a.per_target.size())
    throw Error(ErrorCode::LengthMismatch,
                "reports cover different numbers of targets (" +
                    std::to_string(a.per_target.size()) + " vs " +
                    std::to_string(b.per_target.size()) + ")");
  std::vector<TargetResult> aligned;
  aligned.reserve(a.per_target.size());
  for (const auto &r : a.per_target) {
    const auto it = index_b.find(r.target_id);
    if (it == index_b.end())
      throw Error(ErrorCode::LengthMismatch,
                  "target '" + r.target_id + "' missing from the second report");
    aligned.push_back(b.per_target[it->second]);
  }
  return paired_diff(metric_outcomes(a.per_target, metric),
                     metric_outcomes(aligned, metric), resamples, seed);
}

} // namespace routecast
