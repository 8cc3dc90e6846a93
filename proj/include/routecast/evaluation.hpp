#pragma once

// Prediction scoring.
//
// Each target's ranked predictions pass two filters in a fixed order:
// structural validity (parseable route rooted at the queried target), then
// the task constraints (stock termination). Top-K is measured on what is
// left, keeping the model's own order. STR is measured on the structurally
// valid pool.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "routecast/benchmark.hpp"
#include "routecast/error.hpp"
#include "routecast/mgt.hpp"
#include "routecast/route.hpp"
#include "routecast/statistics.hpp"
#include "routecast/stock.hpp"

namespace routecast {

// One raw model output: a route, or the reason it could not be built.
struct RawPrediction {
  std::optional<Route> route;
  ErrorCode error = ErrorCode::ValidationError;
  std::string message;

  static RawPrediction ok(Route r) { return {std::move(r), {}, {}}; }
  static RawPrediction failed(ErrorCode code, std::string msg = {}) {
    return {std::nullopt, code, std::move(msg)};
  }
};

struct RankedRoute {
  int rank = 0; // 1-based position in the raw output
  Route route;
};

struct Rejection {
  int rank = 0;
  std::string reason;

  friend bool operator==(const Rejection &, const Rejection &) = default;
};

enum class FilterStage { None, Structural, Constraint };

struct FilterTrace {
  int n_raw = 0;
  int n_structurally_valid = 0;
  int n_constraint_valid = 0;
  std::vector<Rejection> rejected;
  FilterStage stage = FilterStage::None;

  friend bool operator==(const FilterTrace &, const FilterTrace &) = default;
};

struct FilteredRoutes {
  std::vector<RankedRoute> routes;
  FilterTrace trace;
};

FilteredRoutes structural_filter(const std::vector<RawPrediction> &raw,
                                 std::string_view target);

struct Constraint {
  std::string name;
  std::function<bool(const Route &)> check;
};

Constraint stock_termination_constraint(const StockSet &stock);

// Requires the output of structural_filter; throws
// Error(InvalidArtifact) when handed an unfiltered pool.
FilteredRoutes constraint_filter(FilteredRoutes structural,
                                 const std::vector<Constraint> &constraints);

// structural_filter followed by constraint_filter.
FilteredRoutes filter_predictions(const std::vector<RawPrediction> &raw,
                                  std::string_view target,
                                  const std::vector<Constraint> &constraints);

struct TopKResult {
  bool hit = false;
  std::optional<int> first_match_rank; // over the whole filtered list
};

std::optional<int> first_match_rank(const std::vector<RankedRoute> &filtered,
                                    const GroundTruthSet &gts);
TopKResult topk_accuracy(const std::vector<RankedRoute> &filtered,
                         const GroundTruthSet &gts, int k);

bool str_metric(const std::vector<RankedRoute> &structural,
                const StockSet &stock);

// Ranked predictions for one model, keyed by benchmark target id.
struct PredictionSet {
  std::string model_id;
  std::map<std::string, std::vector<RawPrediction>> by_target;
};

// Interchange records carrying metadata `target_id` and `rank` (contiguous
// from 1 within a target). Records whose route is invalid are kept as
// failed predictions. Throws ParseError(SchemaError) on missing/duplicate
// ranks.
PredictionSet load_predictions(std::string_view interchange,
                               std::string model_id);

// "target_id,wall_seconds" lines; an optional header line is skipped.
std::map<std::string, double> parse_timing(std::string_view text);

struct CostSummary {
  std::size_t n_targets = 0;
  double seconds_per_target = 0.0;
  double rate_usd_per_hour = 0.0;
  double total_usd = 0.0;

  friend bool operator==(const CostSummary &, const CostSummary &) = default;
};

CostSummary cost_summary(std::size_t n_targets, double seconds_per_target,
                         double rate_usd_per_hour);

struct TargetResult {
  std::string target_id;
  bool stock_terminated = false;
  std::optional<int> first_match_rank;
  RouteStats strata; // of the reference route
  std::optional<double> wall_seconds;
  FilterTrace filter_trace;
  bool missing_predictions = false;

  bool top_k(int k) const noexcept {
    return first_match_rank && *first_match_rank <= k;
  }

  friend bool operator==(const TargetResult &, const TargetResult &) = default;
};

struct MetricSummary {
  double mean = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  bool reliable = false;
  std::size_t n = 0;

  friend bool operator==(const MetricSummary &,
                         const MetricSummary &) = default;
};

using MetricTable = std::map<std::string, MetricSummary>;

enum class GroundTruthMode { Multi, Single };

struct EvalOptions {
  std::vector<int> k_values{1, 10};
  std::uint64_t stats_seed = 0;
  int resamples = kDefaultResamples;
  GroundTruthMode mode = GroundTruthMode::Multi;
  std::map<std::string, double> timing;   // target_id -> seconds
  std::optional<double> rate_usd_per_hour; // enables the cost summary
};

struct BenchmarkReport {
  std::string benchmark_id;
  std::string model_id;
  GroundTruthMode mode = GroundTruthMode::Multi;
  std::vector<int> k_values;
  std::uint64_t stats_seed = 0;
  int resamples = 0;
  std::vector<TargetResult> per_target;
  MetricTable aggregates;
  std::map<std::string, MetricTable> stratified; // "length=3", "topology=linear"
  std::optional<CostSummary> cost;
  std::vector<std::string> warnings;

  friend bool operator==(const BenchmarkReport &,
                         const BenchmarkReport &) = default;
};

// "str", "top1", "top10", ...
std::vector<std::string> metric_names(const std::vector<int> &k_values);
// 0/1 outcome per target for a metric name. Throws Error(InvalidArtifact)
// for unknown names.
std::vector<double> metric_outcomes(const std::vector<TargetResult> &results,
                                    std::string_view metric);

// Per-target scoring without statistics.
std::vector<TargetResult> evaluate_targets(const BenchmarkDefinition &benchmark,
                                           const PredictionSet &predictions,
                                           const StockSet &stock,
                                           const EvalOptions &options,
                                           std::vector<std::string> *warnings);

// Aggregate and stratified tables. Each stratum ("all", "length=3", ...)
// bootstraps from its own sub-seed of stats_seed, shared by every metric.
void compute_aggregates(BenchmarkReport &report);

BenchmarkReport evaluate_benchmark(const BenchmarkDefinition &benchmark,
                                   const PredictionSet &predictions,
                                   const StockSet &stock,
                                   const EvalOptions &options);

nlohmann::json report_to_json(const BenchmarkReport &report);
BenchmarkReport report_from_json(const nlohmann::json &j);

// Cost/accuracy points for plotting; `on_frontier` marks points no other
// point dominates (higher accuracy at no greater cost).
struct ParetoPoint {
  std::string model_id;
  std::string benchmark_id;
  std::string metric;
  double accuracy = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double total_usd = 0.0;
  bool on_frontier = false;
};

std::vector<ParetoPoint> pareto_points(const std::vector<BenchmarkReport> &reports,
                                       std::string_view metric);

// Outcomes of two reports aligned by target id. Throws
// Error(LengthMismatch) when the target sets differ.
PairedDiffResult compare_reports(const BenchmarkReport &a,
                                 const BenchmarkReport &b,
                                 std::string_view metric, std::uint64_t seed,
                                 int resamples = kDefaultResamples);

} // namespace routecast
