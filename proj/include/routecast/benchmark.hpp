#pragma once

// Stratified benchmark construction.
//
// Reference routes are bucketed by (length range, topology), sampled without
// replacement with a seeded stream per bucket, and frozen together with
// their expanded ground-truth keys into a definition file that can be
// re-verified against the stock at load time.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "routecast/mgt.hpp"
#include "routecast/route.hpp"
#include "routecast/stock.hpp"

namespace routecast {

struct StrataBucket {
  int min_length = 1;
  int max_length = 1;
  std::optional<Topology> topology; // nullopt: any
  int n_samples = 1;

  bool matches(const RouteStats &stats) const noexcept;
  // e.g. "len2-2/linear", "len8-10/any"
  std::string label() const;

  friend bool operator==(const StrataBucket &, const StrataBucket &) = default;
};

struct StrataSpec {
  std::string name;
  std::vector<StrataBucket> buckets;

  std::size_t total_samples() const noexcept;

  friend bool operator==(const StrataSpec &, const StrataSpec &) = default;
};

// Throws Error(InvalidStrataSpec) for empty specs, bad ranges, n_samples < 1
// or overlapping buckets.
void validate_strata(const StrataSpec &spec);

// Text form: comma-separated `min-max:topology:n` (topology is linear,
// convergent or any; `len` alone stands for `len-len`).
StrataSpec parse_strata(std::string_view text);
std::string format_strata(const StrataSpec &spec);

// mkt-lin-500, mkt-cnv-160, ref-lin-600, ref-cnv-400, ref-lng-84. One bucket
// per route length so every length category gets an equal share.
StrataSpec strata_preset(std::string_view name);
std::vector<std::string> strata_preset_names();

struct SampledRoute {
  std::size_t pool_index = 0;
  std::size_t bucket = 0;
  Route route;
};

// Output is ordered by (bucket, pool index). Throws Error(InsufficientPool)
// naming the first bucket that cannot be filled.
std::vector<SampledRoute> stratified_sample(const std::vector<Route> &pool,
                                            const StrataSpec &spec,
                                            std::uint64_t seed);

// (stock-termination rate, top-1, top-10) of the reference model on one
// candidate benchmark.
using ReferenceMetrics = std::array<double, 3>;
using ReferenceScorer =
    std::function<ReferenceMetrics(const std::vector<SampledRoute> &)>;

struct StabilityRow {
  std::uint64_t seed = 0;
  ReferenceMetrics metrics{};
  double score = 0.0;
};

struct StabilityTable {
  std::vector<StabilityRow> rows;
  std::size_t chosen_index = 0;
  std::uint64_t chosen_seed = 0;
};

// Builds one candidate per seed, scores it, and picks the candidate with
// the smallest deviation score (lowest seed index on ties). Throws
// Error(DegenerateInput) for fewer than two seeds.
StabilityTable seed_stability(const std::vector<Route> &pool,
                              const StrataSpec &spec,
                              const std::vector<std::uint64_t> &seeds,
                              const ReferenceScorer &scorer);

struct StockRef {
  std::string name;
  std::string sha256;
  std::string canonicalizer;

  friend bool operator==(const StockRef &, const StockRef &) = default;
};

struct BenchmarkTarget {
  std::string target_id;
  Route reference;
  GroundTruthSet ground_truth;
  RouteStats stats;
  std::string bucket; // bucket label, empty when unstratified
  std::optional<std::size_t> pool_index;

  friend bool operator==(const BenchmarkTarget &,
                         const BenchmarkTarget &) = default;
};

struct BenchmarkDefinition {
  std::string id;
  std::vector<BenchmarkTarget> targets;
  StockRef stock;
  std::uint64_t seed = 0;
  std::optional<StrataSpec> strata;
  std::string provenance; // digest of the manifest that produced the inputs

  const BenchmarkTarget *find(std::string_view target_id) const;

  friend bool operator==(const BenchmarkDefinition &,
                         const BenchmarkDefinition &) = default;
};

struct BuildOptions {
  std::optional<StrataSpec> strata;
  std::string provenance;
  std::size_t pruning_cap = kDefaultPruningCap;
};

// Target ids come from route metadata "target_id" when present, otherwise
// "<id>-NNNN" by position. Throws Error(TooManyPruningPoints) naming the
// target, or Error(InvalidArtifact) for degenerate references or duplicate
// target ids.
BenchmarkDefinition build_benchmark(const std::vector<SampledRoute> &samples,
                                    const StockSet &stock, std::string id,
                                    std::uint64_t seed,
                                    const BuildOptions &options = {});

// Wraps plain routes as samples with consecutive pool indices, bucket 0.
std::vector<SampledRoute> as_samples(const std::vector<Route> &routes);

std::string serialize_benchmark(const BenchmarkDefinition &def);
// Structural parse only; see verify_benchmark. Throws
// Error(InvalidArtifact).
BenchmarkDefinition parse_benchmark(std::string_view text);

struct BenchmarkVerification {
  std::vector<std::string> problems;
  bool ok() const noexcept { return problems.empty(); }
};

// Recomputes every target's expansion and statistics against `stock`,
// checks the stock digest and, when present, the strata counts.
BenchmarkVerification verify_benchmark(const BenchmarkDefinition &def,
                                       const StockSet &stock);

// parse + verify; throws Error(BenchmarkVerificationFailed).
BenchmarkDefinition load_benchmark(std::string_view text, const StockSet &stock);

} // namespace routecast
