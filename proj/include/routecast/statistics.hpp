#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace routecast {

inline constexpr int kDefaultResamples = 10000;
inline constexpr std::size_t kMinReliableN = 30;
inline constexpr std::size_t kMinReliableOutcomeCount = 5;

struct BootstrapCI {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n = 0;
  int resamples = 0;
  bool reliable = false;
  std::uint64_t seed = 0;

  friend bool operator==(const BootstrapCI &, const BootstrapCI &) = default;
};

struct PairedDiffResult {
  double mean_diff = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool significant = false;
  std::size_t n = 0;

  friend bool operator==(const PairedDiffResult &,
                         const PairedDiffResult &) = default;
};

// Linear-interpolated percentile (q in [0, 1]) of an ascending sample,
// the same rule as numpy's default.
double percentile_sorted(std::span<const double> sorted, double q);

// Flags estimates from fewer than 30 outcomes, and for 0/1 data those
// with fewer than 5 positives or negatives.
bool is_reliable(std::span<const double> outcomes);

// Percentile bootstrap: `resamples` same-size draws with replacement,
// resample r using stream r of `seed`; lo/hi are the 2.5th and 97.5th
// percentiles of the resample means. Throws Error(EmptyOutcomes).
BootstrapCI bootstrap_ci(std::span<const double> outcomes,
                         int resamples = kDefaultResamples,
                         std::uint64_t seed = 0);

// Bootstraps the mean of b[i] - a[i]; significant when the 95% interval
// excludes zero. Throws Error(LengthMismatch) or Error(EmptyOutcomes).
PairedDiffResult paired_diff(std::span<const double> outcomes_a,
                             std::span<const double> outcomes_b,
                             int resamples = kDefaultResamples,
                             std::uint64_t seed = 0);

struct DeviationScores {
  std::vector<double> scores;
  std::size_t argmin = 0;
};

// Rows are seeds, columns metrics. Score = sum of squared population
// z-scores; zero-variance columns contribute 0; ties go to the lowest row.
// Throws Error(DegenerateInput) for fewer than two rows or ragged input.
DeviationScores
deviation_score(const std::vector<std::vector<double>> &metrics_per_seed);

// Worker count for parallel loops: ROUTECAST_THREADS if set, else the
// hardware concurrency (at least 1).
unsigned worker_threads();

} // namespace routecast
