#include "routecast/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include "routecast/error.hpp"
#include "routecast/rng.hpp"

namespace routecast {

unsigned worker_threads() {
  if (const char *env = std::getenv("ROUTECAST_THREADS")) {
    char *end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1)
      return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

template <typename Fn> void parallel_for(std::size_t n, Fn &&fn) {
  const std::size_t workers =
      std::min<std::size_t>(worker_threads(), std::max<std::size_t>(1, n / 256));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end)
      break;
    pool.emplace_back([begin, end, &fn] {
      for (std::size_t i = begin; i < end; ++i)
        fn(i);
    });
  }
  for (auto &t : pool)
    t.join();
}

double mean_of(std::span<const double> xs) {
  double sum = 0.0;
  for (double x : xs)
    sum += x;
  return sum / static_cast<double>(xs.size());
}

// Sorted resample means; resample r draws from stream r of `seed`.
std::vector<double> resample_means(std::span<const double> xs, int resamples,
                                   std::uint64_t seed) {
  const std::size_t n = xs.size();
  std::vector<double> means(static_cast<std::size_t>(resamples));
  parallel_for(means.size(), [&](std::size_t r) {
    auto rng = Xoshiro256ss::for_stream(seed, r);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      sum += xs[rng.below(n)];
    means[r] = sum / static_cast<double>(n);
  });
  std::sort(means.begin(), means.end());
  return means;
}

} // namespace

double percentile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty())
    throw Error(ErrorCode::EmptyOutcomes, "percentile of an empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  const double a = sorted[lo];
  const double b = sorted[hi];
  // numpy's lerp: anchored on the nearer endpoint.
  return frac >= 0.5 ? b - (b - a) * (1.0 - frac) : a + (b - a) * frac;
}

bool is_reliable(std::span<const double> outcomes) {
  if (outcomes.size() < kMinReliableN)
    return false;
  const bool binary = std::all_of(outcomes.begin(), outcomes.end(),
                                  [](double x) { return x == 0.0 || x == 1.0; });
  if (!binary)
    return true;
  const auto positives = static_cast<std::size_t>(
      std::count(outcomes.begin(), outcomes.end(), 1.0));
  const auto negatives = outcomes.size() - positives;
  return std::min(positives, negatives) >= kMinReliableOutcomeCount;
}

BootstrapCI bootstrap_ci(std::span<const double> outcomes, int resamples,
                         std::uint64_t seed) {
  if (outcomes.empty())
    throw Error(ErrorCode::EmptyOutcomes, "bootstrap over no outcomes");
  if (resamples < 1)
    throw Error(ErrorCode::DegenerateInput, "resamples must be positive");

  BootstrapCI ci;
  ci.n = outcomes.size();
  ci.resamples = resamples;
  ci.seed = seed;
  ci.mean = mean_of(outcomes);
  ci.reliable = is_reliable(outcomes);

  const auto means = resample_means(outcomes, resamples, seed);
  // The interval always brackets the point estimate.
  ci.lo = std::min(percentile_sorted(means, 0.025), ci.mean);
  ci.hi = std::max(percentile_sorted(means, 0.975), ci.mean);
  return ci;
}

PairedDiffResult paired_diff(std::span<const double> outcomes_a,
                             std::span<const double> outcomes_b,
                             int resamples, std::uint64_t seed) {
  if (outcomes_a.size() != outcomes_b.size())
    throw Error(ErrorCode::LengthMismatch,
                "paired outcomes differ in length (" +
                    std::to_string(outcomes_a.size()) + " vs " +
                    std::to_string(outcomes_b.size()) + ")");
  std::vector<double> diffs(outcomes_a.size());
  for (std::size_t i = 0; i < diffs.size(); ++i)
    diffs[i] = outcomes_b[i] - outcomes_a[i];

  const auto ci = bootstrap_ci(diffs, resamples, seed);
  PairedDiffResult out;
  out.mean_diff = ci.mean;
  out.lo = ci.lo;
  out.hi = ci.hi;
  out.n = ci.n;
  out.significant = out.lo > 0.0 || out.hi < 0.0;
  return out;
}

DeviationScores
deviation_score(const std::vector<std::vector<double>> &metrics_per_seed) {
  const std::size_t rows = metrics_per_seed.size();
  if (rows < 2)
    throw Error(ErrorCode::DegenerateInput,
                "deviation score needs at least two seeds");
  const std::size_t cols = metrics_per_seed.front().size();
  for (const auto &row : metrics_per_seed)
    if (row.size() != cols)
      throw Error(ErrorCode::DegenerateInput, "ragged metric matrix");

  DeviationScores out;
  out.scores.assign(rows, 0.0);
  for (std::size_t c = 0; c < cols; ++c) {
    double mean = 0.0;
    for (const auto &row : metrics_per_seed)
      mean += row[c];
    mean /= static_cast<double>(rows);
    double var = 0.0;
    for (const auto &row : metrics_per_seed)
      var += (row[c] - mean) * (row[c] - mean);
    var /= static_cast<double>(rows);
    const double sd = std::sqrt(var);
    // A constant column can still leave rounding residue in the mean.
    const bool constant = std::all_of(
        metrics_per_seed.begin(), metrics_per_seed.end(),
        [&](const auto &row) { return row[c] == metrics_per_seed.front()[c]; });
    if (constant || sd == 0.0)
      continue;
    for (std::size_t r = 0; r < rows; ++r) {
      const double z = (metrics_per_seed[r][c] - mean) / sd;
      out.scores[r] += z * z;
    }
  }
  out.argmin = static_cast<std::size_t>(
      std::min_element(out.scores.begin(), out.scores.end()) -
      out.scores.begin());
  return out;
}

} // namespace routecast
