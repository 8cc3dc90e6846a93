#pragma once

// Multi-ground-truth expansion.
//
// A reference route is expanded into every variant obtained by cutting it
// at in-stock intermediates. Cuts are restricted to antichains of tree
// positions so no cut sits below another, and a variant is kept only when
// all of its leaves are in stock. The reference itself is always kept.

#include <set>
#include <string>
#include <vector>

#include "routecast/route.hpp"
#include "routecast/stock.hpp"

namespace routecast {

inline constexpr std::size_t kDefaultPruningCap = 20;

struct PruningPoint {
  int node = 0; // RouteTree pre-order index
  std::string token;

  friend auto operator<=>(const PruningPoint &, const PruningPoint &) = default;
};

using Antichain = std::vector<PruningPoint>; // sorted by node

struct GroundTruthSet {
  std::string target;
  CanonicalRouteKey original_key;
  std::set<CanonicalRouteKey> keys;
  int n_variants = 0; // keys.size() - 1

  bool contains(const CanonicalRouteKey &k) const { return keys.contains(k); }

  friend bool operator==(const GroundTruthSet &,
                         const GroundTruthSet &) = default;
};

// In-stock intermediates (never the target, never leaves), in pre-order.
std::vector<PruningPoint> pruning_points(const Route &route,
                                         const StockSet &stock);

bool is_antichain(const std::vector<PruningPoint> &points, const Route &route);

// Every antichain over `points`, including the empty one, ordered by size
// then by node indices. Throws Error(TooManyPruningPoints) past `cap`.
std::vector<Antichain>
enumerate_antichains(const std::vector<PruningPoint> &points,
                     const Route &route,
                     std::size_t cap = kDefaultPruningCap);

// Turns each cut node into a leaf by dropping its producing step and the
// whole subtree below it. Records the cut tokens in metadata["pruned_at"]
// ('.'-joined, sorted). Throws Error(NotAnAntichain) or
// Error(InvalidPruningPoint).
Route prune(const Route &route, const std::vector<PruningPoint> &cut);

GroundTruthSet expand_ground_truths(const Route &route, const StockSet &stock,
                                    std::size_t cap = kDefaultPruningCap);

// Reference key only; the baseline single-ground-truth view.
GroundTruthSet single_ground_truth(const Route &route);

} // namespace routecast
