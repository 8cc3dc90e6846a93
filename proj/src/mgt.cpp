#include "routecast/mgt.hpp"

#include <algorithm>
#include <cstdint>

#include "routecast/error.hpp"

namespace routecast {

namespace {

using Mask = std::uint32_t;
static_assert(kDefaultPruningCap <= 32);

void check_points(const RouteTree &tree,
                  const std::vector<PruningPoint> &points) {
  for (const auto &p : points) {
    if (p.node <= 0 || p.node >= tree.size() || !tree.is_intermediate(p.node) ||
        tree.node(p.node).token != p.token)
      throw Error(ErrorCode::InvalidPruningPoint,
                  "'" + p.token + "' at node " + std::to_string(p.node) +
                      " is not an intermediate of the route");
  }
}

bool comparable(const RouteTree &tree, int a, int b) {
  return a == b || tree.is_ancestor(a, b) || tree.is_ancestor(b, a);
}

bool antichain_in(const RouteTree &tree,
                  const std::vector<PruningPoint> &points) {
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      if (points[i].node != points[j].node &&
          comparable(tree, points[i].node, points[j].node))
        return false;
  return true;
}

// All antichain masks over `points` (bit i = points[i]).
std::vector<Mask> antichain_masks(const RouteTree &tree,
                                  const std::vector<PruningPoint> &points) {
  const std::size_t n = points.size();
  std::vector<Mask> conflicts(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && comparable(tree, points[i].node, points[j].node))
        conflicts[i] |= Mask{1} << j;

  std::vector<Mask> out;
  // Explicit stack of (next candidate index, chosen, blocked).
  struct Frame {
    std::size_t next;
    Mask chosen;
    Mask blocked;
  };
  std::vector<Frame> stack{{0, 0, 0}};
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    out.push_back(f.chosen);
    for (std::size_t i = f.next; i < n; ++i) {
      const Mask bit = Mask{1} << i;
      if (!(f.blocked & bit))
        stack.push_back({i + 1, f.chosen | bit, f.blocked | conflicts[i]});
    }
  }
  return out;
}

std::vector<PruningPoint> points_of(Mask m,
                                    const std::vector<PruningPoint> &points) {
  std::vector<PruningPoint> out;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (m & (Mask{1} << i))
      out.push_back(points[i]);
  return out;
}

void check_cap(std::size_t n, std::size_t cap) {
  if (n > cap || n > 32)
    throw Error(ErrorCode::TooManyPruningPoints,
                std::to_string(n) + " pruning points exceed the cap of " +
                    std::to_string(std::min<std::size_t>(cap, 32)));
}

} // namespace

std::vector<PruningPoint> pruning_points(const Route &route,
                                         const StockSet &stock) {
  std::vector<PruningPoint> out;
  if (route.is_degenerate())
    return out;
  const RouteTree tree(route);
  for (int i = 1; i < tree.size(); ++i)
    if (tree.is_intermediate(i) && stock.contains(tree.node(i).token))
      out.push_back({i, tree.node(i).token});
  return out;
}

bool is_antichain(const std::vector<PruningPoint> &points, const Route &route) {
  if (points.empty())
    return true;
  return antichain_in(RouteTree(route), points);
}

std::vector<Antichain>
enumerate_antichains(const std::vector<PruningPoint> &points,
                     const Route &route, std::size_t cap) {
  check_cap(points.size(), cap);
  const RouteTree tree(route);
  check_points(tree, points);

  std::vector<Antichain> out;
  for (Mask m : antichain_masks(tree, points)) {
    auto chain = points_of(m, points);
    std::sort(chain.begin(), chain.end());
    out.push_back(std::move(chain));
  }
  std::sort(out.begin(), out.end(), [](const Antichain &a, const Antichain &b) {
    if (a.size() != b.size())
      return a.size() < b.size();
    return std::lexicographical_compare(
        a.begin(), a.end(), b.begin(), b.end(),
        [](const PruningPoint &x, const PruningPoint &y) {
          return x.node < y.node;
        });
  });
  return out;
}

Route prune(const Route &route, const std::vector<PruningPoint> &cut) {
  if (cut.empty())
    return route;
  const RouteTree tree(route);
  check_points(tree, cut);
  if (!antichain_in(tree, cut))
    throw Error(ErrorCode::NotAnAntichain,
                "pruning set contains an ancestor of another member");

  std::vector<bool> drop_step(route.steps().size(), false);
  std::set<std::string> tokens;
  for (const auto &p : cut) {
    tokens.insert(p.token);
    for (int i = p.node; i <= tree.subtree_end(p.node); ++i)
      if (const int s = tree.node(i).step; s >= 0)
        drop_step[static_cast<std::size_t>(s)] = true;
  }

  std::vector<ReactionStep> kept;
  for (std::size_t s = 0; s < route.steps().size(); ++s)
    if (!drop_step[s])
      kept.push_back(route.steps()[s]);

  Metadata meta = route.metadata();
  std::string joined;
  for (const auto &t : tokens) {
    if (!joined.empty())
      joined += '.';
    joined += t;
  }
  meta["pruned_at"] = joined;
  return build_route(route.target(), std::move(kept), std::move(meta));
}

GroundTruthSet expand_ground_truths(const Route &route, const StockSet &stock,
                                    std::size_t cap) {
  GroundTruthSet gts;
  gts.target = route.target();
  gts.original_key = canonical_key(route);
  gts.keys.insert(gts.original_key);

  const auto points = pruning_points(route, stock);
  check_cap(points.size(), cap);
  if (points.empty())
    return gts;

  const RouteTree tree(route);
  // For every out-of-stock leaf position, the pruning points above it. A cut
  // leaves the pruned route stock-terminated iff it hits each of these.
  std::vector<Mask> must_hit;
  for (int i = 0; i < tree.size(); ++i) {
    if (!tree.is_leaf(i) || stock.contains(tree.node(i).token))
      continue;
    Mask above = 0;
    for (std::size_t p = 0; p < points.size(); ++p)
      if (tree.is_ancestor(points[p].node, i))
        above |= Mask{1} << p;
    if (above == 0)
      return gts; // no cut can ever remove this leaf
    must_hit.push_back(above);
  }

  std::vector<bool> as_leaf(static_cast<std::size_t>(tree.size()), false);
  for (Mask m : antichain_masks(tree, points)) {
    if (m == 0)
      continue;
    const bool terminated = std::all_of(must_hit.begin(), must_hit.end(),
                                        [m](Mask h) { return (h & m) != 0; });
    if (!terminated)
      continue;
    for (std::size_t p = 0; p < points.size(); ++p)
      as_leaf[static_cast<std::size_t>(points[p].node)] = (m >> p) & 1;
    gts.keys.insert(canonical_key(tree, as_leaf));
  }
  gts.n_variants = static_cast<int>(gts.keys.size()) - 1;
  return gts;
}

GroundTruthSet single_ground_truth(const Route &route) {
  GroundTruthSet gts;
  gts.target = route.target();
  gts.original_key = canonical_key(route);
  gts.keys.insert(gts.original_key);
  return gts;
}

} // namespace routecast
