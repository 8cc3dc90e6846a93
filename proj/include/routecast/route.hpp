#pragma once

// Canonical route data model.
//
// A Route is a rooted tree: the target at the root, intermediates produced
// by exactly one step and consumed by exactly one other step, and leaves
// (starting materials) that no step produces. Routes are immutable once
// built; build_route() is the only way to obtain one.

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace routecast {

using Metadata = std::map<std::string, std::string>;

// Reserved characters that can never appear inside a molecule token.
inline constexpr std::string_view kReservedTokenChars = ">.;|";

// Trims surrounding whitespace and checks the token invariants. Throws
// Error(InvalidToken) on failure.
std::string validate_token(std::string_view raw);
bool is_valid_token(std::string_view raw) noexcept;

struct ReactionStep {
  std::string product;
  std::vector<std::string> reactants;
  // Carried through from formats that annotate reactions; never part of
  // the canonical key.
  Metadata metadata;

  friend bool operator==(const ReactionStep &, const ReactionStep &) = default;
};

enum class Topology { Linear, Convergent };

std::string_view to_string(Topology t) noexcept;
Topology topology_from_string(std::string_view s);

struct RouteStats {
  int length = 0; // reactions on the longest root-to-leaf path
  Topology topology = Topology::Linear;
  int n_steps = 0;
  int n_leaves = 0;

  friend bool operator==(const RouteStats &, const RouteStats &) = default;
};

class Route;

// Validates and constructs. Throws Error with one of InvalidToken,
// EmptyReactants, DuplicateProduct, MissingTargetStep, Cycle,
// SharedIntermediate, OrphanStep.
Route build_route(std::string_view target, std::vector<ReactionStep> steps,
                  Metadata metadata = {});

class Route {
public:
  const std::string &target() const noexcept { return target_; }
  const std::vector<ReactionStep> &steps() const noexcept { return steps_; }
  const Metadata &metadata() const noexcept { return metadata_; }
  bool is_degenerate() const noexcept { return steps_.empty(); }

  // Index of the step producing `token`, or npos.
  std::size_t producing_step(std::string_view token) const noexcept;

  // Same route with a different metadata map. Structure is untouched so no
  // revalidation happens.
  Route with_metadata(Metadata metadata) const;

  friend bool operator==(const Route &, const Route &) = default;

private:
  friend Route build_route(std::string_view, std::vector<ReactionStep>,
                           Metadata);
  Route() = default;

  std::string target_;
  std::vector<ReactionStep> steps_;
  Metadata metadata_;
};

inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

// Explicit tree over a validated route. Nodes are stored in pre-order
// (reactants visited in their listed order), node 0 is the target. Node
// indices are the position references used by pruning.
class RouteTree {
public:
  struct Node {
    std::string token;
    int parent = -1;
    int step = -1; // producing step index, -1 for leaves
    int depth = 0; // reactions between the root and this node
    std::vector<int> children;
  };

  explicit RouteTree(const Route &route);

  const std::vector<Node> &nodes() const noexcept { return nodes_; }
  const Node &node(int i) const { return nodes_.at(static_cast<size_t>(i)); }
  int size() const noexcept { return static_cast<int>(nodes_.size()); }
  bool is_leaf(int i) const { return node(i).step < 0; }
  bool is_intermediate(int i) const { return i != 0 && !is_leaf(i); }

  // True when `ancestor` lies strictly above `descendant`.
  bool is_ancestor(int ancestor, int descendant) const;

  // Last pre-order index inside the subtree rooted at i.
  int subtree_end(int i) const {
    return subtree_end_.at(static_cast<size_t>(i));
  }

private:
  std::vector<Node> nodes_;
  std::vector<int> subtree_end_;
};

// `token(child,child,...)` with children sorted lexicographically; `%`,
// `(`, `)` and `,` inside tokens are percent-encoded.
struct CanonicalRouteKey {
  std::string key;

  friend auto operator<=>(const CanonicalRouteKey &,
                          const CanonicalRouteKey &) = default;
};

std::string escape_key_token(std::string_view token);
CanonicalRouteKey canonical_key(const Route &route);
// Key of the tree with every node flagged in `as_leaf` serialised as a
// leaf. `as_leaf` is indexed by RouteTree node; empty means no cuts.
CanonicalRouteKey canonical_key(const RouteTree &tree,
                                const std::vector<bool> &as_leaf);

RouteStats route_stats(const Route &route);

// Tokens no step produces; {target} for the degenerate route.
std::set<std::string> leaves(const Route &route);

} // namespace routecast
