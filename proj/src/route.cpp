#include "routecast/route.hpp"

#include <algorithm>
#include <unordered_map>
#include <utility>

#include "routecast/error.hpp"

namespace routecast {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front()))
    s.remove_prefix(1);
  while (!s.empty() && is_space(s.back()))
    s.remove_suffix(1);
  return s;
}

const char *token_problem(std::string_view t) {
  if (t.empty())
    return "empty molecule token";
  for (char c : t) {
    if (is_space(c))
      return "whitespace inside molecule token";
    if (kReservedTokenChars.find(c) != std::string_view::npos)
      return "reserved character inside molecule token";
  }
  return nullptr;
}

} // namespace

std::string validate_token(std::string_view raw) {
  const auto t = trim(raw);
  if (const char *problem = token_problem(t))
    throw Error(ErrorCode::InvalidToken,
                std::string(problem) + ": '" + std::string(raw) + "'");
  return std::string(t);
}

bool is_valid_token(std::string_view raw) noexcept {
  return token_problem(trim(raw)) == nullptr;
}

std::string_view to_string(Topology t) noexcept {
  return t == Topology::Linear ? "linear" : "convergent";
}

Topology topology_from_string(std::string_view s) {
  if (s == "linear")
    return Topology::Linear;
  if (s == "convergent")
    return Topology::Convergent;
  throw Error(ErrorCode::InvalidArtifact,
              "unknown topology '" + std::string(s) + "'");
}

std::size_t Route::producing_step(std::string_view token) const noexcept {
  for (std::size_t i = 0; i < steps_.size(); ++i)
    if (steps_[i].product == token)
      return i;
  return npos;
}

Route Route::with_metadata(Metadata metadata) const {
  Route r = *this;
  r.metadata_ = std::move(metadata);
  return r;
}

Route build_route(std::string_view target, std::vector<ReactionStep> steps,
                  Metadata metadata) {
  Route route;
  route.target_ = validate_token(target);

  for (auto &step : steps) {
    step.product = validate_token(step.product);
    if (step.reactants.empty())
      throw Error(ErrorCode::EmptyReactants,
                  "step producing '" + step.product + "' has no reactants");
    for (auto &r : step.reactants) {
      r = validate_token(r);
      if (r == step.product)
        throw Error(ErrorCode::Cycle,
                    "'" + r + "' is a reactant of its own step");
    }
  }

  std::unordered_map<std::string_view, std::size_t> producer;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (!producer.emplace(steps[i].product, i).second)
      throw Error(ErrorCode::DuplicateProduct,
                  "two steps produce '" + steps[i].product + "'");
  }

  if (!steps.empty() && !producer.contains(route.target_))
    throw Error(ErrorCode::MissingTargetStep,
                "no step produces the target '" + route.target_ + "'");

  // Edges run from a step to the steps producing its reactants.
  std::vector<std::vector<std::size_t>> edges(steps.size());
  std::vector<int> consumers(steps.size(), 0);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    for (const auto &r : steps[i].reactants) {
      if (auto it = producer.find(r); it != producer.end()) {
        edges[i].push_back(it->second);
        ++consumers[it->second];
      }
    }
  }

  // Iterative three-colour DFS.
  enum : char { White, Grey, Black };
  std::vector<char> colour(steps.size(), White);
  std::vector<std::pair<std::size_t, std::size_t>> stack;
  for (std::size_t s = 0; s < steps.size(); ++s) {
    if (colour[s] != White)
      continue;
    stack.emplace_back(s, 0);
    colour[s] = Grey;
    while (!stack.empty()) {
      auto &[node, next] = stack.back();
      if (next < edges[node].size()) {
        const std::size_t child = edges[node][next++];
        if (colour[child] == Grey)
          throw Error(ErrorCode::Cycle, "cycle through '" +
                                            steps[child].product + "'");
        if (colour[child] == White) {
          colour[child] = Grey;
          stack.emplace_back(child, 0);
        }
      } else {
        colour[node] = Black;
        stack.pop_back();
      }
    }
  }

  for (std::size_t i = 0; i < steps.size(); ++i) {
    const bool is_target = steps[i].product == route.target_;
    if (!is_target && consumers[i] == 0)
      throw Error(ErrorCode::OrphanStep, "'" + steps[i].product +
                                             "' is produced but never used");
    if (is_target ? consumers[i] > 0 : consumers[i] > 1)
      throw Error(ErrorCode::SharedIntermediate,
                  "'" + steps[i].product + "' is consumed by " +
                      std::to_string(consumers[i]) + " steps");
  }

  route.steps_ = std::move(steps);
  route.metadata_ = std::move(metadata);
  return route;
}

RouteTree::RouteTree(const Route &route) {
  std::unordered_map<std::string_view, int> producer;
  const auto &steps = route.steps();
  for (std::size_t i = 0; i < steps.size(); ++i)
    producer.emplace(steps[i].product, static_cast<int>(i));

  // (token, parent); children are pushed in reverse so pre-order follows
  // the listed reactant order.
  std::vector<std::pair<std::string_view, int>> stack{{route.target(), -1}};
  while (!stack.empty()) {
    auto [token, parent] = stack.back();
    stack.pop_back();
    const int idx = static_cast<int>(nodes_.size());
    Node n;
    n.token = std::string(token);
    n.parent = parent;
    if (parent >= 0) {
      n.depth = nodes_[static_cast<size_t>(parent)].depth + 1;
      nodes_[static_cast<size_t>(parent)].children.push_back(idx);
    }
    if (auto it = producer.find(token); it != producer.end()) {
      n.step = it->second;
      const auto &rs = steps[static_cast<size_t>(n.step)].reactants;
      for (auto r = rs.rbegin(); r != rs.rend(); ++r)
        stack.emplace_back(*r, idx);
    }
    nodes_.push_back(std::move(n));
  }

  subtree_end_.resize(nodes_.size());
  for (int i = size() - 1; i >= 0; --i) {
    const auto &n = nodes_[static_cast<size_t>(i)];
    subtree_end_[static_cast<size_t>(i)] =
        n.children.empty() ? i : subtree_end_[static_cast<size_t>(
                                     n.children.back())];
  }
}

bool RouteTree::is_ancestor(int ancestor, int descendant) const {
  return ancestor < descendant && descendant <= subtree_end(ancestor);
}

std::string escape_key_token(std::string_view token) {
  std::string out;
  out.reserve(token.size());
  for (char c : token) {
    switch (c) {
    case '%': out += "%25"; break;
    case '(': out += "%28"; break;
    case ')': out += "%29"; break;
    case ',': out += "%2C"; break;
    default: out += c;
    }
  }
  return out;
}

CanonicalRouteKey canonical_key(const RouteTree &tree,
                                const std::vector<bool> &as_leaf) {
  const auto n = static_cast<std::size_t>(tree.size());
  std::vector<std::string> keys(n);
  std::vector<std::string> children;
  // Children always follow their parent in pre-order, so a reverse sweep
  // sees every child before its parent.
  for (std::size_t i = n; i-- > 0;) {
    const auto &node = tree.nodes()[i];
    std::string key = escape_key_token(node.token);
    const bool cut = !as_leaf.empty() && as_leaf[i];
    if (!node.children.empty() && !cut) {
      children.clear();
      for (int c : node.children)
        children.push_back(std::move(keys[static_cast<size_t>(c)]));
      std::sort(children.begin(), children.end());
      key += '(';
      for (std::size_t c = 0; c < children.size(); ++c) {
        if (c)
          key += ',';
        key += children[c];
      }
      key += ')';
    }
    keys[i] = std::move(key);
  }
  return CanonicalRouteKey{std::move(keys[0])};
}

CanonicalRouteKey canonical_key(const Route &route) {
  return canonical_key(RouteTree(route), {});
}

RouteStats route_stats(const Route &route) {
  RouteStats stats;
  stats.n_steps = static_cast<int>(route.steps().size());
  stats.n_leaves = static_cast<int>(leaves(route).size());
  if (route.is_degenerate())
    return stats;

  const RouteTree tree(route);
  for (const auto &node : tree.nodes()) {
    stats.length = std::max(stats.length, node.depth);
    int intermediates = 0;
    for (int c : node.children)
      if (!tree.is_leaf(c))
        ++intermediates;
    if (intermediates >= 2)
      stats.topology = Topology::Convergent;
  }
  return stats;
}

std::set<std::string> leaves(const Route &route) {
  if (route.is_degenerate())
    return {route.target()};
  std::set<std::string> products;
  for (const auto &s : route.steps())
    products.insert(s.product);
  std::set<std::string> out;
  for (const auto &s : route.steps())
    for (const auto &r : s.reactants)
      if (!products.contains(r))
        out.insert(r);
  return out;
}

} // namespace routecast
