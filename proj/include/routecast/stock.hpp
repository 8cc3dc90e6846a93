#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "routecast/route.hpp"

namespace routecast {

// Text -> text rewrite applied to every token before stock comparison.
// Real chemical canonicalisation plugs in here; the engine ships only the
// two textual ones below.
using Canonicalizer = std::function<std::string(std::string_view)>;

// "identity" trims; "fold-ws" trims and collapses internal whitespace runs
// into a single space. Throws Error(InvalidArtifact) for unknown ids.
Canonicalizer canonicalizer_by_id(std::string_view id);
std::vector<std::string> canonicalizer_ids();

class StockSet {
public:
  StockSet(std::string name, std::string canonicalizer_id,
           Canonicalizer canonicalizer);

  // Convenience for the registered canonicalisers.
  static StockSet from_tokens(std::string name,
                              const std::vector<std::string> &tokens,
                              std::string_view canonicalizer_id = "identity");

  // Returns false when the canonical form was already present.
  bool insert(std::string_view token);
  bool contains(std::string_view token) const;

  const std::string &name() const noexcept { return name_; }
  const std::string &canonicalizer_id() const noexcept {
    return canonicalizer_id_;
  }
  std::size_t size() const noexcept { return members_.size(); }
  const std::unordered_set<std::string> &members() const noexcept {
    return members_;
  }
  std::string canonicalize(std::string_view token) const {
    return canon_(token);
  }

  // SHA-256 over the sorted canonical members, one per line. Independent
  // of file layout, comments and duplicates.
  std::string content_hash() const;

  // Load bookkeeping.
  std::size_t n_original = 0;
  std::size_t n_duplicates = 0;
  std::vector<std::string> warnings;

private:
  std::string name_;
  std::string canonicalizer_id_;
  Canonicalizer canon_;
  std::unordered_set<std::string> members_;
};

// Newline-delimited tokens; blank lines and `#` comments ignored. An empty
// stock loads with a warning instead of failing. Throws Error(IoError).
StockSet load_stock(const std::filesystem::path &path,
                    std::string_view canonicalizer_id = "identity");
StockSet parse_stock(std::string_view text, std::string name,
                     std::string_view canonicalizer_id = "identity");

bool is_stock_terminated(const Route &route, const StockSet &stock);

struct CoverageReport {
  std::size_t n_unique_leaves = 0;
  std::size_t n_leaves_in_stock = 0;
  std::size_t n_routes = 0;
  std::size_t n_routes_fully_covered = 0;

  friend bool operator==(const CoverageReport &,
                         const CoverageReport &) = default;
};

CoverageReport coverage(const std::vector<Route> &routes,
                        const StockSet &stock);

} // namespace routecast
