#include "routecast/stock.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "routecast/error.hpp"
#include "routecast/provenance.hpp"

namespace routecast {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::string trim_copy(std::string_view s) {
  while (!s.empty() && is_space(s.front()))
    s.remove_prefix(1);
  while (!s.empty() && is_space(s.back()))
    s.remove_suffix(1);
  return std::string(s);
}

std::string fold_ws(std::string_view s) {
  std::string out;
  bool pending = false;
  for (char c : s) {
    if (is_space(c)) {
      pending = !out.empty();
      continue;
    }
    if (pending)
      out += ' ';
    pending = false;
    out += c;
  }
  return out;
}

} // namespace

Canonicalizer canonicalizer_by_id(std::string_view id) {
  if (id == "identity")
    return trim_copy;
  if (id == "fold-ws")
    return fold_ws;
  throw Error(ErrorCode::InvalidArtifact,
              "unknown canonicalizer '" + std::string(id) + "'");
}

std::vector<std::string> canonicalizer_ids() { return {"identity", "fold-ws"}; }

StockSet::StockSet(std::string name, std::string canonicalizer_id,
                   Canonicalizer canonicalizer)
    : name_(std::move(name)), canonicalizer_id_(std::move(canonicalizer_id)),
      canon_(std::move(canonicalizer)) {}

StockSet StockSet::from_tokens(std::string name,
                               const std::vector<std::string> &tokens,
                               std::string_view canonicalizer_id) {
  StockSet s(std::move(name), std::string(canonicalizer_id),
             canonicalizer_by_id(canonicalizer_id));
  for (const auto &t : tokens)
    s.insert(t);
  return s;
}

bool StockSet::insert(std::string_view token) {
  return members_.insert(canon_(token)).second;
}

bool StockSet::contains(std::string_view token) const {
  return members_.contains(canon_(token));
}

std::string StockSet::content_hash() const {
  std::vector<std::string_view> sorted(members_.begin(), members_.end());
  std::sort(sorted.begin(), sorted.end());
  std::string blob;
  for (auto m : sorted) {
    blob += m;
    blob += '\n';
  }
  return sha256_hex(blob);
}

StockSet parse_stock(std::string_view text, std::string name,
                     std::string_view canonicalizer_id) {
  StockSet stock(std::move(name), std::string(canonicalizer_id),
                 canonicalizer_by_id(canonicalizer_id));
  std::size_t line_no = 0;
  std::size_t first_dup_line = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{}
                                        : text.substr(nl + 1);
    ++line_no;
    const auto token = trim_copy(line);
    if (token.empty() || token.front() == '#')
      continue;
    ++stock.n_original;
    if (!stock.insert(token)) {
      ++stock.n_duplicates;
      if (first_dup_line == 0)
        first_dup_line = line_no;
    }
  }
  if (stock.n_duplicates > 0)
    stock.warnings.push_back(std::to_string(stock.n_duplicates) +
                             " duplicate token(s), first at line " +
                             std::to_string(first_dup_line));
  if (stock.size() == 0)
    stock.warnings.push_back(std::string(to_string(ErrorCode::EmptyStock)) +
                             ": stock '" + stock.name() + "' has no members");
  return stock;
}

StockSet load_stock(const std::filesystem::path &path,
                    std::string_view canonicalizer_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::IoError, "cannot read stock file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_stock(buf.str(), path.stem().string(), canonicalizer_id);
}

bool is_stock_terminated(const Route &route, const StockSet &stock) {
  for (const auto &leaf : leaves(route))
    if (!stock.contains(leaf))
      return false;
  return true;
}

CoverageReport coverage(const std::vector<Route> &routes,
                        const StockSet &stock) {
  CoverageReport report;
  report.n_routes = routes.size();
  std::set<std::string> unique;
  for (const auto &route : routes) {
    bool covered = true;
    for (auto &leaf : leaves(route)) {
      covered = stock.contains(leaf) && covered;
      unique.insert(leaf);
    }
    if (covered)
      ++report.n_routes_fully_covered;
  }
  report.n_unique_leaves = unique.size();
  report.n_leaves_in_stock = static_cast<std::size_t>(std::count_if(
      unique.begin(), unique.end(),
      [&](const std::string &l) { return stock.contains(l); }));
  return report;
}

} // namespace routecast
