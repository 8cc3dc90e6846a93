#include "routecast/adapters.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>
#include <utility>

namespace routecast {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kMaxJsonDepth = 2048;

// ---------------------------------------------------------------------------
// Shared helpers

struct LineCol {
  std::size_t line;
  std::size_t column;
};

LineCol locate(std::string_view text, std::size_t byte_offset) {
  LineCol lc{1, 1};
  const auto end = std::min(byte_offset, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++lc.line;
      lc.column = 1;
    } else {
      ++lc.column;
    }
  }
  return lc;
}

[[noreturn]] void schema_error(const std::string &msg, std::size_t line = 0) {
  throw ParseError(ErrorCode::SchemaError, msg, line, line ? 1 : 0);
}

Route checked_route(std::string_view target, std::vector<ReactionStep> steps,
                    Metadata meta, std::size_t line) {
  try {
    return build_route(target, std::move(steps), std::move(meta));
  } catch (const ParseError &) {
    throw;
  } catch (const Error &e) {
    throw ParseError(ErrorCode::ValidationError,
                     std::string(to_string(e.code())) + ": " + e.what(), line,
                     line ? 1 : 0)
        .with_route_code(e.code());
  }
}

json parse_json_document(std::string_view text, std::size_t line_offset = 0) {
  try {
    return json::parse(text);
  } catch (const json::parse_error &e) {
    // e.byte is the 1-based index of the offending byte.
    const auto lc = locate(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError(ErrorCode::SyntaxError, "malformed JSON",
                     lc.line + line_offset, lc.column);
  }
}

std::string json_scalar_text(const json &v) {
  return v.is_string() ? v.get<std::string>() : v.dump();
}

std::string json_token(const json &v, const char *what) {
  if (!v.is_string())
    schema_error(std::string(what) + " must be a string");
  return v.get<std::string>();
}

Metadata string_map(const json &obj, const char *what) {
  if (!obj.is_object())
    schema_error(std::string(what) + " must be an object");
  Metadata out;
  for (const auto &[k, v] : obj.items()) {
    if (!v.is_string())
      schema_error(std::string(what) + " value for '" + k +
                   "' must be a string");
    out.emplace(k, v.get<std::string>());
  }
  return out;
}

std::vector<json> json_records(const json &doc) {
  if (doc.is_array())
    return {doc.begin(), doc.end()};
  if (doc.is_object())
    return {doc};
  schema_error("expected a route object or an array of route objects");
}

// Splits a line-oriented document, tracking 1-based line numbers. Blank
// lines and lines starting with '#' are skipped.
template <typename Fn> void for_each_record_line(std::string_view text, Fn fn) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r')
      line.remove_suffix(1);
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] == '#')
      continue;
    fn(line, line_no);
  }
}

// A token cut out of a string-format line, with its 1-based column.
std::string string_token(std::string_view line, std::size_t begin,
                         std::size_t end, std::size_t line_no) {
  const auto raw = line.substr(begin, end - begin);
  if (!is_valid_token(raw)) {
    const bool empty = raw.find_first_not_of(" \t") == std::string_view::npos;
    throw ParseError(ErrorCode::SyntaxError,
                     empty ? std::string("empty molecule token")
                           : "invalid molecule token '" + std::string(raw) + "'",
                     line_no, begin + 1);
  }
  return validate_token(raw);
}

// Splits [begin, end) of `line` on `sep`, returning (begin, end) pairs.
std::vector<std::pair<std::size_t, std::size_t>>
split_range(std::string_view line, std::size_t begin, std::size_t end,
            std::string_view sep) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t pos = begin;
  while (true) {
    auto hit = line.substr(0, end).find(sep, pos);
    if (hit == std::string_view::npos) {
      out.emplace_back(pos, end);
      return out;
    }
    out.emplace_back(pos, hit);
    pos = hit + sep.size();
  }
}

// Reactants in sorted order, steps in pre-order: the form the string
// emitters use so equal routes print identically.
std::vector<ReactionStep> canonical_steps(const Route &route) {
  std::vector<ReactionStep> out;
  if (route.is_degenerate())
    return out;
  std::vector<std::string> stack{route.target()};
  while (!stack.empty()) {
    const std::string token = std::move(stack.back());
    stack.pop_back();
    const auto idx = route.producing_step(token);
    if (idx == npos)
      continue;
    ReactionStep step = route.steps()[idx];
    std::sort(step.reactants.begin(), step.reactants.end());
    for (auto r = step.reactants.rbegin(); r != step.reactants.rend(); ++r)
      stack.push_back(*r);
    out.push_back(std::move(step));
  }
  return out;
}

// ---------------------------------------------------------------------------
// NestedMolJson

struct NestedBuilder {
  std::vector<ReactionStep> steps;
  std::vector<std::string> *warnings;

  std::string node(const json &n, Metadata *root_meta, int depth) {
    if (depth > kMaxJsonDepth)
      schema_error("route nesting too deep");
    if (!n.is_object())
      schema_error("molecule node must be an object");
    if (!n.contains("smiles"))
      schema_error("molecule node without 'smiles'");
    std::string token = json_token(n["smiles"], "'smiles'");

    const json *children = nullptr;
    if (auto it = n.find("children"); it != n.end() && !it->is_null()) {
      if (!it->is_array())
        schema_error("'children' must be an array");
      children = &*it;
    }
    const bool produced = children && !children->empty();

    Metadata step_meta;
    for (const auto &[k, v] : n.items()) {
      if (k == "smiles" || k == "children")
        continue;
      if (root_meta) {
        if (k == "metadata") {
          for (auto &[mk, mv] : string_map(v, "'metadata'"))
            root_meta->insert_or_assign(mk, mv);
        } else {
          root_meta->insert_or_assign("x-" + k, json_scalar_text(v));
        }
      } else if (produced) {
        if (k == "metadata") {
          for (auto &[mk, mv] : string_map(v, "'metadata'"))
            step_meta.insert_or_assign(mk, mv);
        } else {
          step_meta.insert_or_assign("x-" + k, json_scalar_text(v));
        }
      } else {
        warnings->push_back("ignored field '" + k + "' on leaf '" + token +
                            "'");
      }
    }

    if (produced) {
      const std::size_t slot = steps.size();
      steps.push_back({token, {}, std::move(step_meta)});
      std::vector<std::string> reactants;
      for (const auto &c : *children)
        reactants.push_back(node(c, nullptr, depth + 1));
      steps[slot].reactants = std::move(reactants);
    }
    return token;
  }
};

Route parse_nested_record(const json &rec, std::vector<std::string> &warnings) {
  NestedBuilder b{{}, &warnings};
  Metadata meta;
  const auto target = b.node(rec, &meta, 0);
  return checked_route(target, std::move(b.steps), std::move(meta), 0);
}

ordered_json emit_nested_node(const Route &route, const std::string &token,
                              int depth) {
  ordered_json n;
  n["smiles"] = token;
  const auto idx = route.producing_step(token);
  if (idx != npos) {
    ordered_json kids = ordered_json::array();
    for (const auto &r : route.steps()[idx].reactants)
      kids.push_back(emit_nested_node(route, r, depth + 1));
    n["children"] = std::move(kids);
  }
  return n;
}

// ---------------------------------------------------------------------------
// AlternatingJson

bool is_mol_type(const json &n) {
  if (!n.contains("type"))
    return false;
  const auto &t = n["type"];
  return t.is_string() && (t == "mol" || t == "molecule");
}

bool is_reaction_type(const json &n) {
  return n.contains("type") && n["type"].is_string() && n["type"] == "reaction";
}

struct AlternatingBuilder {
  std::vector<ReactionStep> steps;

  std::string mol(const json &n, Metadata *root_meta, int depth) {
    if (depth > kMaxJsonDepth)
      schema_error("route nesting too deep");
    if (!n.is_object() || !is_mol_type(n))
      schema_error("expected a molecule node ({\"type\":\"mol\"})");
    if (!n.contains("smiles"))
      schema_error("molecule node without 'smiles'");
    std::string token = json_token(n["smiles"], "'smiles'");

    if (root_meta) {
      for (const auto &[k, v] : n.items()) {
        if (k == "type" || k == "smiles" || k == "children")
          continue;
        if (k == "metadata") {
          for (auto &[mk, mv] : string_map(v, "'metadata'"))
            root_meta->insert_or_assign(mk, mv);
        } else {
          root_meta->insert_or_assign("x-" + k, json_scalar_text(v));
        }
      }
    }

    auto it = n.find("children");
    if (it == n.end() || it->is_null())
      return token;
    if (!it->is_array())
      schema_error("'children' must be an array");
    if (it->empty())
      return token;
    if (it->size() > 1)
      schema_error("molecule '" + token + "' has more than one reaction node");
    reaction(token, it->front(), depth + 1);
    return token;
  }

  void reaction(const std::string &product, const json &r, int depth) {
    if (!r.is_object() || !is_reaction_type(r))
      schema_error("expected a reaction node ({\"type\":\"reaction\"}) under '" +
                   product + "'");
    Metadata meta;
    for (const auto &[k, v] : r.items())
      if (k != "type" && k != "children")
        meta.insert_or_assign(k, json_scalar_text(v));
    auto it = r.find("children");
    if (it == r.end() || !it->is_array())
      schema_error("reaction node must list its reactants in 'children'");
    const std::size_t slot = steps.size();
    steps.push_back({product, {}, std::move(meta)});
    std::vector<std::string> reactants;
    for (const auto &c : *it)
      reactants.push_back(mol(c, nullptr, depth + 1));
    steps[slot].reactants = std::move(reactants);
  }
};

Route parse_alternating_record(const json &rec) {
  AlternatingBuilder b;
  Metadata meta;
  const auto target = b.mol(rec, &meta, 0);
  return checked_route(target, std::move(b.steps), std::move(meta), 0);
}

// ---------------------------------------------------------------------------
// EdgeListJson

Route parse_edge_list_record(const json &rec) {
  if (!rec.is_object())
    schema_error("edge-list route must be an object");
  if (!rec.contains("nodes") || !rec["nodes"].is_object())
    schema_error("edge-list route needs a 'nodes' object");
  if (!rec.contains("edges") || !rec["edges"].is_array())
    schema_error("edge-list route needs an 'edges' array");

  Metadata meta;
  for (const auto &[k, v] : rec.items()) {
    if (k == "nodes" || k == "edges")
      continue;
    if (k == "metadata") {
      for (auto &[mk, mv] : string_map(v, "'metadata'"))
        meta.insert_or_assign(mk, mv);
    } else {
      meta.insert_or_assign("x-" + k, json_scalar_text(v));
    }
  }

  std::map<std::string, std::string> tokens;
  for (const auto &[id, v] : rec["nodes"].items())
    tokens.emplace(id, json_token(v, "node value"));

  std::map<std::string, std::vector<std::string>> children;
  std::map<std::string, int> indegree;
  for (const auto &[id, _] : tokens)
    indegree[id] = 0;
  for (const auto &e : rec["edges"]) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_string() ||
        !e[1].is_string())
      schema_error("each edge must be a [parent, child] pair of node ids");
    const auto from = e[0].get<std::string>();
    const auto to = e[1].get<std::string>();
    if (!tokens.contains(from) || !tokens.contains(to))
      schema_error("edge references unknown node id");
    children[from].push_back(to);
    ++indegree[to];
  }

  std::vector<std::string> roots;
  for (const auto &[id, d] : indegree)
    if (d == 0)
      roots.push_back(id);
  if (roots.size() != 1) {
    if (roots.empty() && !tokens.empty())
      throw ParseError(ErrorCode::ValidationError,
                       "Cycle: edge list has no root node")
          .with_route_code(ErrorCode::Cycle);
    schema_error("edge list must have exactly one root node, found " +
                 std::to_string(roots.size()));
  }
  for (const auto &[id, d] : indegree)
    if (d > 1)
      throw ParseError(ErrorCode::ValidationError,
                       "SharedIntermediate: node '" + id +
                           "' has more than one parent")
          .with_route_code(ErrorCode::SharedIntermediate);

  // Walk from the root; anything unreachable sits on a cycle.
  std::vector<ReactionStep> steps;
  std::set<std::string> seen;
  std::vector<std::string> stack{roots.front()};
  while (!stack.empty()) {
    const auto id = stack.back();
    stack.pop_back();
    seen.insert(id);
    auto it = children.find(id);
    if (it == children.end())
      continue;
    ReactionStep step{tokens[id], {}, {}};
    for (const auto &c : it->second)
      step.reactants.push_back(tokens[c]);
    steps.push_back(std::move(step));
    for (auto c = it->second.rbegin(); c != it->second.rend(); ++c)
      stack.push_back(*c);
  }
  if (seen.size() != tokens.size())
    throw ParseError(ErrorCode::ValidationError,
                     "Cycle: edge list contains nodes unreachable from the root")
        .with_route_code(ErrorCode::Cycle);

  return checked_route(tokens[roots.front()], std::move(steps), std::move(meta),
                       0);
}

// ---------------------------------------------------------------------------
// MappingString: product>reactant.reactant;product>reactant...

Route parse_mapping_line(std::string_view line, std::size_t line_no) {
  if (line.find('>') == std::string_view::npos &&
      line.find(';') == std::string_view::npos)
    return checked_route(string_token(line, 0, line.size(), line_no), {}, {},
                         line_no);

  std::vector<ReactionStep> steps;
  for (auto [sb, se] : split_range(line, 0, line.size(), ";")) {
    const auto gt = line.substr(0, se).find('>', sb);
    if (gt == std::string_view::npos)
      throw ParseError(ErrorCode::SyntaxError, "step without '>'", line_no,
                       sb + 1);
    if (line.substr(0, se).find('>', gt + 1) != std::string_view::npos)
      throw ParseError(ErrorCode::SyntaxError, "step with more than one '>'",
                       line_no, gt + 2);
    ReactionStep step;
    step.product = string_token(line, sb, gt, line_no);
    for (auto [rb, re] : split_range(line, gt + 1, se, "."))
      step.reactants.push_back(string_token(line, rb, re, line_no));
    steps.push_back(std::move(step));
  }
  const auto target = steps.front().product;
  return checked_route(target, std::move(steps), {}, line_no);
}

std::string emit_mapping_line(const Route &route) {
  if (route.is_degenerate())
    return route.target();
  std::string out;
  for (const auto &step : canonical_steps(route)) {
    if (!out.empty())
      out += ';';
    out += step.product;
    out += '>';
    for (std::size_t i = 0; i < step.reactants.size(); ++i) {
      if (i)
        out += '.';
      out += step.reactants[i];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// RecipeString: reactants>>product|reactants>>product, forward order; each
// product is carried into the next step unless a later step names it.

Route parse_recipe_line(std::string_view line, std::size_t line_no) {
  if (line.find(">>") == std::string_view::npos &&
      line.find('|') == std::string_view::npos)
    return checked_route(string_token(line, 0, line.size(), line_no), {}, {},
                         line_no);

  struct RawStep {
    std::vector<std::string> explicit_reactants;
    std::string product;
    std::size_t column;
  };
  std::vector<RawStep> raw;
  for (auto [sb, se] : split_range(line, 0, line.size(), "|")) {
    const auto arrow = line.substr(0, se).find(">>", sb);
    if (arrow == std::string_view::npos)
      throw ParseError(ErrorCode::SyntaxError, "step without '>>'", line_no,
                       sb + 1);
    RawStep step;
    step.column = sb + 1;
    const auto left = line.substr(sb, arrow - sb);
    if (left.find_first_not_of(" \t") != std::string_view::npos)
      for (auto [rb, re] : split_range(line, sb, arrow, "."))
        step.explicit_reactants.push_back(string_token(line, rb, re, line_no));
    step.product = string_token(line, arrow + 2, se, line_no);
    raw.push_back(std::move(step));
  }

  std::vector<ReactionStep> steps;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    ReactionStep step{raw[i].product, raw[i].explicit_reactants, {}};
    if (i > 0) {
      const auto &prev = raw[i - 1].product;
      bool named_later = false;
      for (std::size_t j = i; j < raw.size() && !named_later; ++j)
        named_later = std::find(raw[j].explicit_reactants.begin(),
                                raw[j].explicit_reactants.end(),
                                prev) != raw[j].explicit_reactants.end();
      if (!named_later)
        step.reactants.push_back(prev);
    }
    if (step.reactants.empty())
      throw ParseError(ErrorCode::SyntaxError,
                       "step producing '" + step.product + "' has no reactants",
                       line_no, raw[i].column);
    steps.push_back(std::move(step));
  }
  const auto target = steps.back().product;
  return checked_route(target, std::move(steps), {}, line_no);
}

// ---------------------------------------------------------------------------
// Interchange

Route interchange_record_route(const json &rec, std::size_t line,
                               std::string *target_out, Metadata *meta_out) {
  if (!rec.is_object())
    schema_error("interchange record must be an object", line);
  if (!rec.contains("target") || !rec["target"].is_string())
    schema_error("interchange record needs a string 'target'", line);
  if (!rec.contains("steps") || !rec["steps"].is_array())
    schema_error("interchange record needs a 'steps' array", line);

  Metadata meta;
  if (rec.contains("metadata"))
    meta = string_map(rec["metadata"], "'metadata'");
  for (const auto &[k, v] : rec.items())
    if (k != "target" && k != "steps" && k != "metadata")
      meta.insert_or_assign("x-" + k, json_scalar_text(v));

  std::vector<ReactionStep> steps;
  for (const auto &s : rec["steps"]) {
    if (!s.is_object() || !s.contains("product") || !s.contains("reactants") ||
        !s["product"].is_string() || !s["reactants"].is_array())
      schema_error("step must be {product: string, reactants: [string]}", line);
    ReactionStep step;
    step.product = s["product"].get<std::string>();
    for (const auto &r : s["reactants"]) {
      if (!r.is_string())
        schema_error("reactants must be strings", line);
      step.reactants.push_back(r.get<std::string>());
    }
    if (s.contains("metadata"))
      step.metadata = string_map(s["metadata"], "step 'metadata'");
    for (const auto &[k, v] : s.items())
      if (k != "product" && k != "reactants" && k != "metadata")
        step.metadata.insert_or_assign("x-" + k, json_scalar_text(v));
    steps.push_back(std::move(step));
  }

  const auto target = rec["target"].get<std::string>();
  if (target_out)
    *target_out = target;
  if (meta_out)
    *meta_out = meta;
  return checked_route(target, std::move(steps), std::move(meta), line);
}

template <typename Fn>
void for_each_interchange_line(std::string_view input, Fn fn) {
  for_each_record_line(input, [&](std::string_view line, std::size_t line_no) {
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error &e) {
      throw ParseError(ErrorCode::SyntaxError, "malformed JSON record", line_no,
                       e.byte > 0 ? e.byte : 1);
    }
    fn(rec, line_no);
  });
}

// Offset of the first byte that does not start a well-formed UTF-8
// sequence, or npos.
std::size_t utf8_error_offset(std::string_view s) noexcept {
  std::size_t i = 0;
  const auto n = s.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len;
    std::uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return i;
    }
    if (i + len > n)
      return i;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80)
        return i;
      cp = (cp << 6) | (cc & 0x3F);
    }
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
        (len == 4 && (cp < 0x10000 || cp > 0x10FFFF)) ||
        (cp >= 0xD800 && cp <= 0xDFFF))
      return i;
    i += len;
  }
  return std::string_view::npos;
}

void require_utf8(std::string_view input) {
  const auto bad = utf8_error_offset(input);
  if (bad == std::string_view::npos)
    return;
  const auto lc = locate(input, bad);
  throw ParseError(ErrorCode::SyntaxError, "input is not valid UTF-8", lc.line,
                   lc.column);
}

} // namespace

bool is_valid_utf8(std::string_view s) noexcept {
  return utf8_error_offset(s) == std::string_view::npos;
}

std::string_view adapter_name(AdapterId id) noexcept {
  switch (id) {
  case AdapterId::NestedMolJson: return "nested-mol-json";
  case AdapterId::MappingString: return "mapping-string";
  case AdapterId::AlternatingJson: return "alternating-json";
  case AdapterId::EdgeListJson: return "edge-list-json";
  case AdapterId::RecipeString: return "recipe-string";
  case AdapterId::Interchange: return "interchange";
  }
  return "unknown";
}

AdapterId adapter_from_name(std::string_view name) {
  for (auto id : kAllAdapters)
    if (adapter_name(id) == name)
      return id;
  throw Error(ErrorCode::UnknownAdapter,
              "unknown adapter '" + std::string(name) + "'");
}

bool has_emitter(AdapterId id) noexcept {
  return id == AdapterId::Interchange || id == AdapterId::NestedMolJson ||
         id == AdapterId::MappingString;
}

ParseReport parse(AdapterId adapter, std::string_view input,
                  std::string source) {
  ParseReport report;
  report.source = std::move(source);
  require_utf8(input);

  switch (adapter) {
  case AdapterId::MappingString:
    for_each_record_line(input, [&](std::string_view line, std::size_t n) {
      report.routes.push_back(parse_mapping_line(line, n));
    });
    break;
  case AdapterId::RecipeString:
    for_each_record_line(input, [&](std::string_view line, std::size_t n) {
      report.routes.push_back(parse_recipe_line(line, n));
    });
    break;
  case AdapterId::Interchange:
    for_each_interchange_line(input, [&](const json &rec, std::size_t n) {
      report.routes.push_back(interchange_record_route(rec, n, nullptr, nullptr));
    });
    break;
  case AdapterId::NestedMolJson:
  case AdapterId::AlternatingJson:
  case AdapterId::EdgeListJson: {
    if (input.find_first_not_of(" \t\r\n") == std::string_view::npos)
      break;
    const json doc = parse_json_document(input);
    for (const auto &rec : json_records(doc)) {
      if (adapter == AdapterId::NestedMolJson)
        report.routes.push_back(parse_nested_record(rec, report.warnings));
      else if (adapter == AdapterId::AlternatingJson)
        report.routes.push_back(parse_alternating_record(rec));
      else
        report.routes.push_back(parse_edge_list_record(rec));
    }
    break;
  }
  }
  return report;
}

ordered_json to_interchange_json(const Route &route) {
  ordered_json rec;
  rec["target"] = route.target();
  ordered_json steps = ordered_json::array();
  for (const auto &s : route.steps()) {
    ordered_json step;
    step["product"] = s.product;
    step["reactants"] = s.reactants;
    if (!s.metadata.empty())
      step["metadata"] = s.metadata;
    steps.push_back(std::move(step));
  }
  rec["steps"] = std::move(steps);
  rec["metadata"] = ordered_json::object();
  for (const auto &[k, v] : route.metadata())
    rec["metadata"][k] = v;
  return rec;
}

Route from_interchange_json(const json &record) {
  return interchange_record_route(record, 0, nullptr, nullptr);
}

std::string emit_interchange(const std::vector<Route> &routes) {
  std::string out;
  for (const auto &r : routes) {
    out += to_interchange_json(r).dump();
    out += '\n';
  }
  return out;
}

std::string emit(AdapterId adapter, const std::vector<Route> &routes) {
  switch (adapter) {
  case AdapterId::Interchange:
    return emit_interchange(routes);
  case AdapterId::MappingString: {
    std::string out;
    for (const auto &r : routes) {
      out += emit_mapping_line(r);
      out += '\n';
    }
    return out;
  }
  case AdapterId::NestedMolJson: {
    ordered_json arr = ordered_json::array();
    for (const auto &r : routes) {
      auto node = emit_nested_node(r, r.target(), 0);
      if (!r.metadata().empty()) {
        node["metadata"] = ordered_json::object();
        for (const auto &[k, v] : r.metadata())
          node["metadata"][k] = v;
      }
      arr.push_back(std::move(node));
    }
    return arr.dump() + "\n";
  }
  default:
    throw Error(ErrorCode::UnsupportedEmitter,
                "no emitter for format '" + std::string(adapter_name(adapter)) +
                    "'");
  }
}

std::string convert(AdapterId from, AdapterId to, std::string_view input) {
  if (!has_emitter(to))
    throw Error(ErrorCode::UnsupportedEmitter,
                "no emitter for format '" + std::string(adapter_name(to)) + "'");
  return emit(to, parse(from, input).routes);
}

std::vector<InterchangeRecord> read_interchange_records(std::string_view input) {
  require_utf8(input);
  std::vector<InterchangeRecord> out;
  for_each_interchange_line(input, [&](const json &rec, std::size_t n) {
    InterchangeRecord r;
    r.line = n;
    try {
      r.route = interchange_record_route(rec, n, &r.target, &r.metadata);
    } catch (const ParseError &e) {
      if (e.code() != ErrorCode::ValidationError)
        throw;
      r.error = e.route_code();
      r.message = e.what();
    }
    out.push_back(std::move(r));
  });
  return out;
}

} // namespace routecast
