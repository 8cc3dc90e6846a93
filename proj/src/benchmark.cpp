#include "routecast/benchmark.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>
#include <set>

#include <json.hpp>

#include "routecast/adapters.hpp"
#include "routecast/error.hpp"
#include "routecast/rng.hpp"
#include "routecast/statistics.hpp"

namespace routecast {

using nlohmann::json;

namespace {

constexpr const char *kSchema = "routecast.benchmark/1";

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

int parse_int(std::string_view s, std::string_view what) {
  s = trim(s);
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw Error(ErrorCode::InvalidStrataSpec,
                "bad " + std::string(what) + " '" + std::string(s) + "'");
  return v;
}

std::string topology_label(const std::optional<Topology> &t) {
  return t ? std::string(to_string(*t)) : "any";
}

std::optional<Topology> topology_filter(std::string_view s) {
  if (s == "any")
    return std::nullopt;
  if (s == "linear")
    return Topology::Linear;
  if (s == "convergent")
    return Topology::Convergent;
  throw Error(ErrorCode::InvalidStrataSpec,
              "unknown topology filter '" + std::string(s) + "'");
}

StrataSpec per_length(std::string name, int lo, int hi,
                      std::optional<Topology> topo, int n) {
  StrataSpec spec{std::move(name), {}};
  for (int len = lo; len <= hi; ++len)
    spec.buckets.push_back({len, len, topo, n});
  return spec;
}

json stats_json(const RouteStats &s) {
  return {{"length", s.length},
          {"topology", std::string(to_string(s.topology))},
          {"n_steps", s.n_steps},
          {"n_leaves", s.n_leaves}};
}

RouteStats stats_from(const json &j) {
  RouteStats s;
  s.length = j.at("length").get<int>();
  s.topology = topology_from_string(j.at("topology").get<std::string>());
  s.n_steps = j.at("n_steps").get<int>();
  s.n_leaves = j.at("n_leaves").get<int>();
  return s;
}

json strata_json(const StrataSpec &spec) {
  json buckets = json::array();
  for (const auto &b : spec.buckets)
    buckets.push_back({{"min_length", b.min_length},
                       {"max_length", b.max_length},
                       {"topology", topology_label(b.topology)},
                       {"n_samples", b.n_samples}});
  return {{"name", spec.name}, {"buckets", std::move(buckets)}};
}

StrataSpec strata_from(const json &j) {
  StrataSpec spec;
  spec.name = j.at("name").get<std::string>();
  for (const auto &b : j.at("buckets"))
    spec.buckets.push_back(
        {b.at("min_length").get<int>(), b.at("max_length").get<int>(),
         topology_filter(b.at("topology").get<std::string>()),
         b.at("n_samples").get<int>()});
  return spec;
}

std::string default_target_id(const std::string &id, std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04zu", i + 1);
  return id + "-" + buf;
}

} // namespace

bool StrataBucket::matches(const RouteStats &stats) const noexcept {
  return stats.length >= min_length && stats.length <= max_length &&
         (!topology || *topology == stats.topology);
}

std::string StrataBucket::label() const {
  return "len" + std::to_string(min_length) + "-" + std::to_string(max_length) +
         "/" + topology_label(topology);
}

std::size_t StrataSpec::total_samples() const noexcept {
  std::size_t n = 0;
  for (const auto &b : buckets)
    n += static_cast<std::size_t>(std::max(b.n_samples, 0));
  return n;
}

void validate_strata(const StrataSpec &spec) {
  if (spec.buckets.empty())
    throw Error(ErrorCode::InvalidStrataSpec, "strata spec has no buckets");
  for (const auto &b : spec.buckets) {
    if (b.min_length < 1 || b.max_length < b.min_length)
      throw Error(ErrorCode::InvalidStrataSpec,
                  "bucket " + b.label() + " has an invalid length range");
    if (b.n_samples < 1)
      throw Error(ErrorCode::InvalidStrataSpec,
                  "bucket " + b.label() + " requests no samples");
  }
  for (std::size_t i = 0; i < spec.buckets.size(); ++i)
    for (std::size_t j = i + 1; j < spec.buckets.size(); ++j) {
      const auto &a = spec.buckets[i];
      const auto &b = spec.buckets[j];
      const bool lengths = a.min_length <= b.max_length &&
                           b.min_length <= a.max_length;
      const bool topos = !a.topology || !b.topology || *a.topology == *b.topology;
      if (lengths && topos)
        throw Error(ErrorCode::InvalidStrataSpec,
                    "buckets " + a.label() + " and " + b.label() + " overlap");
    }
}

StrataSpec parse_strata(std::string_view text) {
  StrataSpec spec{"custom", {}};
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string_view::npos)
      comma = text.size();
    const auto item = trim(text.substr(pos, comma - pos));
    pos = comma + 1;
    if (item.empty())
      continue;

    const auto c1 = item.find(':');
    const auto c2 = c1 == std::string_view::npos ? c1 : item.find(':', c1 + 1);
    if (c2 == std::string_view::npos)
      throw Error(ErrorCode::InvalidStrataSpec,
                  "expected min-max:topology:n, got '" + std::string(item) + "'");
    const auto range = item.substr(0, c1);
    StrataBucket b;
    if (const auto dash = range.find('-'); dash != std::string_view::npos) {
      b.min_length = parse_int(range.substr(0, dash), "length");
      b.max_length = parse_int(range.substr(dash + 1), "length");
    } else {
      b.min_length = b.max_length = parse_int(range, "length");
    }
    b.topology = topology_filter(trim(item.substr(c1 + 1, c2 - c1 - 1)));
    b.n_samples = parse_int(item.substr(c2 + 1), "sample count");
    spec.buckets.push_back(b);
  }
  validate_strata(spec);
  return spec;
}

std::string format_strata(const StrataSpec &spec) {
  std::string out;
  for (const auto &b : spec.buckets) {
    if (!out.empty())
      out += ',';
    out += std::to_string(b.min_length) + "-" + std::to_string(b.max_length) +
           ":" + topology_label(b.topology) + ":" + std::to_string(b.n_samples);
  }
  return out;
}

StrataSpec strata_preset(std::string_view name) {
  if (name == "mkt-lin-500")
    return per_length("mkt-lin-500", 2, 6, Topology::Linear, 100);
  if (name == "mkt-cnv-160")
    return per_length("mkt-cnv-160", 2, 5, Topology::Convergent, 40);
  if (name == "ref-lin-600")
    return per_length("ref-lin-600", 2, 7, Topology::Linear, 100);
  if (name == "ref-cnv-400")
    return per_length("ref-cnv-400", 2, 5, Topology::Convergent, 100);
  if (name == "ref-lng-84")
    return per_length("ref-lng-84", 8, 10, std::nullopt, 28);
  throw Error(ErrorCode::InvalidStrataSpec,
              "unknown strata preset '" + std::string(name) + "'");
}

std::vector<std::string> strata_preset_names() {
  return {"mkt-lin-500", "mkt-cnv-160", "ref-lin-600", "ref-cnv-400",
          "ref-lng-84"};
}

std::vector<SampledRoute> stratified_sample(const std::vector<Route> &pool,
                                            const StrataSpec &spec,
                                            std::uint64_t seed) {
  validate_strata(spec);
  std::vector<std::vector<std::size_t>> members(spec.buckets.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool[i].is_degenerate())
      continue;
    const auto stats = route_stats(pool[i]);
    for (std::size_t b = 0; b < spec.buckets.size(); ++b)
      if (spec.buckets[b].matches(stats)) {
        members[b].push_back(i);
        break;
      }
  }

  std::vector<SampledRoute> out;
  out.reserve(spec.total_samples());
  for (std::size_t b = 0; b < spec.buckets.size(); ++b) {
    auto &idx = members[b];
    const auto want = static_cast<std::size_t>(spec.buckets[b].n_samples);
    if (idx.size() < want)
      throw Error(ErrorCode::InsufficientPool,
                  "bucket " + spec.buckets[b].label() + " needs " +
                      std::to_string(want) + " routes, pool has " +
                      std::to_string(idx.size()));
    // Partial Fisher-Yates over the ascending index list.
    auto rng = Xoshiro256ss::for_stream(seed, b);
    for (std::size_t i = 0; i < want; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(want);
    std::sort(idx.begin(), idx.end());
    for (std::size_t i : idx)
      out.push_back({i, b, pool[i]});
  }
  return out;
}

StabilityTable seed_stability(const std::vector<Route> &pool,
                              const StrataSpec &spec,
                              const std::vector<std::uint64_t> &seeds,
                              const ReferenceScorer &scorer) {
  if (seeds.size() < 2)
    throw Error(ErrorCode::DegenerateInput,
                "seed stability needs at least two seeds");
  StabilityTable table;
  std::vector<std::vector<double>> matrix;
  for (std::uint64_t s : seeds) {
    const auto metrics = scorer(stratified_sample(pool, spec, s));
    table.rows.push_back({s, metrics, 0.0});
    matrix.emplace_back(metrics.begin(), metrics.end());
  }
  const auto dev = deviation_score(matrix);
  for (std::size_t i = 0; i < table.rows.size(); ++i)
    table.rows[i].score = dev.scores[i];
  table.chosen_index = dev.argmin;
  table.chosen_seed = seeds[dev.argmin];
  return table;
}

const BenchmarkTarget *
BenchmarkDefinition::find(std::string_view target_id) const {
  for (const auto &t : targets)
    if (t.target_id == target_id)
      return &t;
  return nullptr;
}

std::vector<SampledRoute> as_samples(const std::vector<Route> &routes) {
  std::vector<SampledRoute> out;
  out.reserve(routes.size());
  for (std::size_t i = 0; i < routes.size(); ++i)
    out.push_back({i, 0, routes[i]});
  return out;
}

BenchmarkDefinition build_benchmark(const std::vector<SampledRoute> &samples,
                                    const StockSet &stock, std::string id,
                                    std::uint64_t seed,
                                    const BuildOptions &options) {
  if (options.strata)
    validate_strata(*options.strata);
  BenchmarkDefinition def;
  def.id = std::move(id);
  def.stock = {stock.name(), stock.content_hash(), stock.canonicalizer_id()};
  def.seed = seed;
  def.strata = options.strata;
  def.provenance = options.provenance;

  std::set<std::string> seen;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto &s = samples[i];
    BenchmarkTarget t{{}, s.route, {}, {}, {}, s.pool_index};
    const auto it = s.route.metadata().find("target_id");
    t.target_id = it != s.route.metadata().end()
                      ? it->second
                      : default_target_id(def.id, i);
    if (!seen.insert(t.target_id).second)
      throw Error(ErrorCode::InvalidArtifact,
                  "duplicate target id '" + t.target_id + "'");
    if (s.route.is_degenerate())
      throw Error(ErrorCode::InvalidArtifact,
                  "target " + t.target_id + " has a degenerate reference");
    try {
      t.ground_truth =
          expand_ground_truths(s.route, stock, options.pruning_cap);
    } catch (const Error &e) {
      throw Error(e.code(), "target " + t.target_id + ": " + e.what());
    }
    t.stats = route_stats(s.route);
    if (options.strata) {
      if (s.bucket >= options.strata->buckets.size())
        throw Error(ErrorCode::InvalidArtifact,
                    "target " + t.target_id + " has an unknown bucket");
      t.bucket = options.strata->buckets[s.bucket].label();
    }
    def.targets.push_back(std::move(t));
  }
  return def;
}

std::string serialize_benchmark(const BenchmarkDefinition &def) {
  json targets = json::array();
  for (const auto &t : def.targets) {
    json keys = json::array();
    for (const auto &k : t.ground_truth.keys)
      keys.push_back(k.key);
    json entry = {
        {"target_id", t.target_id},
        {"target", t.reference.target()},
        {"route", json::parse(to_interchange_json(t.reference).dump())},
        {"original_key", t.ground_truth.original_key.key},
        {"keys", std::move(keys)},
        {"n_variants", t.ground_truth.n_variants},
        {"stats", stats_json(t.stats)},
        {"bucket", t.bucket},
    };
    if (t.pool_index)
      entry["pool_index"] = *t.pool_index;
    targets.push_back(std::move(entry));
  }
  json doc = {
      {"schema", kSchema},
      {"id", def.id},
      {"seed", def.seed},
      {"provenance", def.provenance},
      {"stock",
       {{"name", def.stock.name},
        {"sha256", def.stock.sha256},
        {"canonicalizer", def.stock.canonicalizer}}},
      {"targets", std::move(targets)},
  };
  if (def.strata)
    doc["strata"] = strata_json(*def.strata);
  return doc.dump(2) + "\n";
}

BenchmarkDefinition parse_benchmark(std::string_view text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("schema").get<std::string>() != kSchema)
      throw Error(ErrorCode::InvalidArtifact,
                  "unsupported benchmark schema '" +
                      doc.at("schema").get<std::string>() + "'");
    BenchmarkDefinition def;
    def.id = doc.at("id").get<std::string>();
    def.seed = doc.at("seed").get<std::uint64_t>();
    def.provenance = doc.value("provenance", "");
    const auto &st = doc.at("stock");
    def.stock = {st.at("name").get<std::string>(),
                 st.at("sha256").get<std::string>(),
                 st.at("canonicalizer").get<std::string>()};
    if (doc.contains("strata"))
      def.strata = strata_from(doc.at("strata"));
    for (const auto &e : doc.at("targets")) {
      BenchmarkTarget t{e.at("target_id").get<std::string>(),
                        from_interchange_json(e.at("route")),
                        {}, {}, {}, std::nullopt};
      if (t.reference.target() != e.at("target").get<std::string>())
        throw Error(ErrorCode::InvalidArtifact,
                    "target " + t.target_id + ": route root differs from target");
      t.ground_truth.target = t.reference.target();
      t.ground_truth.original_key = {e.at("original_key").get<std::string>()};
      for (const auto &k : e.at("keys"))
        t.ground_truth.keys.insert({k.get<std::string>()});
      t.ground_truth.n_variants = e.at("n_variants").get<int>();
      t.stats = stats_from(e.at("stats"));
      t.bucket = e.value("bucket", "");
      if (e.contains("pool_index"))
        t.pool_index = e.at("pool_index").get<std::size_t>();
      def.targets.push_back(std::move(t));
    }
    return def;
  } catch (const json::exception &e) {
    throw Error(ErrorCode::InvalidArtifact,
                std::string("malformed benchmark: ") + e.what());
  } catch (const Error &e) {
    if (e.code() == ErrorCode::InvalidArtifact)
      throw;
    throw Error(ErrorCode::InvalidArtifact,
                std::string("malformed benchmark: ") + e.what());
  }
}

BenchmarkVerification verify_benchmark(const BenchmarkDefinition &def,
                                       const StockSet &stock) {
  BenchmarkVerification v;
  auto problem = [&](std::string msg) { v.problems.push_back(std::move(msg)); };

  if (def.stock.sha256 != stock.content_hash())
    problem("stock digest " + def.stock.sha256 + " does not match loaded stock " +
            stock.content_hash());
  if (def.stock.canonicalizer != stock.canonicalizer_id())
    problem("stock canonicalizer '" + def.stock.canonicalizer +
            "' differs from loaded '" + stock.canonicalizer_id() + "'");

  std::set<std::string> ids;
  std::map<std::string, int> bucket_counts;
  for (const auto &t : def.targets) {
    const std::string who = "target " + t.target_id;
    if (!ids.insert(t.target_id).second)
      problem(who + ": duplicate id");
    if (route_stats(t.reference) != t.stats)
      problem(who + ": recorded route statistics are stale");
    try {
      const auto fresh = expand_ground_truths(t.reference, stock);
      if (fresh.original_key != t.ground_truth.original_key)
        problem(who + ": original key differs from the reference route");
      if (fresh.keys != t.ground_truth.keys)
        problem(who + ": embedded ground-truth keys differ from recomputation");
      if (fresh.n_variants != t.ground_truth.n_variants)
        problem(who + ": n_variants differs from recomputation");
    } catch (const Error &e) {
      problem(who + ": " + e.what());
    }
    ++bucket_counts[t.bucket];
  }

  if (def.strata) {
    for (const auto &b : def.strata->buckets) {
      const int have = bucket_counts[b.label()];
      if (have != b.n_samples)
        problem("bucket " + b.label() + " holds " + std::to_string(have) +
                " targets, expected " + std::to_string(b.n_samples));
    }
    for (const auto &t : def.targets) {
      const auto *match = [&]() -> const StrataBucket * {
        for (const auto &b : def.strata->buckets)
          if (b.label() == t.bucket)
            return &b;
        return nullptr;
      }();
      if (!match)
        problem("target " + t.target_id + ": unknown bucket '" + t.bucket + "'");
      else if (!match->matches(t.stats))
        problem("target " + t.target_id + ": route does not fit bucket " +
                t.bucket);
    }
  }
  return v;
}

BenchmarkDefinition load_benchmark(std::string_view text,
                                   const StockSet &stock) {
  auto def = parse_benchmark(text);
  const auto v = verify_benchmark(def, stock);
  if (!v.ok()) {
    std::string msg = "benchmark '" + def.id + "' failed verification:";
    for (const auto &p : v.problems)
      msg += "\n  " + p;
    throw Error(ErrorCode::BenchmarkVerificationFailed, msg);
  }
  return def;
}

} // namespace routecast
