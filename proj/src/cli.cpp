#include "routecast/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "routecast/adapters.hpp"
#include "routecast/benchmark.hpp"
#include "routecast/evaluation.hpp"
#include "routecast/provenance.hpp"
#include "routecast/rng.hpp"
#include "routecast/stock.hpp"

namespace routecast::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Context {
  fs::path root = ".";
  bool no_manifest = false;
  std::ostream *out = nullptr;
  std::ostream *err = nullptr;

  void warn(const std::string &msg) const { *err << "warning: " << msg << "\n"; }
};

std::string read_file(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::IoError, "cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path &p, std::string_view bytes) {
  if (p.has_parent_path())
    fs::create_directories(p.parent_path());
  std::ofstream o(p, std::ios::binary | std::ios::trunc);
  if (!o)
    throw Error(ErrorCode::IoError, "cannot write " + p.string());
  o.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!o)
    throw Error(ErrorCode::IoError, "short write to " + p.string());
}

std::string dump(const json &j) { return j.dump(2) + "\n"; }

// Writes the stage manifest, chaining to whichever manifest produced the
// inputs.
void record(const Context &ctx, std::string_view stage,
            const std::vector<fs::path> &inputs,
            const std::vector<fs::path> &outputs) {
  if (ctx.no_manifest)
    return;
  std::optional<std::string> parent;
  if (auto p = find_producing_manifest(ctx.root, inputs))
    parent = p->sha256;
  WriteManifestOptions opts;
  opts.root = ctx.root;
  const auto w = write_manifest(stage, inputs, outputs, parent, opts);
  *ctx.out << "manifest: " << w.path.generic_string() << " (" << w.sha256
           << ")\n";
}

std::optional<std::string> producing_digest(const Context &ctx,
                                            const fs::path &input) {
  if (auto p = find_producing_manifest(ctx.root, {input}))
    return p->sha256;
  return std::nullopt;
}

StockSet open_stock(const fs::path &path, const std::string &canon,
                    const Context &ctx) {
  auto stock = load_stock(path, canon);
  for (const auto &w : stock.warnings)
    ctx.warn(path.string() + ": " + w);
  return stock;
}

std::vector<Route> read_pool(const fs::path &path) {
  return parse(AdapterId::Interchange, read_file(path), path.string()).routes;
}

StrataSpec choose_strata(const std::string &preset, const std::string &strata) {
  if (!preset.empty() && !strata.empty())
    throw UsageError("--preset and --strata are mutually exclusive");
  if (!preset.empty())
    return strata_preset(preset);
  if (!strata.empty())
    return parse_strata(strata);
  throw UsageError("one of --preset or --strata is required");
}

std::string fmt_fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

// ---- ingest -------------------------------------------------------------

struct IngestArgs {
  std::string adapter;
  fs::path in, out, benchmark;
  std::string model_id;
};

int cmd_ingest(const Context &ctx, const IngestArgs &a) {
  const auto adapter = adapter_from_name(a.adapter);
  auto report = parse(adapter, read_file(a.in), a.in.string());
  for (const auto &w : report.warnings)
    ctx.warn(w);

  std::map<std::string, std::string> id_of_token;
  std::vector<fs::path> inputs{a.in};
  if (!a.benchmark.empty()) {
    const auto def = parse_benchmark(read_file(a.benchmark));
    for (const auto &t : def.targets)
      if (!id_of_token.emplace(t.reference.target(), t.target_id).second)
        ctx.warn("target token " + t.reference.target() +
                 " appears more than once in the benchmark; using " +
                 id_of_token[t.reference.target()]);
    inputs.push_back(a.benchmark);
  }

  std::map<std::string, int> next_rank;
  std::size_t unmatched = 0;
  std::vector<Route> routes;
  routes.reserve(report.routes.size());
  for (const auto &r : report.routes) {
    Metadata meta = r.metadata();
    if (!a.benchmark.empty() && !meta.contains("target_id")) {
      const auto it = id_of_token.find(r.target());
      if (it != id_of_token.end())
        meta["target_id"] = it->second;
      else {
        meta["target_id"] = r.target();
        ++unmatched;
      }
    }
    if (const auto tid = meta.find("target_id"); tid != meta.end()) {
      const int rank = ++next_rank[tid->second];
      meta.try_emplace("rank", std::to_string(rank));
    }
    if (!a.model_id.empty())
      meta["model_id"] = a.model_id;
    routes.push_back(r.with_metadata(std::move(meta)));
  }
  if (unmatched)
    ctx.warn(std::to_string(unmatched) +
             " route(s) target molecules absent from the benchmark");

  write_file(a.out, emit_interchange(routes));
  *ctx.out << "ingested " << routes.size() << " route(s) from " << a.in.string()
           << " -> " << a.out.string() << "\n";
  record(ctx, "ingest", inputs, {a.out});
  return kOk;
}

// ---- convert ------------------------------------------------------------

struct ConvertArgs {
  std::string from, to;
  fs::path in, out;
};

int cmd_convert(const Context &ctx, const ConvertArgs &a) {
  const auto from = adapter_from_name(a.from);
  const auto to = adapter_from_name(a.to);
  if (!has_emitter(to))
    throw UsageError("no emitter for format '" + a.to + "'");
  auto report = parse(from, read_file(a.in), a.in.string());
  for (const auto &w : report.warnings)
    ctx.warn(w);
  write_file(a.out, emit(to, report.routes));
  *ctx.out << "converted " << report.routes.size() << " route(s) " << a.from
           << " -> " << a.to << "\n";
  record(ctx, "convert", {a.in}, {a.out});
  return kOk;
}

// ---- sample -------------------------------------------------------------

struct SampleArgs {
  fs::path pool, out;
  std::string preset, strata;
  std::uint64_t seed = 0;
};

int cmd_sample(const Context &ctx, const SampleArgs &a) {
  const auto spec = choose_strata(a.preset, a.strata);
  const auto pool = read_pool(a.pool);
  const auto sample = stratified_sample(pool, spec, a.seed);
  std::vector<Route> routes;
  for (const auto &s : sample) {
    Metadata meta = s.route.metadata();
    meta["pool_index"] = std::to_string(s.pool_index);
    meta["bucket"] = spec.buckets[s.bucket].label();
    routes.push_back(s.route.with_metadata(std::move(meta)));
  }
  write_file(a.out, emit_interchange(routes));
  *ctx.out << "sampled " << routes.size() << " of " << pool.size()
           << " route(s) with seed " << a.seed << "\n";
  record(ctx, "sample", {a.pool}, {a.out});
  return kOk;
}

// ---- stability ----------------------------------------------------------

struct StabilityArgs {
  fs::path pool, stock, predictions, out;
  std::string preset, strata, canonicalizer = "identity";
  std::optional<std::uint64_t> seed;
  int n_seeds = 15;
  std::vector<std::uint64_t> seeds;
};

// Reference-model predictions keyed by target molecule; rank metadata
// orders them when present, file order otherwise.
std::map<std::string, std::vector<RawPrediction>>
predictions_by_token(std::string_view text) {
  std::map<std::string, std::vector<std::pair<long long, RawPrediction>>> tmp;
  for (const auto &rec : read_interchange_records(text)) {
    auto &list = tmp[rec.target];
    long long rank = static_cast<long long>(list.size()) + 1;
    if (const auto it = rec.metadata.find("rank"); it != rec.metadata.end()) {
      try {
        rank = std::stoll(it->second);
      } catch (const std::exception &) {
      }
    }
    list.emplace_back(rank, rec.route ? RawPrediction::ok(*rec.route)
                                      : RawPrediction::failed(rec.error,
                                                              rec.message));
  }
  std::map<std::string, std::vector<RawPrediction>> out;
  for (auto &[token, list] : tmp) {
    std::stable_sort(list.begin(), list.end(), [](const auto &x, const auto &y) {
      return x.first < y.first;
    });
    auto &dst = out[token];
    for (auto &p : list)
      dst.push_back(std::move(p.second));
  }
  return out;
}

int cmd_stability(const Context &ctx, const StabilityArgs &a) {
  const auto spec = choose_strata(a.preset, a.strata);
  std::vector<std::uint64_t> seeds = a.seeds;
  if (seeds.empty()) {
    if (!a.seed)
      throw UsageError("stability needs --seed or --seeds");
    if (a.n_seeds < 2)
      throw UsageError("--n-seeds must be at least 2");
    for (int i = 0; i < a.n_seeds; ++i)
      seeds.push_back(*a.seed + static_cast<std::uint64_t>(i));
  } else if (a.seed) {
    throw UsageError("--seed and --seeds are mutually exclusive");
  }

  const auto pool = read_pool(a.pool);
  const auto stock = open_stock(a.stock, a.canonicalizer, ctx);
  const auto by_token = predictions_by_token(read_file(a.predictions));
  const std::vector<Constraint> constraints{stock_termination_constraint(stock)};
  const std::vector<RawPrediction> none;
  std::map<std::size_t, GroundTruthSet> gts_cache;

  const auto scorer = [&](const std::vector<SampledRoute> &sample) {
    ReferenceMetrics m{0.0, 0.0, 0.0};
    for (const auto &s : sample) {
      const auto it = by_token.find(s.route.target());
      const auto &raw = it == by_token.end() ? none : it->second;
      auto structural = structural_filter(raw, s.route.target());
      m[0] += str_metric(structural.routes, stock) ? 1.0 : 0.0;
      const auto filtered = constraint_filter(std::move(structural), constraints);
      auto g = gts_cache.find(s.pool_index);
      if (g == gts_cache.end())
        g = gts_cache.emplace(s.pool_index, expand_ground_truths(s.route, stock))
                .first;
      const auto rank = first_match_rank(filtered.routes, g->second);
      m[1] += rank && *rank <= 1 ? 1.0 : 0.0;
      m[2] += rank && *rank <= 10 ? 1.0 : 0.0;
    }
    const double n = sample.empty() ? 1.0 : static_cast<double>(sample.size());
    for (auto &v : m)
      v /= n;
    return m;
  };

  const auto table = seed_stability(pool, spec, seeds, scorer);
  json rows = json::array();
  for (const auto &r : table.rows)
    rows.push_back({{"seed", r.seed},
                    {"str", r.metrics[0]},
                    {"top1", r.metrics[1]},
                    {"top10", r.metrics[2]},
                    {"score", r.score}});
  const json doc = {{"strata", format_strata(spec)},
                    {"strata_name", spec.name},
                    {"rows", std::move(rows)},
                    {"chosen_index", table.chosen_index},
                    {"chosen_seed", table.chosen_seed}};
  write_file(a.out, dump(doc));
  *ctx.out << "chosen seed " << table.chosen_seed << " (deviation "
           << table.rows[table.chosen_index].score << ") among " << seeds.size()
           << " seeds\n";
  record(ctx, "stability", {a.pool, a.stock, a.predictions}, {a.out});
  return kOk;
}

// ---- build-benchmark ----------------------------------------------------

struct BuildArgs {
  fs::path pool, stock, out;
  std::string id, preset, strata, canonicalizer = "identity";
  std::uint64_t seed = 0;
};

int cmd_build(const Context &ctx, const BuildArgs &a) {
  const auto pool = read_pool(a.pool);
  const auto stock = open_stock(a.stock, a.canonicalizer, ctx);
  BuildOptions opts;
  std::vector<SampledRoute> samples;
  if (!a.preset.empty() || !a.strata.empty()) {
    opts.strata = choose_strata(a.preset, a.strata);
    samples = stratified_sample(pool, *opts.strata, a.seed);
  } else {
    for (const auto &r : pool)
      if (r.is_degenerate())
        throw Error(ErrorCode::InvalidArtifact,
                    "pool contains a degenerate route for " + r.target());
    samples = as_samples(pool);
  }
  opts.provenance = producing_digest(ctx, a.pool).value_or("");
  const auto def = build_benchmark(samples, stock, a.id, a.seed, opts);
  write_file(a.out, serialize_benchmark(def));

  std::size_t variants = 0;
  for (const auto &t : def.targets)
    variants += static_cast<std::size_t>(t.ground_truth.n_variants);
  *ctx.out << "benchmark " << def.id << ": " << def.targets.size()
           << " target(s), " << variants << " pruned variant(s)\n";
  record(ctx, "build-benchmark", {a.pool, a.stock}, {a.out});
  return kOk;
}

// ---- evaluate -----------------------------------------------------------

struct EvaluateArgs {
  fs::path benchmark, predictions, stock, timing, out;
  std::string canonicalizer = "identity", model_id;
  std::vector<int> k{1, 10};
  std::uint64_t seed = 0;
  int resamples = kDefaultResamples;
  bool single_gt = false;
  std::optional<double> rate;
};

int cmd_evaluate(const Context &ctx, const EvaluateArgs &a) {
  if (a.resamples < 1)
    throw UsageError("--resamples must be at least 1");
  for (int k : a.k)
    if (k < 1)
      throw UsageError("--k values must be at least 1");
  const auto stock = open_stock(a.stock, a.canonicalizer, ctx);
  const auto def = load_benchmark(read_file(a.benchmark), stock);
  const auto preds = load_predictions(read_file(a.predictions), a.model_id);

  EvalOptions opts;
  opts.k_values = a.k;
  opts.stats_seed = a.seed;
  opts.resamples = a.resamples;
  opts.mode = a.single_gt ? GroundTruthMode::Single : GroundTruthMode::Multi;
  opts.rate_usd_per_hour = a.rate;
  std::vector<fs::path> inputs{a.benchmark, a.predictions, a.stock};
  if (!a.timing.empty()) {
    opts.timing = parse_timing(read_file(a.timing));
    inputs.push_back(a.timing);
  }

  const auto report = evaluate_benchmark(def, preds, stock, opts);
  for (const auto &w : report.warnings)
    ctx.warn(w);
  write_file(a.out, dump(report_to_json(report)));
  for (const auto &[metric, s] : report.aggregates)
    *ctx.out << metric << ": " << fmt_fixed(s.mean, 4) << " [" << fmt_fixed(s.ci_lo, 4)
             << ", " << fmt_fixed(s.ci_hi, 4) << "]"
             << (s.reliable ? "" : " (unreliable)") << "\n";
  if (report.cost)
    *ctx.out << "cost: $" << fmt_fixed(report.cost->total_usd, 4) << "\n";
  record(ctx, "evaluate", inputs, {a.out});
  return kOk;
}

// ---- compare ------------------------------------------------------------

struct CompareArgs {
  fs::path a, b, out;
  std::string metric = "top10";
  std::uint64_t seed = 0;
  int resamples = kDefaultResamples;
};

int cmd_compare(const Context &ctx, const CompareArgs &a) {
  if (a.resamples < 1)
    throw UsageError("--resamples must be at least 1");
  const auto ra = report_from_json(json::parse(read_file(a.a)));
  const auto rb = report_from_json(json::parse(read_file(a.b)));
  const auto d = compare_reports(ra, rb, a.metric, a.seed, a.resamples);
  const json doc = {{"metric", a.metric},
                    {"model_a", ra.model_id},
                    {"model_b", rb.model_id},
                    {"benchmark_id", ra.benchmark_id},
                    {"mean_diff", d.mean_diff},
                    {"ci_lo", d.lo},
                    {"ci_hi", d.hi},
                    {"significant", d.significant},
                    {"n", d.n},
                    {"seed", a.seed},
                    {"resamples", a.resamples}};
  *ctx.out << dump(doc);
  if (!a.out.empty()) {
    write_file(a.out, dump(doc));
    record(ctx, "compare", {a.a, a.b}, {a.out});
  }
  return kOk;
}

// ---- report -------------------------------------------------------------

struct ReportArgs {
  std::vector<fs::path> reports, stability;
  fs::path out_dir;
  std::string metric = "top10";
};

json metrics_row(const MetricTable &t) {
  json out = json::object();
  for (const auto &[k, s] : t)
    out[k] = {{"mean", s.mean}, {"ci_lo", s.ci_lo}, {"ci_hi", s.ci_hi},
              {"reliable", s.reliable}};
  return out;
}

std::string pct_cell(const MetricTable &t, const std::string &metric) {
  const auto it = t.find(metric);
  if (it == t.end())
    return "-";
  const auto &s = it->second;
  return fmt_fixed(100 * s.mean, 1) + " [" + fmt_fixed(100 * s.ci_lo, 1) + ", " +
         fmt_fixed(100 * s.ci_hi, 1) + "]" + (s.reliable ? "" : "*");
}

int cmd_report(const Context &ctx, const ReportArgs &a) {
  std::vector<BenchmarkReport> reports;
  for (const auto &p : a.reports)
    reports.push_back(report_from_json(json::parse(read_file(p))));

  const auto score = [&](const BenchmarkReport &r) {
    const auto it = r.aggregates.find(a.metric);
    return it == r.aggregates.end() ? -1.0 : it->second.mean;
  };
  std::vector<std::size_t> order(reports.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const auto &rx = reports[x];
    const auto &ry = reports[y];
    if (rx.benchmark_id != ry.benchmark_id)
      return rx.benchmark_id < ry.benchmark_id;
    if (score(rx) != score(ry))
      return score(rx) > score(ry);
    return rx.model_id < ry.model_id;
  });

  json rows = json::array();
  json stratified = json::object();
  std::string md = "# Leaderboard\n\nSorted by " + a.metric +
                   ". Percent with 95% bootstrap interval; * marks an "
                   "unreliable estimate.\n";
  std::string current;
  std::vector<std::string> columns = {"str"};
  for (const auto &r : reports)
    for (const auto &[m, _] : r.aggregates)
      if (std::find(columns.begin(), columns.end(), m) == columns.end())
        columns.push_back(m);
  std::sort(columns.begin() + 1, columns.end(), [](const auto &x, const auto &y) {
    return std::stoi(x.substr(3)) < std::stoi(y.substr(3));
  });

  for (std::size_t i : order) {
    const auto &r = reports[i];
    rows.push_back({{"benchmark_id", r.benchmark_id},
                    {"model_id", r.model_id},
                    {"ground_truth", r.mode == GroundTruthMode::Multi ? "multi"
                                                                        : "single"},
                    {"n_targets", r.per_target.size()},
                    {"metrics", metrics_row(r.aggregates)},
                    {"cost_usd", r.cost ? json(r.cost->total_usd) : json(nullptr)}});
    json strata = json::object();
    for (const auto &[name, t] : r.stratified)
      strata[name] = metrics_row(t);
    stratified[r.benchmark_id][r.model_id] = std::move(strata);

    if (r.benchmark_id != current) {
      current = r.benchmark_id;
      md += "\n## " + current + "\n\n| Model |";
      for (const auto &c : columns)
        md += " " + c + " |";
      md += " Cost (USD) |\n|---|";
      for (std::size_t c = 0; c < columns.size(); ++c)
        md += "---|";
      md += "---|\n";
    }
    md += "| " + r.model_id + " |";
    for (const auto &c : columns)
      md += " " + pct_cell(r.aggregates, c) + " |";
    md += " " + (r.cost ? fmt_fixed(r.cost->total_usd, 4) : std::string("-")) +
          " |\n";
  }

  json points = json::array();
  for (const auto &p : pareto_points(reports, a.metric))
    points.push_back({{"model_id", p.model_id},
                      {"benchmark_id", p.benchmark_id},
                      {"accuracy", p.accuracy},
                      {"ci_lo", p.ci_lo},
                      {"ci_hi", p.ci_hi},
                      {"total_usd", p.total_usd},
                      {"on_frontier", p.on_frontier}});

  std::vector<fs::path> outputs{a.out_dir / "leaderboard.json",
                                a.out_dir / "leaderboard.md",
                                a.out_dir / "stratified.json",
                                a.out_dir / "pareto.json"};
  write_file(outputs[0], dump({{"metric", a.metric}, {"rows", std::move(rows)}}));
  write_file(outputs[1], md);
  write_file(outputs[2], dump(stratified));
  write_file(outputs[3],
             dump({{"metric", a.metric}, {"points", std::move(points)}}));

  if (!a.stability.empty()) {
    json tables = json::array();
    for (const auto &p : a.stability) {
      json t = json::parse(read_file(p));
      t["source"] = p.filename().generic_string();
      tables.push_back(std::move(t));
    }
    outputs.push_back(a.out_dir / "stability.json");
    write_file(outputs.back(), dump({{"tables", std::move(tables)}}));
  }

  *ctx.out << "report: " << reports.size() << " model run(s) -> "
           << a.out_dir.string() << "\n";
  std::vector<fs::path> inputs = a.reports;
  inputs.insert(inputs.end(), a.stability.begin(), a.stability.end());
  record(ctx, "report", inputs, outputs);
  return kOk;
}

// ---- verify -------------------------------------------------------------

struct VerifyArgs {
  fs::path manifest;
  bool all = false;
};

int cmd_verify(const Context &ctx, const VerifyArgs &a) {
  if (a.all == !a.manifest.empty())
    throw UsageError("verify takes exactly one of --manifest or --all");
  const auto report = a.all ? verify_all(ctx.root) : verify_chain(a.manifest);
  for (const auto &e : report.entries) {
    *ctx.out << to_string(e.issue) << ": " << e.manifest;
    if (!e.file.empty())
      *ctx.out << " file=" << e.file;
    if (!e.expected.empty())
      *ctx.out << " expected=" << e.expected;
    if (!e.actual.empty())
      *ctx.out << " actual=" << e.actual;
    *ctx.out << "\n";
  }
  *ctx.out << (report.ok() ? "OK" : "FAILED") << ": "
           << report.manifests.size() << " manifest(s), " << report.files_checked
           << " file(s) checked, " << report.entries.size() << " issue(s)\n";
  return report.ok() ? kOk : kValidationFailure;
}

bool is_usage_code(ErrorCode c) {
  return c == ErrorCode::UnknownAdapter || c == ErrorCode::InvalidStrataSpec ||
         c == ErrorCode::UnsupportedEmitter;
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out,
        std::ostream &err) {
  CLI::App app{"Retrosynthesis route evaluation engine", "routecast"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  Context ctx;
  ctx.out = &out;
  ctx.err = &err;
  std::string root = ".";
  const auto common = [&](CLI::App *sub) {
    sub->add_option("--root", root, "Directory holding provenance/")
        ->capture_default_str();
    sub->add_flag("--no-manifest", ctx.no_manifest, "Skip the stage manifest");
  };

  IngestArgs ingest;
  auto *s_ingest = app.add_subcommand("ingest", "Parse model output into interchange");
  s_ingest->add_option("--adapter", ingest.adapter, "Input format")->required();
  s_ingest->add_option("--in", ingest.in, "Input file")->required();
  s_ingest->add_option("--out", ingest.out, "Interchange output")->required();
  s_ingest->add_option("--benchmark", ingest.benchmark,
                       "Assign target_id/rank from this benchmark");
  s_ingest->add_option("--model-id", ingest.model_id, "Record model_id metadata");
  common(s_ingest);

  ConvertArgs convert;
  auto *s_convert = app.add_subcommand("convert", "Convert between route formats");
  s_convert->add_option("--from", convert.from, "Input format")->required();
  s_convert->add_option("--to", convert.to, "Output format")->required();
  s_convert->add_option("--in", convert.in, "Input file")->required();
  s_convert->add_option("--out", convert.out, "Output file")->required();
  common(s_convert);

  SampleArgs sample;
  auto *s_sample = app.add_subcommand("sample", "Stratified sample of a route pool");
  s_sample->add_option("--pool", sample.pool, "Interchange route pool")->required();
  s_sample->add_option("--preset", sample.preset, "Strata preset");
  s_sample->add_option("--strata", sample.strata, "Strata spec min-max:topology:n,...");
  s_sample->add_option("--seed", sample.seed, "Sampling seed")->required();
  s_sample->add_option("--out", sample.out, "Interchange output")->required();
  common(s_sample);

  StabilityArgs stab;
  auto *s_stab = app.add_subcommand("stability", "Seed-stability selection");
  s_stab->add_option("--pool", stab.pool, "Interchange route pool")->required();
  s_stab->add_option("--stock", stab.stock, "Stock file")->required();
  s_stab->add_option("--predictions", stab.predictions,
                     "Reference-model predictions (interchange)")
      ->required();
  s_stab->add_option("--preset", stab.preset, "Strata preset");
  s_stab->add_option("--strata", stab.strata, "Strata spec");
  s_stab->add_option("--seed", stab.seed, "First of consecutive seeds");
  s_stab->add_option("--n-seeds", stab.n_seeds, "Number of seeds with --seed")
      ->capture_default_str();
  s_stab->add_option("--seeds", stab.seeds, "Explicit seed list")->delimiter(',');
  s_stab->add_option("--canonicalizer", stab.canonicalizer, "Stock canonicalizer")
      ->capture_default_str();
  s_stab->add_option("--out", stab.out, "Stability table output")->required();
  common(s_stab);

  BuildArgs build;
  auto *s_build = app.add_subcommand("build-benchmark", "Freeze a benchmark definition");
  s_build->add_option("--pool", build.pool, "Interchange route pool")->required();
  s_build->add_option("--stock", build.stock, "Stock file")->required();
  s_build->add_option("--id", build.id, "Benchmark id")->required();
  s_build->add_option("--seed", build.seed, "Sampling seed")->required();
  s_build->add_option("--preset", build.preset, "Strata preset");
  s_build->add_option("--strata", build.strata, "Strata spec");
  s_build->add_option("--canonicalizer", build.canonicalizer, "Stock canonicalizer")
      ->capture_default_str();
  s_build->add_option("--out", build.out, "Benchmark definition output")->required();
  common(s_build);

  EvaluateArgs eval;
  auto *s_eval = app.add_subcommand("evaluate", "Score predictions against a benchmark");
  s_eval->add_option("--benchmark", eval.benchmark, "Benchmark definition")->required();
  s_eval->add_option("--predictions", eval.predictions, "Predictions (interchange)")
      ->required();
  s_eval->add_option("--stock", eval.stock, "Stock file")->required();
  s_eval->add_option("--k", eval.k, "Top-K cutoffs")->delimiter(',')->capture_default_str();
  s_eval->add_option("--seed", eval.seed, "Bootstrap seed")->required();
  s_eval->add_option("--resamples", eval.resamples, "Bootstrap resamples")
      ->capture_default_str();
  s_eval->add_flag("--single-gt", eval.single_gt,
                   "Match only the unpruned reference route");
  s_eval->add_option("--timing", eval.timing, "CSV target_id,wall_seconds");
  s_eval->add_option("--rate", eval.rate, "Compute price in USD per hour");
  s_eval->add_option("--model-id", eval.model_id, "Model id for the report");
  s_eval->add_option("--canonicalizer", eval.canonicalizer, "Stock canonicalizer")
      ->capture_default_str();
  s_eval->add_option("--out", eval.out, "Report output")->required();
  common(s_eval);

  CompareArgs cmp;
  auto *s_cmp = app.add_subcommand("compare", "Paired bootstrap test between two reports");
  s_cmp->add_option("--a", cmp.a, "Baseline report")->required();
  s_cmp->add_option("--b", cmp.b, "Challenger report")->required();
  s_cmp->add_option("--metric", cmp.metric, "Metric name")->capture_default_str();
  s_cmp->add_option("--seed", cmp.seed, "Bootstrap seed")->required();
  s_cmp->add_option("--resamples", cmp.resamples, "Bootstrap resamples")
      ->capture_default_str();
  s_cmp->add_option("--out", cmp.out, "Write the result here as well");
  common(s_cmp);

  ReportArgs rep;
  auto *s_rep = app.add_subcommand("report", "Leaderboard, strata, Pareto and stability tables");
  s_rep->add_option("--reports", rep.reports, "Evaluation reports")->required();
  s_rep->add_option("--stability", rep.stability, "Stability tables");
  s_rep->add_option("--metric", rep.metric, "Sort metric")->capture_default_str();
  s_rep->add_option("--out-dir", rep.out_dir, "Output directory")->required();
  common(s_rep);

  VerifyArgs ver;
  auto *s_ver = app.add_subcommand("verify", "Verify provenance manifests");
  s_ver->add_option("--manifest", ver.manifest, "Leaf manifest to walk from");
  s_ver->add_flag("--all", ver.all, "Verify every manifest under <root>/provenance");
  common(s_ver);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp &e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::CallForAllHelp &e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::CallForVersion &e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError &e) {
    app.exit(e, out, err);
    return kUsageError;
  }
  ctx.root = root;

  const auto usage = [&](const std::string &msg) {
    err << "usage error: " << msg << "\n";
    for (auto *sub : app.get_subcommands())
      err << sub->help();
    return kUsageError;
  };

  try {
    if (s_ingest->parsed())
      return cmd_ingest(ctx, ingest);
    if (s_convert->parsed())
      return cmd_convert(ctx, convert);
    if (s_sample->parsed())
      return cmd_sample(ctx, sample);
    if (s_stab->parsed())
      return cmd_stability(ctx, stab);
    if (s_build->parsed())
      return cmd_build(ctx, build);
    if (s_eval->parsed())
      return cmd_evaluate(ctx, eval);
    if (s_cmp->parsed())
      return cmd_compare(ctx, cmp);
    if (s_rep->parsed())
      return cmd_report(ctx, rep);
    if (s_ver->parsed())
      return cmd_verify(ctx, ver);
    return usage("no command given");
  } catch (const UsageError &e) {
    return usage(e.what());
  } catch (const routecast::Error &e) {
    if (is_usage_code(e.code()))
      return usage(e.what());
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return kValidationFailure;
  } catch (const json::exception &e) {
    err << "error: InvalidArtifact: " << e.what() << "\n";
    return kValidationFailure;
  } catch (const fs::filesystem_error &e) {
    err << "error: IoError: " << e.what() << "\n";
    return kValidationFailure;
  }
}

} // namespace routecast::cli
