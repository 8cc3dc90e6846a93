#include <doctest.h>

#include <json.hpp>

#include "routecast/cli.hpp"
#include "test_support.hpp"

using rc_test::run_cli;
namespace fs = std::filesystem;

namespace {

std::string s(const fs::path &p) { return p.string(); }

} // namespace

TEST_CASE("usage and exit codes") {
  CHECK(run_cli({"--help"}).code == 0);
  CHECK(run_cli({"--version"}).out.find("routecast") != std::string::npos);
  CHECK(run_cli({}).code == routecast::cli::kUsageError);
  CHECK(run_cli({"frobnicate"}).code == routecast::cli::kUsageError);
  CHECK(run_cli({"evaluate", "--bogus"}).code == routecast::cli::kUsageError);
  CHECK(run_cli({"sample", "--pool", "x"}).code == routecast::cli::kUsageError);

  rc_test::TempDir dir;
  rc_test::spit(dir / "in.txt", "T>A\n");
  const auto unknown = run_cli({"ingest", "--adapter", "nope", "--in", s(dir / "in.txt"),
                                "--out", s(dir / "o.ijl"), "--no-manifest"});
  CHECK(unknown.code == routecast::cli::kUsageError);
  CHECK(unknown.err.find("nope") != std::string::npos);

  const auto no_emit = run_cli({"convert", "--from", "mapping-string", "--to",
                                "recipe-string", "--in", s(dir / "in.txt"), "--out",
                                s(dir / "o.txt"), "--no-manifest"});
  CHECK(no_emit.code == routecast::cli::kUsageError);

  const auto missing = run_cli({"ingest", "--adapter", "mapping-string", "--in",
                                s(dir / "absent.txt"), "--out", s(dir / "o.ijl"),
                                "--no-manifest"});
  CHECK(missing.code == routecast::cli::kValidationFailure);
  CHECK(missing.err.find("IoError") != std::string::npos);

  rc_test::spit(dir / "bad.txt", "T>A\nT>A;A>T\n");
  const auto bad = run_cli({"ingest", "--adapter", "mapping-string", "--in",
                            s(dir / "bad.txt"), "--out", s(dir / "o.ijl"), "--no-manifest"});
  CHECK(bad.code == routecast::cli::kValidationFailure);
  CHECK(bad.err.find("ValidationError") != std::string::npos);

  CHECK(run_cli({"verify", "--root", s(dir.path())}).code == routecast::cli::kUsageError);
}

TEST_CASE("convert writes the requested format") {
  rc_test::TempDir dir;
  rc_test::spit(dir / "r.txt", "L1.L2>>I|L3>>T\n");
  const auto r = run_cli({"convert", "--from", "recipe-string", "--to", "mapping-string",
                          "--in", s(dir / "r.txt"), "--out", s(dir / "m.txt"),
                          "--root", s(dir.path())});
  REQUIRE(r.code == 0);
  CHECK(rc_test::slurp(dir / "m.txt") == "T>I.L3;I>L1.L2\n");
  CHECK(fs::exists(dir / "provenance" / "convert.m.txt.manifest.json"));
}

TEST_CASE("full pipeline") {
  rc_test::TempDir dir;
  const auto in = rc_test::write_pipeline_inputs(dir.path(), 5, 48);
  const auto root = s(dir.path());
  const auto ok = [&](std::vector<std::string> args) {
    args.push_back("--root");
    args.push_back(root);
    const auto r = run_cli(args);
    CAPTURE(r.err);
    REQUIRE(r.code == 0);
    return r;
  };

  ok({"ingest", "--adapter", "mapping-string", "--in", s(in.pool), "--out",
      s(dir / "pool.ijl")});
  ok({"sample", "--pool", s(dir / "pool.ijl"), "--strata", "2-3:any:10,4-5:any:10",
      "--seed", "3", "--out", s(dir / "sample.ijl")});
  const auto sampled = rc_test::slurp(dir / "sample.ijl");
  CHECK(std::count(sampled.begin(), sampled.end(), '\n') == 20);
  CHECK(sampled.find("\"bucket\":\"len2-3/any\"") != std::string::npos);

  ok({"build-benchmark", "--pool", s(dir / "pool.ijl"), "--stock", s(in.stock), "--id",
      "demo", "--seed", "3", "--strata", "2-3:any:12,4-5:any:12", "--out",
      s(dir / "bench.json")});
  const auto bench = nlohmann::json::parse(rc_test::slurp(dir / "bench.json"));
  CHECK(bench["targets"].size() == 24);
  CHECK(bench["provenance"].get<std::string>().size() == 64);

  ok({"ingest", "--adapter", "mapping-string", "--in", s(in.good), "--out",
      s(dir / "good.ijl"), "--benchmark", s(dir / "bench.json"), "--model-id", "good"});
  ok({"ingest", "--adapter", "mapping-string", "--in", s(in.single), "--out",
      s(dir / "single.ijl"), "--benchmark", s(dir / "bench.json"), "--model-id",
      "single"});

  const auto ev = ok({"evaluate", "--benchmark", s(dir / "bench.json"), "--predictions",
                      s(dir / "good.ijl"), "--stock", s(in.stock), "--seed", "9",
                      "--resamples", "500", "--k", "1,5,10", "--out",
                      s(dir / "good.report.json")});
  CHECK(ev.out.find("top5:") != std::string::npos);
  ok({"evaluate", "--benchmark", s(dir / "bench.json"), "--predictions",
      s(dir / "good.ijl"), "--stock", s(in.stock), "--seed", "9", "--resamples", "500",
      "--single-gt", "--model-id", "good-sgt", "--out", s(dir / "sgt.report.json")});
  ok({"evaluate", "--benchmark", s(dir / "bench.json"), "--predictions",
      s(dir / "single.ijl"), "--stock", s(in.stock), "--seed", "9", "--resamples",
      "500", "--out", s(dir / "single.report.json")});

  const auto mgt = nlohmann::json::parse(rc_test::slurp(dir / "good.report.json"));
  const auto sgt = nlohmann::json::parse(rc_test::slurp(dir / "sgt.report.json"));
  const auto one = nlohmann::json::parse(rc_test::slurp(dir / "single.report.json"));
  CHECK(mgt["aggregates"]["top10"]["mean"].get<double>() >
        sgt["aggregates"]["top10"]["mean"].get<double>());
  CHECK(one["aggregates"]["top1"] == one["aggregates"]["top10"]);
  CHECK(mgt["ground_truth"] == "multi");
  CHECK(sgt["ground_truth"] == "single");

  const auto cmp = ok({"compare", "--a", s(dir / "sgt.report.json"), "--b",
                       s(dir / "good.report.json"), "--metric", "top1", "--seed", "4",
                       "--resamples", "500"});
  const auto cmp_json = nlohmann::json::parse(cmp.out.substr(0, cmp.out.rfind('}') + 1));
  CHECK(cmp_json["mean_diff"].get<double>() > 0);
  CHECK(cmp_json["n"] == 24);

  ok({"report", "--reports", s(dir / "good.report.json"), s(dir / "sgt.report.json"),
      s(dir / "single.report.json"), "--out-dir", s(dir / "site")});
  const auto board = nlohmann::json::parse(rc_test::slurp(dir / "site" / "leaderboard.json"));
  REQUIRE(board["rows"].size() == 3);
  CHECK(board["rows"][0]["model_id"] == "good");
  CHECK(fs::exists(dir / "site" / "leaderboard.md"));
  CHECK(fs::exists(dir / "site" / "stratified.json"));
  CHECK(fs::exists(dir / "site" / "pareto.json"));

  const auto verified = run_cli({"verify", "--all", "--root", root});
  CHECK(verified.code == 0);
  CHECK(verified.out.find("OK:") != std::string::npos);

  // Corrupting the benchmark is caught by verify and by evaluate.
  auto text = rc_test::slurp(dir / "bench.json");
  text[text.find("\"n_variants\": ") + 14] ^= 1;
  rc_test::spit(dir / "bench.json", text);
  const auto broken = run_cli({"verify", "--all", "--root", root});
  CHECK(broken.code == routecast::cli::kValidationFailure);
  CHECK(broken.out.find("Mismatch") != std::string::npos);
  const auto refused = run_cli({"evaluate", "--benchmark", s(dir / "bench.json"),
                                "--predictions", s(dir / "good.ijl"), "--stock",
                                s(in.stock), "--seed", "9", "--out",
                                s(dir / "x.json"), "--no-manifest"});
  CHECK(refused.code == routecast::cli::kValidationFailure);
  CHECK(refused.err.find("BenchmarkVerificationFailed") != std::string::npos);
}

TEST_CASE("stability command") {
  rc_test::TempDir dir;
  const auto in = rc_test::write_pipeline_inputs(dir.path(), 8, 40);
  const auto root = s(dir.path());
  REQUIRE(run_cli({"ingest", "--adapter", "mapping-string", "--in", s(in.pool), "--out",
                   s(dir / "pool.ijl"), "--root", root})
              .code == 0);
  REQUIRE(run_cli({"ingest", "--adapter", "mapping-string", "--in", s(in.good), "--out",
                   s(dir / "ref.ijl"), "--root", root})
              .code == 0);
  const auto r = run_cli({"stability", "--pool", s(dir / "pool.ijl"), "--stock",
                          s(in.stock), "--predictions", s(dir / "ref.ijl"), "--strata",
                          "2-3:any:8,4-5:any:8", "--seed", "10", "--out",
                          s(dir / "stab.json"), "--root", root});
  CAPTURE(r.err);
  REQUIRE(r.code == 0);
  const auto t = nlohmann::json::parse(rc_test::slurp(dir / "stab.json"));
  REQUIRE(t["rows"].size() == 15);
  CHECK(t["rows"][0]["seed"] == 10);
  std::size_t best = 0;
  for (std::size_t i = 1; i < 15; ++i)
    if (t["rows"][i]["score"].get<double>() < t["rows"][best]["score"].get<double>())
      best = i;
  CHECK(t["chosen_index"] == best);

  CHECK(run_cli({"stability", "--pool", s(dir / "pool.ijl"), "--stock", s(in.stock),
                 "--predictions", s(dir / "ref.ijl"), "--strata", "2-3:any:8",
                 "--seeds", "1", "--out", s(dir / "x.json"), "--no-manifest"})
            .code == routecast::cli::kValidationFailure);
}
