#include <doctest.h>

#include <map>
#include <numeric>

#include <json.hpp>

#include "routecast/benchmark.hpp"
#include "routecast/error.hpp"
#include "test_support.hpp"

using namespace routecast;

namespace {

// `per_cell` routes for each (length, topology) with length in [lo, hi].
std::vector<Route> make_pool(rc_test::FixtureRng &rng, int lo, int hi,
                             int per_cell) {
  std::vector<Route> pool;
  for (int len = lo; len <= hi; ++len)
    for (bool conv : {false, true}) {
      if (conv && len < 2)
        continue;
      for (int i = 0; i < per_cell; ++i) {
        rc_test::RouteOptions o;
        o.length = len;
        o.convergent = conv;
        pool.push_back(rc_test::random_route(rng, o));
      }
    }
  // Interleave so bucket membership is not contiguous in the pool.
  for (std::size_t i = pool.size(); i > 1; --i)
    std::swap(pool[i - 1], pool[rng.below(i)]);
  return pool;
}

StockSet pool_stock(const std::vector<Route> &pool) {
  std::vector<std::string> tokens;
  for (const auto &r : pool) {
    for (const auto &l : leaves(r))
      tokens.push_back(l);
    for (const auto &s : r.steps())
      if (s.product != r.target() && s.product.size() % 2 == 0)
        tokens.push_back(s.product);
  }
  return StockSet::from_tokens("pool", tokens);
}

std::uint64_t fingerprint(const std::vector<SampledRoute> &samples) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto &s : samples)
    h = (h ^ s.pool_index) * 1099511628211ULL;
  return h;
}

int error_code_of(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const Error &e) {
    return static_cast<int>(e.code());
  }
  return -1;
}

} // namespace

TEST_CASE("strata specs") {
  const auto s = parse_strata("2-3:linear:5, 4:convergent:2,5-7:any:1");
  REQUIRE(s.buckets.size() == 3);
  CHECK(s.buckets[1].min_length == 4);
  CHECK(s.buckets[1].max_length == 4);
  CHECK(s.buckets[1].label() == "len4-4/convergent");
  CHECK(s.total_samples() == 8);
  CHECK(format_strata(s) == "2-3:linear:5,4-4:convergent:2,5-7:any:1");
  CHECK(parse_strata(format_strata(s)).buckets == s.buckets);

  for (const char *bad : {"", "2-3:linear", "3-2:linear:1", "2:linear:0",
                          "2:cyclic:1", "2-4:linear:1,4:any:1", "x:linear:1"}) {
    CAPTURE(bad);
    CHECK(error_code_of([&] { parse_strata(bad); }) ==
          static_cast<int>(ErrorCode::InvalidStrataSpec));
  }
  CHECK_NOTHROW(parse_strata("2:linear:1,2:convergent:1"));
}

TEST_CASE("preset sizes") {
  const std::map<std::string, std::size_t> sizes{{"mkt-lin-500", 500},
                                                 {"mkt-cnv-160", 160},
                                                 {"ref-lin-600", 600},
                                                 {"ref-cnv-400", 400},
                                                 {"ref-lng-84", 84}};
  for (const auto &name : strata_preset_names()) {
    const auto spec = strata_preset(name);
    CHECK(spec.total_samples() == sizes.at(name));
    CHECK_NOTHROW(validate_strata(spec));
  }
  const auto cnv = strata_preset("mkt-cnv-160");
  CHECK(cnv.buckets.size() == 4);
  CHECK(cnv.buckets[0].label() == "len2-2/convergent");
  CHECK(strata_preset("ref-lng-84").buckets[2].label() == "len10-10/any");
  CHECK_THROWS_AS(strata_preset("ref-all"), Error);
}

TEST_CASE("stratified sampling") {
  rc_test::FixtureRng rng(17);
  const auto pool = make_pool(rng, 1, 6, 30);
  const auto spec = parse_strata("2:linear:10,3-4:any:15,5-6:convergent:8");

  const auto a = stratified_sample(pool, spec, 42);
  const auto b = stratified_sample(pool, spec, 42);
  const auto c = stratified_sample(pool, spec, 43);
  CHECK(fingerprint(a) == fingerprint(b));
  CHECK(fingerprint(a) != fingerprint(c));
  REQUIRE(a.size() == 33);

  std::vector<int> per_bucket(3, 0);
  std::set<std::size_t> seen;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto &s = a[i];
    ++per_bucket[s.bucket];
    CHECK(seen.insert(s.pool_index).second);
    CHECK(spec.buckets[s.bucket].matches(route_stats(s.route)));
    CHECK(s.route == pool[s.pool_index]);
    if (i > 0)
      CHECK(std::pair(a[i - 1].bucket, a[i - 1].pool_index) <
            std::pair(s.bucket, s.pool_index));
  }
  CHECK(per_bucket == std::vector<int>{10, 15, 8});

  // Every member of a bucket is reachable across seeds.
  std::set<std::size_t> union_b0;
  for (std::uint64_t seed = 0; seed < 60; ++seed)
    for (const auto &s : stratified_sample(pool, spec, seed))
      if (s.bucket == 0)
        union_b0.insert(s.pool_index);
  CHECK(union_b0.size() == 30);

  try {
    stratified_sample(pool, parse_strata("2:linear:31"), 1);
    FAIL("expected InsufficientPool");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::InsufficientPool);
    CHECK(std::string(e.what()).find("len2-2/linear") != std::string::npos);
  }
}

TEST_CASE("degenerate pool entries are never sampled") {
  std::vector<Route> pool{build_route("A", {}), build_route("B", {{"B", {"x"}, {}}}),
                          build_route("C", {})};
  const auto s = stratified_sample(pool, parse_strata("1:any:1"), 3);
  REQUIRE(s.size() == 1);
  CHECK(s[0].pool_index == 1);
  CHECK_THROWS_AS(stratified_sample(pool, parse_strata("0-1:any:1"), 3), Error);
}

TEST_CASE("seed stability picks the planted seed") {
  rc_test::FixtureRng rng(3);
  const auto pool = make_pool(rng, 2, 4, 25);
  const auto spec = parse_strata("2:any:10,3:any:10,4:any:10");
  std::vector<std::uint64_t> seeds(15);
  std::iota(seeds.begin(), seeds.end(), 100);

  for (std::size_t planted : {0u, 6u, 14u}) {
    // Random rows for every seed except the planted one, which sits at the
    // column means of the others (and hence of all 15).
    std::map<std::uint64_t, ReferenceMetrics> by_sample;
    std::vector<ReferenceMetrics> rows(15);
    ReferenceMetrics sum{};
    for (std::size_t i = 0; i < 15; ++i) {
      if (i == planted)
        continue;
      for (auto &v : rows[i])
        v = static_cast<double>(rng.below(1000)) / 1000.0;
      for (int m = 0; m < 3; ++m)
        sum[m] += rows[i][m];
    }
    for (int m = 0; m < 3; ++m)
      rows[planted][m] = sum[m] / 14.0;
    for (std::size_t i = 0; i < 15; ++i)
      by_sample[fingerprint(stratified_sample(pool, spec, seeds[i]))] = rows[i];
    REQUIRE(by_sample.size() == 15);

    const auto table = seed_stability(pool, spec, seeds, [&](const auto &samples) {
      return by_sample.at(fingerprint(samples));
    });
    CHECK(table.chosen_index == planted);
    CHECK(table.chosen_seed == seeds[planted]);
    CHECK(table.rows[planted].score == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(table.rows.size() == 15);
  }

  const auto flat = seed_stability(pool, spec, seeds, [](const auto &) {
    return ReferenceMetrics{0.5, 0.2, 0.3};
  });
  CHECK(flat.chosen_index == 0);
  for (const auto &r : flat.rows)
    CHECK(r.score == 0.0);

  CHECK_THROWS_AS(seed_stability(pool, spec, {1}, [](const auto &) {
                    return ReferenceMetrics{};
                  }),
                  Error);
}

TEST_CASE("benchmark build, serialise and verify") {
  rc_test::FixtureRng rng(21);
  const auto pool = make_pool(rng, 2, 4, 12);
  const auto stock = pool_stock(pool);
  const auto spec = parse_strata("2:linear:5,3-4:convergent:6");
  const auto samples = stratified_sample(pool, spec, 8);
  BuildOptions opts;
  opts.strata = spec;
  opts.provenance = std::string(64, 'a');
  const auto def = build_benchmark(samples, stock, "demo", 8, opts);

  REQUIRE(def.targets.size() == 11);
  CHECK(def.targets[0].target_id == "demo-0001");
  CHECK(def.targets[10].target_id == "demo-0011");
  CHECK(def.targets[0].bucket == "len2-2/linear");
  CHECK(def.targets[10].bucket == "len3-4/convergent");
  CHECK(def.stock.sha256 == stock.content_hash());
  CHECK(def.find("demo-0003") == &def.targets[2]);
  CHECK(def.find("nope") == nullptr);
  for (const auto &t : def.targets)
    CHECK(t.ground_truth == expand_ground_truths(t.reference, stock));

  const auto text = serialize_benchmark(def);
  CHECK(text == serialize_benchmark(build_benchmark(samples, stock, "demo", 8, opts)));
  const auto back = parse_benchmark(text);
  CHECK(back == def);
  CHECK(verify_benchmark(back, stock).ok());
  CHECK(load_benchmark(text, stock) == def);

  // A stock that loses one purchasable intermediate changes the keys.
  std::string dropped;
  for (const auto &t : def.targets)
    if (t.ground_truth.n_variants > 0)
      for (const auto &s : t.reference.steps())
        if (s.product != t.reference.target() && stock.contains(s.product))
          dropped = s.product;
  REQUIRE_FALSE(dropped.empty());
  std::vector<std::string> kept;
  for (const auto &m : stock.members())
    if (m != dropped)
      kept.push_back(m);
  const auto smaller = StockSet::from_tokens("pool", kept);
  const auto v = verify_benchmark(back, smaller);
  CHECK_FALSE(v.ok());
  CHECK(v.problems.size() >= 2); // digest plus at least one target

  try {
    load_benchmark(text, smaller);
    FAIL("expected BenchmarkVerificationFailed");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::BenchmarkVerificationFailed);
  }
}

TEST_CASE("tampered benchmark files fail verification") {
  rc_test::FixtureRng rng(22);
  const auto pool = make_pool(rng, 2, 3, 6);
  const auto stock = pool_stock(pool);
  const auto def = build_benchmark(stratified_sample(pool, parse_strata("2-3:any:6"), 1),
                                   stock, "t", 1, {parse_strata("2-3:any:6"), "", 20});

  auto tampered = nlohmann::json::parse(serialize_benchmark(def));
  tampered["targets"][0]["keys"].push_back("X(Y)");
  auto v = verify_benchmark(parse_benchmark(tampered.dump()), stock);
  REQUIRE(v.problems.size() == 1);
  CHECK(v.problems[0].find("t-0001") != std::string::npos);

  tampered = nlohmann::json::parse(serialize_benchmark(def));
  tampered["targets"][1]["stats"]["length"] = 9;
  CHECK_FALSE(verify_benchmark(parse_benchmark(tampered.dump()), stock).ok());

  tampered = nlohmann::json::parse(serialize_benchmark(def));
  tampered["targets"].erase(0);
  CHECK_FALSE(verify_benchmark(parse_benchmark(tampered.dump()), stock).ok());

  tampered = nlohmann::json::parse(serialize_benchmark(def));
  tampered["schema"] = "other/2";
  CHECK_THROWS_AS(parse_benchmark(tampered.dump()), Error);
  CHECK_THROWS_AS(parse_benchmark("{"), Error);
}

TEST_CASE("build errors name the target") {
  const auto stock = StockSet::from_tokens("s", {});
  const auto a = build_route("A", {{"A", {"x"}, {}}}, {{"target_id", "same"}});
  const auto b = build_route("B", {{"B", {"y"}, {}}}, {{"target_id", "same"}});
  CHECK(error_code_of([&] { build_benchmark(as_samples({a, b}), stock, "d", 0); }) ==
        static_cast<int>(ErrorCode::InvalidArtifact));
  CHECK(error_code_of([&] {
          build_benchmark(as_samples({build_route("Z", {})}), stock, "d", 0);
        }) == static_cast<int>(ErrorCode::InvalidArtifact));
  const auto named = build_benchmark(as_samples({a}), stock, "d", 0);
  CHECK(named.targets[0].target_id == "same");
}
