#include <doctest.h>

#include "routecast/error.hpp"
#include "routecast/provenance.hpp"
#include "routecast/stock.hpp"
#include "test_support.hpp"

using namespace routecast;

TEST_CASE("parse stock with comments, blanks and duplicates") {
  const auto s = parse_stock("# vendor list\nL1\n\n  L2  \nL1\n", "demo");
  CHECK(s.size() == 2);
  CHECK(s.contains("L1"));
  CHECK(s.contains(" L2"));
  CHECK_FALSE(s.contains("L3"));
  CHECK(s.n_original == 3);
  CHECK(s.n_duplicates == 1);
  REQUIRE(s.warnings.size() == 1);
  CHECK(s.warnings[0].find("duplicate") != std::string::npos);
}

TEST_CASE("empty stock loads with a warning") {
  const auto s = parse_stock("# nothing\n\n", "empty");
  CHECK(s.size() == 0);
  CHECK_FALSE(s.warnings.empty());
}

TEST_CASE("content hash ignores layout") {
  const auto a = parse_stock("B\nA\n", "a");
  const auto b = parse_stock("# x\nA\nB\nA\n", "b");
  CHECK(a.content_hash() == b.content_hash());
  CHECK(a.content_hash() == sha256_hex("A\nB\n"));
  CHECK(parse_stock("A\n", "c").content_hash() != a.content_hash());
}

TEST_CASE("canonicalizers") {
  const auto fold = parse_stock("C  C\tO\n", "f", "fold-ws");
  CHECK(fold.contains("C C O"));
  CHECK(fold.contains("  C C  O "));
  CHECK_THROWS_AS(canonicalizer_by_id("rdkit"), Error);
  const auto ids = canonicalizer_ids();
  CHECK(std::find(ids.begin(), ids.end(), "identity") != ids.end());
}

TEST_CASE("load_stock reports missing files") {
  rc_test::TempDir dir;
  CHECK_THROWS_AS(load_stock(dir / "absent.txt"), Error);
  rc_test::spit(dir / "vendor.txt", "L1\nL2\n");
  const auto s = load_stock(dir / "vendor.txt");
  CHECK(s.name() == "vendor");
  CHECK(s.size() == 2);
}

TEST_CASE("stock termination and coverage") {
  const auto r = build_route("T", {{"T", {"I", "L3"}, {}}, {"I", {"L1", "L2"}, {}}});
  CHECK(is_stock_terminated(r, StockSet::from_tokens("s", {"L1", "L2", "L3"})));
  CHECK_FALSE(is_stock_terminated(r, StockSet::from_tokens("s", {"L1", "L3"})));
  // Buying the intermediate does not terminate the unpruned route.
  CHECK_FALSE(is_stock_terminated(r, StockSet::from_tokens("s", {"I", "L3"})));

  const auto sub = build_route("T", {{"T", {"I", "L3"}, {}}});
  const auto cov =
      coverage({r, sub}, StockSet::from_tokens("s", {"L1", "L2", "L3"}));
  CHECK(cov.n_unique_leaves == 4);
  CHECK(cov.n_leaves_in_stock == 3);
  CHECK(cov.n_routes == 2);
  CHECK(cov.n_routes_fully_covered == 1);
}

TEST_CASE("termination is monotone in stock growth") {
  rc_test::FixtureRng rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto r = rc_test::random_route(rng, 6);
    auto small = StockSet::from_tokens("s", {});
    auto big = StockSet::from_tokens("b", {});
    for (const auto &l : leaves(r)) {
      if (rng.chance(0.7))
        small.insert(l);
      big.insert(l);
    }
    if (is_stock_terminated(r, small))
      CHECK(is_stock_terminated(r, big));
    CHECK(is_stock_terminated(r, big));
  }
}
