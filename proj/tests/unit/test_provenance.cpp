#include <doctest.h>

#include <cstdlib>

#include "routecast/error.hpp"
#include "routecast/provenance.hpp"
#include "test_support.hpp"

using namespace routecast;
namespace fs = std::filesystem;

namespace {

struct Chain {
  std::vector<WrittenManifest> manifests;
  std::vector<fs::path> files;
};

// raw -> a -> b -> c -> d, one manifest per arrow, each chained to the last.
Chain four_stages(const rc_test::TempDir &dir) {
  Chain c;
  WriteManifestOptions opts;
  opts.root = dir.path();
  opts.created_at = "2024-01-01T00:00:00Z";
  const char *names[] = {"raw.txt", "a.txt", "b.txt", "c.txt", "d.txt"};
  for (auto *n : names)
    c.files.push_back(dir / (std::string("data/") + n));
  fs::create_directories(dir / "data");
  rc_test::spit(c.files[0], "T>A\n");
  std::optional<std::string> parent;
  for (int i = 1; i <= 4; ++i) {
    rc_test::spit(c.files[i], "stage " + std::to_string(i) + "\n");
    const auto w = write_manifest("stage" + std::to_string(i), {c.files[i - 1]},
                                  {c.files[i]}, parent, opts);
    parent = w.sha256;
    c.manifests.push_back(w);
  }
  return c;
}

} // namespace

TEST_CASE("sha256 test vectors") {
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
  CHECK(is_sha256_hex(sha256_hex("x")));
  CHECK_FALSE(is_sha256_hex("ABC"));

  rc_test::TempDir dir;
  rc_test::spit(dir / "abc", "abc");
  CHECK(hash_file(dir / "abc") == sha256_hex("abc"));
  CHECK_THROWS_AS(hash_file(dir / "missing"), Error);
}

TEST_CASE("manifest serialisation") {
  Manifest m{"ingest", "2024-01-01T00:00:00Z", {{"in/a", sha256_hex("a")}},
             {{"out/b", sha256_hex("b")}}, sha256_hex("p"), "routecast 0.4.0"};
  const auto text = serialize_manifest(m);
  CHECK(parse_manifest(text) == m);
  CHECK(text.back() == '\n');
  m.parent.reset();
  CHECK(parse_manifest(serialize_manifest(m)) == m);
  CHECK_THROWS_AS(parse_manifest("{\"stage\":3}"), Error);
  CHECK_THROWS_AS(parse_manifest("not json"), Error);
}

TEST_CASE("timestamps honour SOURCE_DATE_EPOCH") {
  setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  CHECK(utc_timestamp_now() == "2023-11-14T22:13:20Z");
  unsetenv("SOURCE_DATE_EPOCH");
  CHECK(utc_timestamp_now().size() == 20);
}

TEST_CASE("a four-stage chain verifies") {
  rc_test::TempDir dir;
  const auto c = four_stages(dir);
  const auto r = verify_chain(c.manifests.back().path);
  CHECK(r.ok());
  CHECK(r.manifests.size() == 4);
  CHECK(r.files_checked == 5);
  CHECK(r.manifests.front().find("stage4") != std::string::npos);
  CHECK(verify_all(dir.path()).ok());

  CHECK(c.manifests[1].manifest.inputs[0].path == "data/a.txt");
  CHECK(c.manifests[1].manifest.parent == c.manifests[0].sha256);
  CHECK(hash_file(c.manifests[0].path) == c.manifests[0].sha256);

  const auto found = find_producing_manifest(dir.path(), {c.files[2]});
  REQUIRE(found.has_value());
  CHECK(found->sha256 == c.manifests[1].sha256);
  CHECK_FALSE(find_producing_manifest(dir.path(), {c.files[0]}).has_value());
}

TEST_CASE("identical inputs and pinned time give identical manifests") {
  rc_test::TempDir a, b;
  const auto ca = four_stages(a);
  const auto cb = four_stages(b);
  for (int i = 0; i < 4; ++i)
    CHECK(ca.manifests[i].sha256 == cb.manifests[i].sha256);
}

TEST_CASE("any single bit flip is detected and localised") {
  rc_test::TempDir dir;
  const auto c = four_stages(dir);
  rc_test::FixtureRng rng(6);
  for (std::size_t f = 0; f < c.files.size(); ++f) {
    const auto original = rc_test::slurp(c.files[f]);
    for (int trial = 0; trial < 8; ++trial) {
      auto bytes = original;
      const auto pos = rng.below(bytes.size());
      bytes[pos] = static_cast<char>(bytes[pos] ^ (1 << rng.below(8)));
      rc_test::spit(c.files[f], bytes);
      const auto r = verify_chain(c.manifests.back().path);
      REQUIRE(r.entries.size() == 1);
      CHECK(r.entries[0].issue == VerifyIssue::Mismatch);
      CHECK(fs::path(r.entries[0].file) == fs::path("data") / c.files[f].filename());
      CHECK(r.entries[0].actual == hash_file(c.files[f]));
    }
    rc_test::spit(c.files[f], original);
  }
  CHECK(verify_chain(c.manifests.back().path).ok());
}

TEST_CASE("broken links") {
  rc_test::TempDir dir;
  const auto c = four_stages(dir);

  fs::remove(c.files[2]);
  auto r = verify_chain(c.manifests.back().path);
  REQUIRE(r.entries.size() == 1);
  CHECK(r.entries[0].issue == VerifyIssue::MissingFile);
  rc_test::spit(c.files[2], "stage 2\n");
  CHECK(verify_chain(c.manifests.back().path).ok());

  fs::remove(c.manifests[1].path);
  r = verify_chain(c.manifests.back().path);
  REQUIRE_FALSE(r.ok());
  CHECK(r.entries.back().issue == VerifyIssue::BrokenChain);

  // A manifest edited by hand no longer matches its child's parent digest.
  rc_test::TempDir dir2;
  const auto c2 = four_stages(dir2);
  auto text = rc_test::slurp(c2.manifests[0].path);
  text.insert(text.size() - 1, " ");
  rc_test::spit(c2.manifests[0].path, text);
  r = verify_chain(c2.manifests.back().path);
  REQUIRE(r.entries.size() == 1);
  CHECK(r.entries[0].issue == VerifyIssue::BrokenChain);

  rc_test::spit(c2.manifests[0].path, "garbage");
  CHECK_FALSE(verify_all(dir2.path()).ok());
}

TEST_CASE("missing stage inputs are refused") {
  rc_test::TempDir dir;
  WriteManifestOptions opts;
  opts.root = dir.path();
  try {
    write_manifest("x", {dir / "absent"}, {}, std::nullopt, opts);
    FAIL("expected MissingFile");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::MissingFile);
  }
}
