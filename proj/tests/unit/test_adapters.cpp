#include <doctest.h>

#include <filesystem>

#include "routecast/adapters.hpp"
#include "routecast/error.hpp"
#include "test_support.hpp"

using namespace routecast;

namespace {

const std::filesystem::path kReferenceDir = std::filesystem::path(ROUTECAST_FIXTURES) / "reference";

struct Failure {
  ErrorCode code = ErrorCode::ValidationError;
  ErrorCode route_code = ErrorCode::ValidationError;
  std::size_t line = 0;
  std::size_t column = 0;
};

Failure parse_failure(AdapterId a, std::string_view text) {
  try {
    parse(a, text);
  } catch (const ParseError &e) {
    return {e.code(), e.route_code(), e.line(), e.column()};
  }
  FAIL("input unexpectedly parsed: " << text);
  return {};
}

std::vector<std::string> keys_of(const std::vector<Route> &routes) {
  std::vector<std::string> out;
  for (const auto &r : routes)
    out.push_back(canonical_key(r).key);
  return out;
}

std::string emit_any(AdapterId a, const std::vector<Route> &routes) {
  switch (a) {
  case AdapterId::AlternatingJson: return rc_test::emit_alternating(routes);
  case AdapterId::EdgeListJson: return rc_test::emit_edge_list(routes);
  case AdapterId::RecipeString: return rc_test::emit_recipe(routes);
  default: return emit(a, routes);
  }
}

} // namespace

TEST_CASE("adapter names") {
  for (auto id : kAllAdapters)
    CHECK(adapter_from_name(adapter_name(id)) == id);
  CHECK_THROWS_AS(adapter_from_name("aizynth"), Error);
  CHECK(has_emitter(AdapterId::Interchange));
  CHECK_FALSE(has_emitter(AdapterId::RecipeString));
  try {
    emit(AdapterId::EdgeListJson, {});
    FAIL("expected UnsupportedEmitter");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::UnsupportedEmitter);
  }
}

TEST_CASE("reference route fixtures agree across formats") {
  const std::pair<AdapterId, const char *> files[] = {
      {AdapterId::NestedMolJson, "nested-mol.json"},
      {AdapterId::MappingString, "mapping.txt"},
      {AdapterId::AlternatingJson, "alternating.json"},
      {AdapterId::EdgeListJson, "edge-list.json"},
      {AdapterId::RecipeString, "recipe.txt"},
      {AdapterId::Interchange, "interchange.ijl"},
  };
  for (const auto &[id, file] : files) {
    CAPTURE(file);
    const auto rep = parse(id, rc_test::slurp(kReferenceDir / file));
    REQUIRE(rep.routes.size() == 1);
    CHECK(canonical_key(rep.routes[0]).key == "T(I(L1,L2),L3)");
    CHECK(rep.routes[0].target() == "T");
  }
  const auto nested = parse(AdapterId::NestedMolJson,
                            rc_test::slurp(kReferenceDir / "nested-mol.json"));
  CHECK(nested.routes[0].metadata().at("source") == "reference");
}

TEST_CASE("round trip through every format") {
  rc_test::FixtureRng rng(2024);
  std::vector<Route> routes;
  for (int i = 0; i < 150; ++i)
    routes.push_back(rc_test::random_route(rng, 10));
  routes.push_back(build_route("lonely", {}));
  const auto expected = keys_of(routes);

  for (auto id : kAllAdapters) {
    CAPTURE(adapter_name(id));
    const auto text = emit_any(id, routes);
    const auto back = parse(id, text).routes;
    CHECK(keys_of(back) == expected);
  }
}

TEST_CASE("interchange keeps metadata and step metadata") {
  const auto r = build_route("T", {{"T", {"I", "L3"}, {{"template", "amide"}}},
                                   {"I", {"L1", "L2"}, {}}},
                             {{"rank", "1"}, {"target_id", "x-1"}});
  const auto back = parse(AdapterId::Interchange, emit_interchange({r})).routes;
  REQUIRE(back.size() == 1);
  CHECK(back[0] == r);
  CHECK(emit_interchange({r}) ==
        "{\"target\":\"T\",\"steps\":[{\"product\":\"T\",\"reactants\":[\"I\","
        "\"L3\"],\"metadata\":{\"template\":\"amide\"}},{\"product\":\"I\","
        "\"reactants\":[\"L1\",\"L2\"]}],\"metadata\":{\"rank\":\"1\","
        "\"target_id\":\"x-1\"}}\n");
}

TEST_CASE("convert between formats") {
  const auto out = convert(AdapterId::RecipeString, AdapterId::MappingString,
                           "L2.L1>>I|L3>>T\n");
  CHECK(out == "T>I.L3;I>L1.L2\n");
  CHECK_THROWS_AS(convert(AdapterId::MappingString, AdapterId::RecipeString, "T>A\n"),
                  Error);
}

TEST_CASE("unknown fields") {
  const auto rep = parse(AdapterId::NestedMolJson,
                         R"({"smiles":"T","score":0.9,"children":[
                              {"smiles":"I","rxn":"amide","children":[{"smiles":"L1","price":3}]},
                              {"smiles":"L3"}]})");
  REQUIRE(rep.routes.size() == 1);
  const auto &r = rep.routes[0];
  CHECK(r.metadata().at("x-score") == "0.9");
  CHECK(r.steps()[r.producing_step("I")].metadata.at("x-rxn") == "amide");
  REQUIRE(rep.warnings.size() == 1);
  CHECK(rep.warnings[0].find("price") != std::string::npos);

  const auto alt = parse(AdapterId::AlternatingJson,
                         R"({"type":"molecule","smiles":"T","children":[
                              {"type":"reaction","template":"t1","children":[
                                {"type":"mol","smiles":"L1"}]}]})");
  CHECK(alt.routes[0].steps()[0].metadata.at("template") == "t1");

  const auto ij = parse(AdapterId::Interchange,
                        R"({"target":"T","steps":[],"metadata":{},"model":"m"})");
  CHECK(ij.routes[0].metadata().at("x-model") == "m");
}

TEST_CASE("recipe chaining") {
  // Convergent: both intermediates named explicitly in the last step.
  const auto conv = parse(AdapterId::RecipeString, "a1>>A|b1>>B|A.B>>T\n").routes;
  REQUIRE(conv.size() == 1);
  CHECK(canonical_key(conv[0]).key == "T(A(a1),B(b1))");
  // The carried product goes after explicit reactants.
  const auto lin = parse(AdapterId::RecipeString, "L1>>I|>>J|L2>>T\n").routes;
  CHECK(canonical_key(lin[0]).key == "T(J(I(L1)),L2)");
  CHECK(parse_failure(AdapterId::RecipeString, ">>T\n").code ==
        ErrorCode::SyntaxError);
}

TEST_CASE("comments, blank lines and degenerate lines") {
  const auto rep =
      parse(AdapterId::MappingString, "# header\n\nT>A\n   \nSOLO\n# end\n");
  REQUIRE(rep.routes.size() == 2);
  CHECK(rep.routes[1].is_degenerate());
  CHECK(rep.routes[1].target() == "SOLO");
  CHECK(parse(AdapterId::NestedMolJson, "  \n").routes.empty());
  CHECK(parse(AdapterId::NestedMolJson, "[]").routes.empty());
}

TEST_CASE("syntax errors carry line and column") {
  auto f = parse_failure(AdapterId::MappingString, "T>A\n# c\nT>I.L3;I\n");
  CHECK(f.code == ErrorCode::SyntaxError);
  CHECK(f.line == 3);
  CHECK(f.column == 8);

  f = parse_failure(AdapterId::MappingString, "T>A>B\n");
  CHECK(f.code == ErrorCode::SyntaxError);
  CHECK(f.line == 1);

  f = parse_failure(AdapterId::MappingString, "T>A..B\n");
  CHECK(f.code == ErrorCode::SyntaxError);

  f = parse_failure(AdapterId::MappingString, "T>A\nT>\xC3\x28\n");
  CHECK(f.code == ErrorCode::SyntaxError);
  CHECK(f.line == 2);
  CHECK(f.column == 3);

  f = parse_failure(AdapterId::Interchange, "{\"target\":\"T\",\"steps\":[]}\n{oops\n");
  CHECK(f.code == ErrorCode::SyntaxError);
  CHECK(f.line == 2);

  f = parse_failure(AdapterId::NestedMolJson, "{\"smiles\":\"T\",\n\"children\":[}");
  CHECK(f.code == ErrorCode::SyntaxError);
  CHECK(f.line == 2);
}

TEST_CASE("schema errors") {
  CHECK(parse_failure(AdapterId::NestedMolJson, R"({"children":[]})").code ==
        ErrorCode::SchemaError);
  CHECK(parse_failure(AdapterId::NestedMolJson, R"({"smiles":7})").code ==
        ErrorCode::SchemaError);
  CHECK(parse_failure(AdapterId::AlternatingJson,
                      R"({"type":"mol","smiles":"T","children":[
                           {"type":"reaction","children":[{"type":"mol","smiles":"A"}]},
                           {"type":"reaction","children":[{"type":"mol","smiles":"B"}]}]})")
            .code == ErrorCode::SchemaError);
  CHECK(parse_failure(AdapterId::AlternatingJson, R"({"smiles":"T"})").code ==
        ErrorCode::SchemaError);
  CHECK(parse_failure(AdapterId::EdgeListJson,
                      R"({"nodes":{"a":"A","b":"B"},"edges":[]})")
            .code == ErrorCode::SchemaError);
  CHECK(parse_failure(AdapterId::EdgeListJson,
                      R"({"nodes":{"a":"A"},"edges":[["a","zz"]]})")
            .code == ErrorCode::SchemaError);
  CHECK(parse_failure(AdapterId::Interchange, R"({"target":"T"})").code ==
        ErrorCode::SchemaError);
}

TEST_CASE("structure errors surface as validation errors") {
  auto f = parse_failure(AdapterId::MappingString, "T>A;A>T\n");
  CHECK(f.code == ErrorCode::ValidationError);
  CHECK(f.route_code == ErrorCode::Cycle);

  f = parse_failure(AdapterId::EdgeListJson,
                    R"({"nodes":{"a":"A","b":"B"},"edges":[["a","b"],["b","a"]]})");
  CHECK(f.route_code == ErrorCode::Cycle);

  f = parse_failure(AdapterId::EdgeListJson,
                    R"({"nodes":{"t":"T","a":"A","b":"B","c":"C"},
                        "edges":[["t","a"],["t","b"],["a","c"],["b","c"]]})");
  CHECK(f.route_code == ErrorCode::SharedIntermediate);

  f = parse_failure(AdapterId::MappingString, "T>A;X>Y\n");
  CHECK(f.route_code == ErrorCode::OrphanStep);

  f = parse_failure(AdapterId::NestedMolJson,
                    R"({"smiles":"T","children":[{"smiles":"T","children":[{"smiles":"L"}]}]})");
  CHECK(f.code == ErrorCode::ValidationError);
}

TEST_CASE("a bad record fails the whole file") {
  CHECK_THROWS_AS(parse(AdapterId::MappingString, "T>A\nT>A;A>T\nU>B\n"), ParseError);
}

TEST_CASE("lenient interchange reading keeps invalid routes") {
  const auto recs = read_interchange_records(
      R"({"target":"T","steps":[{"product":"T","reactants":["A"]}],"metadata":{"rank":"1"}}
{"target":"T","steps":[{"product":"T","reactants":["A"]},{"product":"A","reactants":["T"]}],"metadata":{"rank":"2"}}
)");
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].route.has_value());
  CHECK_FALSE(recs[1].route.has_value());
  CHECK(recs[1].error == ErrorCode::Cycle);
  CHECK(recs[1].metadata.at("rank") == "2");
  CHECK(recs[1].line == 2);
  CHECK_THROWS_AS(read_interchange_records("{\"target\":1}\n"), ParseError);
}

TEST_CASE("deep nesting is rejected, not a crash") {
  std::string deep;
  for (int i = 0; i < 100000; ++i)
    deep += '[';
  CHECK_THROWS_AS(parse(AdapterId::NestedMolJson, deep), ParseError);

  std::string mol = R"({"smiles":"L"})";
  for (int i = 0; i < 3000; ++i)
    mol = R"({"smiles":"m)" + std::to_string(i) + R"(","children":[)" + mol + "]}";
  CHECK(parse_failure(AdapterId::NestedMolJson, mol).code == ErrorCode::SchemaError);
}

TEST_CASE("mutation fuzzing only yields parse errors") {
  rc_test::FixtureRng rng(77);
  std::vector<Route> routes;
  for (int i = 0; i < 5; ++i)
    routes.push_back(rc_test::random_route(rng, 5));
  int rejected = 0;
  for (auto id : kAllAdapters) {
    const auto seed_text = emit_any(id, routes);
    for (int trial = 0; trial < 300; ++trial) {
      std::string t = seed_text;
      const int edits = rng.between(1, 4);
      for (int e = 0; e < edits && !t.empty(); ++e) {
        const auto pos = rng.below(t.size());
        switch (rng.below(3)) {
        case 0: t[pos] = static_cast<char>(rng.below(256)); break;
        case 1: t.erase(pos, 1 + rng.below(3)); break;
        default: t.insert(pos, 1, "{}[]\",:>.;|#\n"[rng.below(13)]);
        }
      }
      try {
        parse(id, t);
      } catch (const ParseError &) {
        ++rejected;
      }
    }
  }
  CHECK(rejected > 0);
}
