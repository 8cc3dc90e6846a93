#pragma once

// Route format adapters.
//
// Five external route shapes plus the engine's own line-delimited
// interchange format. Grammars are documented under docs/formats/. All
// parsers preserve source order, which is the producing model's ranking.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "routecast/error.hpp"
#include "routecast/route.hpp"

namespace routecast {

enum class AdapterId {
  NestedMolJson,
  MappingString,
  AlternatingJson,
  EdgeListJson,
  RecipeString,
  Interchange,
};

inline constexpr AdapterId kAllAdapters[] = {
    AdapterId::NestedMolJson, AdapterId::MappingString,
    AdapterId::AlternatingJson, AdapterId::EdgeListJson,
    AdapterId::RecipeString, AdapterId::Interchange};

// Command-line names: nested-mol-json, mapping-string, alternating-json,
// edge-list-json, recipe-string, interchange.
std::string_view adapter_name(AdapterId id) noexcept;
// Throws Error(UnknownAdapter).
AdapterId adapter_from_name(std::string_view name);
bool has_emitter(AdapterId id) noexcept;

struct ParseReport {
  std::vector<Route> routes;
  std::vector<std::string> warnings;
  std::string source;
};

// Throws ParseError with code SyntaxError, SchemaError or ValidationError.
// Never returns a partially parsed file.
ParseReport parse(AdapterId adapter, std::string_view input,
                  std::string source = "<input>");

// Throws Error(UnsupportedEmitter) for adapters without an emitter.
std::string emit(AdapterId adapter, const std::vector<Route> &routes);
std::string emit_interchange(const std::vector<Route> &routes);

std::string convert(AdapterId from, AdapterId to, std::string_view input);

// One interchange record as a JSON object with fields in schema order.
nlohmann::ordered_json to_interchange_json(const Route &route);
// Throws ParseError(SchemaError / ValidationError).
Route from_interchange_json(const nlohmann::json &record);

// Lenient interchange reading for prediction files: records that are well
// formed but describe an invalid route are returned with the error instead
// of failing the whole file. Syntax and schema errors still throw.
struct InterchangeRecord {
  std::size_t line = 0;
  std::string target;
  Metadata metadata;
  std::optional<Route> route;
  ErrorCode error = ErrorCode::ValidationError; // meaningful when !route
  std::string message;
};

std::vector<InterchangeRecord> read_interchange_records(std::string_view input);

bool is_valid_utf8(std::string_view s) noexcept;

} // namespace routecast
