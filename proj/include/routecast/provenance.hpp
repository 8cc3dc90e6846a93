#pragma once

// Content-addressed stage manifests.
//
// Every pipeline stage writes `<root>/provenance/<stage>.<output>.manifest.json`
// listing the SHA-256 of its inputs and outputs. A manifest may name a
// parent manifest by the SHA-256 of the parent file's bytes; verify_chain()
// walks those links back to the root, re-hashing every referenced file.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace routecast {

inline constexpr std::string_view kToolVersion = "routecast 0.4.0";

std::string sha256_hex(std::string_view bytes);
// Throws Error(IoError) when the file cannot be read.
std::string hash_file(const std::filesystem::path &path);
bool is_sha256_hex(std::string_view s) noexcept;

struct FileDigest {
  std::string path; // relative to the provenance root, '/' separated
  std::string sha256;

  friend bool operator==(const FileDigest &, const FileDigest &) = default;
};

struct Manifest {
  std::string stage;
  std::string created_at; // ISO-8601 UTC, informational only
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;
  std::optional<std::string> parent;
  std::string tool_version;

  friend bool operator==(const Manifest &, const Manifest &) = default;
};

// Sorted keys, two-space indent, trailing newline.
std::string serialize_manifest(const Manifest &m);
// Throws Error(InvalidArtifact) on malformed content.
Manifest parse_manifest(std::string_view text);

// UTC "YYYY-MM-DDTHH:MM:SSZ". Honours SOURCE_DATE_EPOCH so runs can be
// pinned.
std::string utc_timestamp_now();

struct WriteManifestOptions {
  std::filesystem::path root = ".";
  std::optional<std::string> created_at; // default: utc_timestamp_now()
};

struct WrittenManifest {
  std::filesystem::path path;
  std::string sha256;
  Manifest manifest;
};

std::filesystem::path provenance_dir(const std::filesystem::path &root);

// Paths may be absolute or relative to the current directory; they are
// recorded relative to options.root. Throws Error(MissingFile) for absent
// files.
WrittenManifest write_manifest(std::string_view stage,
                               const std::vector<std::filesystem::path> &inputs,
                               const std::vector<std::filesystem::path> &outputs,
                               std::optional<std::string> parent,
                               const WriteManifestOptions &options = {});

// Picks the manifest in <root>/provenance whose outputs contain the
// earliest listed input, if any.
std::optional<WrittenManifest>
find_producing_manifest(const std::filesystem::path &root,
                        const std::vector<std::filesystem::path> &inputs);

enum class VerifyIssue {
  Mismatch,      // file bytes no longer match the recorded digest
  MissingFile,   // referenced file is gone
  BrokenChain,   // parent digest matches no manifest on disk
  LinkMismatch,  // parent exists but none of its outputs feed this stage
  InvalidManifest,
};

std::string_view to_string(VerifyIssue issue) noexcept;

struct VerifyEntry {
  VerifyIssue issue;
  std::string manifest; // manifest file in which the problem was found
  std::string file;
  std::string expected;
  std::string actual;
};

struct VerificationReport {
  std::vector<std::string> manifests; // leaf first
  std::vector<VerifyEntry> entries;
  std::size_t files_checked = 0;

  bool ok() const noexcept { return entries.empty(); }
};

// The root is the directory containing provenance/. Each file is reported
// at most once even when several manifests reference it.
VerificationReport verify_chain(const std::filesystem::path &leaf_manifest);
// Verifies every manifest under <root>/provenance.
VerificationReport verify_all(const std::filesystem::path &root);

} // namespace routecast
