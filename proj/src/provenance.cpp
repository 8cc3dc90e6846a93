#include "routecast/provenance.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <map>
#include <memory>
#include <set>

#include <json.hpp>

#include "routecast/error.hpp"

namespace routecast {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct MdCtxDeleter {
  void operator()(EVP_MD_CTX *ctx) const { EVP_MD_CTX_free(ctx); }
};
using MdCtx = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;

MdCtx new_sha256() {
  MdCtx ctx(EVP_MD_CTX_new());
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::IoError, "SHA-256 initialisation failed");
  return ctx;
}

std::string finish_hex(EVP_MD_CTX *ctx) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx, md.data(), &len) != 1)
    throw Error(ErrorCode::IoError, "SHA-256 finalisation failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xF];
  }
  return out;
}

std::string relative_to(const fs::path &p, const fs::path &root) {
  const auto abs = fs::weakly_canonical(fs::absolute(p));
  const auto base = fs::weakly_canonical(fs::absolute(root));
  return abs.lexically_relative(base).generic_string();
}

std::string read_all(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::IoError, "cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string sanitize(std::string_view s) {
  std::string out;
  for (char c : s)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' ||
            c == '_' || c == '.')
               ? c
               : '_';
  return out;
}

json digests_to_json(const std::vector<FileDigest> &ds) {
  json arr = json::array();
  for (const auto &d : ds)
    arr.push_back({{"path", d.path}, {"sha256", d.sha256}});
  return arr;
}

std::vector<FileDigest> digests_from_json(const json &j) {
  if (!j.is_array())
    throw Error(ErrorCode::InvalidArtifact, "digest list must be an array");
  std::vector<FileDigest> out;
  for (const auto &e : j) {
    if (!e.is_object() || !e.contains("path") || !e.contains("sha256") ||
        !e["path"].is_string() || !e["sha256"].is_string())
      throw Error(ErrorCode::InvalidArtifact, "malformed digest entry");
    out.push_back({e["path"].get<std::string>(), e["sha256"].get<std::string>()});
  }
  return out;
}

// Sorted list of manifest files in a provenance directory.
std::vector<fs::path> list_manifests(const fs::path &dir) {
  std::vector<fs::path> out;
  std::error_code ec;
  if (!fs::is_directory(dir, ec))
    return out;
  for (const auto &entry : fs::directory_iterator(dir, ec)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.size() > 14 &&
        name.ends_with(".manifest.json"))
      out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace

std::string sha256_hex(std::string_view bytes) {
  auto ctx = new_sha256();
  if (EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1)
    throw Error(ErrorCode::IoError, "SHA-256 update failed");
  return finish_hex(ctx.get());
}

std::string hash_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::IoError, "cannot read " + path.string());
  auto ctx = new_sha256();
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    const auto got = in.gcount();
    if (got > 0 &&
        EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<size_t>(got)) != 1)
      throw Error(ErrorCode::IoError, "SHA-256 update failed");
  }
  if (in.bad())
    throw Error(ErrorCode::IoError, "read error on " + path.string());
  return finish_hex(ctx.get());
}

bool is_sha256_hex(std::string_view s) noexcept {
  return s.size() == 64 && std::all_of(s.begin(), s.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

std::string serialize_manifest(const Manifest &m) {
  json j;
  j["stage"] = m.stage;
  j["created_at"] = m.created_at;
  j["inputs"] = digests_to_json(m.inputs);
  j["outputs"] = digests_to_json(m.outputs);
  if (m.parent)
    j["parent"] = *m.parent;
  j["tool_version"] = m.tool_version;
  return j.dump(2) + "\n";
}

Manifest parse_manifest(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw Error(ErrorCode::InvalidArtifact, "manifest is not a JSON object");
  auto str = [&](const char *key) {
    if (!j.contains(key) || !j[key].is_string())
      throw Error(ErrorCode::InvalidArtifact,
                  std::string("manifest field '") + key + "' missing");
    return j[key].get<std::string>();
  };
  Manifest m;
  m.stage = str("stage");
  m.created_at = str("created_at");
  m.tool_version = str("tool_version");
  m.inputs = digests_from_json(j.value("inputs", json()));
  m.outputs = digests_from_json(j.value("outputs", json()));
  if (j.contains("parent") && !j["parent"].is_null())
    m.parent = str("parent");
  return m;
}

std::string utc_timestamp_now() {
  std::time_t t = std::time(nullptr);
  if (const char *epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    char *end = nullptr;
    const long long v = std::strtoll(epoch, &end, 10);
    if (end != epoch && *end == '\0')
      t = static_cast<std::time_t>(v);
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path provenance_dir(const fs::path &root) { return root / "provenance"; }

WrittenManifest write_manifest(std::string_view stage,
                               const std::vector<fs::path> &inputs,
                               const std::vector<fs::path> &outputs,
                               std::optional<std::string> parent,
                               const WriteManifestOptions &options) {
  Manifest m;
  m.stage = std::string(stage);
  m.created_at = options.created_at.value_or(utc_timestamp_now());
  m.tool_version = std::string(kToolVersion);
  m.parent = std::move(parent);

  auto collect = [&](const std::vector<fs::path> &paths,
                     std::vector<FileDigest> &into) {
    std::set<std::string> seen;
    for (const auto &p : paths) {
      if (!fs::is_regular_file(p))
        throw Error(ErrorCode::MissingFile,
                    "stage '" + m.stage + "': no such file " + p.string());
      auto rel = relative_to(p, options.root);
      if (seen.insert(rel).second)
        into.push_back({std::move(rel), hash_file(p)});
    }
  };
  collect(inputs, m.inputs);
  collect(outputs, m.outputs);

  std::string name = sanitize(m.stage);
  if (!outputs.empty())
    name += "." + sanitize(outputs.front().filename().string());
  const fs::path dir = provenance_dir(options.root);
  fs::create_directories(dir);
  const fs::path path = dir / (name + ".manifest.json");

  const std::string text = serialize_manifest(m);
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
      throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << text;
  }
  return {path, sha256_hex(text), std::move(m)};
}

std::optional<WrittenManifest>
find_producing_manifest(const fs::path &root,
                        const std::vector<fs::path> &inputs) {
  std::vector<std::pair<fs::path, Manifest>> candidates;
  for (const auto &p : list_manifests(provenance_dir(root))) {
    try {
      candidates.emplace_back(p, parse_manifest(read_all(p)));
    } catch (const Error &) {
    }
  }
  for (const auto &input : inputs) {
    if (!fs::is_regular_file(input))
      continue;
    const auto rel = relative_to(input, root);
    const auto digest = hash_file(input);
    for (const auto &[path, m] : candidates) {
      for (const auto &o : m.outputs) {
        if (o.path == rel && o.sha256 == digest)
          return WrittenManifest{path, hash_file(path), m};
      }
    }
  }
  return std::nullopt;
}

std::string_view to_string(VerifyIssue issue) noexcept {
  switch (issue) {
  case VerifyIssue::Mismatch: return "Mismatch";
  case VerifyIssue::MissingFile: return "MissingFile";
  case VerifyIssue::BrokenChain: return "BrokenChain";
  case VerifyIssue::LinkMismatch: return "LinkMismatch";
  case VerifyIssue::InvalidManifest: return "InvalidManifest";
  }
  return "Unknown";
}

namespace {

class ChainVerifier {
public:
  explicit ChainVerifier(fs::path root) : root_(std::move(root)) {
    for (const auto &p : list_manifests(provenance_dir(root_))) {
      try {
        by_hash_.emplace(hash_file(p), p);
      } catch (const Error &) {
      }
    }
  }

  void walk(const fs::path &leaf) {
    fs::path current = leaf;
    while (true) {
      const auto label = relative_to(current, root_);
      if (!visited_.insert(label).second)
        return;
      report_.manifests.push_back(label);

      Manifest m;
      try {
        m = parse_manifest(read_all(current));
      } catch (const Error &e) {
        report_.entries.push_back(
            {VerifyIssue::InvalidManifest, label, label, "", e.what()});
        return;
      }
      for (const auto *list : {&m.inputs, &m.outputs})
        for (const auto &d : *list)
          check_file(label, d);
      if (!m.parent)
        return;
      if (!is_sha256_hex(*m.parent)) {
        report_.entries.push_back({VerifyIssue::InvalidManifest, label, label,
                                   "parent digest", *m.parent});
        return;
      }
      auto it = by_hash_.find(*m.parent);
      if (it == by_hash_.end()) {
        report_.entries.push_back(
            {VerifyIssue::BrokenChain, label, "", *m.parent, ""});
        return;
      }
      check_link(label, m, it->second);
      current = it->second;
    }
  }

  VerificationReport take() { return std::move(report_); }

private:
  void check_file(const std::string &manifest, const FileDigest &d) {
    if (!checked_.insert(d.path).second)
      return;
    ++report_.files_checked;
    if (!is_sha256_hex(d.sha256)) {
      report_.entries.push_back(
          {VerifyIssue::InvalidManifest, manifest, d.path, "", d.sha256});
      return;
    }
    const fs::path p = root_ / fs::path(d.path);
    std::string actual;
    try {
      actual = hash_file(p);
    } catch (const Error &) {
      report_.entries.push_back(
          {VerifyIssue::MissingFile, manifest, d.path, d.sha256, ""});
      return;
    }
    if (actual != d.sha256)
      report_.entries.push_back(
          {VerifyIssue::Mismatch, manifest, d.path, d.sha256, actual});
  }

  void check_link(const std::string &label, const Manifest &child,
                  const fs::path &parent_path) {
    Manifest parent;
    try {
      parent = parse_manifest(read_all(parent_path));
    } catch (const Error &) {
      return; // reported when the walk reaches it
    }
    for (const auto &in : child.inputs)
      for (const auto &out : parent.outputs)
        if (in.path == out.path)
          return;
    report_.entries.push_back({VerifyIssue::LinkMismatch, label,
                               relative_to(parent_path, root_), "", ""});
  }

  fs::path root_;
  std::map<std::string, fs::path> by_hash_;
  std::set<std::string> visited_;
  std::set<std::string> checked_;
  VerificationReport report_;
};

fs::path root_of(const fs::path &manifest) {
  return fs::absolute(manifest).parent_path().parent_path();
}

} // namespace

VerificationReport verify_chain(const fs::path &leaf_manifest) {
  ChainVerifier v(root_of(leaf_manifest));
  v.walk(fs::absolute(leaf_manifest));
  return v.take();
}

VerificationReport verify_all(const fs::path &root) {
  ChainVerifier v(fs::absolute(root));
  for (const auto &p : list_manifests(provenance_dir(fs::absolute(root))))
    v.walk(p);
  return v.take();
}

} // namespace routecast
