#pragma once

// Run manifests, content checksums and atomic artifact writes.

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace sgl::experiment {

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

struct ArtifactRecord {
  std::string path;  // relative to the run directory
  std::string sha256;
  std::uintmax_t bytes = 0;
  bool operator==(const ArtifactRecord&) const = default;
};

struct RunManifest {
  std::string kind;
  std::string code_version;
  std::uint64_t seed = 0;
  std::string config;  // key = value snapshot
  std::string started_at;
  std::string finished_at;
  int exit_code = 0;
  std::vector<ArtifactRecord> artifacts;
  std::vector<std::string> notes;

  std::string to_json() const;
  static RunManifest from_json(const std::string& text);
  static RunManifest load(const std::filesystem::path& path);
};

std::string utc_timestamp();
std::string code_version();

/// Single point through which a run's files are written; records checksums.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path path(const std::string& relative) const { return dir_ / relative; }

  void write(const std::string& relative, std::string_view content);
  /// Registers a file produced elsewhere inside the run directory.
  void add_existing(const std::string& relative);
  void forget(const std::string& relative);

  /// Sorted by path.
  std::vector<ArtifactRecord> records() const;

 private:
  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  std::vector<ArtifactRecord> records_;
};

}  // namespace sgl::experiment
