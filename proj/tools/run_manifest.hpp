#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace gcattack::cli {

using ordered_json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.3.0";

/// Record written next to every CLI output. `argv` is the fully resolved
/// invocation (every option spelled out), so a replay needs nothing else.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  ordered_json config = ordered_json::object();
  ordered_json seeds = ordered_json::object();
  ordered_json inputs = ordered_json::array();   // {"path", "fnv1a64"}
  ordered_json outputs = ordered_json::array();  // {"file", "fnv1a64"}, relative to the manifest
  ordered_json summary = ordered_json::object();
  std::string kernels;
  std::string cwd;

  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path, const std::filesystem::path& manifest_path);

  std::string to_json() const;  // adds the timestamp
  static RunManifest from_json(std::string_view text);
};

std::string file_hash(const std::filesystem::path& path);

/// Manifest path for a command whose main artifact is `output`.
std::filesystem::path manifest_for_file(const std::filesystem::path& output);
std::filesystem::path manifest_for_dir(const std::filesystem::path& dir);

/// Strict-mode check: some manifest next to `input` (its file manifest or the
/// directory manifest) lists it with a matching hash. Throws InvalidState.
void verify_against_manifest(const std::filesystem::path& input);

}  // namespace gcattack::cli
