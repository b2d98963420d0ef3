#include "run_manifest.hpp"

#include <ctime>

#include "gcattack/error.hpp"
#include "gcattack/graph_io.hpp"

namespace gcattack::cli {

namespace fs = std::filesystem;

std::string file_hash(const fs::path& path) { return hex64(fnv1a64(read_text_file(path))); }

void RunManifest::add_input(const fs::path& path) {
  inputs.push_back({{"path", path.string()}, {"fnv1a64", file_hash(path)}});
}

void RunManifest::add_output(const fs::path& path, const fs::path& manifest_path) {
  const fs::path base = manifest_path.parent_path().empty() ? fs::path(".") : manifest_path.parent_path();
  outputs.push_back({{"file", fs::relative(path, base).generic_string()}, {"fnv1a64", file_hash(path)}});
}

std::string RunManifest::to_json() const {
  const std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &utc);
  ordered_json doc = {
      {"tool", "gcattack"},
      {"version", kToolVersion},
      {"command", command},
      {"argv", argv},
      {"cwd", cwd},
      {"config", config},
      {"seeds", seeds},
      {"inputs", inputs},
      {"outputs", outputs},
      {"summary", summary},
      {"kernels", kernels},
      {"timestamp", stamp},
  };
  return doc.dump(2) + "\n";
}

RunManifest RunManifest::from_json(std::string_view text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
    RunManifest m;
    m.command = doc.at("command").get<std::string>();
    m.argv = doc.at("argv").get<std::vector<std::string>>();
    m.cwd = doc.value("cwd", std::string{});
    m.config = doc.value("config", ordered_json::object());
    m.seeds = doc.value("seeds", ordered_json::object());
    m.inputs = doc.value("inputs", ordered_json::array());
    m.outputs = doc.value("outputs", ordered_json::array());
    m.summary = doc.value("summary", ordered_json::object());
    m.kernels = doc.value("kernels", std::string{});
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed run manifest: ") + e.what());
  }
}

fs::path manifest_for_file(const fs::path& output) {
  fs::path p = output;
  p += ".manifest.json";
  return p;
}

fs::path manifest_for_dir(const fs::path& dir) { return dir / "manifest.json"; }

void verify_against_manifest(const fs::path& input) {
  const std::string actual = file_hash(input);
  const fs::path candidates[] = {manifest_for_file(input), manifest_for_dir(input.parent_path().empty()
                                                                                ? fs::path(".")
                                                                                : input.parent_path())};
  bool found_manifest = false;
  for (const fs::path& m : candidates) {
    if (!fs::exists(m)) continue;
    found_manifest = true;
    const RunManifest manifest = RunManifest::from_json(read_text_file(m));
    const fs::path base = m.parent_path().empty() ? fs::path(".") : m.parent_path();
    for (const auto& out : manifest.outputs) {
      const fs::path listed = base / out.at("file").get<std::string>();
      if (!fs::exists(listed) || !fs::equivalent(listed, input)) continue;
      if (out.at("fnv1a64").get<std::string>() != actual) {
        throw Error(ErrorCode::InvalidState, input.string() + " changed since " + m.string() + " was written");
      }
      return;
    }
  }
  throw Error(ErrorCode::InvalidState, input.string() + (found_manifest ? " is not listed in its run manifest"
                                                                        : " has no run manifest"));
}

}  // namespace gcattack::cli
