#include "gcattack/graph_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "gcattack/error.hpp"

namespace gcattack {

using nlohmann::json;

namespace {

std::string location_of(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string(what) + " is not valid JSON at " +
                                           location_of(text, e.byte == 0 ? 0 : e.byte - 1) + ": " +
                                           e.what());
  }
}

template <typename T>
T get_field(const json& j, const char* key, std::string_view what) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorCode::ParseError, std::string(what) + " is missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError,
                std::string(what) + " field '" + key + "' has the wrong type: " + e.what());
  }
}

}  // namespace

std::string serialize_graph(const LabelGraph& g) {
  json edges = json::array();
  for (auto [p, c] : g.edges()) edges.push_back({g.name(p), g.name(c)});
  json original = json::array();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.original_mask()[i]) original.push_back(g.names()[i]);
  }
  json doc;
  doc["labels"] = g.names();
  doc["edges"] = std::move(edges);
  doc["original"] = std::move(original);
  return doc.dump(2) + "\n";
}

LabelGraph parse_graph(std::string_view text) {
  const json doc = parse_json(text, "graph file");
  auto names = get_field<std::vector<std::string>>(doc, "labels", "graph file");
  auto raw_edges = get_field<std::vector<std::vector<std::string>>>(doc, "edges", "graph file");
  std::vector<NamedEdge> edges;
  edges.reserve(raw_edges.size());
  for (std::size_t i = 0; i < raw_edges.size(); ++i) {
    if (raw_edges[i].size() != 2) {
      throw Error(ErrorCode::ParseError,
                  "graph file edge #" + std::to_string(i) + " must be a [parent, child] pair");
    }
    edges.push_back({raw_edges[i][0], raw_edges[i][1]});
  }
  if (!doc.contains("original")) return LabelGraph::build(std::move(names), edges);

  const auto original = get_field<std::vector<std::string>>(doc, "original", "graph file");
  std::vector<bool> mask(names.size(), false);
  for (const std::string& name : original) {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
      throw Error(ErrorCode::UnknownLabelName, "original label '" + name + "' is not a label");
    }
    mask[static_cast<std::size_t>(it - names.begin())] = true;
  }
  return LabelGraph::build_with_mask(std::move(names), edges, std::move(mask));
}

std::string serialize_candidates(const std::vector<TaxonomyCandidate>& candidates) {
  json doc = json::array();
  for (const auto& c : candidates) doc.push_back({{"child", c.child}, {"parents", c.parents}});
  return doc.dump(2) + "\n";
}

std::vector<TaxonomyCandidate> parse_candidates(std::string_view text) {
  const json doc = parse_json(text, "candidates file");
  if (!doc.is_array()) throw Error(ErrorCode::ParseError, "candidates file must be a JSON array");
  std::vector<TaxonomyCandidate> out;
  for (const json& entry : doc) {
    TaxonomyCandidate cand{get_field<std::string>(entry, "child", "candidate entry"),
                           get_field<std::vector<std::string>>(entry, "parents", "candidate entry")};
    if (cand.parents.empty()) {
      throw Error(ErrorCode::InvalidArgument, "candidate entry for '" + cand.child + "' has no parents");
    }
    out.push_back(std::move(cand));
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t graph_hash(const LabelGraph& g) { return fnv1a64(serialize_graph(g)); }

std::string hex64(std::uint64_t value) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xF];
    value >>= 4;
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

LabelGraph load_graph(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_graph(text);
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

void save_graph(const std::filesystem::path& path, const LabelGraph& g) {
  write_text_file(path, serialize_graph(g));
}

namespace fixtures {

LabelGraph object_taxonomy() {
  std::vector<std::string> original{
      "aeroplane", "bicycle", "bird",   "boat",        "bottle", "bus",         "car",
      "cat",       "chair",   "cow",    "diningtable", "dog",    "horse",       "motorbike",
      "person",    "pottedplant", "sheep", "sofa",     "train",  "tvmonitor"};
  std::vector<std::string> abstract{"animal",  "mammal",    "carnivore",      "ungulate",        "primate",
                                    "plant",   "vehicle",   "wheeled_vehicle", "motor_vehicle",  "craft",
                                    "furniture", "seating", "household_item", "container",       "device"};
  std::vector<std::string> names = abstract;
  names.insert(names.end(), original.begin(), original.end());
  const std::vector<NamedEdge> edges{
      {"animal", "bird"},           {"animal", "mammal"},
      {"mammal", "carnivore"},      {"mammal", "ungulate"},
      {"mammal", "primate"},        {"carnivore", "cat"},
      {"carnivore", "dog"},         {"ungulate", "cow"},
      {"ungulate", "horse"},        {"ungulate", "sheep"},
      {"primate", "person"},        {"plant", "pottedplant"},
      {"vehicle", "wheeled_vehicle"}, {"vehicle", "craft"},
      {"wheeled_vehicle", "bicycle"}, {"wheeled_vehicle", "motor_vehicle"},
      {"wheeled_vehicle", "train"}, {"motor_vehicle", "car"},
      {"motor_vehicle", "bus"},     {"motor_vehicle", "motorbike"},
      {"craft", "aeroplane"},       {"craft", "boat"},
      {"furniture", "seating"},     {"furniture", "diningtable"},
      {"seating", "chair"},         {"seating", "sofa"},
      {"household_item", "container"}, {"household_item", "device"},
      {"container", "bottle"},      {"device", "tvmonitor"},
  };
  return LabelGraph::build(std::move(names), edges, original);
}

LabelGraph small_tree() {
  const std::vector<NamedEdge> edges{{"R", "W"}, {"W", "A"}, {"W", "B"}};
  return LabelGraph::build({"R", "W", "A", "B"}, edges);
}

LabelGraph sixteen_leaves() {
  std::vector<std::string> names{"root"};
  std::vector<NamedEdge> edges;
  for (int group = 0; group < 4; ++group) {
    const std::string g = "group" + std::to_string(group);
    names.push_back(g);
    edges.push_back({"root", g});
    for (int leaf = 0; leaf < 4; ++leaf) {
      const std::string l = "leaf" + std::to_string(group * 4 + leaf);
      names.push_back(l);
      edges.push_back({g, l});
    }
  }
  return LabelGraph::build(std::move(names), edges);
}

}  // namespace fixtures

}  // namespace gcattack
