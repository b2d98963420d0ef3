#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gcattack/label_graph.hpp"

namespace gcattack {

// Graph file: {"labels": [...], "edges": [[parent, child], ...], "original": [...]}.
// "original" is optional on input (absent means every label is original) and
// always written on output. Edges are written in (parent id, child id) order.
std::string serialize_graph(const LabelGraph& g);
LabelGraph parse_graph(std::string_view text);

// Candidates file: [{"child": name, "parents": [name, ...]}, ...].
std::string serialize_candidates(const std::vector<TaxonomyCandidate>& candidates);
std::vector<TaxonomyCandidate> parse_candidates(std::string_view text);

/// FNV-1a 64 of the canonical serialization; stored in dataset headers.
std::uint64_t graph_hash(const LabelGraph& g);
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

LabelGraph load_graph(const std::filesystem::path& path);
void save_graph(const std::filesystem::path& path, const LabelGraph& g);

namespace fixtures {

/// 35-label object hierarchy: 20 original object labels as leaves under 15
/// abstract taxonomy labels under five roots.
LabelGraph object_taxonomy();

/// Four-label hierarchy R -> W -> {A, B}.
LabelGraph small_tree();

/// Balanced hierarchy with 16 leaves (root -> 4 groups -> 4 leaves each).
LabelGraph sixteen_leaves();

}  // namespace fixtures

}  // namespace gcattack
