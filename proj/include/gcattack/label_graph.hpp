#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace gcattack {

// Dense label index in [0, |C|). Ids are derived from input order and never
// persisted; names are the authority in every file format.
enum class LabelId : std::uint32_t {};

constexpr std::size_t index(LabelId id) noexcept { return static_cast<std::size_t>(id); }
constexpr LabelId label_id(std::size_t i) noexcept { return static_cast<LabelId>(i); }

using LabelSet = std::vector<LabelId>;  // sorted, unique

struct NamedEdge {
  std::string parent;
  std::string child;
};

/// Immutable directed acyclic label hierarchy.
///
/// Edges point from the more abstract label (parent) to the more specific one
/// (child). Adjacency lists are sorted by id. Depths follow the longest-path
/// convention with roots at depth 1, so WUP similarity never exceeds 1 on a DAG.
/// Safe for concurrent reads once constructed.
class LabelGraph {
 public:
  /// Validates and builds a graph. Throws Error with CycleDetected (the message
  /// lists one cycle), UnknownLabelName, DuplicateLabelName or DuplicateEdge.
  /// A self edge is reported as a one-node cycle.
  /// When `original` is empty every label is flagged original.
  static LabelGraph build(std::vector<std::string> names, std::span<const NamedEdge> edges,
                          std::span<const std::string> original = {});
  /// Same as build() with an explicit per-label original flag.
  static LabelGraph build_with_mask(std::vector<std::string> names, std::span<const NamedEdge> edges,
                                    std::vector<bool> original_mask);

  std::size_t size() const noexcept { return names_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }

  const std::string& name(LabelId id) const;
  const std::vector<std::string>& names() const noexcept { return names_; }
  LabelId id_of(std::string_view name) const;  // throws UnknownLabelName
  bool contains(std::string_view name) const;

  std::span<const LabelId> children(LabelId id) const;
  std::span<const LabelId> parents(LabelId id) const;
  bool is_original(LabelId id) const;
  const std::vector<bool>& original_mask() const noexcept { return original_; }
  bool has_edge(LabelId parent, LabelId child) const;

  std::span<const LabelId> topological_order() const noexcept { return topo_; }

  /// 1 + longest path length from any root; roots have depth 1.
  std::size_t depth(LabelId id) const;

  LabelSet roots() const;
  LabelSet leaves() const;
  LabelSet ancestors(LabelId id) const;    // excludes id
  LabelSet descendants(LabelId id) const;  // excludes id

  /// Edges as (parent, child) pairs ordered by parent id then child id.
  std::vector<std::pair<LabelId, LabelId>> edges() const;

  void check_id(LabelId id) const;

  friend bool operator==(const LabelGraph& a, const LabelGraph& b) {
    return a.names_ == b.names_ && a.children_ == b.children_ && a.original_ == b.original_;
  }

 private:
  LabelGraph() = default;

  std::vector<std::string> names_;
  std::unordered_map<std::string, LabelId> by_name_;
  std::vector<std::vector<LabelId>> children_;
  std::vector<std::vector<LabelId>> parents_;
  std::vector<bool> original_;
  std::vector<LabelId> topo_;
  std::vector<std::size_t> depth_;
  std::size_t edge_count_ = 0;
};

/// Deepest common ancestor of a and b (each counts as its own ancestor), ties
/// broken by smallest id. Throws NoCommonAncestor.
LabelId lowest_common_subsumer(const LabelGraph& g, LabelId a, LabelId b);

/// Wu-Palmer similarity 2 depth(lcs) / (depth(a) + depth(b)).
double wup_similarity(const LabelGraph& g, LabelId a, LabelId b);

struct TaxonomyCandidate {
  std::string child;
  std::vector<std::string> parents;
};

/// Reduces multi-parent candidates to one parent per child: the candidate with
/// maximal WUP similarity to the child in `reference`, smallest id on ties.
/// The result has the reference's labels and original flags and exactly one
/// edge per candidate entry; labels without an entry become roots.
LabelGraph treeify(const LabelGraph& reference, std::span<const TaxonomyCandidate> candidates);

/// Candidate list holding every label's current parents, for labels that have any.
std::vector<TaxonomyCandidate> candidates_from_parents(const LabelGraph& g);

}  // namespace gcattack
