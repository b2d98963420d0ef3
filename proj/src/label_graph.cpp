#include "gcattack/label_graph.hpp"

#include <algorithm>
#include <queue>
#include <set>

#include "gcattack/error.hpp"

namespace gcattack {

namespace {

// Iterative DFS over the child adjacency returning one cycle as a sequence of
// ids (first node repeated at the end is omitted). Empty when acyclic.
std::vector<LabelId> find_cycle(const std::vector<std::vector<LabelId>>& children) {
  enum class Color : std::uint8_t { White, Grey, Black };
  const std::size_t n = children.size();
  std::vector<Color> color(n, Color::White);
  std::vector<std::size_t> parent_on_stack(n, n);

  for (std::size_t start = 0; start < n; ++start) {
    if (color[start] != Color::White) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{start, 0}};
    color[start] = Color::Grey;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < children[node].size()) {
        const std::size_t child = index(children[node][next++]);
        if (color[child] == Color::Grey) {
          std::vector<LabelId> cycle{label_id(child)};
          for (std::size_t v = node; v != child; v = parent_on_stack[v]) {
            cycle.push_back(label_id(v));
          }
          std::reverse(cycle.begin() + 1, cycle.end());
          return cycle;
        }
        if (color[child] == Color::White) {
          color[child] = Color::Grey;
          parent_on_stack[child] = node;
          stack.emplace_back(child, 0);
        }
      } else {
        color[node] = Color::Black;
        stack.pop_back();
      }
    }
  }
  return {};
}

LabelSet reach(const LabelGraph& g, LabelId start, bool upward) {
  std::vector<bool> seen(g.size(), false);
  std::vector<LabelId> frontier{start};
  seen[index(start)] = true;
  LabelSet out;
  while (!frontier.empty()) {
    const LabelId v = frontier.back();
    frontier.pop_back();
    for (LabelId w : upward ? g.parents(v) : g.children(v)) {
      if (!seen[index(w)]) {
        seen[index(w)] = true;
        out.push_back(w);
        frontier.push_back(w);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

LabelGraph LabelGraph::build(std::vector<std::string> names, std::span<const NamedEdge> edges,
                             std::span<const std::string> original) {
  std::vector<bool> mask(names.size(), original.empty());
  if (!original.empty()) {
    std::unordered_map<std::string_view, std::size_t> pos;
    for (std::size_t i = 0; i < names.size(); ++i) pos.emplace(names[i], i);
    for (const std::string& name : original) {
      auto it = pos.find(name);
      if (it == pos.end()) {
        throw Error(ErrorCode::UnknownLabelName, "original label '" + name + "' is not a label");
      }
      mask[it->second] = true;
    }
  }
  return build_with_mask(std::move(names), edges, std::move(mask));
}

LabelGraph LabelGraph::build_with_mask(std::vector<std::string> names, std::span<const NamedEdge> edges,
                                       std::vector<bool> original_mask) {
  if (original_mask.size() != names.size()) {
    throw Error(ErrorCode::LengthMismatch, "original mask length differs from label count");
  }
  LabelGraph g;
  const std::size_t n = names.size();
  g.by_name_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!g.by_name_.emplace(names[i], label_id(i)).second) {
      throw Error(ErrorCode::DuplicateLabelName, "label '" + names[i] + "' appears more than once");
    }
  }
  g.names_ = std::move(names);
  g.children_.assign(n, {});
  g.parents_.assign(n, {});

  auto lookup = [&g](const std::string& name) {
    auto it = g.by_name_.find(name);
    if (it == g.by_name_.end()) {
      throw Error(ErrorCode::UnknownLabelName, "edge endpoint '" + name + "' is not a label");
    }
    return it->second;
  };

  std::set<std::pair<LabelId, LabelId>> seen_edges;
  for (const NamedEdge& e : edges) {
    const LabelId p = lookup(e.parent);
    const LabelId c = lookup(e.child);
    if (p == c) {
      throw Error(ErrorCode::CycleDetected, "self edge on '" + e.parent + "'");
    }
    if (!seen_edges.emplace(p, c).second) {
      throw Error(ErrorCode::DuplicateEdge, "edge '" + e.parent + "' -> '" + e.child + "' is repeated");
    }
    g.children_[index(p)].push_back(c);
    g.parents_[index(c)].push_back(p);
  }
  g.edge_count_ = seen_edges.size();
  for (auto& adj : g.children_) std::sort(adj.begin(), adj.end());
  for (auto& adj : g.parents_) std::sort(adj.begin(), adj.end());

  if (auto cycle = find_cycle(g.children_); !cycle.empty()) {
    std::string msg = "cycle ";
    for (LabelId v : cycle) msg += "'" + g.names_[index(v)] + "' -> ";
    msg += "'" + g.names_[index(cycle.front())] + "'";
    throw Error(ErrorCode::CycleDetected, msg);
  }

  g.original_ = std::move(original_mask);

  // Kahn's algorithm with a min-heap gives a deterministic order.
  std::vector<std::size_t> indegree(n);
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i) {
    indegree[i] = g.parents_[i].size();
    if (indegree[i] == 0) ready.push(i);
  }
  g.depth_.assign(n, 1);
  while (!ready.empty()) {
    const std::size_t v = ready.top();
    ready.pop();
    g.topo_.push_back(label_id(v));
    for (LabelId c : g.children_[v]) {
      g.depth_[index(c)] = std::max(g.depth_[index(c)], g.depth_[v] + 1);
      if (--indegree[index(c)] == 0) ready.push(index(c));
    }
  }
  return g;
}

void LabelGraph::check_id(LabelId id) const {
  if (index(id) >= names_.size()) {
    throw Error(ErrorCode::InvalidLabelId,
                "label id " + std::to_string(index(id)) + " out of range for " +
                    std::to_string(names_.size()) + " labels");
  }
}

const std::string& LabelGraph::name(LabelId id) const {
  check_id(id);
  return names_[index(id)];
}

LabelId LabelGraph::id_of(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) {
    throw Error(ErrorCode::UnknownLabelName, "unknown label '" + std::string(name) + "'");
  }
  return it->second;
}

bool LabelGraph::contains(std::string_view name) const {
  return by_name_.contains(std::string(name));
}

std::span<const LabelId> LabelGraph::children(LabelId id) const {
  check_id(id);
  return children_[index(id)];
}

std::span<const LabelId> LabelGraph::parents(LabelId id) const {
  check_id(id);
  return parents_[index(id)];
}

bool LabelGraph::is_original(LabelId id) const {
  check_id(id);
  return original_[index(id)];
}

bool LabelGraph::has_edge(LabelId parent, LabelId child) const {
  const auto kids = children(parent);
  return std::binary_search(kids.begin(), kids.end(), child);
}

std::size_t LabelGraph::depth(LabelId id) const {
  check_id(id);
  return depth_[index(id)];
}

LabelSet LabelGraph::roots() const {
  LabelSet out;
  for (std::size_t i = 0; i < size(); ++i) {
    if (parents_[i].empty()) out.push_back(label_id(i));
  }
  return out;
}

LabelSet LabelGraph::leaves() const {
  LabelSet out;
  for (std::size_t i = 0; i < size(); ++i) {
    if (children_[i].empty()) out.push_back(label_id(i));
  }
  return out;
}

LabelSet LabelGraph::ancestors(LabelId id) const {
  check_id(id);
  return reach(*this, id, true);
}

LabelSet LabelGraph::descendants(LabelId id) const {
  check_id(id);
  return reach(*this, id, false);
}

std::vector<std::pair<LabelId, LabelId>> LabelGraph::edges() const {
  std::vector<std::pair<LabelId, LabelId>> out;
  out.reserve(edge_count_);
  for (std::size_t p = 0; p < size(); ++p) {
    for (LabelId c : children_[p]) out.emplace_back(label_id(p), c);
  }
  return out;
}

LabelId lowest_common_subsumer(const LabelGraph& g, LabelId a, LabelId b) {
  LabelSet up_a = g.ancestors(a);
  up_a.insert(std::lower_bound(up_a.begin(), up_a.end(), a), a);
  LabelSet up_b = g.ancestors(b);
  up_b.insert(std::lower_bound(up_b.begin(), up_b.end(), b), b);

  LabelSet common;
  std::set_intersection(up_a.begin(), up_a.end(), up_b.begin(), up_b.end(), std::back_inserter(common));
  if (common.empty()) {
    throw Error(ErrorCode::NoCommonAncestor,
                "'" + g.name(a) + "' and '" + g.name(b) + "' share no ancestor");
  }
  // `common` is sorted, so the first maximum is the smallest id among the deepest.
  return *std::max_element(common.begin(), common.end(), [&g](LabelId x, LabelId y) {
    return g.depth(x) < g.depth(y);
  });
}

double wup_similarity(const LabelGraph& g, LabelId a, LabelId b) {
  const LabelId lcs = lowest_common_subsumer(g, a, b);
  return 2.0 * static_cast<double>(g.depth(lcs)) / static_cast<double>(g.depth(a) + g.depth(b));
}

LabelGraph treeify(const LabelGraph& reference, std::span<const TaxonomyCandidate> candidates) {
  std::vector<NamedEdge> kept;
  kept.reserve(candidates.size());
  for (const TaxonomyCandidate& cand : candidates) {
    const LabelId child = reference.id_of(cand.child);
    if (cand.parents.empty()) {
      throw Error(ErrorCode::InvalidArgument, "candidate entry for '" + cand.child + "' has no parents");
    }
    LabelId best = reference.id_of(cand.parents.front());
    double best_score = wup_similarity(reference, child, best);
    for (const std::string& parent_name : cand.parents) {
      const LabelId p = reference.id_of(parent_name);
      const double score = wup_similarity(reference, child, p);
      if (score > best_score || (score == best_score && p < best)) {
        best = p;
        best_score = score;
      }
    }
    kept.push_back({reference.name(best), cand.child});
  }

  return LabelGraph::build_with_mask(reference.names(), kept, reference.original_mask());
}

std::vector<TaxonomyCandidate> candidates_from_parents(const LabelGraph& g) {
  std::vector<TaxonomyCandidate> out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto parents = g.parents(label_id(i));
    if (parents.empty()) continue;
    TaxonomyCandidate cand{g.names()[i], {}};
    for (LabelId p : parents) cand.parents.push_back(g.name(p));
    out.push_back(std::move(cand));
  }
  return out;
}

}  // namespace gcattack
