#include "gcattack/target_expansion.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "gcattack/error.hpp"

namespace gcattack {

std::string_view to_string(Direction d) { return d == Direction::TurnOff ? "TurnOff" : "TurnOn"; }

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Target: return "Target";
    case Provenance::ChildCascade: return "ChildCascade";
    case Provenance::ParentCascade: return "ParentCascade";
  }
  return "Unknown";
}

TargetSet::TargetSet(std::initializer_list<TargetEntry> entries) {
  for (const auto& e : entries) add(e.node, e.direction);
}

void TargetSet::add(LabelId node, Direction direction) {
  if (contains(node)) {
    throw Error(ErrorCode::InvalidArgument,
                "label id " + std::to_string(index(node)) + " is already a target");
  }
  entries_.push_back({node, direction});
}

bool TargetSet::contains(LabelId node) const {
  return std::any_of(entries_.begin(), entries_.end(), [node](const auto& e) { return e.node == node; });
}

LabelSet TargetSet::nodes() const {
  LabelSet out;
  for (const auto& e : entries_) out.push_back(e.node);
  std::sort(out.begin(), out.end());
  return out;
}

TargetSet TargetSet::turn_off(std::span<const LabelId> nodes) {
  TargetSet out;
  for (LabelId n : nodes) out.add(n, Direction::TurnOff);
  return out;
}

bool ExpandedTargetSet::contains(LabelId node) const {
  return std::any_of(entries.begin(), entries.end(), [node](const auto& e) { return e.node == node; });
}

LabelSet ExpandedTargetSet::nodes() const {
  LabelSet out;
  for (const auto& e : entries) out.push_back(e.node);
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

class Expander {
 public:
  Expander(const LabelGraph& g, const LabelState& s)
      : g_(g), post_(s), slot_(g.size(), kNone) {}

  void process(const TargetEntry& target) {
    if (const std::size_t at = slot_[index(target.node)]; at != kNone) {
      // Already flipped as a cascade of an earlier target.
      if (out_.entries[at].direction != target.direction) {
        throw Error(ErrorCode::NonConvergence,
                    "target '" + g_.name(target.node) + "' conflicts with an earlier cascade");
      }
      out_.entries[at].provenance = Provenance::Target;
    } else {
      flip(target.node, target.direction, Provenance::Target);
    }
    if (target.direction == Direction::TurnOff) {
      cascade_down(target.node);
      cascade_up(target.node);
    } else {
      switch_on_ancestors(target.node);
      switch_on_child_chain(target.node);
    }
  }

  void repair(const std::set<Violation>& preexisting) {
    for (std::size_t round = 0; round <= g_.size(); ++round) {
      std::vector<Violation> fresh;
      for (const Violation& v : check_global(g_, post_).violations) {
        if (!preexisting.contains(v)) fresh.push_back(v);
      }
      if (fresh.empty()) return;
      for (const Violation& v : fresh) {
        if (!post_.on(v.node)) continue;  // resolved earlier in this round
        if (slot_[index(v.node)] != kNone) {
          // A node switched on by a turn-on target lacks support.
          if (v.rule == Rule::NoOnChild) {
            switch_on_child_chain(v.node);
          } else {
            switch_on_ancestors(v.node);
          }
        } else if (v.rule == Rule::NoOnChild) {
          flip(v.node, Direction::TurnOff, Provenance::ParentCascade);
          cascade_up(v.node);
        } else {
          flip(v.node, Direction::TurnOff, Provenance::ChildCascade);
          cascade_down(v.node);
        }
      }
    }
    throw Error(ErrorCode::NonConvergence,
                "expanded target set still inconsistent after " + std::to_string(g_.size()) + " rounds");
  }

  ExpandedTargetSet take() { return std::move(out_); }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  void flip(LabelId v, Direction d, Provenance p) {
    slot_[index(v)] = out_.entries.size();
    out_.entries.push_back({v, d, p});
    post_.flip(v);
  }

  bool any_on(std::span<const LabelId> ids) const {
    return std::any_of(ids.begin(), ids.end(), [this](LabelId w) { return post_.on(w); });
  }

  void enqueue_on(std::span<const LabelId> ids, std::deque<LabelId>& queue) const {
    for (LabelId w : ids) {
      if (post_.on(w) && slot_[index(w)] == kNone) queue.push_back(w);
    }
  }

  // An ON node outside the flip set is turned off once none of its parents is ON.
  void cascade_down(LabelId from) {
    std::deque<LabelId> queue;
    enqueue_on(g_.children(from), queue);
    while (!queue.empty()) {
      const LabelId v = queue.front();
      queue.pop_front();
      if (!post_.on(v) || slot_[index(v)] != kNone) continue;
      if (any_on(g_.parents(v))) continue;
      flip(v, Direction::TurnOff, Provenance::ChildCascade);
      enqueue_on(g_.children(v), queue);
    }
  }

  // An ON node outside the flip set is turned off once none of its children is ON.
  void cascade_up(LabelId from) {
    std::deque<LabelId> queue;
    enqueue_on(g_.parents(from), queue);
    while (!queue.empty()) {
      const LabelId p = queue.front();
      queue.pop_front();
      if (!post_.on(p) || slot_[index(p)] != kNone) continue;
      if (any_on(g_.children(p))) continue;
      flip(p, Direction::TurnOff, Provenance::ParentCascade);
      enqueue_on(g_.parents(p), queue);
    }
  }

  void switch_on_ancestors(LabelId from) {
    for (LabelId a : g_.ancestors(from)) {
      if (post_.on(a)) continue;
      if (slot_[index(a)] != kNone) {
        throw Error(ErrorCode::NonConvergence,
                    "ancestor '" + g_.name(a) + "' was already turned off by another target");
      }
      flip(a, Direction::TurnOn, Provenance::ParentCascade);
    }
  }

  // Shortest downward chain of OFF labels from `from` ending at a leaf or at a
  // label that already has an ON child; BFS over sorted children fixes ties.
  void switch_on_child_chain(LabelId from) {
    const auto kids = g_.children(from);
    if (kids.empty() || any_on(kids)) return;
    std::vector<std::size_t> came_from(g_.size(), kNone);
    std::deque<LabelId> queue;
    for (LabelId c : kids) {
      if (slot_[index(c)] == kNone && came_from[index(c)] == kNone) {
        came_from[index(c)] = index(from);
        queue.push_back(c);
      }
    }
    while (!queue.empty()) {
      const LabelId v = queue.front();
      queue.pop_front();
      const auto grandkids = g_.children(v);
      if (grandkids.empty() || any_on(grandkids)) {
        std::vector<LabelId> chain;
        for (std::size_t w = index(v); w != index(from); w = came_from[w]) chain.push_back(label_id(w));
        std::reverse(chain.begin(), chain.end());
        for (LabelId w : chain) flip(w, Direction::TurnOn, Provenance::ChildCascade);
        return;
      }
      for (LabelId c : grandkids) {
        if (slot_[index(c)] == kNone && came_from[index(c)] == kNone) {
          came_from[index(c)] = index(v);
          queue.push_back(c);
        }
      }
    }
    throw Error(ErrorCode::NonConvergence,
                "no OFF child chain can support '" + g_.name(from) + "'");
  }

  const LabelGraph& g_;
  LabelState post_;
  std::vector<std::size_t> slot_;  // position in out_.entries or kNone
  ExpandedTargetSet out_;
};

void check_directions(const LabelState& s, LabelId node, Direction d, const LabelGraph* g) {
  if (s[node] != required_sign(d)) {
    const std::string who = g ? "'" + g->name(node) + "'" : "label id " + std::to_string(index(node));
    throw Error(ErrorCode::DirectionMismatch,
                who + " cannot be flipped " + std::string(to_string(d)) + " from its current sign");
  }
}

}  // namespace

ExpandedTargetSet expand(const LabelGraph& g, const LabelState& s, const TargetSet& omega) {
  if (s.size() != g.size()) {
    throw Error(ErrorCode::LengthMismatch, "state length does not match graph");
  }
  for (const auto& t : omega.entries()) {
    g.check_id(t.node);
    check_directions(s, t.node, t.direction, &g);
  }
  const auto pre_report = check_global(g, s);
  const std::set<Violation> preexisting(pre_report.violations.begin(), pre_report.violations.end());

  Expander expander(g, s);
  for (const auto& t : omega.entries()) expander.process(t);
  expander.repair(preexisting);

  ExpandedTargetSet out = expander.take();
  out.input_consistent = pre_report.consistent();
  return out;
}

LabelState simulate_flip(const LabelState& s, const ExpandedTargetSet& gamma) {
  LabelState out = s;
  for (const auto& e : gamma.entries) {
    if (index(e.node) >= s.size()) {
      throw Error(ErrorCode::InvalidLabelId, "flip entry outside the state");
    }
    check_directions(s, e.node, e.direction, nullptr);
    out.flip(e.node);
  }
  return out;
}

ExpandedTargetSet reversed(const ExpandedTargetSet& gamma) {
  ExpandedTargetSet out = gamma;
  for (auto& e : out.entries) {
    e.direction = e.direction == Direction::TurnOff ? Direction::TurnOn : Direction::TurnOff;
  }
  return out;
}

}  // namespace gcattack
