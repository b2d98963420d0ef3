#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "gcattack/consistency.hpp"
#include "gcattack/label_graph.hpp"

namespace gcattack {

enum class Direction : std::uint8_t { TurnOff, TurnOn };
enum class Provenance : std::uint8_t { Target, ChildCascade, ParentCascade };

std::string_view to_string(Direction d);
std::string_view to_string(Provenance p);

/// Sign a label must currently have for `d` to be a valid flip.
constexpr Sign required_sign(Direction d) noexcept {
  return d == Direction::TurnOff ? Sign::Present : Sign::Absent;
}

struct TargetEntry {
  LabelId node;
  Direction direction;
  friend bool operator==(const TargetEntry&, const TargetEntry&) = default;
};

/// Labels the attacker wants flipped, in insertion order, nodes distinct.
class TargetSet {
 public:
  TargetSet() = default;
  TargetSet(std::initializer_list<TargetEntry> entries);

  /// Throws InvalidArgument when the node is already present.
  void add(LabelId node, Direction direction);
  bool contains(LabelId node) const;
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<TargetEntry>& entries() const noexcept { return entries_; }
  LabelSet nodes() const;  // sorted

  /// All entries turn labels off, one per node in `nodes`.
  static TargetSet turn_off(std::span<const LabelId> nodes);

  friend bool operator==(const TargetSet&, const TargetSet&) = default;

 private:
  std::vector<TargetEntry> entries_;
};

struct ExpandedEntry {
  LabelId node;
  Direction direction;
  Provenance provenance;
  friend bool operator==(const ExpandedEntry&, const ExpandedEntry&) = default;
};

/// Target set plus the cascaded flips that keep the prediction consistent.
/// Entries are in the order they were added to the flip set.
struct ExpandedTargetSet {
  std::vector<ExpandedEntry> entries;
  // False when the input state already violated a rule; violations present
  // before the flip are left alone.
  bool input_consistent = true;

  bool empty() const noexcept { return entries.empty(); }
  std::size_t size() const noexcept { return entries.size(); }
  bool contains(LabelId node) const;
  LabelSet nodes() const;  // sorted

  friend bool operator==(const ExpandedTargetSet&, const ExpandedTargetSet&) = default;
};

/// Expanded target set for `omega` on prediction `s`.
///
/// For each turn-off target, in input order and sharing one flip set:
///  - downward: ON children are turned off unless they keep an ON parent
///    outside the flip set, recursively towards the leaves;
///  - upward: ON parents are turned off unless they keep an ON child outside
///    the flip set, recursively towards the roots.
/// A kept node is examined again whenever another of its supporters is
/// flipped. Turn-on targets switch on every OFF ancestor and, when all their
/// children are OFF, the shortest OFF child chain ending at a leaf or at a node
/// with an ON child. The simulated result is then checked globally and
/// repaired to a fixpoint (at most |C| rounds).
///
/// Throws DirectionMismatch, LengthMismatch, InvalidLabelId, NonConvergence.
ExpandedTargetSet expand(const LabelGraph& g, const LabelState& s, const TargetSet& omega);

/// `s` with exactly the entries of `gamma` negated. Throws DirectionMismatch
/// when an entry's direction does not match the current sign.
LabelState simulate_flip(const LabelState& s, const ExpandedTargetSet& gamma);

/// Same entries with every direction swapped; undoes simulate_flip.
ExpandedTargetSet reversed(const ExpandedTargetSet& gamma);

}  // namespace gcattack
