#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "gcattack/label_graph.hpp"

namespace gcattack {

enum class Sign : std::int8_t { Absent = -1, Present = 1 };

constexpr Sign flipped(Sign s) noexcept { return s == Sign::Present ? Sign::Absent : Sign::Present; }
constexpr int to_int(Sign s) noexcept { return static_cast<int>(s); }

/// Per-label presence prediction in {-1, +1}.
class LabelState {
 public:
  LabelState() = default;
  explicit LabelState(std::size_t n, Sign fill = Sign::Absent) : signs_(n, fill) {}
  explicit LabelState(std::vector<Sign> signs) : signs_(std::move(signs)) {}

  /// Throws InvalidState on any entry other than -1 or +1.
  static LabelState from_ints(std::span<const int> values);

  std::size_t size() const noexcept { return signs_.size(); }
  Sign operator[](LabelId id) const { return signs_[index(id)]; }
  Sign operator[](std::size_t i) const { return signs_[i]; }
  bool on(LabelId id) const { return signs_[index(id)] == Sign::Present; }
  void set(LabelId id, Sign s) { signs_[index(id)] = s; }
  void flip(LabelId id) { signs_[index(id)] = flipped(signs_[index(id)]); }
  std::size_t count_on() const;

  std::span<const Sign> signs() const noexcept { return signs_; }

  friend bool operator==(const LabelState&, const LabelState&) = default;

 private:
  std::vector<Sign> signs_;
};

enum class Rule : std::uint8_t {
  NoOnChild,   // ON node with children, all children OFF
  NoOnParent,  // ON node with parents, all parents OFF
};

std::string_view to_string(Rule rule);

struct Violation {
  LabelId node;
  Rule rule;
  friend auto operator<=>(const Violation&, const Violation&) = default;
};

struct ConsistencyReport {
  std::vector<Violation> violations;  // sorted by node, then rule
  bool consistent() const noexcept { return violations.empty(); }
};

struct ConsistencyOptions {
  // NoOnChild is always checked; the upward rule can be disabled.
  bool upward_rule = true;
};

/// Rule violations at a single node. Throws LengthMismatch.
std::vector<Violation> node_consistent(const LabelGraph& g, const LabelState& s, LabelId n,
                                       ConsistencyOptions opts = {});

/// Nodes within undirected hop distance <= radius of center, center included, sorted.
LabelSet local_neighborhood(const LabelGraph& g, LabelId center, std::size_t radius);

ConsistencyReport check_local(const LabelGraph& g, const LabelState& s, LabelId center,
                              std::size_t radius = 1, ConsistencyOptions opts = {});

ConsistencyReport check_global(const LabelGraph& g, const LabelState& s, ConsistencyOptions opts = {});

}  // namespace gcattack
