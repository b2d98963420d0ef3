#include "gcattack/consistency.hpp"

#include <algorithm>
#include <deque>

#include "gcattack/error.hpp"

namespace gcattack {

LabelState LabelState::from_ints(std::span<const int> values) {
  std::vector<Sign> signs;
  signs.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] != 1 && values[i] != -1) {
      throw Error(ErrorCode::InvalidState, "entry " + std::to_string(i) + " is " +
                                               std::to_string(values[i]) + ", expected -1 or +1");
    }
    signs.push_back(static_cast<Sign>(values[i]));
  }
  return LabelState(std::move(signs));
}

std::size_t LabelState::count_on() const {
  return static_cast<std::size_t>(std::count(signs_.begin(), signs_.end(), Sign::Present));
}

std::string_view to_string(Rule rule) {
  return rule == Rule::NoOnChild ? "NoOnChild" : "NoOnParent";
}

namespace {

void check_length(const LabelGraph& g, const LabelState& s) {
  if (s.size() != g.size()) {
    throw Error(ErrorCode::LengthMismatch, "state has " + std::to_string(s.size()) +
                                               " entries, graph has " + std::to_string(g.size()) +
                                               " labels");
  }
}

bool any_on(const LabelState& s, std::span<const LabelId> ids) {
  return std::any_of(ids.begin(), ids.end(), [&s](LabelId v) { return s.on(v); });
}

void append_node_violations(const LabelGraph& g, const LabelState& s, LabelId n,
                            ConsistencyOptions opts, std::vector<Violation>& out) {
  if (!s.on(n)) return;
  const auto kids = g.children(n);
  if (!kids.empty() && !any_on(s, kids)) out.push_back({n, Rule::NoOnChild});
  if (opts.upward_rule) {
    const auto pars = g.parents(n);
    if (!pars.empty() && !any_on(s, pars)) out.push_back({n, Rule::NoOnParent});
  }
}

}  // namespace

std::vector<Violation> node_consistent(const LabelGraph& g, const LabelState& s, LabelId n,
                                       ConsistencyOptions opts) {
  check_length(g, s);
  g.check_id(n);
  std::vector<Violation> out;
  append_node_violations(g, s, n, opts, out);
  return out;
}

LabelSet local_neighborhood(const LabelGraph& g, LabelId center, std::size_t radius) {
  g.check_id(center);
  std::vector<std::size_t> dist(g.size(), static_cast<std::size_t>(-1));
  std::deque<LabelId> queue{center};
  dist[index(center)] = 0;
  LabelSet out{center};
  while (!queue.empty()) {
    const LabelId v = queue.front();
    queue.pop_front();
    if (dist[index(v)] == radius) continue;
    auto visit = [&](LabelId w) {
      if (dist[index(w)] != static_cast<std::size_t>(-1)) return;
      dist[index(w)] = dist[index(v)] + 1;
      out.push_back(w);
      queue.push_back(w);
    };
    for (LabelId w : g.parents(v)) visit(w);
    for (LabelId w : g.children(v)) visit(w);
  }
  std::sort(out.begin(), out.end());
  return out;
}

ConsistencyReport check_local(const LabelGraph& g, const LabelState& s, LabelId center,
                              std::size_t radius, ConsistencyOptions opts) {
  check_length(g, s);
  if (radius == 0) throw Error(ErrorCode::InvalidArgument, "local radius must be positive");
  ConsistencyReport report;
  for (LabelId v : local_neighborhood(g, center, radius)) {
    append_node_violations(g, s, v, opts, report.violations);
  }
  return report;
}

ConsistencyReport check_global(const LabelGraph& g, const LabelState& s, ConsistencyOptions opts) {
  check_length(g, s);
  ConsistencyReport report;
  for (std::size_t i = 0; i < g.size(); ++i) {
    append_node_violations(g, s, label_id(i), opts, report.violations);
  }
  return report;
}

}  // namespace gcattack
