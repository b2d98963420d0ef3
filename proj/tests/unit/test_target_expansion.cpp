#include "doctest.h"

#include <algorithm>
#include <deque>
#include <random>

#include "gcattack/consistency.hpp"
#include "gcattack/error.hpp"
#include "gcattack/graph_io.hpp"
#include "gcattack/oracle/reference_oracle.hpp"
#include "gcattack/target_expansion.hpp"
#include "support/random_graphs.hpp"

using namespace gcattack;

namespace {

LabelState ints(std::vector<int> v) { return LabelState::from_ints(v); }

// Labels reachable from the targets through edges (either direction) whose
// endpoints are ON in s.
std::vector<bool> on_reachable(const LabelGraph& g, const LabelState& s, const TargetSet& omega) {
  std::vector<bool> seen(g.size(), false);
  std::deque<LabelId> queue;
  for (const auto& e : omega.entries()) {
    seen[index(e.node)] = true;
    queue.push_back(e.node);
  }
  while (!queue.empty()) {
    const LabelId n = queue.front();
    queue.pop_front();
    auto visit = [&](LabelId m) {
      if (!seen[index(m)] && s.on(m)) {
        seen[index(m)] = true;
        queue.push_back(m);
      }
    };
    for (LabelId c : g.children(n)) visit(c);
    for (LabelId p : g.parents(n)) visit(p);
  }
  return seen;
}

}  // namespace

TEST_CASE("leaf target cascades up a single-child path") {
  const auto g = fixtures::small_tree();
  const LabelId R = g.id_of("R"), W = g.id_of("W"), A = g.id_of("A");
  const auto gamma = expand(g, ints({1, 1, 1, -1}), TargetSet{{A, Direction::TurnOff}});
  REQUIRE(gamma.size() == 3);
  CHECK(gamma.entries[0] == ExpandedEntry{A, Direction::TurnOff, Provenance::Target});
  CHECK(gamma.entries[1] == ExpandedEntry{W, Direction::TurnOff, Provenance::ParentCascade});
  CHECK(gamma.entries[2] == ExpandedEntry{R, Direction::TurnOff, Provenance::ParentCascade});
  CHECK(gamma.input_consistent);
}

TEST_CASE("a parent with another ON child stays") {
  const auto g = fixtures::small_tree();
  const LabelId A = g.id_of("A");
  const auto gamma = expand(g, ints({1, 1, 1, 1}), TargetSet{{A, Direction::TurnOff}});
  CHECK(gamma.nodes() == LabelSet{A});
}

TEST_CASE("a shared child with another ON parent stays") {
  const auto g = LabelGraph::build({"P1", "P2", "c"}, std::vector<NamedEdge>{{"P1", "c"}, {"P2", "c"}});
  const LabelState s(3, Sign::Present);
  const auto gamma = expand(g, s, TargetSet{{g.id_of("P1"), Direction::TurnOff}});
  CHECK(gamma.nodes() == LabelSet{g.id_of("P1")});
  CHECK(check_global(g, simulate_flip(s, gamma)).consistent());
}

TEST_CASE("internal target cascades down and up") {
  const auto g = fixtures::small_tree();
  const LabelId R = g.id_of("R"), W = g.id_of("W"), A = g.id_of("A"), B = g.id_of("B");
  const auto gamma = expand(g, ints({1, 1, 1, 1}), TargetSet{{W, Direction::TurnOff}});
  CHECK(gamma.nodes() == LabelSet{R, W, A, B});
  for (const auto& e : gamma.entries) {
    if (e.node == A || e.node == B) CHECK(e.provenance == Provenance::ChildCascade);
    if (e.node == R) CHECK(e.provenance == Provenance::ParentCascade);
  }
}

TEST_CASE("turn-on targets") {
  const auto g = fixtures::small_tree();
  const LabelId R = g.id_of("R"), W = g.id_of("W"), A = g.id_of("A");
  const LabelState off(4);
  const auto leaf = expand(g, off, TargetSet{{A, Direction::TurnOn}});
  CHECK(leaf.nodes() == LabelSet{R, W, A});
  for (const auto& e : leaf.entries) CHECK(e.direction == Direction::TurnOn);
  CHECK(check_global(g, simulate_flip(off, leaf)).consistent());

  const auto inner = expand(g, off, TargetSet{{W, Direction::TurnOn}});
  CHECK(inner.nodes() == LabelSet{R, W, A});  // smallest child id completes the chain
  CHECK(check_global(g, simulate_flip(off, inner)).consistent());
}

TEST_CASE("expand errors") {
  const auto g = fixtures::small_tree();
  try {
    expand(g, ints({1, 1, -1, 1}), TargetSet{{g.id_of("A"), Direction::TurnOff}});
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DirectionMismatch);
  }
  CHECK_THROWS_AS(expand(g, LabelState(3), TargetSet{{g.id_of("A"), Direction::TurnOn}}), Error);
  CHECK_THROWS_AS(TargetSet({{g.id_of("A"), Direction::TurnOff}, {g.id_of("A"), Direction::TurnOn}}), Error);
}

TEST_CASE("inconsistent input is flagged") {
  const auto g = fixtures::small_tree();
  const auto gamma = expand(g, ints({1, -1, 1, -1}), TargetSet{{g.id_of("A"), Direction::TurnOff}});
  CHECK_FALSE(gamma.input_consistent);
  CHECK(gamma.contains(g.id_of("A")));
}

TEST_CASE("simulate_flip and its inverse") {
  const LabelState s = ints({1, 1, -1});
  ExpandedTargetSet gamma;
  gamma.entries.push_back({label_id(0), Direction::TurnOff, Provenance::Target});
  CHECK(simulate_flip(s, gamma) == ints({-1, 1, -1}));
  CHECK(simulate_flip(s, ExpandedTargetSet{}) == s);
  CHECK(simulate_flip(simulate_flip(s, gamma), reversed(gamma)) == s);
  CHECK(reversed(reversed(gamma)) == gamma);
  CHECK_THROWS_AS(simulate_flip(simulate_flip(s, gamma), gamma), Error);
}

TEST_CASE("random DAGs: consistency, superset, reachability, determinism") {
  std::mt19937_64 rng(101);
  int checked = 0;
  for (int t = 0; t < 600; ++t) {
    std::uniform_int_distribution<std::size_t> size(2, 12);
    const auto g = testing::random_dag(rng, size(rng), 3);
    const auto s = testing::random_consistent_state(g, rng);
    REQUIRE(check_global(g, s).consistent());
    const auto omega = testing::random_turn_off_targets(s, 1 + t % 2, rng);
    if (omega.empty()) continue;
    ++checked;
    const auto gamma = expand(g, s, omega);
    CHECK(check_global(g, simulate_flip(s, gamma)).consistent());
    for (const auto& e : omega.entries()) CHECK(gamma.contains(e.node));
    const auto reach = on_reachable(g, s, omega);
    for (const auto& e : gamma.entries) {
      CHECK(reach[index(e.node)]);
      CHECK((e.provenance == Provenance::Target) == omega.contains(e.node));
    }
    CHECK(expand(g, s, omega) == gamma);
  }
  CHECK(checked > 400);
}

TEST_CASE("tree expansion is minimal against the brute-force oracle") {
  std::mt19937_64 rng(202);
  for (int t = 0; t < 200; ++t) {
    std::uniform_int_distribution<std::size_t> size(2, 10);
    const auto g = testing::random_tree(rng, size(rng));
    const auto s = testing::random_consistent_state(g, rng, 0.5);
    const auto omega = testing::random_turn_off_targets(s, 1 + t % 2, rng);
    if (omega.empty()) continue;
    const auto best = oracle::brute_force_min_flip(oracle::OracleGraph::from(g), oracle::to_ints(s), omega);
    CHECK(best.solution_count >= 1);
    CHECK(expand(g, s, omega).size() == best.flip_set.size());
  }
}
