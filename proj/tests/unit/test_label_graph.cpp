#include "doctest.h"

#include <random>
#include <set>

#include "gcattack/error.hpp"
#include "gcattack/graph_io.hpp"
#include "gcattack/label_graph.hpp"
#include "support/random_graphs.hpp"

using namespace gcattack;

namespace {

LabelGraph graph(std::vector<std::string> names, std::vector<NamedEdge> edges) {
  return LabelGraph::build(std::move(names), edges);
}

LabelId id(const LabelGraph& g, const char* n) { return g.id_of(n); }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("small tree has one root and two leaves") {
  const auto g = graph({"R", "W", "A", "B"}, {{"R", "W"}, {"W", "A"}, {"W", "B"}});
  CHECK(g.size() == 4);
  CHECK(g.roots() == LabelSet{id(g, "R")});
  CHECK(g.leaves() == LabelSet{id(g, "A"), id(g, "B")});
  CHECK(g.edge_count() == 3);
}

TEST_CASE("construction errors") {
  CHECK(code_of([] { graph({"A", "B"}, {{"A", "B"}, {"B", "A"}}); }) == ErrorCode::CycleDetected);
  CHECK(code_of([] { graph({"A"}, {{"A", "A"}}); }) == ErrorCode::CycleDetected);
  CHECK(code_of([] { graph({"A", "B"}, {{"A", "C"}}); }) == ErrorCode::UnknownLabelName);
  CHECK(code_of([] { graph({"A", "B"}, {{"A", "B"}, {"A", "B"}}); }) == ErrorCode::DuplicateEdge);
  CHECK(code_of([] { graph({"A", "A"}, {}); }) == ErrorCode::DuplicateLabelName);
}

TEST_CASE("cycle message names the cycle") {
  try {
    graph({"x", "a", "b", "c"}, {{"x", "a"}, {"a", "b"}, {"b", "c"}, {"c", "a"}});
    FAIL("no error");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("'a'") != std::string::npos);
    CHECK(msg.find("'b'") != std::string::npos);
    CHECK(msg.find("'c'") != std::string::npos);
    CHECK(msg.find("'x'") == std::string::npos);
  }
}

TEST_CASE("object taxonomy fixture") {
  const auto g = fixtures::object_taxonomy();
  CHECK(g.size() == 35);
  std::size_t originals = 0;
  for (std::size_t i = 0; i < g.size(); ++i) originals += g.is_original(label_id(i)) ? 1 : 0;
  CHECK(originals == 20);
  // every original label is a leaf
  for (LabelId leaf : g.leaves()) CHECK(g.is_original(leaf));
  CHECK(g.leaves().size() == 20);
}

TEST_CASE("depth uses the longest path") {
  const auto chain = graph({"R", "W", "A"}, {{"R", "W"}, {"W", "A"}});
  CHECK(chain.depth(id(chain, "R")) == 1);
  CHECK(chain.depth(id(chain, "A")) == 3);

  const auto diamond =
      graph({"R", "P", "Q", "m", "c"}, {{"R", "P"}, {"R", "Q"}, {"P", "c"}, {"Q", "c"}, {"P", "m"}, {"m", "c"}});
  CHECK(diamond.depth(id(diamond, "c")) == 4);
  CHECK(diamond.ancestors(id(diamond, "c")) ==
        LabelSet{id(diamond, "R"), id(diamond, "P"), id(diamond, "Q"), id(diamond, "m")});

  const auto plain = graph({"R", "P", "Q", "c"}, {{"R", "P"}, {"R", "Q"}, {"P", "c"}, {"Q", "c"}});
  CHECK(plain.ancestors(id(plain, "c")) == LabelSet{id(plain, "R"), id(plain, "P"), id(plain, "Q")});
}

TEST_CASE("ancestors and descendants exclude the node itself") {
  const auto chain = graph({"R", "W", "A"}, {{"R", "W"}, {"W", "A"}});
  CHECK(chain.ancestors(id(chain, "A")) == LabelSet{id(chain, "R"), id(chain, "W")});
  CHECK(chain.descendants(id(chain, "R")) == LabelSet{id(chain, "W"), id(chain, "A")});
  CHECK(chain.ancestors(id(chain, "R")).empty());
}

TEST_CASE("lowest common subsumer") {
  const auto chain = graph({"R", "W", "A"}, {{"R", "W"}, {"W", "A"}});
  CHECK(lowest_common_subsumer(chain, id(chain, "W"), id(chain, "A")) == id(chain, "W"));
  const auto tree = fixtures::small_tree();
  CHECK(lowest_common_subsumer(tree, id(tree, "A"), id(tree, "B")) == id(tree, "W"));
  const auto forest = graph({"R1", "a", "R2", "b"}, {{"R1", "a"}, {"R2", "b"}});
  CHECK(code_of([&] { lowest_common_subsumer(forest, id(forest, "a"), id(forest, "b")); }) ==
        ErrorCode::NoCommonAncestor);
  CHECK(code_of([&] { wup_similarity(forest, id(forest, "a"), id(forest, "b")); }) ==
        ErrorCode::NoCommonAncestor);
}

TEST_CASE("wup similarity by hand") {
  const auto tree = fixtures::small_tree();
  CHECK(wup_similarity(tree, id(tree, "A"), id(tree, "B")) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  const auto g = graph({"R", "W", "A", "B"}, {{"R", "W"}, {"W", "A"}, {"R", "B"}});
  CHECK(wup_similarity(g, id(g, "A"), id(g, "B")) == doctest::Approx(0.4).epsilon(1e-15));
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(wup_similarity(g, label_id(i), label_id(i)) == 1.0);
}

TEST_CASE("wup is symmetric and equals 1 only on the diagonal of trees") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    std::uniform_int_distribution<std::size_t> size(2, 30);
    const bool tree = trial % 2 == 0;
    const auto g = tree ? testing::random_tree(rng, size(rng)) : testing::random_dag(rng, size(rng), 3, 0.0);
    for (std::size_t a = 0; a < g.size(); ++a) {
      for (std::size_t b = 0; b < g.size(); ++b) {
        const double ab = wup_similarity(g, label_id(a), label_id(b));
        CHECK(ab == wup_similarity(g, label_id(b), label_id(a)));
        CHECK(ab > 0.0);
        CHECK(ab <= 1.0);
        if (tree) CHECK((ab == 1.0) == (a == b));
      }
    }
  }
}

TEST_CASE("treeify keeps the most similar candidate parent") {
  // c has parents W (depth 2) and R (depth 1); depth(c) = 3.
  // wup(c, W) = 4/5 and wup(c, R) = 2/4, so W -> c survives.
  const auto ref = graph({"R", "W", "c"}, {{"R", "W"}, {"W", "c"}, {"R", "c"}});
  const std::vector<TaxonomyCandidate> cands{{"W", {"R"}}, {"c", {"W", "R"}}};
  const auto t = treeify(ref, cands);
  CHECK(t.has_edge(id(t, "W"), id(t, "c")));
  CHECK_FALSE(t.has_edge(id(t, "R"), id(t, "c")));
  CHECK(t.edge_count() == 2);

  // Single candidate is kept as is.
  const auto single = treeify(ref, std::vector<TaxonomyCandidate>{{"c", {"R"}}});
  CHECK(single.has_edge(id(single, "R"), id(single, "c")));
  CHECK(single.edge_count() == 1);
}

TEST_CASE("treeify breaks ties by smallest id") {
  const auto ref = graph({"P1", "P2", "c"}, {{"P1", "c"}, {"P2", "c"}});
  const std::vector<TaxonomyCandidate> cands{{"c", {"P2", "P1"}}};
  for (int run = 0; run < 3; ++run) {
    const auto t = treeify(ref, cands);
    CHECK(t.has_edge(id(t, "P1"), id(t, "c")));
    CHECK_FALSE(t.has_edge(id(t, "P2"), id(t, "c")));
  }
}

TEST_CASE("treeify output is a forest using only candidate edges") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    std::uniform_int_distribution<std::size_t> size(2, 20);
    const auto ref = testing::random_dag(rng, size(rng), 3, 0.0);
    const auto cands = candidates_from_parents(ref);
    const auto t = treeify(ref, cands);
    std::set<std::pair<std::string, std::string>> allowed;
    for (const auto& c : cands) {
      for (const auto& p : c.parents) allowed.insert({p, c.child});
    }
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(t.parents(label_id(i)).size() <= 1);
    for (auto [p, c] : t.edges()) CHECK(allowed.count({t.name(p), t.name(c)}) == 1);
  }
}

TEST_CASE("random graphs sort topologically and round-trip") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    std::uniform_int_distribution<std::size_t> size(1, 25);
    const auto g = testing::random_dag(rng, size(rng), 4);
    const auto topo = g.topological_order();
    REQUIRE(topo.size() == g.size());
    std::vector<std::size_t> pos(g.size());
    for (std::size_t i = 0; i < topo.size(); ++i) pos[index(topo[i])] = i;
    for (auto [p, c] : g.edges()) CHECK(pos[index(p)] < pos[index(c)]);
    // parent lists are the transpose of child lists
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (LabelId c : g.children(label_id(i))) {
        const auto ps = g.parents(c);
        CHECK(std::find(ps.begin(), ps.end(), label_id(i)) != ps.end());
      }
    }
    CHECK_FALSE(g.roots().empty());
    CHECK(parse_graph(serialize_graph(g)) == g);
  }
}
