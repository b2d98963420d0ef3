#include "doctest.h"

#include <algorithm>
#include <random>

#include "gcattack/consistency.hpp"
#include "gcattack/dataset.hpp"
#include "gcattack/error.hpp"
#include "gcattack/graph_io.hpp"
#include "gcattack/oracle/reference_oracle.hpp"
#include "support/random_graphs.hpp"

using namespace gcattack;

namespace {

// Order in small_tree: R, W, A, B.
LabelState rwab(int r, int w, int a, int b) {
  const std::vector<int> v{r, w, a, b};
  return LabelState::from_ints(v);
}

bool includes(const ConsistencyReport& big, const ConsistencyReport& small) {
  return std::includes(big.violations.begin(), big.violations.end(), small.violations.begin(),
                       small.violations.end());
}

}  // namespace

TEST_CASE("node-level rules") {
  const auto g = fixtures::small_tree();
  const LabelId R = g.id_of("R"), W = g.id_of("W"), A = g.id_of("A");

  const auto v1 = node_consistent(g, rwab(1, 1, -1, -1), W);
  REQUIRE(v1.size() == 1);
  CHECK(v1[0] == Violation{W, Rule::NoOnChild});

  CHECK(node_consistent(g, rwab(1, 1, 1, -1), W).empty());

  const auto v3 = node_consistent(g, rwab(-1, -1, 1, -1), A);
  REQUIRE(v3.size() == 1);
  CHECK(v3[0] == Violation{A, Rule::NoOnParent});
  CHECK(node_consistent(g, rwab(-1, -1, 1, -1), A, {.upward_rule = false}).empty());
  CHECK(node_consistent(g, rwab(1, -1, -1, -1), R) == std::vector<Violation>{{R, Rule::NoOnChild}});
}

TEST_CASE("local checks use undirected hops") {
  const auto g = fixtures::small_tree();
  const LabelId R = g.id_of("R"), W = g.id_of("W"), A = g.id_of("A"), B = g.id_of("B");
  CHECK(local_neighborhood(g, A, 1) == LabelSet{W, A});
  CHECK(local_neighborhood(g, A, 2) == LabelSet{R, W, A, B});
  const auto s = rwab(1, 1, -1, -1);
  for (LabelId c : {A, B}) {
    const auto rep = check_local(g, s, c, 1);
    CHECK_FALSE(rep.consistent());
    CHECK(rep.violations == std::vector<Violation>{{W, Rule::NoOnChild}});
  }
  for (std::size_t c = 0; c < g.size(); ++c) CHECK(check_local(g, rwab(-1, -1, -1, -1), label_id(c)).consistent());
}

TEST_CASE("global checks") {
  const auto g = fixtures::small_tree();
  CHECK(check_global(g, rwab(-1, -1, -1, -1)).consistent());
  CHECK(check_global(g, rwab(1, 1, 1, 1)).consistent());
  const auto rep = check_global(g, rwab(1, -1, -1, -1));
  CHECK(rep.violations == std::vector<Violation>{{g.id_of("R"), Rule::NoOnChild}});
  CHECK_THROWS_AS(check_global(g, LabelState(3)), Error);
  CHECK_THROWS_AS(check_local(g, LabelState(5), g.id_of("A")), Error);
}

TEST_CASE("all-ON and all-OFF states on random graphs are consistent") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    const auto g = testing::random_dag(rng, 1 + t % 20, 3);
    CHECK(check_global(g, LabelState(g.size(), Sign::Absent)).consistent());
    CHECK(check_global(g, LabelState(g.size(), Sign::Present)).consistent());
  }
}

TEST_CASE("detection is monotone in the radius") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 300; ++t) {
    const auto g = testing::random_dag(rng, 2 + t % 14, 3);
    const auto s = testing::random_state(g.size(), rng);
    const ConsistencyOptions opts{.upward_rule = t % 3 != 0};
    const auto global = check_global(g, s, opts);
    for (std::size_t c = 0; c < g.size(); ++c) {
      ConsistencyReport prev = check_local(g, s, label_id(c), 1, opts);
      CHECK(includes(global, prev));
      for (std::size_t r = 2; r <= 4; ++r) {
        const auto next = check_local(g, s, label_id(c), r, opts);
        CHECK(includes(next, prev));
        CHECK(includes(global, next));
        prev = next;
      }
    }
  }
}

TEST_CASE("global check matches the exhaustive oracle") {
  std::mt19937_64 rng(29);
  for (int t = 0; t < 1000; ++t) {
    std::uniform_int_distribution<std::size_t> size(1, 12);
    const auto g = testing::random_dag(rng, size(rng), 3);
    const auto s = testing::random_state(g.size(), rng, 0.3 + 0.4 * (t % 2));
    const bool upward = t % 4 != 0;
    const auto expected = oracle::exhaustive_consistency(oracle::OracleGraph::from(g), oracle::to_ints(s), upward);
    CHECK(check_global(g, s, {.upward_rule = upward}).violations == expected.violations);
  }
}

TEST_CASE("generated ground truth is always consistent") {
  SyntheticDatasetConfig cfg;
  cfg.samples = 500;
  cfg.dim = 4;
  cfg.leaf_probability = 0.2;
  for (const auto& g : {fixtures::object_taxonomy(), fixtures::sixteen_leaves(), fixtures::small_tree()}) {
    const Dataset d = generate_synthetic(g, cfg);
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(check_global(g, d.labels(i)).consistent());
  }
}
