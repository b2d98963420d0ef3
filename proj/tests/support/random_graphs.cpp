#include "random_graphs.hpp"

#include <algorithm>
#include <string>

namespace gcattack::testing {

namespace {

std::vector<std::string> numbered_names(std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("n" + std::to_string(i));
  return names;
}

}  // namespace

LabelGraph random_dag(std::mt19937_64& rng, std::size_t n, std::size_t max_parents, double root_prob) {
  const auto names = numbered_names(n);
  std::vector<NamedEdge> edges;
  std::bernoulli_distribution extra_root(root_prob);
  for (std::size_t i = 1; i < n; ++i) {
    if (extra_root(rng)) continue;
    std::uniform_int_distribution<std::size_t> count(1, std::min(max_parents, i));
    std::vector<std::size_t> pool(i);
    for (std::size_t j = 0; j < i; ++j) pool[j] = j;
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::size_t k = count(rng);
    for (std::size_t j = 0; j < k; ++j) edges.push_back({names[pool[j]], names[i]});
  }
  return LabelGraph::build(names, edges);
}

LabelGraph random_tree(std::mt19937_64& rng, std::size_t n) {
  const auto names = numbered_names(n);
  std::vector<NamedEdge> edges;
  for (std::size_t i = 1; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> parent(0, i - 1);
    edges.push_back({names[parent(rng)], names[i]});
  }
  return LabelGraph::build(names, edges);
}

LabelState random_consistent_state(const LabelGraph& g, std::mt19937_64& rng, double walk_prob) {
  LabelState s(g.size());
  std::bernoulli_distribution start(walk_prob);
  for (LabelId leaf : g.leaves()) {
    if (!start(rng)) continue;
    // Walk up to a root, picking a random parent at each step.
    LabelId cur = leaf;
    s.set(cur, Sign::Present);
    while (!g.parents(cur).empty()) {
      const auto ps = g.parents(cur);
      std::uniform_int_distribution<std::size_t> pick(0, ps.size() - 1);
      cur = ps[pick(rng)];
      s.set(cur, Sign::Present);
    }
  }
  return s;
}

LabelState random_state(std::size_t n, std::mt19937_64& rng, double on_prob) {
  LabelState s(n);
  std::bernoulli_distribution on(on_prob);
  for (std::size_t i = 0; i < n; ++i) s.set(label_id(i), on(rng) ? Sign::Present : Sign::Absent);
  return s;
}

TargetSet random_turn_off_targets(const LabelState& s, std::size_t k, std::mt19937_64& rng) {
  std::vector<LabelId> on;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.on(label_id(i))) on.push_back(label_id(i));
  }
  std::shuffle(on.begin(), on.end(), rng);
  on.resize(std::min(k, on.size()));
  return TargetSet::turn_off(on);
}

ClassifierParams random_params(Architecture arch, std::size_t d, std::size_t h, std::size_t c,
                               std::mt19937_64& rng, double scale) {
  ClassifierParams p = ClassifierParams::zeros(arch, d, h, c);
  std::normal_distribution<double> w(0.0, scale);
  for (DenseLayer& layer : p.layers) {
    for (double& v : layer.weights) v = w(rng);
    for (double& v : layer.bias) v = w(rng);
  }
  return p;
}

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> v(n);
  for (double& a : v) a = u(rng);
  return v;
}

}  // namespace gcattack::testing
