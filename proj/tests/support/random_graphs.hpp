#pragma once

// Random graphs, states and targets shared by the unit and acceptance tests.

#include <cstdint>
#include <random>
#include <vector>

#include "gcattack/consistency.hpp"
#include "gcattack/label_graph.hpp"
#include "gcattack/model.hpp"
#include "gcattack/target_expansion.hpp"

namespace gcattack::testing {

/// Node i takes parents only among 0..i-1, so the result is acyclic by
/// construction. With max_parents = 1 the result is a forest.
LabelGraph random_dag(std::mt19937_64& rng, std::size_t n, std::size_t max_parents, double root_prob = 0.15);

/// Single-rooted tree (every non-root has exactly one parent).
LabelGraph random_tree(std::mt19937_64& rng, std::size_t n);

/// Consistent state built from random root-to-leaf walks: every ON node has an
/// ON child (unless it is a leaf) and an ON parent (unless it is a root).
LabelState random_consistent_state(const LabelGraph& g, std::mt19937_64& rng, double walk_prob = 0.4);

/// Independent uniform +1/-1 per label.
LabelState random_state(std::size_t n, std::mt19937_64& rng, double on_prob = 0.5);

/// Up to k distinct TurnOff targets among the ON labels (empty if none are ON).
TargetSet random_turn_off_targets(const LabelState& s, std::size_t k, std::mt19937_64& rng);

ClassifierParams random_params(Architecture arch, std::size_t d, std::size_t h, std::size_t c,
                               std::mt19937_64& rng, double scale = 0.5);

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double scale = 1.0);

}  // namespace gcattack::testing
