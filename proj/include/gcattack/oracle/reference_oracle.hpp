#pragma once

// Brute-force reference implementations for tests. Nothing here calls the
// production graph, consistency, expansion or model code: graphs are plain edge
// lists, states are int vectors and the classifier forward pass is re-derived.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "gcattack/consistency.hpp"
#include "gcattack/label_graph.hpp"
#include "gcattack/model.hpp"
#include "gcattack/target_expansion.hpp"

namespace gcattack::oracle {

struct OracleGraph {
  std::size_t n = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // (parent, child)

  static OracleGraph from(const LabelGraph& g);
};

/// +1 / -1 per label.
std::vector<int> to_ints(const LabelState& s);

/// Both rules evaluated by scanning the edge list for every node.
ConsistencyReport exhaustive_consistency(const OracleGraph& g, std::span<const int> s, bool upward_rule = true);

struct OracleBudget {
  std::size_t max_nodes = 12;
  std::size_t max_flip_size = 0;  // 0 = |C|
  std::chrono::milliseconds time_cap{10000};
};

struct MinFlipResult {
  std::vector<std::size_t> flip_set;  // lexicographically smallest minimum solution, sorted
  std::size_t solution_count = 0;     // number of minimum-size solutions; 0 when none exists
};

/// Smallest superset of omega whose flip leaves `s` globally consistent, found by
/// enumerating candidate sets by size. Extra flips move in the targets'
/// direction: ON labels for turn-off targets, OFF labels for turn-on targets,
/// any label when both kinds are present.
/// Throws BudgetExceeded (too many nodes, flip size cap, time cap), InvalidState
/// (inconsistent `s`), DirectionMismatch.
MinFlipResult brute_force_min_flip(const OracleGraph& g, std::span<const int> s, const TargetSet& omega,
                                   const OracleBudget& budget = {});

/// Central differences of sign_plus * bce(plus) + sign_minus * bce(minus) with
/// respect to x. Throws InvalidArgument when h <= 0.
std::vector<double> finite_difference_gradient(const ClassifierParams& params, std::span<const double> x,
                                               const LabelState& labels, const LossTerms& terms, double h);

/// Objective value from an independent forward pass.
double reference_objective(const ClassifierParams& params, std::span<const double> x, const LabelState& labels,
                           const LossTerms& terms);

}  // namespace gcattack::oracle
