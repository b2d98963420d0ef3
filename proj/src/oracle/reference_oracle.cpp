#include "gcattack/oracle/reference_oracle.hpp"

#include <algorithm>
#include <cmath>

#include "gcattack/error.hpp"

namespace gcattack::oracle {

OracleGraph OracleGraph::from(const LabelGraph& g) {
  OracleGraph og;
  og.n = g.size();
  for (const auto& [p, c] : g.edges()) og.edges.emplace_back(index(p), index(c));
  return og;
}

std::vector<int> to_ints(const LabelState& s) {
  std::vector<int> out;
  for (Sign v : s.signs()) out.push_back(v == Sign::Present ? 1 : -1);
  return out;
}

ConsistencyReport exhaustive_consistency(const OracleGraph& g, std::span<const int> s, bool upward_rule) {
  if (s.size() != g.n) throw Error(ErrorCode::LengthMismatch, "state length differs from node count");
  ConsistencyReport report;
  for (std::size_t v = 0; v < g.n; ++v) {
    if (s[v] != 1) continue;
    bool has_child = false, child_on = false, has_parent = false, parent_on = false;
    for (const auto& [p, c] : g.edges) {
      if (p == v) {
        has_child = true;
        if (s[c] == 1) child_on = true;
      }
      if (c == v) {
        has_parent = true;
        if (s[p] == 1) parent_on = true;
      }
    }
    if (has_child && !child_on) report.violations.push_back({label_id(v), Rule::NoOnChild});
    if (upward_rule && has_parent && !parent_on) report.violations.push_back({label_id(v), Rule::NoOnParent});
  }
  return report;
}

MinFlipResult brute_force_min_flip(const OracleGraph& g, std::span<const int> s, const TargetSet& omega,
                                   const OracleBudget& budget) {
  if (g.n > budget.max_nodes) {
    throw Error(ErrorCode::BudgetExceeded, std::to_string(g.n) + " nodes exceed the oracle cap of " +
                                               std::to_string(budget.max_nodes));
  }
  if (s.size() != g.n) throw Error(ErrorCode::LengthMismatch, "state length differs from node count");
  if (!exhaustive_consistency(g, s).violations.empty()) {
    throw Error(ErrorCode::InvalidState, "oracle needs a consistent input state");
  }
  const auto deadline = std::chrono::steady_clock::now() + budget.time_cap;

  std::vector<bool> forced(g.n, false);
  bool any_off = false, any_on = false;
  for (const auto& entry : omega.entries()) {
    const std::size_t v = index(entry.node);
    if (v >= g.n) throw Error(ErrorCode::InvalidLabelId, "target out of range");
    const int want = entry.direction == Direction::TurnOff ? 1 : -1;
    if (s[v] != want) throw Error(ErrorCode::DirectionMismatch, "target direction does not match the state");
    forced[v] = true;
    (entry.direction == Direction::TurnOff ? any_off : any_on) = true;
  }
  std::vector<std::size_t> pool;
  for (std::size_t v = 0; v < g.n; ++v) {
    if (forced[v]) continue;
    if (any_off && any_on) {
      pool.push_back(v);
    } else if (any_off ? s[v] == 1 : s[v] == -1) {
      pool.push_back(v);
    }
  }
  const std::size_t cap = budget.max_flip_size == 0 ? g.n : budget.max_flip_size;

  MinFlipResult result;
  std::vector<int> t(s.begin(), s.end());
  for (std::size_t extra = 0; extra <= pool.size(); ++extra) {
    if (omega.size() + extra > cap) {
      throw Error(ErrorCode::BudgetExceeded, "no solution within the flip size cap");
    }
    // Combinations of `extra` pool members in lexicographic order.
    std::vector<std::size_t> idx(extra);
    for (std::size_t i = 0; i < extra; ++i) idx[i] = i;
    for (;;) {
      if (std::chrono::steady_clock::now() > deadline) {
        throw Error(ErrorCode::BudgetExceeded, "oracle time cap reached");
      }
      std::vector<std::size_t> flip;
      for (std::size_t v = 0; v < g.n; ++v) {
        if (forced[v]) flip.push_back(v);
      }
      for (std::size_t i : idx) flip.push_back(pool[i]);
      std::sort(flip.begin(), flip.end());
      std::copy(s.begin(), s.end(), t.begin());
      for (std::size_t v : flip) t[v] = -t[v];
      if (exhaustive_consistency(g, t).violations.empty()) {
        if (result.solution_count == 0 || flip < result.flip_set) result.flip_set = flip;
        ++result.solution_count;
      }
      std::size_t i = extra;
      while (i > 0 && idx[i - 1] == pool.size() - extra + i - 1) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < extra; ++j) idx[j] = idx[j - 1] + 1;
    }
    if (result.solution_count > 0) return result;
  }
  return result;
}

namespace {

std::vector<double> forward(const ClassifierParams& params, std::span<const double> x) {
  std::vector<double> a(x.begin(), x.end());
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const DenseLayer& layer = params.layers[l];
    std::vector<double> z(layer.rows);
    for (std::size_t r = 0; r < layer.rows; ++r) {
      long double acc = layer.bias[r];
      for (std::size_t c = 0; c < layer.cols; ++c) {
        acc += static_cast<long double>(layer.weights[r * layer.cols + c]) * a[c];
      }
      z[r] = static_cast<double>(acc);
      if (l + 1 < params.layers.size()) z[r] = std::max(0.0, z[r]);
    }
    a = std::move(z);
  }
  return a;
}

// -log sigma(t z) for t in {-1, +1}.
double softplus_neg(double m) { return m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m)); }

double subset_bce(const std::vector<double>& f, const LabelState& labels, const LabelSet& subset) {
  double total = 0.0;
  for (LabelId c : subset) {
    const double y = labels[c] == Sign::Present ? 1.0 : -1.0;
    total += softplus_neg(y * f[index(c)]);
  }
  return total;
}

}  // namespace

double reference_objective(const ClassifierParams& params, std::span<const double> x, const LabelState& labels,
                           const LossTerms& terms) {
  const auto f = forward(params, x);
  double value = 0.0;
  if (!terms.plus.empty()) value += terms.sign_plus * subset_bce(f, labels, terms.plus);
  if (!terms.minus.empty()) value += terms.sign_minus * subset_bce(f, labels, terms.minus);
  return value;
}

std::vector<double> finite_difference_gradient(const ClassifierParams& params, std::span<const double> x,
                                               const LabelState& labels, const LossTerms& terms, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "finite difference step must be positive");
  std::vector<double> xp(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    xp[j] = x[j] + h;
    const double up = reference_objective(params, xp, labels, terms);
    xp[j] = x[j] - h;
    const double down = reference_objective(params, xp, labels, terms);
    xp[j] = x[j];
    grad[j] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace gcattack::oracle
