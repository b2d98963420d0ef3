#include "gcattack/attack.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <random>

#include "json.hpp"

#include "gcattack/error.hpp"
#include "gcattack/kernels.hpp"

namespace gcattack {

std::string_view to_string(AttackVariant v) {
  switch (v) {
    case AttackVariant::MlaAlpha: return "MLA_alpha";
    case AttackVariant::MlaBeta: return "MLA_beta";
    case AttackVariant::GmlaAlpha: return "GMLA_alpha";
    case AttackVariant::GmlaBeta: return "GMLA_beta";
  }
  return "?";
}

AttackVariant attack_variant_from_string(std::string_view s) {
  for (AttackVariant v : kAllVariants) {
    if (to_string(v) == s) return v;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown attack variant '" + std::string(s) + "'");
}

void AttackSpec::validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::InvalidArgument, "epsilon must be a finite non-negative number");
  }
  if (steps == 0) throw Error(ErrorCode::InvalidArgument, "steps must be positive");
  if (step_size && !(*step_size > 0.0)) throw Error(ErrorCode::InvalidArgument, "step size must be positive");
  if (box && !(box->low <= box->high)) throw Error(ErrorCode::InvalidArgument, "box needs low <= high");
}

ObjectiveSubsets objective_subsets(AttackVariant variant, const TargetSet& omega,
                                   const ExpandedTargetSet* gamma, std::size_t num_labels) {
  LabelSet flip;
  if (uses_graph(variant)) {
    if (gamma == nullptr) {
      throw Error(ErrorCode::GammaMissing, std::string(to_string(variant)) + " needs an expanded target set");
    }
    for (const auto& entry : omega.entries()) {
      if (!gamma->contains(entry.node)) {
        throw Error(ErrorCode::OmegaNotInGamma,
                    "target " + std::to_string(index(entry.node)) + " is missing from the expanded set");
      }
    }
    flip = gamma->nodes();
  } else {
    flip = omega.nodes();
  }
  for (LabelId c : flip) {
    if (index(c) >= num_labels) {
      throw Error(ErrorCode::InvalidLabelId, "label " + std::to_string(index(c)) + " out of range");
    }
  }
  LabelSet keep;
  if (holds_rest(variant)) {
    for (std::size_t c = 0; c < num_labels; ++c) {
      if (!std::binary_search(flip.begin(), flip.end(), label_id(c))) keep.push_back(label_id(c));
    }
  }
  return {std::move(flip), std::move(keep)};
}

bool attack_success(const LabelState& pre, const LabelState& post, const TargetSet& omega) {
  if (omega.empty()) throw Error(ErrorCode::EmptyTargetSet, "attack success needs at least one target");
  if (pre.size() != post.size()) {
    throw Error(ErrorCode::LengthMismatch, "pre-attack state has " + std::to_string(pre.size()) +
                                               " labels, post-attack state has " + std::to_string(post.size()));
  }
  for (const auto& entry : omega.entries()) {
    if (index(entry.node) >= pre.size()) {
      throw Error(ErrorCode::InvalidLabelId, "label " + std::to_string(index(entry.node)) + " out of range");
    }
    if (post[entry.node] != flipped(pre[entry.node])) return false;
  }
  return true;
}

namespace {

double linf(std::span<const double> v) {
  double m = 0.0;
  for (double a : v) m = std::max(m, std::abs(a));
  return m;
}

void l2_step_project(std::span<double> e, std::span<const double> g, double step, double radius) {
  const double gn = std::sqrt(kernels::dot(g, g));
  if (gn > 0.0) kernels::axpy(step / gn, g, e);
  const double en = std::sqrt(kernels::dot(e, e));
  if (en > radius) {
    const double scale = radius / en;
    for (double& v : e) v *= scale;
  }
}

// Keeps x + e inside the box without leaving the norm ball (the box clip only
// shrinks |e| per coordinate when x itself lies in the box).
void clip_to_box(std::span<double> e, std::span<const double> x, const FeatureBox& box) {
  for (std::size_t j = 0; j < e.size(); ++j) {
    const double v = std::clamp(x[j] + e[j], box.low, box.high);
    e[j] = v - x[j];
  }
}

bool reached(const LabelState& pre, const LabelState& post, const ObjectiveSubsets& subsets) {
  for (LabelId c : subsets.flip) {
    if (post[c] == pre[c]) return false;
  }
  for (LabelId c : subsets.keep) {
    if (post[c] != pre[c]) return false;
  }
  return true;
}

}  // namespace

AttackResult pgd_attack(const ClassifierParams& params, std::span<const double> x, const LabelState& labels,
                        const AttackSpec& spec, const TargetSet& omega, const LabelGraph& g) {
  spec.validate();
  params.validate();
  if (x.size() != params.input_dim) {
    throw Error(ErrorCode::ShapeMismatch, "input has dimension " + std::to_string(x.size()) + ", model expects " +
                                              std::to_string(params.input_dim));
  }
  if (labels.size() != params.num_labels || g.size() != params.num_labels) {
    throw Error(ErrorCode::LengthMismatch, "label count differs between model, graph and reference labels");
  }
  if (omega.empty()) throw Error(ErrorCode::EmptyTargetSet, "attack needs at least one target");

  AttackResult result;
  result.variant = spec.variant;
  result.epsilon = spec.epsilon;
  result.omega = omega;
  result.pre_state = predict(params, x);
  for (const auto& entry : omega.entries()) {
    g.check_id(entry.node);
    if (result.pre_state[entry.node] != required_sign(entry.direction)) {
      throw Error(ErrorCode::DirectionMismatch, "target '" + g.name(entry.node) + "' is " +
                                                    (result.pre_state.on(entry.node) ? "ON" : "OFF") +
                                                    " but asks to turn " +
                                                    std::string(to_string(entry.direction)));
    }
  }
  if (uses_graph(spec.variant)) result.gamma = expand(g, result.pre_state, omega);
  const ObjectiveSubsets subsets =
      objective_subsets(spec.variant, omega, uses_graph(spec.variant) ? &result.gamma : nullptr, labels.size());

  // Ascend J = bce(flip) - bce(keep); the reported objective is -J.
  LossTerms terms;
  terms.plus = subsets.flip;
  terms.minus = subsets.keep;
  terms.sign_plus = 1.0;
  terms.sign_minus = -1.0;

  const std::size_t d = x.size();
  std::vector<double> e(d, 0.0);
  if (spec.random_start && spec.epsilon > 0.0) {
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> u(-spec.epsilon, spec.epsilon);
    for (double& v : e) v = u(rng);
    if (spec.norm == NormKind::L2) l2_step_project(e, std::vector<double>(d, 0.0), 0.0, spec.epsilon);
    if (spec.box) clip_to_box(e, x, *spec.box);
  }

  const double step = spec.effective_step_size();
  std::vector<double> xe(d);
  std::vector<double> best_e = e;
  LabelState best_post = result.pre_state;
  double best_objective = std::numeric_limits<double>::infinity();
  bool have_best = false;

  for (std::size_t it = 0;; ++it) {
    for (std::size_t j = 0; j < d; ++j) xe[j] = x[j] + e[j];
    const ObjectiveEvaluation eval = evaluate_objective(params, xe, labels, terms);
    if (it > 0) {
      const double objective = -eval.value;
      result.objective_trace.push_back(objective);
      LabelState post = predict_from_scores(eval.scores);
      if (reached(result.pre_state, post, subsets)) {
        best_e = e;
        best_post = std::move(post);
        result.early_stopped = true;
        result.iterations_used = it;
        break;
      }
      if (!have_best || objective < best_objective) {
        have_best = true;
        best_objective = objective;
        best_e = e;
        best_post = std::move(post);
      }
    }
    if (it == spec.steps) {
      result.iterations_used = it;
      break;
    }
    if (spec.norm == NormKind::LInf) {
      kernels::sign_step_project(e, eval.gradient, step, spec.epsilon);
    } else {
      l2_step_project(e, eval.gradient, step, spec.epsilon);
    }
    if (spec.box) clip_to_box(e, x, *spec.box);
  }

  result.perturbation = std::move(best_e);
  result.post_state = std::move(best_post);
  result.linf_norm = linf(result.perturbation);
  assert(spec.norm != NormKind::LInf || result.linf_norm <= spec.epsilon + 1e-12);
  result.success = attack_success(result.pre_state, result.post_state, omega);

  LabelSet flip_nodes = subsets.flip;
  result.keep_intact = true;
  for (std::size_t c = 0; c < labels.size(); ++c) {
    if (std::binary_search(flip_nodes.begin(), flip_nodes.end(), label_id(c))) continue;
    if (result.post_state[label_id(c)] != result.pre_state[label_id(c)]) {
      result.keep_intact = false;
      break;
    }
  }
  return result;
}

std::string attack_result_json(const AttackResult& result, const LabelGraph& g) {
  using nlohmann::json;
  auto names_on = [&g](const LabelState& s) {
    json out = json::array();
    for (std::size_t c = 0; c < s.size(); ++c) {
      if (s.on(label_id(c))) out.push_back(g.name(label_id(c)));
    }
    return out;
  };
  json omega = json::array();
  for (const auto& entry : result.omega.entries()) {
    omega.push_back({{"label", g.name(entry.node)}, {"direction", to_string(entry.direction)}});
  }
  json gamma = json::array();
  for (const auto& entry : result.gamma.entries) {
    gamma.push_back({{"label", g.name(entry.node)},
                     {"direction", to_string(entry.direction)},
                     {"provenance", to_string(entry.provenance)}});
  }
  json out = {
      {"variant", to_string(result.variant)},
      {"epsilon", result.epsilon},
      {"success", result.success},
      {"keep_intact", result.keep_intact},
      {"early_stopped", result.early_stopped},
      {"iterations_used", result.iterations_used},
      {"linf_norm", result.linf_norm},
      {"omega", omega},
      {"gamma", gamma},
      {"pre_on", names_on(result.pre_state)},
      {"post_on", names_on(result.post_state)},
      {"objective_trace", result.objective_trace},
      {"perturbation", result.perturbation},
  };
  return out.dump(2);
}

}  // namespace gcattack
