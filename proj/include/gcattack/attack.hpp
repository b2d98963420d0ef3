#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gcattack/consistency.hpp"
#include "gcattack/label_graph.hpp"
#include "gcattack/model.hpp"
#include "gcattack/target_expansion.hpp"

namespace gcattack {

enum class AttackVariant : std::uint8_t { MlaAlpha, MlaBeta, GmlaAlpha, GmlaBeta };

std::string_view to_string(AttackVariant v);
AttackVariant attack_variant_from_string(std::string_view s);  // "MLA_alpha", ..., "GMLA_beta"
constexpr bool uses_graph(AttackVariant v) noexcept {
  return v == AttackVariant::GmlaAlpha || v == AttackVariant::GmlaBeta;
}
constexpr bool holds_rest(AttackVariant v) noexcept {
  return v == AttackVariant::MlaBeta || v == AttackVariant::GmlaBeta;
}
inline constexpr AttackVariant kAllVariants[] = {AttackVariant::MlaAlpha, AttackVariant::MlaBeta,
                                                 AttackVariant::GmlaAlpha, AttackVariant::GmlaBeta};

enum class NormKind : std::uint8_t { LInf, L2 };

struct FeatureBox {
  double low = 0.0;
  double high = 1.0;
};

struct AttackSpec {
  AttackVariant variant = AttackVariant::MlaAlpha;
  double epsilon = 0.1;
  NormKind norm = NormKind::LInf;
  std::size_t steps = 10;
  std::optional<double> step_size;  // epsilon / 4 when unset
  std::optional<FeatureBox> box;    // clip x + e into [low, high]
  bool random_start = false;
  std::uint64_t seed = 0;

  double effective_step_size() const { return step_size.value_or(epsilon / 4.0); }
  /// Throws InvalidArgument on a negative budget, zero steps or a non-positive step.
  void validate() const;
  /// Step sizes above 2 epsilon overshoot the ball every iteration.
  bool step_size_too_large() const { return effective_step_size() > 2.0 * epsilon; }
};

struct ObjectiveSubsets {
  LabelSet flip;  // labels pushed away from their current value
  LabelSet keep;  // labels held at their current value
};

/// MLA_alpha: (Omega, {}), MLA_beta: (Omega, C \ Omega),
/// GMLA_alpha: (Gamma, {}), GMLA_beta: (Gamma, C \ Gamma).
/// Throws GammaMissing (graph variant without gamma) and OmegaNotInGamma.
ObjectiveSubsets objective_subsets(AttackVariant variant, const TargetSet& omega,
                                   const ExpandedTargetSet* gamma, std::size_t num_labels);

struct AttackResult {
  AttackVariant variant = AttackVariant::MlaAlpha;
  double epsilon = 0.0;
  std::vector<double> perturbation;
  LabelState pre_state;
  LabelState post_state;
  TargetSet omega;
  ExpandedTargetSet gamma;  // empty for MLA variants
  bool success = false;     // every Omega entry flipped
  bool keep_intact = false; // every label outside the variant's flip set unchanged
  bool early_stopped = false;
  std::size_t iterations_used = 0;
  std::vector<double> objective_trace;  // minimized objective after each step
  double linf_norm = 0.0;
};

/// Iterative sign-gradient PGD on the variant's objective, projected onto the
/// epsilon ball (and the optional feature box). Stops at the first iterate where
/// the flip set has flipped and, for beta variants, the keep set is unchanged;
/// otherwise returns the iterate with the lowest objective.
///
/// Omega's directions are checked against predict(x); graph variants expand
/// Omega on that prediction first. `labels` are the BCE targets.
AttackResult pgd_attack(const ClassifierParams& params, std::span<const double> x, const LabelState& labels,
                        const AttackSpec& spec, const TargetSet& omega, const LabelGraph& g);

/// True iff every target has the opposite sign in `post`. Throws EmptyTargetSet
/// and LengthMismatch.
bool attack_success(const LabelState& pre, const LabelState& post, const TargetSet& omega);

/// JSON record of an attack with label names.
std::string attack_result_json(const AttackResult& result, const LabelGraph& g);

}  // namespace gcattack
