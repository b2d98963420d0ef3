#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gcattack/attack.hpp"
#include "gcattack/consistency.hpp"
#include "gcattack/dataset.hpp"
#include "gcattack/label_graph.hpp"
#include "gcattack/model.hpp"
#include "gcattack/target_expansion.hpp"

namespace gcattack {

/// k distinct present labels drawn uniformly without replacement, each with a
/// TurnOff direction, in draw order. `eligible` restricts the pool (empty means
/// every label). Throws NotEnoughPresentLabels, LengthMismatch, InvalidArgument (k = 0).
TargetSet sample_targets(const LabelState& state, std::size_t k, std::uint64_t seed,
                         const std::vector<bool>& eligible = {});

struct DetectionRates {
  double local = 0.0;
  double global = 0.0;
};

struct SuccessRates {
  double none = 0.0;    // SR_N
  double local = 0.0;   // SR_L
  double global = 0.0;  // SR_G
};

/// DR_L = |D_L| / |S|, DR_G = |D_G| / |S|. Throws EmptySuccessSet and
/// InvalidArgument when a detected count exceeds the successes.
DetectionRates detection_rates(std::size_t successes, std::size_t detected_local, std::size_t detected_global);

/// SR_N = |S| / |I|, SR_L = |S \ D_L| / |I|, SR_G = |S \ D_G| / |I|.
/// Throws EmptyAttackSet and InvalidArgument on inconsistent counts.
SuccessRates success_rates(std::size_t attacked, std::size_t successes, std::size_t detected_local,
                           std::size_t detected_global);

// Set forms over sorted image indices; they check D_L, D_G subset of S subset of I.
DetectionRates detection_rates(const std::vector<std::size_t>& successes,
                               const std::vector<std::size_t>& detected_local,
                               const std::vector<std::size_t>& detected_global);
SuccessRates success_rates(const std::vector<std::size_t>& attacked, const std::vector<std::size_t>& successes,
                           const std::vector<std::size_t>& detected_local,
                           const std::vector<std::size_t>& detected_global);

struct ExperimentConfig {
  std::vector<AttackVariant> variants{std::begin(kAllVariants), std::end(kAllVariants)};
  std::vector<double> epsilons{0.05, 0.1, 0.2, 0.4, 0.8};
  std::size_t targets_per_image = 1;  // 1 = single-node mode
  bool originals_only = true;
  std::size_t local_radius = 1;
  bool upward_rule = true;
  bool include_inconsistent = false;  // keep images whose clean prediction already violates a rule
  std::size_t steps = 10;
  std::optional<double> step_size;  // epsilon / 4 when unset
  std::size_t max_images = 0;       // 0 = all
  std::uint64_t seed = 11;
  std::size_t jobs = 1;

  /// Throws InvalidArgument (empty lists, epsilons not strictly increasing, k = 0, ...).
  void validate() const;
};

struct MetricsRow {
  AttackVariant variant = AttackVariant::MlaAlpha;
  double epsilon = 0.0;
  std::size_t n_attacked = 0;
  std::size_t n_success = 0;
  std::size_t n_detected_local = 0;
  std::size_t n_detected_global = 0;
  std::optional<SuccessRates> success;      // absent when nothing was attacked
  std::optional<DetectionRates> detection;  // absent when nothing succeeded
};

struct ImageRecord {
  std::size_t image = 0;
  AttackVariant variant = AttackVariant::MlaAlpha;
  double epsilon = 0.0;
  TargetSet omega;
  ExpandedTargetSet gamma;
  bool success = false;
  bool keep_intact = false;
  bool detected_local = false;
  bool detected_global = false;
  double linf_norm = 0.0;
};

struct SweepResult {
  std::vector<MetricsRow> rows;        // variant-major, then epsilon
  std::vector<ImageRecord> records;    // image-major, then variant, then epsilon
  std::vector<std::size_t> excluded_inconsistent;
  std::vector<std::size_t> excluded_no_targets;
  double max_budget_excess = 0.0;      // max over attacks of ||e||_inf - epsilon
};

/// Attacks every eligible image for every (variant, epsilon) pair against its
/// clean prediction, then runs local checks around each target (union) and a
/// global check on the post-attack prediction. Targets are drawn once per image.
/// The result does not depend on `jobs`.
SweepResult run_sweep(const LabelGraph& g, const ClassifierParams& params, const Dataset& data,
                      const ExperimentConfig& config);

/// True when the local check around any target or the global check fires.
struct Detection {
  bool local = false;
  bool global = false;
};
Detection detect(const LabelGraph& g, const LabelState& post, const TargetSet& omega, std::size_t radius,
                 const ConsistencyOptions& options);

std::string format_double(double v);  // shortest round-trip form

/// Header plus one row per MetricsRow; undefined rates are empty cells.
std::string metrics_csv(const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> parse_metrics_csv(std::string_view text);
std::string records_jsonl(const std::vector<ImageRecord>& records, const LabelGraph& g);

/// One series per variant: {"series": {variant: {"epsilon": [...], "sr_n": [...], ...}}}.
/// Undefined rates become null.
std::string plot_data_json(const std::vector<MetricsRow>& rows);

/// The synthetic experiment used by the acceptance suite and `gcattack sweep --default`.
struct DefaultExperiment {
  SyntheticDatasetConfig train_data;
  SyntheticDatasetConfig test_data;
  std::size_t hidden_dim = 64;
  TrainConfig linear_training;
  TrainConfig hidden_training;
  std::uint64_t init_seed = 3;
  ExperimentConfig sweep;
};
DefaultExperiment default_experiment();

}  // namespace gcattack
