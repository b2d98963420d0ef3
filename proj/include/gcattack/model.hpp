#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gcattack/consistency.hpp"
#include "gcattack/label_graph.hpp"

namespace gcattack {

class Dataset;

enum class Architecture : std::uint8_t { Linear, OneHiddenLayer };

std::string_view to_string(Architecture a);
Architecture architecture_from_string(std::string_view s);  // "linear" | "one_hidden_layer"

/// Row-major dense layer computing W x + b.
struct DenseLayer {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> weights;  // rows * cols
  std::vector<double> bias;     // rows

  std::span<const double> row(std::size_t r) const { return {weights.data() + r * cols, cols}; }
  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Linear: scores = W x + b.  OneHiddenLayer: scores = W2 relu(W1 x + b1) + b2.
struct ClassifierParams {
  Architecture architecture = Architecture::Linear;
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;  // 0 for Linear
  std::size_t num_labels = 0;
  std::vector<DenseLayer> layers;

  /// Throws ShapeMismatch when the layers do not compose d -> (h ->) |C|.
  void validate() const;

  static ClassifierParams zeros(Architecture arch, std::size_t input_dim, std::size_t hidden_dim,
                                std::size_t num_labels);

  friend bool operator==(const ClassifierParams&, const ClassifierParams&) = default;
};

/// Seeded initialization: He-normal hidden layer, zero biases.
ClassifierParams init_params(Architecture arch, std::size_t input_dim, std::size_t hidden_dim,
                             std::size_t num_labels, std::uint64_t seed);

double sigmoid(double z);
/// log sigma(z) without overflow or underflow to -inf for |z| up to ~700.
double log_sigmoid(double z);

/// Non-negative binary cross entropy over `subset`, with targets (y + 1) / 2.
/// Throws EmptySubset, LengthMismatch, InvalidLabelId.
double bce_loss(std::span<const double> scores, const LabelState& labels, std::span<const LabelId> subset);

std::vector<double> scores(const ClassifierParams& params, std::span<const double> x);

/// +1 iff the score is strictly positive.
LabelState predict_from_scores(std::span<const double> scores);
LabelState predict(const ClassifierParams& params, std::span<const double> x);

/// J(x) = sign_plus * bce(plus) + sign_minus * bce(minus), both against `labels`.
struct LossTerms {
  LabelSet plus;
  LabelSet minus;
  double sign_plus = 1.0;
  double sign_minus = 1.0;
};

struct ObjectiveEvaluation {
  std::vector<double> scores;
  double value = 0.0;
  std::vector<double> gradient;  // dJ/dx
};

/// Scores, objective value and exact input gradient in one forward/backward pass.
ObjectiveEvaluation evaluate_objective(const ClassifierParams& params, std::span<const double> x,
                                       const LabelState& labels, const LossTerms& terms);

/// Gradient with respect to x of sign_plus * bce(subset_plus) + sign_minus * bce(subset_minus).
/// Subsets must be disjoint; EmptySubset when both are empty.
std::vector<double> loss_input_gradient(const ClassifierParams& params, std::span<const double> x,
                                        const LabelState& labels, std::span<const LabelId> subset_plus,
                                        std::span<const LabelId> subset_minus, double sign_plus,
                                        double sign_minus);

struct TrainConfig {
  std::size_t epochs = 60;
  double learning_rate = 0.5;
  std::size_t batch_size = 32;
  std::uint64_t seed = 1;
};

struct TrainResult {
  ClassifierParams params;
  std::vector<double> loss_trace;  // mean BCE over the whole dataset after each epoch
};

/// Mini-batch gradient descent on mean BCE over all labels. Deterministic for a
/// fixed seed.
TrainResult train(ClassifierParams params, const Dataset& data, const TrainConfig& config);

/// Mean BCE over every sample and label.
double mean_bce(const ClassifierParams& params, const Dataset& data);

struct AccuracyReport {
  double subset_exact_match = 0.0;
  double per_label = 0.0;
};
AccuracyReport accuracy(const ClassifierParams& params, const Dataset& data);

// Versioned JSON model file.
std::string serialize_model(const ClassifierParams& params);
ClassifierParams parse_model(std::string_view text);

}  // namespace gcattack
