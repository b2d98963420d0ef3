#include "gcattack/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "json.hpp"

#include "gcattack/dataset.hpp"
#include "gcattack/error.hpp"
#include "gcattack/kernels.hpp"

namespace gcattack {

std::string_view to_string(Architecture a) {
  return a == Architecture::Linear ? "linear" : "one_hidden_layer";
}

Architecture architecture_from_string(std::string_view s) {
  if (s == "linear") return Architecture::Linear;
  if (s == "one_hidden_layer") return Architecture::OneHiddenLayer;
  throw Error(ErrorCode::InvalidArgument, "unknown architecture '" + std::string(s) + "'");
}

namespace {

DenseLayer zero_layer(std::size_t rows, std::size_t cols) {
  return {rows, cols, std::vector<double>(rows * cols, 0.0), std::vector<double>(rows, 0.0)};
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::ShapeMismatch, what);
}

// Forward pass keeping the hidden pre-activations for backprop.
struct Forward {
  std::vector<double> hidden_pre;  // OneHiddenLayer only
  std::vector<double> hidden;
  std::vector<double> scores;
};

Forward forward(const ClassifierParams& p, std::span<const double> x) {
  require(x.size() == p.input_dim, "input has dimension " + std::to_string(x.size()) + ", model expects " +
                                       std::to_string(p.input_dim));
  Forward f;
  if (p.architecture == Architecture::Linear) {
    const DenseLayer& l = p.layers[0];
    f.scores.resize(l.rows);
    kernels::gemv(l.weights, l.rows, l.cols, x, l.bias, f.scores);
    return f;
  }
  const DenseLayer& l1 = p.layers[0];
  const DenseLayer& l2 = p.layers[1];
  f.hidden_pre.resize(l1.rows);
  kernels::gemv(l1.weights, l1.rows, l1.cols, x, l1.bias, f.hidden_pre);
  f.hidden.resize(l1.rows);
  std::transform(f.hidden_pre.begin(), f.hidden_pre.end(), f.hidden.begin(),
                 [](double z) { return z > 0.0 ? z : 0.0; });
  f.scores.resize(l2.rows);
  kernels::gemv(l2.weights, l2.rows, l2.cols, f.hidden, l2.bias, f.scores);
  return f;
}

// dL/dx given dL/dscores.
std::vector<double> backward_input(const ClassifierParams& p, const Forward& f,
                                   std::span<const double> dscores) {
  std::vector<double> dx(p.input_dim, 0.0);
  if (p.architecture == Architecture::Linear) {
    const DenseLayer& l = p.layers[0];
    kernels::gemv_transposed_accumulate(l.weights, l.rows, l.cols, dscores, dx);
    return dx;
  }
  const DenseLayer& l1 = p.layers[0];
  const DenseLayer& l2 = p.layers[1];
  std::vector<double> dhidden(l2.cols, 0.0);
  kernels::gemv_transposed_accumulate(l2.weights, l2.rows, l2.cols, dscores, dhidden);
  for (std::size_t j = 0; j < dhidden.size(); ++j) {
    if (f.hidden_pre[j] <= 0.0) dhidden[j] = 0.0;
  }
  kernels::gemv_transposed_accumulate(l1.weights, l1.rows, l1.cols, dhidden, dx);
  return dx;
}

double target_of(Sign s) { return s == Sign::Present ? 1.0 : 0.0; }

// -[t log sigma(z) + (1 - t) log(1 - sigma(z))]
double bce_term(double z, Sign y) { return y == Sign::Present ? -log_sigmoid(z) : -log_sigmoid(-z); }

void check_subset(std::span<const LabelId> subset, std::size_t n) {
  for (LabelId c : subset) {
    if (index(c) >= n) {
      throw Error(ErrorCode::InvalidLabelId,
                  "label id " + std::to_string(index(c)) + " outside " + std::to_string(n) + " scores");
    }
  }
}

}  // namespace

void ClassifierParams::validate() const {
  if (architecture == Architecture::Linear) {
    require(layers.size() == 1, "linear model needs exactly one layer");
    require(hidden_dim == 0, "linear model has no hidden layer");
    require(layers[0].rows == num_labels && layers[0].cols == input_dim, "linear layer shape");
  } else {
    require(layers.size() == 2, "one-hidden-layer model needs exactly two layers");
    require(hidden_dim > 0, "hidden width must be positive");
    require(layers[0].rows == hidden_dim && layers[0].cols == input_dim, "hidden layer shape");
    require(layers[1].rows == num_labels && layers[1].cols == hidden_dim, "output layer shape");
  }
  for (const DenseLayer& l : layers) {
    require(l.weights.size() == l.rows * l.cols, "weight array size");
    require(l.bias.size() == l.rows, "bias array size");
  }
}

ClassifierParams ClassifierParams::zeros(Architecture arch, std::size_t input_dim, std::size_t hidden_dim,
                                         std::size_t num_labels) {
  ClassifierParams p;
  p.architecture = arch;
  p.input_dim = input_dim;
  p.num_labels = num_labels;
  if (arch == Architecture::Linear) {
    p.hidden_dim = 0;
    p.layers.push_back(zero_layer(num_labels, input_dim));
  } else {
    p.hidden_dim = hidden_dim;
    p.layers.push_back(zero_layer(hidden_dim, input_dim));
    p.layers.push_back(zero_layer(num_labels, hidden_dim));
  }
  p.validate();
  return p;
}

ClassifierParams init_params(Architecture arch, std::size_t input_dim, std::size_t hidden_dim,
                             std::size_t num_labels, std::uint64_t seed) {
  ClassifierParams p = ClassifierParams::zeros(arch, input_dim, hidden_dim, num_labels);
  std::mt19937_64 rng(seed);
  for (DenseLayer& l : p.layers) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(l.cols)));
    for (double& w : l.weights) w = dist(rng);
  }
  if (arch == Architecture::Linear) {
    for (double& w : p.layers[0].weights) w *= 0.1;
  }
  return p;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double log_sigmoid(double z) {
  if (z >= 0.0) return -std::log1p(std::exp(-z));
  return z - std::log1p(std::exp(z));
}

double bce_loss(std::span<const double> scores, const LabelState& labels, std::span<const LabelId> subset) {
  if (subset.empty()) throw Error(ErrorCode::EmptySubset, "loss subset is empty");
  if (labels.size() != scores.size()) {
    throw Error(ErrorCode::LengthMismatch, "labels and scores differ in length");
  }
  check_subset(subset, scores.size());
  double loss = 0.0;
  for (LabelId c : subset) loss += bce_term(scores[index(c)], labels[c]);
  return loss;
}

std::vector<double> scores(const ClassifierParams& params, std::span<const double> x) {
  return forward(params, x).scores;
}

LabelState predict_from_scores(std::span<const double> scores) {
  std::vector<Sign> signs(scores.size());
  std::transform(scores.begin(), scores.end(), signs.begin(),
                 [](double s) { return s > 0.0 ? Sign::Present : Sign::Absent; });
  return LabelState(std::move(signs));
}

LabelState predict(const ClassifierParams& params, std::span<const double> x) {
  return predict_from_scores(scores(params, x));
}

ObjectiveEvaluation evaluate_objective(const ClassifierParams& params, std::span<const double> x,
                                       const LabelState& labels, const LossTerms& terms) {
  if (labels.size() != params.num_labels) {
    throw Error(ErrorCode::LengthMismatch, "labels length differs from model label count");
  }
  check_subset(terms.plus, params.num_labels);
  check_subset(terms.minus, params.num_labels);

  Forward f = forward(params, x);
  ObjectiveEvaluation out;
  std::vector<double> dscores(params.num_labels, 0.0);
  auto accumulate = [&](std::span<const LabelId> subset, double sign) {
    for (LabelId c : subset) {
      const double z = f.scores[index(c)];
      out.value += sign * bce_term(z, labels[c]);
      dscores[index(c)] += sign * (sigmoid(z) - target_of(labels[c]));
    }
  };
  accumulate(terms.plus, terms.sign_plus);
  accumulate(terms.minus, terms.sign_minus);
  out.gradient = backward_input(params, f, dscores);
  out.scores = std::move(f.scores);
  return out;
}

std::vector<double> loss_input_gradient(const ClassifierParams& params, std::span<const double> x,
                                        const LabelState& labels, std::span<const LabelId> subset_plus,
                                        std::span<const LabelId> subset_minus, double sign_plus,
                                        double sign_minus) {
  if (subset_plus.empty() && subset_minus.empty()) {
    throw Error(ErrorCode::EmptySubset, "both loss subsets are empty");
  }
  LossTerms terms{LabelSet(subset_plus.begin(), subset_plus.end()),
                  LabelSet(subset_minus.begin(), subset_minus.end()), sign_plus, sign_minus};
  std::sort(terms.plus.begin(), terms.plus.end());
  std::sort(terms.minus.begin(), terms.minus.end());
  LabelSet overlap;
  std::set_intersection(terms.plus.begin(), terms.plus.end(), terms.minus.begin(), terms.minus.end(),
                        std::back_inserter(overlap));
  if (!overlap.empty()) throw Error(ErrorCode::InvalidArgument, "loss subsets must be disjoint");
  return evaluate_objective(params, x, labels, terms).gradient;
}

double mean_bce(const ClassifierParams& params, const Dataset& data) {
  if (data.size() == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto s = scores(params, data.features(i));
    for (std::size_t c = 0; c < s.size(); ++c) total += bce_term(s[c], data.labels(i)[c]);
  }
  return total / static_cast<double>(data.size() * params.num_labels);
}

AccuracyReport accuracy(const ClassifierParams& params, const Dataset& data) {
  AccuracyReport r;
  if (data.size() == 0) return r;
  std::size_t exact = 0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const LabelState pred = predict(params, data.features(i));
    const LabelState& truth = data.labels(i);
    std::size_t hits = 0;
    for (std::size_t c = 0; c < pred.size(); ++c) hits += pred[c] == truth[c] ? 1 : 0;
    correct += hits;
    exact += hits == pred.size() ? 1 : 0;
  }
  r.subset_exact_match = static_cast<double>(exact) / static_cast<double>(data.size());
  r.per_label = static_cast<double>(correct) / static_cast<double>(data.size() * params.num_labels);
  return r;
}

TrainResult train(ClassifierParams params, const Dataset& data, const TrainConfig& config) {
  params.validate();
  if (data.dim() != params.input_dim || data.num_labels() != params.num_labels) {
    throw Error(ErrorCode::ShapeMismatch, "dataset shape (" + std::to_string(data.dim()) + ", " +
                                              std::to_string(data.num_labels()) +
                                              ") does not match the model");
  }
  if (config.batch_size == 0) throw Error(ErrorCode::InvalidArgument, "batch size must be positive");

  TrainResult result;
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<DenseLayer> grads;
  for (const DenseLayer& l : params.layers) grads.push_back(zero_layer(l.rows, l.cols));
  const bool linear = params.architecture == Architecture::Linear;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      const double scale = 1.0 / static_cast<double>((stop - start) * params.num_labels);
      for (DenseLayer& g : grads) {
        std::fill(g.weights.begin(), g.weights.end(), 0.0);
        std::fill(g.bias.begin(), g.bias.end(), 0.0);
      }
      for (std::size_t k = start; k < stop; ++k) {
        const auto x = data.features(order[k]);
        const LabelState& y = data.labels(order[k]);
        const Forward f = forward(params, x);
        std::vector<double> dscores(params.num_labels);
        for (std::size_t c = 0; c < dscores.size(); ++c) {
          dscores[c] = (sigmoid(f.scores[c]) - target_of(y[c])) * scale;
        }
        DenseLayer& out = grads.back();
        const std::span<const double> out_input = linear ? x : std::span<const double>(f.hidden);
        for (std::size_t r = 0; r < out.rows; ++r) {
          kernels::axpy(dscores[r], out_input, std::span<double>(out.weights).subspan(r * out.cols, out.cols));
          out.bias[r] += dscores[r];
        }
        if (linear) continue;
        const DenseLayer& l2 = params.layers[1];
        std::vector<double> dhidden(l2.cols, 0.0);
        kernels::gemv_transposed_accumulate(l2.weights, l2.rows, l2.cols, dscores, dhidden);
        DenseLayer& g1 = grads[0];
        for (std::size_t j = 0; j < g1.rows; ++j) {
          if (f.hidden_pre[j] <= 0.0) continue;
          kernels::axpy(dhidden[j], x, std::span<double>(g1.weights).subspan(j * g1.cols, g1.cols));
          g1.bias[j] += dhidden[j];
        }
      }
      for (std::size_t li = 0; li < params.layers.size(); ++li) {
        kernels::axpy(-config.learning_rate, grads[li].weights, params.layers[li].weights);
        kernels::axpy(-config.learning_rate, grads[li].bias, params.layers[li].bias);
      }
    }
    result.loss_trace.push_back(mean_bce(params, data));
  }
  result.params = std::move(params);
  return result;
}

std::string serialize_model(const ClassifierParams& params) {
  params.validate();
  nlohmann::json doc;
  doc["format"] = "gcattack-model";
  doc["version"] = 1;
  doc["architecture"] = to_string(params.architecture);
  doc["input_dim"] = params.input_dim;
  doc["hidden_dim"] = params.hidden_dim;
  doc["num_labels"] = params.num_labels;
  nlohmann::json layers = nlohmann::json::array();
  for (const DenseLayer& l : params.layers) {
    layers.push_back({{"rows", l.rows}, {"cols", l.cols}, {"weights", l.weights}, {"bias", l.bias}});
  }
  doc["layers"] = std::move(layers);
  return doc.dump() + "\n";
}

ClassifierParams parse_model(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != "gcattack-model") {
      throw Error(ErrorCode::ParseError, "not a gcattack model file");
    }
    if (doc.at("version").get<int>() != 1) {
      throw Error(ErrorCode::ParseError, "unsupported model file version");
    }
    ClassifierParams p;
    p.architecture = architecture_from_string(doc.at("architecture").get<std::string>());
    p.input_dim = doc.at("input_dim").get<std::size_t>();
    p.hidden_dim = doc.at("hidden_dim").get<std::size_t>();
    p.num_labels = doc.at("num_labels").get<std::size_t>();
    for (const auto& l : doc.at("layers")) {
      p.layers.push_back({l.at("rows").get<std::size_t>(), l.at("cols").get<std::size_t>(),
                          l.at("weights").get<std::vector<double>>(), l.at("bias").get<std::vector<double>>()});
    }
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed model file: ") + e.what());
  }
}

}  // namespace gcattack
