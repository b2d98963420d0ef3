#include "gcattack/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <thread>

#include "json.hpp"

#include "gcattack/error.hpp"

namespace gcattack {

TargetSet sample_targets(const LabelState& state, std::size_t k, std::uint64_t seed,
                         const std::vector<bool>& eligible) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "target count must be positive");
  if (!eligible.empty() && eligible.size() != state.size()) {
    throw Error(ErrorCode::LengthMismatch, "eligibility mask has " + std::to_string(eligible.size()) +
                                               " entries, state has " + std::to_string(state.size()));
  }
  std::vector<LabelId> pool;
  for (std::size_t c = 0; c < state.size(); ++c) {
    if (state.on(label_id(c)) && (eligible.empty() || eligible[c])) pool.push_back(label_id(c));
  }
  if (pool.size() < k) {
    throw Error(ErrorCode::NotEnoughPresentLabels, "need " + std::to_string(k) + " present eligible labels, found " +
                                                       std::to_string(pool.size()));
  }
  std::mt19937_64 rng(seed);
  TargetSet out;
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
    out.add(pool[i], Direction::TurnOff);
  }
  return out;
}

DetectionRates detection_rates(std::size_t successes, std::size_t detected_local, std::size_t detected_global) {
  if (successes == 0) throw Error(ErrorCode::EmptySuccessSet, "detection rates are undefined without successes");
  if (detected_local > successes || detected_global > successes) {
    throw Error(ErrorCode::InvalidArgument, "more detections than successful attacks");
  }
  const double s = static_cast<double>(successes);
  return {static_cast<double>(detected_local) / s, static_cast<double>(detected_global) / s};
}

SuccessRates success_rates(std::size_t attacked, std::size_t successes, std::size_t detected_local,
                           std::size_t detected_global) {
  if (attacked == 0) throw Error(ErrorCode::EmptyAttackSet, "success rates are undefined without attacked images");
  if (successes > attacked || detected_local > successes || detected_global > successes) {
    throw Error(ErrorCode::InvalidArgument, "counts must satisfy detected <= successes <= attacked");
  }
  const double n = static_cast<double>(attacked);
  return {static_cast<double>(successes) / n, static_cast<double>(successes - detected_local) / n,
          static_cast<double>(successes - detected_global) / n};
}

namespace {

void require_subset(const std::vector<std::size_t>& inner, const std::vector<std::size_t>& outer,
                    const char* what) {
  if (!std::is_sorted(inner.begin(), inner.end()) || !std::is_sorted(outer.begin(), outer.end())) {
    throw Error(ErrorCode::InvalidArgument, "image index sets must be sorted");
  }
  if (!std::includes(outer.begin(), outer.end(), inner.begin(), inner.end())) {
    throw Error(ErrorCode::InvalidArgument, what);
  }
}

}  // namespace

DetectionRates detection_rates(const std::vector<std::size_t>& successes,
                               const std::vector<std::size_t>& detected_local,
                               const std::vector<std::size_t>& detected_global) {
  require_subset(detected_local, successes, "locally detected images must be successes");
  require_subset(detected_global, successes, "globally detected images must be successes");
  return detection_rates(successes.size(), detected_local.size(), detected_global.size());
}

SuccessRates success_rates(const std::vector<std::size_t>& attacked, const std::vector<std::size_t>& successes,
                           const std::vector<std::size_t>& detected_local,
                           const std::vector<std::size_t>& detected_global) {
  require_subset(successes, attacked, "successful images must be attacked images");
  require_subset(detected_local, successes, "locally detected images must be successes");
  require_subset(detected_global, successes, "globally detected images must be successes");
  return success_rates(attacked.size(), successes.size(), detected_local.size(), detected_global.size());
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (variants.empty()) fail("no attack variants");
  if (epsilons.empty()) fail("no epsilon values");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] >= 0.0) || !std::isfinite(epsilons[i])) fail("epsilon values must be finite and >= 0");
    if (i > 0 && !(epsilons[i] > epsilons[i - 1])) fail("epsilon values must be strictly increasing");
  }
  if (targets_per_image == 0) fail("targets per image must be positive");
  if (local_radius == 0) fail("local radius must be positive");
  if (steps == 0) fail("steps must be positive");
  if (step_size && !(*step_size > 0.0)) fail("step size must be positive");
}

Detection detect(const LabelGraph& g, const LabelState& post, const TargetSet& omega, std::size_t radius,
                 const ConsistencyOptions& options) {
  Detection d;
  for (const auto& entry : omega.entries()) {
    if (!check_local(g, post, entry.node, radius, options).consistent()) {
      d.local = true;
      break;
    }
  }
  d.global = !check_global(g, post, options).consistent();
  return d;
}

namespace {

struct ImageOutcome {
  enum class Status { Attacked, Inconsistent, NoTargets } status = Status::Attacked;
  std::vector<ImageRecord> records;  // variant-major, then epsilon
  double max_excess = -std::numeric_limits<double>::infinity();
};

ImageOutcome attack_image(const LabelGraph& g, const ClassifierParams& params, const Dataset& data,
                          const ExperimentConfig& config, std::size_t image) {
  ImageOutcome out;
  const auto x = data.features(image);
  const LabelState clean = predict(params, x);
  const ConsistencyOptions options{config.upward_rule};
  if (!config.include_inconsistent && !check_global(g, clean, options).consistent()) {
    out.status = ImageOutcome::Status::Inconsistent;
    return out;
  }
  TargetSet omega;
  try {
    omega = sample_targets(clean, config.targets_per_image, mix_seed(config.seed, image),
                           config.originals_only ? g.original_mask() : std::vector<bool>{});
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotEnoughPresentLabels) throw;
    out.status = ImageOutcome::Status::NoTargets;
    return out;
  }
  for (AttackVariant variant : config.variants) {
    for (double eps : config.epsilons) {
      AttackSpec spec;
      spec.variant = variant;
      spec.epsilon = eps;
      spec.steps = config.steps;
      spec.step_size = config.step_size;
      spec.seed = mix_seed(config.seed, image);
      const AttackResult r = pgd_attack(params, x, clean, spec, omega, g);
      ImageRecord rec;
      rec.image = image;
      rec.variant = variant;
      rec.epsilon = eps;
      rec.omega = omega;
      rec.gamma = r.gamma;
      rec.success = r.success;
      rec.keep_intact = r.keep_intact;
      rec.linf_norm = r.linf_norm;
      if (r.success) {
        const Detection d = detect(g, r.post_state, omega, config.local_radius, options);
        rec.detected_local = d.local;
        rec.detected_global = d.global;
      }
      out.max_excess = std::max(out.max_excess, r.linf_norm - eps);
      out.records.push_back(std::move(rec));
    }
  }
  return out;
}

}  // namespace

SweepResult run_sweep(const LabelGraph& g, const ClassifierParams& params, const Dataset& data,
                      const ExperimentConfig& config) {
  config.validate();
  params.validate();
  if (data.num_labels() != g.size() || params.num_labels != g.size()) {
    throw Error(ErrorCode::ShapeMismatch, "graph, model and dataset disagree on the label count");
  }
  if (data.dim() != params.input_dim) {
    throw Error(ErrorCode::ShapeMismatch, "dataset dimension " + std::to_string(data.dim()) +
                                              " does not match model input " + std::to_string(params.input_dim));
  }
  const std::size_t n_images = config.max_images == 0 ? data.size() : std::min(config.max_images, data.size());

  std::vector<ImageOutcome> outcomes(n_images);
  std::vector<std::exception_ptr> errors(n_images);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < n_images; i = next.fetch_add(1)) {
      try {
        outcomes[i] = attack_image(g, params, data, config, i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(config.jobs, n_images));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(jobs);
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  SweepResult result;
  const std::size_t n_eps = config.epsilons.size();
  result.rows.resize(config.variants.size() * n_eps);
  for (std::size_t v = 0; v < config.variants.size(); ++v) {
    for (std::size_t k = 0; k < n_eps; ++k) {
      result.rows[v * n_eps + k].variant = config.variants[v];
      result.rows[v * n_eps + k].epsilon = config.epsilons[k];
    }
  }
  result.max_budget_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n_images; ++i) {
    auto& o = outcomes[i];
    if (o.status == ImageOutcome::Status::Inconsistent) {
      result.excluded_inconsistent.push_back(i);
      continue;
    }
    if (o.status == ImageOutcome::Status::NoTargets) {
      result.excluded_no_targets.push_back(i);
      continue;
    }
    result.max_budget_excess = std::max(result.max_budget_excess, o.max_excess);
    for (std::size_t j = 0; j < o.records.size(); ++j) {
      MetricsRow& row = result.rows[j];
      const ImageRecord& rec = o.records[j];
      ++row.n_attacked;
      if (rec.success) {
        ++row.n_success;
        if (rec.detected_local) ++row.n_detected_local;
        if (rec.detected_global) ++row.n_detected_global;
      }
    }
    for (auto& rec : o.records) result.records.push_back(std::move(rec));
  }
  if (result.records.empty()) result.max_budget_excess = 0.0;
  for (MetricsRow& row : result.rows) {
    if (row.n_attacked > 0) {
      row.success = success_rates(row.n_attacked, row.n_success, row.n_detected_local, row.n_detected_global);
    }
    if (row.n_success > 0) {
      row.detection = detection_rates(row.n_success, row.n_detected_local, row.n_detected_global);
    }
  }
  return result;
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

namespace {

constexpr std::string_view kCsvHeader =
    "variant,epsilon,n_attacked,n_success,n_detected_local,n_detected_global,sr_n,sr_l,sr_g,dr_l,dr_g";

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t p = s.find(sep, start);
    out.push_back(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start));
    if (p == std::string_view::npos) return out;
    start = p + 1;
  }
}

template <typename T>
T parse_number(std::string_view tok, std::size_t line) {
  T v{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": bad number '" + std::string(tok) + "'");
  }
  return v;
}

}  // namespace

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const MetricsRow& r : rows) {
    out += to_string(r.variant);
    out += ',' + format_double(r.epsilon);
    out += ',' + std::to_string(r.n_attacked);
    out += ',' + std::to_string(r.n_success);
    out += ',' + std::to_string(r.n_detected_local);
    out += ',' + std::to_string(r.n_detected_global);
    if (r.success) {
      out += ',' + format_double(r.success->none) + ',' + format_double(r.success->local) + ',' +
             format_double(r.success->global);
    } else {
      out += ",,,";
    }
    if (r.detection) {
      out += ',' + format_double(r.detection->local) + ',' + format_double(r.detection->global);
    } else {
      out += ",,";
    }
    out += '\n';
  }
  return out;
}

std::vector<MetricsRow> parse_metrics_csv(std::string_view text) {
  std::vector<MetricsRow> rows;
  std::size_t line_no = 0;
  bool header_seen = false;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kCsvHeader) throw Error(ErrorCode::ParseError, "line 1: unexpected CSV header");
      header_seen = true;
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() != 11) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected 11 cells");
    }
    MetricsRow r;
    try {
      r.variant = attack_variant_from_string(cells[0]);
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + e.detail());
    }
    r.epsilon = parse_number<double>(cells[1], line_no);
    r.n_attacked = parse_number<std::size_t>(cells[2], line_no);
    r.n_success = parse_number<std::size_t>(cells[3], line_no);
    r.n_detected_local = parse_number<std::size_t>(cells[4], line_no);
    r.n_detected_global = parse_number<std::size_t>(cells[5], line_no);
    if (!cells[6].empty()) {
      r.success = SuccessRates{parse_number<double>(cells[6], line_no), parse_number<double>(cells[7], line_no),
                               parse_number<double>(cells[8], line_no)};
    }
    if (!cells[9].empty()) {
      r.detection = DetectionRates{parse_number<double>(cells[9], line_no), parse_number<double>(cells[10], line_no)};
    }
    rows.push_back(r);
  }
  if (!header_seen) throw Error(ErrorCode::ParseError, "empty metrics CSV");
  return rows;
}

std::string records_jsonl(const std::vector<ImageRecord>& records, const LabelGraph& g) {
  using nlohmann::json;
  std::string out;
  for (const ImageRecord& r : records) {
    json omega = json::array();
    for (const auto& entry : r.omega.entries()) omega.push_back(g.name(entry.node));
    json gamma = json::array();
    for (const auto& entry : r.gamma.entries) {
      gamma.push_back({{"label", g.name(entry.node)},
                       {"direction", to_string(entry.direction)},
                       {"provenance", to_string(entry.provenance)}});
    }
    json line = {{"image", r.image},
                 {"variant", to_string(r.variant)},
                 {"epsilon", r.epsilon},
                 {"omega", omega},
                 {"gamma", gamma},
                 {"success", r.success},
                 {"keep_intact", r.keep_intact},
                 {"detected_local", r.detected_local},
                 {"detected_global", r.detected_global},
                 {"linf", r.linf_norm}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::string plot_data_json(const std::vector<MetricsRow>& rows) {
  using nlohmann::ordered_json;
  ordered_json series = ordered_json::object();
  for (const MetricsRow& r : rows) {
    const std::string key(to_string(r.variant));
    if (!series.contains(key)) {
      series[key] = {{"epsilon", ordered_json::array()}, {"sr_n", ordered_json::array()},
                     {"sr_l", ordered_json::array()},    {"sr_g", ordered_json::array()},
                     {"dr_l", ordered_json::array()},    {"dr_g", ordered_json::array()}};
    }
    auto& s = series[key];
    auto opt = [](bool present, double v) { return present ? ordered_json(v) : ordered_json(nullptr); };
    s["epsilon"].push_back(r.epsilon);
    s["sr_n"].push_back(opt(r.success.has_value(), r.success ? r.success->none : 0.0));
    s["sr_l"].push_back(opt(r.success.has_value(), r.success ? r.success->local : 0.0));
    s["sr_g"].push_back(opt(r.success.has_value(), r.success ? r.success->global : 0.0));
    s["dr_l"].push_back(opt(r.detection.has_value(), r.detection ? r.detection->local : 0.0));
    s["dr_g"].push_back(opt(r.detection.has_value(), r.detection ? r.detection->global : 0.0));
  }
  ordered_json out = {{"x", "epsilon"}, {"series", series}};
  return out.dump(2) + "\n";
}

DefaultExperiment default_experiment() {
  DefaultExperiment d;
  for (SyntheticDatasetConfig* c : {&d.train_data, &d.test_data}) {
    c->dim = 128;
    c->leaf_probability = 0.12;
    c->prototype_scale = 0.3;
    c->noise_std = 0.1;
    c->seed = 7;
  }
  d.train_data.samples = 4000;
  d.train_data.stream = 0;
  d.test_data.samples = 2000;
  d.test_data.stream = 1;
  d.hidden_dim = 64;
  d.linear_training = {.epochs = 60, .learning_rate = 0.5, .batch_size = 32, .seed = 1};
  d.hidden_training = {.epochs = 60, .learning_rate = 0.2, .batch_size = 32, .seed = 2};
  d.init_seed = 3;
  return d;
}

}  // namespace gcattack
