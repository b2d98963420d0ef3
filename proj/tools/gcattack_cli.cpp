// gcattack: command-line front end for graph generation, synthetic data,
// training, attacks, sweeps and the consistency/expansion debugging tools.
//
// Exit codes: 0 ok, 2 usage, 3 validation (bad input, parse errors, graph
// errors), 4 runtime (I/O, non-convergence, oracle budget, replay mismatch).

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gcattack/attack.hpp"
#include "gcattack/consistency.hpp"
#include "gcattack/dataset.hpp"
#include "gcattack/error.hpp"
#include "gcattack/evaluation.hpp"
#include "gcattack/graph_io.hpp"
#include "gcattack/kernels.hpp"
#include "gcattack/label_graph.hpp"
#include "gcattack/model.hpp"
#include "gcattack/oracle/reference_oracle.hpp"
#include "gcattack/target_expansion.hpp"
#include "run_manifest.hpp"

extern char** environ;

namespace gcattack::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitRuntime = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RuntimeFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoError:
    case ErrorCode::NonConvergence:
    case ErrorCode::BudgetExceeded:
      return kExitRuntime;
    default:
      return kExitValidation;
  }
}

// ---------------------------------------------------------------- options

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::size_t jobs = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  std::string kernels = "auto";
  bool strict = false;
  std::string manifest;
};

struct GraphSource {
  std::string graph;
  std::string builtin;
};

void add_graph_source(CLI::App* sub, GraphSource& src) {
  auto* g = sub->add_option("--graph", src.graph, "Graph JSON file")->check(CLI::ExistingFile);
  auto* b = sub->add_option("--builtin", src.builtin, "Built-in graph")
                ->check(CLI::IsMember({"object_taxonomy", "small_tree", "sixteen_leaves"}));
  g->excludes(b);
}

struct GenGraphOptions {
  GraphSource source;
  std::string candidates;
  bool treeify = false;
  std::string out;
};

struct GenDataOptions {
  GraphSource source;
  SyntheticDatasetConfig data = default_experiment().train_data;
  std::string out;
};

struct TrainOptions {
  GraphSource source;
  std::string data;
  std::string eval_data;
  std::string arch = "one_hidden_layer";
  std::size_t hidden = default_experiment().hidden_dim;
  std::optional<std::size_t> epochs;
  std::optional<double> lr;
  std::optional<std::size_t> batch;
  std::string out;
};

struct StateOptions {
  std::vector<std::string> on;
  std::string state;
};

void add_state_options(CLI::App* sub, StateOptions& s) {
  auto* on = sub->add_option("--on", s.on, "Labels that are ON (comma separated)")->delimiter(',');
  auto* st = sub->add_option("--state", s.state, "State as a JSON map name -> +1/-1, inline or a file path");
  on->excludes(st);
}

struct AttackOptions {
  GraphSource source;
  std::string model;
  std::string data;
  std::size_t image = 0;
  std::string variant = "GMLA_beta";
  double epsilon = 0.1;
  std::string norm = "linf";
  std::size_t steps = 10;
  std::optional<double> step_size;
  std::optional<double> box_low;
  std::optional<double> box_high;
  bool random_start = false;
  std::vector<std::string> targets;
  std::vector<std::string> turn_on;
  std::size_t k = 1;
  std::string labels = "predicted";
  std::string out;
};

struct SweepOptions {
  GraphSource source;
  std::string model;
  std::string data;
  bool use_default = false;
  std::vector<std::string> variants{"MLA_alpha", "MLA_beta", "GMLA_alpha", "GMLA_beta"};
  ExperimentConfig config = default_experiment().sweep;
  bool all_labels = false;
  bool no_upward = false;
  std::string out_dir;
};

struct VerifyOptions {
  GraphSource source;
  StateOptions state;
  std::string center;
  std::size_t radius = 1;
  bool no_upward = false;
  std::string format = "text";
  std::string out;
};

struct ExpandOptions {
  GraphSource source;
  StateOptions state;
  std::vector<std::string> targets;
  std::vector<std::string> turn_on;
  std::string format = "text";
  std::string out;
};

struct PlotOptions {
  std::string csv;
  std::string out;
};

struct OracleOptions {
  GraphSource source;
  StateOptions state;
  std::vector<std::string> targets;
  std::vector<std::string> turn_on;
  std::size_t max_nodes = 12;
};

// ---------------------------------------------------------------- context

class Context {
 public:
  Context(const GlobalOptions& global, std::string command) : global_(global) {
    manifest.command = std::move(command);
    manifest.kernels = std::string(kernels::to_string(kernels::active_backend()));
    manifest.cwd = fs::current_path().string();
  }

  /// Registers an input: strict hash check, then records its hash.
  fs::path input(const std::string& path) {
    const fs::path p(path);
    if (global_.strict) verify_against_manifest(p);
    manifest.add_input(p);
    inputs_.push_back(p);
    return p;
  }

  /// Writes an output file, refusing to overwrite any input of this run.
  void write(const fs::path& path, std::string_view text) {
    for (const fs::path& in : inputs_) {
      if (fs::exists(path) && fs::equivalent(in, path)) {
        throw UsageError("refusing to overwrite input file '" + path.string() + "'");
      }
    }
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_text_file(path, text);
    outputs_.push_back(path);
  }

  /// Sets the manifest location unless --manifest overrides it.
  void set_manifest_path(const fs::path& p) {
    if (manifest_path_.empty()) manifest_path_ = p;
  }
  void force_manifest_path(const fs::path& p) { manifest_path_ = p; }

  void finish() {
    if (manifest_path_.empty()) return;
    for (const fs::path& out : outputs_) manifest.add_output(out, manifest_path_);
    for (const fs::path& in : inputs_) {
      if (fs::exists(manifest_path_) && fs::equivalent(in, manifest_path_)) {
        throw UsageError("refusing to overwrite input file '" + manifest_path_.string() + "'");
      }
    }
    if (manifest_path_.has_parent_path()) fs::create_directories(manifest_path_.parent_path());
    write_text_file(manifest_path_, manifest.to_json());
  }

  RunManifest manifest;

 private:
  const GlobalOptions& global_;
  std::vector<fs::path> inputs_;
  std::vector<fs::path> outputs_;
  fs::path manifest_path_;
};

// ---------------------------------------------------------------- helpers

LabelGraph builtin_graph(const std::string& name) {
  if (name == "object_taxonomy") return fixtures::object_taxonomy();
  if (name == "small_tree") return fixtures::small_tree();
  if (name == "sixteen_leaves") return fixtures::sixteen_leaves();
  throw UsageError("unknown built-in graph '" + name + "'");
}

LabelGraph load_source(const GraphSource& src, Context& ctx) {
  if (!src.graph.empty()) return load_graph(ctx.input(src.graph));
  if (!src.builtin.empty()) {
    ctx.manifest.config["builtin_graph"] = src.builtin;
    return builtin_graph(src.builtin);
  }
  throw UsageError("one of --graph or --builtin is required");
}

std::string read_state_text(const std::string& arg, Context& ctx) {
  const auto first = arg.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && arg[first] == '{') return arg;
  return read_text_file(ctx.input(arg));
}

LabelState parse_state(const LabelGraph& g, const StateOptions& opts, Context& ctx) {
  LabelState s(g.size());
  if (!opts.state.empty()) {
    const std::string text = read_state_text(opts.state, ctx);
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::ParseError, std::string("state is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw Error(ErrorCode::ParseError, "state must be a JSON object name -> +1/-1");
    for (const auto& [name, value] : doc.items()) {
      if (!value.is_number_integer() || (value.get<int>() != 1 && value.get<int>() != -1)) {
        throw Error(ErrorCode::InvalidState, "state value for '" + name + "' must be +1 or -1");
      }
      s.set(g.id_of(name), value.get<int>() == 1 ? Sign::Present : Sign::Absent);
    }
    return s;
  }
  for (const std::string& name : opts.on) s.set(g.id_of(name), Sign::Present);
  return s;
}

TargetSet parse_targets(const LabelGraph& g, const std::vector<std::string>& off,
                        const std::vector<std::string>& on) {
  TargetSet omega;
  for (const std::string& name : off) omega.add(g.id_of(name), Direction::TurnOff);
  for (const std::string& name : on) omega.add(g.id_of(name), Direction::TurnOn);
  return omega;
}

std::string join_names(const LabelGraph& g, const std::vector<LabelId>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) out += ", ";
    out += g.name(ids[i]);
  }
  return out;
}

void emit(Context& ctx, const std::string& out, std::string_view text) {
  if (out.empty()) {
    std::cout << text;
  } else {
    ctx.write(out, text);
    ctx.set_manifest_path(manifest_for_file(out));
  }
}

std::string metrics_table(const std::vector<MetricsRow>& rows) {
  std::ostringstream os;
  os << "variant      epsilon   n    sr_n   sr_l   sr_g   dr_l   dr_g\n";
  auto cell = [&os](std::optional<double> v) {
    char buf[16];
    if (v) {
      std::snprintf(buf, sizeof(buf), " %6.3f", *v);
    } else {
      std::snprintf(buf, sizeof(buf), " %6s", "-");
    }
    os << buf;
  };
  for (const MetricsRow& r : rows) {
    char head[64];
    std::snprintf(head, sizeof(head), "%-11s %8.4g %4zu", std::string(to_string(r.variant)).c_str(), r.epsilon,
                  r.n_attacked);
    os << head;
    cell(r.success ? std::optional(r.success->none) : std::nullopt);
    cell(r.success ? std::optional(r.success->local) : std::nullopt);
    cell(r.success ? std::optional(r.success->global) : std::nullopt);
    cell(r.detection ? std::optional(r.detection->local) : std::nullopt);
    cell(r.detection ? std::optional(r.detection->global) : std::nullopt);
    os << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------- commands

void cmd_gen_graph(const GenGraphOptions& o, Context& ctx) {
  std::optional<LabelGraph> reference;
  std::vector<TaxonomyCandidate> candidates;
  const bool have_source = !o.source.graph.empty() || !o.source.builtin.empty();
  if (!o.candidates.empty()) {
    candidates = parse_candidates(read_text_file(ctx.input(o.candidates)));
  }
  if (have_source) {
    reference = load_source(o.source, ctx);
    if (!o.candidates.empty() && !o.treeify) {
      throw UsageError("--candidates together with a graph needs --treeify");
    }
  } else if (!o.candidates.empty()) {
    // Labels in first-appearance order; every candidate parent becomes an edge.
    std::vector<std::string> names;
    std::vector<NamedEdge> edges;
    auto see = [&names](const std::string& n) {
      if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
    };
    for (const auto& c : candidates) {
      see(c.child);
      for (const auto& p : c.parents) {
        see(p);
        edges.push_back({p, c.child});
      }
    }
    reference = LabelGraph::build(names, edges);
  } else {
    throw UsageError("gen-graph needs --graph, --builtin or --candidates");
  }

  LabelGraph result = *reference;
  if (o.treeify) {
    if (candidates.empty()) candidates = candidates_from_parents(*reference);
    result = treeify(*reference, candidates);
  }
  ctx.manifest.config["treeify"] = o.treeify;
  ctx.write(o.out, serialize_graph(result));
  ctx.set_manifest_path(manifest_for_file(o.out));
  ctx.manifest.summary = {{"labels", result.size()}, {"edges", result.edges().size()},
                          {"graph_hash", hex64(graph_hash(result))}};
  std::cout << "wrote " << o.out << ": " << result.size() << " labels, " << result.edges().size()
            << " edges\n";
}

void cmd_gen_data(GenDataOptions o, const GlobalOptions& global, Context& ctx) {
  const LabelGraph g = load_source(o.source, ctx);
  if (global.seed) o.data.seed = *global.seed;
  ctx.manifest.seeds["data"] = o.data.seed;
  const Dataset data = generate_synthetic(g, o.data);
  ctx.write(o.out, fs::path(o.out).extension() == ".bin" ? serialize_dataset_binary(data)
                                                        : serialize_dataset_text(data));
  ctx.set_manifest_path(manifest_for_file(o.out));
  ctx.manifest.summary = {{"samples", data.size()}, {"dim", data.dim()}, {"labels", data.num_labels()}};
  std::cout << "wrote " << o.out << ": " << data.size() << " samples, d = " << data.dim() << "\n";
}

void check_dataset_graph(const Dataset& data, const LabelGraph& g, const std::string& path) {
  if (data.num_labels() != g.size()) {
    throw Error(ErrorCode::LengthMismatch, path + " has " + std::to_string(data.num_labels()) +
                                               " labels, graph has " + std::to_string(g.size()));
  }
  if (data.graph_hash != 0 && data.graph_hash != graph_hash(g)) {
    throw Error(ErrorCode::InvalidState, path + " was generated for a different graph");
  }
}

void cmd_train(const TrainOptions& o, const GlobalOptions& global, Context& ctx) {
  const LabelGraph g = load_source(o.source, ctx);
  const Dataset data = load_dataset(ctx.input(o.data));
  check_dataset_graph(data, g, o.data);
  const DefaultExperiment defaults = default_experiment();
  const Architecture arch = architecture_from_string(o.arch);
  TrainConfig cfg = arch == Architecture::Linear ? defaults.linear_training : defaults.hidden_training;
  std::uint64_t init_seed = defaults.init_seed;
  if (global.seed) {
    init_seed = *global.seed;
    cfg.seed = mix_seed(*global.seed, 1);
  }
  if (o.epochs) cfg.epochs = *o.epochs;
  if (o.lr) cfg.learning_rate = *o.lr;
  if (o.batch) cfg.batch_size = *o.batch;
  ctx.manifest.seeds = {{"init", init_seed}, {"training", cfg.seed}};
  ctx.manifest.config["resolved_training"] = {{"epochs", cfg.epochs},
                                              {"learning_rate", cfg.learning_rate},
                                              {"batch_size", cfg.batch_size}};

  const ClassifierParams init = init_params(arch, data.dim(), o.hidden, data.num_labels(), init_seed);
  const TrainResult trained = train(init, data, cfg);
  const AccuracyReport acc = accuracy(trained.params, data);
  ordered_json summary = {{"final_loss", trained.loss_trace.empty() ? 0.0 : trained.loss_trace.back()},
                          {"train_exact_match", acc.subset_exact_match}};
  std::cout << "trained " << o.arch << ": loss " << summary["final_loss"].get<double>() << ", exact match "
            << acc.subset_exact_match << " (train)";
  if (!o.eval_data.empty()) {
    const Dataset eval = load_dataset(ctx.input(o.eval_data));
    check_dataset_graph(eval, g, o.eval_data);
    const AccuracyReport ev = accuracy(trained.params, eval);
    summary["eval_exact_match"] = ev.subset_exact_match;
    summary["eval_per_label_accuracy"] = ev.per_label;
    std::cout << ", " << ev.subset_exact_match << " (eval)";
  }
  std::cout << "\n";
  ctx.write(o.out, serialize_model(trained.params));
  ctx.set_manifest_path(manifest_for_file(o.out));
  ctx.manifest.summary = summary;
}

void cmd_attack(const AttackOptions& o, const GlobalOptions& global, Context& ctx) {
  const LabelGraph g = load_source(o.source, ctx);
  const ClassifierParams params = parse_model(read_text_file(ctx.input(o.model)));
  const Dataset data = load_dataset(ctx.input(o.data));
  check_dataset_graph(data, g, o.data);
  if (o.image >= data.size()) {
    throw Error(ErrorCode::InvalidArgument, "image " + std::to_string(o.image) + " out of range (dataset has " +
                                                std::to_string(data.size()) + ")");
  }
  const auto x = data.features(o.image);
  const LabelState clean = predict(params, x);
  const std::uint64_t seed = mix_seed(global.seed.value_or(default_experiment().sweep.seed), o.image);
  ctx.manifest.seeds = {{"attack", seed}};

  TargetSet omega;
  if (!o.targets.empty() || !o.turn_on.empty()) {
    omega = parse_targets(g, o.targets, o.turn_on);
  } else {
    omega = sample_targets(clean, o.k, seed, g.original_mask());
  }

  AttackSpec spec;
  spec.variant = attack_variant_from_string(o.variant);
  spec.epsilon = o.epsilon;
  spec.norm = o.norm == "l2" ? NormKind::L2 : NormKind::LInf;
  spec.steps = o.steps;
  spec.step_size = o.step_size;
  if (o.box_low || o.box_high) spec.box = FeatureBox{o.box_low.value_or(-1e300), o.box_high.value_or(1e300)};
  spec.random_start = o.random_start;
  spec.seed = seed;
  if (spec.step_size_too_large()) std::cerr << "warning: step size exceeds 2 epsilon\n";

  const LabelState labels = o.labels == "truth" ? data.labels(o.image) : clean;
  const AttackResult result = pgd_attack(params, x, labels, spec, omega, g);
  emit(ctx, o.out, attack_result_json(result, g) + "\n");
  ctx.manifest.summary = {{"success", result.success}, {"keep_intact", result.keep_intact}};
  if (!o.out.empty()) {
    std::cout << to_string(spec.variant) << " eps " << spec.epsilon << ": "
              << (result.success ? "success" : "failure") << "\n";
  }
}

void cmd_sweep(SweepOptions o, const GlobalOptions& global, Context& ctx) {
  ExperimentConfig& cfg = o.config;
  cfg.variants.clear();
  for (const std::string& v : o.variants) cfg.variants.push_back(attack_variant_from_string(v));
  cfg.originals_only = !o.all_labels;
  cfg.upward_rule = !o.no_upward;
  cfg.jobs = global.jobs;
  if (global.seed) cfg.seed = *global.seed;
  cfg.validate();
  const fs::path dir(o.out_dir);
  ctx.set_manifest_path(manifest_for_dir(dir));

  auto run_one = [&](const LabelGraph& g, const ClassifierParams& params, const Dataset& data,
                     const fs::path& where) {
    const SweepResult r = run_sweep(g, params, data, cfg);
    ctx.write(where / "metrics.csv", metrics_csv(r.rows));
    ctx.write(where / "records.jsonl", records_jsonl(r.records, g));
    std::cout << metrics_table(r.rows);
    return ordered_json{{"excluded_inconsistent", r.excluded_inconsistent.size()},
                        {"excluded_no_targets", r.excluded_no_targets.size()},
                        {"max_budget_excess", r.max_budget_excess}};
  };

  ctx.manifest.seeds["sweep"] = cfg.seed;
  if (!o.use_default) {
    if (o.model.empty() || o.data.empty()) throw UsageError("sweep needs --model and --data (or --default)");
    const LabelGraph g = load_source(o.source, ctx);
    const ClassifierParams params = parse_model(read_text_file(ctx.input(o.model)));
    const Dataset data = load_dataset(ctx.input(o.data));
    check_dataset_graph(data, g, o.data);
    ctx.manifest.summary = run_one(g, params, data, dir);
    return;
  }

  // Default experiment: everything is generated under the output directory.
  if (!o.model.empty() || !o.data.empty() || !o.source.graph.empty() || !o.source.builtin.empty()) {
    throw UsageError("--default builds its own graph, data and models");
  }
  DefaultExperiment ex = default_experiment();
  if (global.seed) {
    ex.train_data.seed = ex.test_data.seed = mix_seed(*global.seed, 0);
    ex.init_seed = mix_seed(*global.seed, 1);
    ex.linear_training.seed = mix_seed(*global.seed, 2);
    ex.hidden_training.seed = mix_seed(*global.seed, 3);
  }
  ctx.manifest.seeds["data"] = ex.train_data.seed;
  ctx.manifest.seeds["init"] = ex.init_seed;
  ctx.manifest.seeds["linear_training"] = ex.linear_training.seed;
  ctx.manifest.seeds["hidden_training"] = ex.hidden_training.seed;

  const LabelGraph g = fixtures::object_taxonomy();
  const Dataset train_set = generate_synthetic(g, ex.train_data);
  const Dataset test_set = generate_synthetic(g, ex.test_data);
  ctx.write(dir / "graph.json", serialize_graph(g));
  ctx.write(dir / "train.bin", serialize_dataset_binary(train_set));
  ctx.write(dir / "test.bin", serialize_dataset_binary(test_set));

  for (Architecture arch : {Architecture::Linear, Architecture::OneHiddenLayer}) {
    const TrainConfig& tc = arch == Architecture::Linear ? ex.linear_training : ex.hidden_training;
    const ClassifierParams init =
        init_params(arch, train_set.dim(), ex.hidden_dim, train_set.num_labels(), ex.init_seed);
    const ClassifierParams params = train(init, train_set, tc).params;
    const AccuracyReport acc = accuracy(params, test_set);
    const std::string name(to_string(arch));
    std::cout << "== " << name << " (test exact match " << acc.subset_exact_match << ")\n";
    ctx.write(dir / name / "model.json", serialize_model(params));
    ordered_json s = run_one(g, params, test_set, dir / name);
    s["test_exact_match"] = acc.subset_exact_match;
    ctx.manifest.summary[name] = s;
  }
}

void write_report_lines(std::ostream& os, const LabelGraph& g, const ConsistencyReport& report) {
  for (const Violation& v : report.violations) {
    os << json{{"node", g.name(v.node)}, {"rule", to_string(v.rule)}}.dump() << "\n";
  }
}

void cmd_verify(const VerifyOptions& o, Context& ctx) {
  const LabelGraph g = load_source(o.source, ctx);
  const LabelState s = parse_state(g, o.state, ctx);
  const ConsistencyOptions opts{.upward_rule = !o.no_upward};
  const ConsistencyReport report =
      o.center.empty() ? check_global(g, s, opts) : check_local(g, s, g.id_of(o.center), o.radius, opts);
  if (o.format == "jsonl") {
    write_report_lines(std::cout, g, report);
  } else {
    std::cout << (report.consistent() ? "consistent" : "inconsistent") << " ("
              << report.violations.size() << " violation" << (report.violations.size() == 1 ? "" : "s")
              << (o.center.empty() ? ", global" : ", local around " + o.center) << ")\n";
    for (const Violation& v : report.violations) {
      std::cout << "  " << g.name(v.node) << ": " << to_string(v.rule) << "\n";
    }
  }
  if (!o.out.empty()) {
    std::ostringstream lines;
    write_report_lines(lines, g, report);
    ctx.write(o.out, lines.str());
    ctx.set_manifest_path(manifest_for_file(o.out));
  }
  ctx.manifest.summary = {{"consistent", report.consistent()}, {"violations", report.violations.size()}};
}

void cmd_expand(const ExpandOptions& o, Context& ctx) {
  const LabelGraph g = load_source(o.source, ctx);
  const LabelState s = parse_state(g, o.state, ctx);
  if (o.targets.empty() && o.turn_on.empty()) throw UsageError("expand needs --target or --turn-on");
  const TargetSet omega = parse_targets(g, o.targets, o.turn_on);
  const ExpandedTargetSet gamma = expand(g, s, omega);

  ordered_json entries = ordered_json::array();
  std::vector<LabelId> order;
  for (const ExpandedEntry& e : gamma.entries) {
    entries.push_back({{"label", g.name(e.node)},
                       {"direction", to_string(e.direction)},
                       {"provenance", to_string(e.provenance)}});
    order.push_back(e.node);
  }
  const ordered_json doc = {{"input_consistent", gamma.input_consistent}, {"gamma", entries}};
  if (o.format == "json") {
    std::cout << doc.dump() << "\n";
  } else {
    std::cout << "gamma = {" << join_names(g, order) << "}\n";
    for (const ExpandedEntry& e : gamma.entries) {
      std::cout << "  " << g.name(e.node) << " " << to_string(e.direction) << " " << to_string(e.provenance)
                << "\n";
    }
    if (!gamma.input_consistent) std::cout << "note: input state was not consistent\n";
  }
  if (!o.out.empty()) {
    ctx.write(o.out, doc.dump(2) + "\n");
    ctx.set_manifest_path(manifest_for_file(o.out));
  }
  ctx.manifest.summary = {{"gamma_size", gamma.entries.size()}};
}

void cmd_plot_data(const PlotOptions& o, Context& ctx) {
  const auto rows = parse_metrics_csv(read_text_file(ctx.input(o.csv)));
  emit(ctx, o.out, plot_data_json(rows) + "\n");
  ctx.manifest.summary = {{"rows", rows.size()}};
}

void cmd_oracle(const OracleOptions& o, Context& ctx) {
  const LabelGraph g = load_source(o.source, ctx);
  const LabelState s = parse_state(g, o.state, ctx);
  const TargetSet omega = parse_targets(g, o.targets, o.turn_on);
  oracle::OracleBudget budget;
  budget.max_nodes = o.max_nodes;
  const auto result = oracle::brute_force_min_flip(oracle::OracleGraph::from(g), oracle::to_ints(s), omega, budget);
  const ExpandedTargetSet gamma = expand(g, s, omega);
  std::vector<LabelId> expanded = gamma.nodes();
  std::vector<LabelId> minimum;
  for (std::size_t i : result.flip_set) minimum.push_back(label_id(i));
  std::cout << "minimum = {" << join_names(g, minimum) << "} (" << result.solution_count
            << " minimum solution" << (result.solution_count == 1 ? "" : "s") << ")\n"
            << "expand  = {" << join_names(g, expanded) << "}\n";
}

// ---------------------------------------------------------------- wiring

std::string env_name(const std::string& option) {
  std::string out = "GCATTACK_";
  for (char c : option) out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

bool skip_option(const CLI::Option* opt) {
  const std::string n = opt->get_single_name();
  return n == "help" || n == "config" || n == "manifest" || n.empty();
}

void attach_env(CLI::App* app) {
  for (CLI::Option* opt : app->get_options()) {
    if (skip_option(opt)) continue;
    opt->envname(env_name(opt->get_single_name()));
  }
}

// Every option that received a value (flag, config file or environment) as
// "--name=value" tokens, in declaration order.
void append_resolved(const CLI::App* app, std::vector<std::string>& argv, ordered_json& config) {
  for (const CLI::Option* opt : app->get_options()) {
    if (skip_option(opt)) continue;
    const std::string name = opt->get_single_name();
    if (opt->count() == 0) {
      const std::string def = opt->get_default_str();
      if (!def.empty()) config[name] = def;
      continue;
    }
    if (opt->get_expected_min() == 0) {
      argv.push_back("--" + name);
      config[name] = true;
      continue;
    }
    const auto& values = opt->results();
    for (const std::string& v : values) argv.push_back("--" + name + "=" + v);
    config[name] = values.size() == 1 ? ordered_json(values.front()) : ordered_json(values);
  }
}

int run(const std::vector<std::string>& args);

void unset_tool_env() {
  std::vector<std::string> names;
  for (char** e = environ; *e != nullptr; ++e) {
    const std::string entry(*e);
    if (entry.rfind("GCATTACK_", 0) == 0) names.push_back(entry.substr(0, entry.find('=')));
  }
  for (const std::string& n : names) unsetenv(n.c_str());
}

int cmd_replay(const std::string& manifest_path) {
  const RunManifest m = RunManifest::from_json(read_text_file(manifest_path));
  if (m.command == "replay") throw UsageError("cannot replay a replay manifest");
  if (!m.cwd.empty() && fs::is_directory(m.cwd)) fs::current_path(m.cwd);
  unset_tool_env();
  const int rc = run(m.argv);
  if (rc != kExitOk) return rc;
  const fs::path base = fs::path(manifest_path).parent_path();
  std::size_t mismatches = 0;
  for (const auto& out : m.outputs) {
    const fs::path p = (base.empty() ? fs::path(".") : base) / out.at("file").get<std::string>();
    if (!fs::exists(p) || file_hash(p) != out.at("fnv1a64").get<std::string>()) {
      std::cerr << "replay: " << p.string() << " differs from the manifest\n";
      ++mismatches;
    }
  }
  if (mismatches > 0) throw RuntimeFailure(std::to_string(mismatches) + " output(s) not reproduced");
  std::cout << "replay: " << m.outputs.size() << " output(s) reproduced byte-identically\n";
  return kExitOk;
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"gcattack: graph-consistent multi-label adversarial attacks"};
  app.name("gcattack");
  app.set_version_flag("--version", kToolVersion);
  app.set_config("--config", "", "TOML config file; sections are subcommand names");
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  GlobalOptions global;
  app.add_option("--seed", global.seed, "Master seed for every random choice");
  app.add_option("--jobs", global.jobs, "Worker threads (default: available cores)")->check(CLI::PositiveNumber);
  app.add_option("--kernels", global.kernels, "Kernel backend")->check(CLI::IsMember({"auto", "scalar"}));
  app.add_flag("--strict", global.strict, "Check input files against their run manifests");
  app.add_option("--manifest", global.manifest, "Run manifest path (default: next to the output)");

  GenGraphOptions gg;
  auto* gen_graph = app.add_subcommand("gen-graph", "Build a graph file from a graph, builtin or candidates");
  add_graph_source(gen_graph, gg.source);
  gen_graph->add_option("--candidates", gg.candidates, "Candidates JSON file")->check(CLI::ExistingFile);
  gen_graph->add_flag("--treeify", gg.treeify, "Keep one parent per label (max WUP similarity)");
  gen_graph->add_option("--out", gg.out, "Output graph JSON")->required();

  GenDataOptions gd;
  auto* gen_data = app.add_subcommand("gen-data", "Generate a synthetic multi-label dataset");
  add_graph_source(gen_data, gd.source);
  gen_data->add_option("--samples", gd.data.samples, "Number of samples");
  gen_data->add_option("--dim", gd.data.dim, "Feature dimension");
  gen_data->add_option("--leaf-prob", gd.data.leaf_probability, "Probability that a leaf is ON");
  gen_data->add_option("--proto-scale", gd.data.prototype_scale, "Std of leaf prototype entries");
  gen_data->add_option("--noise", gd.data.noise_std, "Feature noise std");
  gen_data->add_option("--stream", gd.data.stream, "Sample stream (shared prototypes, distinct samples)");
  gen_data->add_option("--out", gd.out, "Output dataset (.bin = binary, otherwise text)")->required();

  TrainOptions tr;
  auto* train_cmd = app.add_subcommand("train", "Train a classifier");
  add_graph_source(train_cmd, tr.source);
  train_cmd->add_option("--data", tr.data, "Training dataset")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--eval-data", tr.eval_data, "Held-out dataset for accuracy")->check(CLI::ExistingFile);
  train_cmd->add_option("--arch", tr.arch, "Architecture")->check(CLI::IsMember({"linear", "one_hidden_layer"}));
  train_cmd->add_option("--hidden", tr.hidden, "Hidden width (one_hidden_layer)");
  train_cmd->add_option("--epochs", tr.epochs, "Epochs (default per architecture)");
  train_cmd->add_option("--lr", tr.lr, "Learning rate (default per architecture)");
  train_cmd->add_option("--batch", tr.batch, "Mini-batch size");
  train_cmd->add_option("--out", tr.out, "Output model JSON")->required();

  AttackOptions at;
  auto* attack_cmd = app.add_subcommand("attack", "Attack one image");
  add_graph_source(attack_cmd, at.source);
  attack_cmd->add_option("--model", at.model, "Model JSON")->required()->check(CLI::ExistingFile);
  attack_cmd->add_option("--data", at.data, "Dataset")->required()->check(CLI::ExistingFile);
  attack_cmd->add_option("--image", at.image, "Image index");
  attack_cmd->add_option("--variant", at.variant, "Attack variant")
      ->check(CLI::IsMember({"MLA_alpha", "MLA_beta", "GMLA_alpha", "GMLA_beta"}));
  attack_cmd->add_option("--epsilon", at.epsilon, "Perturbation budget");
  attack_cmd->add_option("--norm", at.norm, "Budget norm")->check(CLI::IsMember({"linf", "l2"}));
  attack_cmd->add_option("--steps", at.steps, "PGD iterations");
  attack_cmd->add_option("--step-size", at.step_size, "Step size (default epsilon / 4)");
  attack_cmd->add_option("--box-low", at.box_low, "Lower feature bound");
  attack_cmd->add_option("--box-high", at.box_high, "Upper feature bound");
  attack_cmd->add_flag("--random-start", at.random_start, "Start from a random point in the ball");
  attack_cmd->add_option("--target", at.targets, "Labels to turn off (comma separated)")->delimiter(',');
  attack_cmd->add_option("--turn-on", at.turn_on, "Labels to turn on (comma separated)")->delimiter(',');
  attack_cmd->add_option("--k", at.k, "Random targets when none are named");
  attack_cmd->add_option("--labels", at.labels, "BCE reference labels")
      ->check(CLI::IsMember({"predicted", "truth"}));
  attack_cmd->add_option("--out", at.out, "Output JSON (default stdout)");

  SweepOptions sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "Attack every test image for each variant and epsilon");
  add_graph_source(sweep_cmd, sw.source);
  sweep_cmd->add_option("--model", sw.model, "Model JSON")->check(CLI::ExistingFile);
  sweep_cmd->add_option("--data", sw.data, "Test dataset")->check(CLI::ExistingFile);
  sweep_cmd->add_flag("--default", sw.use_default, "Run the default synthetic experiment (both models)");
  sweep_cmd->add_option("--variants", sw.variants, "Variants")
      ->delimiter(',')
      ->check(CLI::IsMember({"MLA_alpha", "MLA_beta", "GMLA_alpha", "GMLA_beta"}));
  sweep_cmd->add_option("--epsilons", sw.config.epsilons, "Budgets, strictly increasing")->delimiter(',');
  sweep_cmd->add_option("--k", sw.config.targets_per_image, "Targets per image");
  sweep_cmd->add_flag("--all-labels", sw.all_labels, "Draw targets from every label, not only original ones");
  sweep_cmd->add_option("--radius", sw.config.local_radius, "Local detector radius");
  sweep_cmd->add_flag("--no-upward", sw.no_upward, "Disable the NoOnParent rule");
  sweep_cmd->add_flag("--include-inconsistent", sw.config.include_inconsistent,
                      "Keep images whose clean prediction is already inconsistent");
  sweep_cmd->add_option("--steps", sw.config.steps, "PGD iterations");
  sweep_cmd->add_option("--step-size", sw.config.step_size, "Step size (default epsilon / 4)");
  sweep_cmd->add_option("--max-images", sw.config.max_images, "Use at most this many images (0 = all)");
  sweep_cmd->add_option("--out-dir", sw.out_dir, "Output directory")->required();

  VerifyOptions vf;
  auto* verify_cmd = app.add_subcommand("verify", "Check a label state against the graph rules");
  add_graph_source(verify_cmd, vf.source);
  add_state_options(verify_cmd, vf.state);
  verify_cmd->add_option("--center", vf.center, "Local check around this label (default: global)");
  verify_cmd->add_option("--radius", vf.radius, "Local radius in hops");
  verify_cmd->add_flag("--no-upward", vf.no_upward, "Disable the NoOnParent rule");
  verify_cmd->add_option("--format", vf.format, "Stdout format")->check(CLI::IsMember({"text", "jsonl"}));
  verify_cmd->add_option("--out", vf.out, "Write violations as JSON lines");

  ExpandOptions ex;
  auto* expand_cmd = app.add_subcommand("expand", "Expand targets into a consistent flip set");
  add_graph_source(expand_cmd, ex.source);
  add_state_options(expand_cmd, ex.state);
  expand_cmd->add_option("--target", ex.targets, "Labels to turn off (comma separated)")->delimiter(',');
  expand_cmd->add_option("--turn-on", ex.turn_on, "Labels to turn on (comma separated)")->delimiter(',');
  expand_cmd->add_option("--format", ex.format, "Stdout format")->check(CLI::IsMember({"text", "json"}));
  expand_cmd->add_option("--out", ex.out, "Write the expanded set as JSON");

  PlotOptions pd;
  auto* plot_cmd = app.add_subcommand("plot-data", "Reshape a metrics CSV into per-variant series");
  plot_cmd->add_option("--csv", pd.csv, "metrics.csv")->required()->check(CLI::ExistingFile);
  plot_cmd->add_option("--out", pd.out, "Output JSON (default stdout)");

  OracleOptions orc;
  auto* oracle_cmd = app.add_subcommand("oracle", "Brute-force minimum flip set");
  oracle_cmd->group("");
  add_graph_source(oracle_cmd, orc.source);
  add_state_options(oracle_cmd, orc.state);
  oracle_cmd->add_option("--target", orc.targets, "Labels to turn off")->delimiter(',');
  oracle_cmd->add_option("--turn-on", orc.turn_on, "Labels to turn on")->delimiter(',');
  oracle_cmd->add_option("--max-nodes", orc.max_nodes, "Refuse larger graphs");

  std::string replay_manifest;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run a command from its run manifest and compare outputs");
  replay_cmd->add_option("--manifest", replay_manifest, "Run manifest")->required()->check(CLI::ExistingFile);

  attach_env(&app);
  for (CLI::App* sub : app.get_subcommands({})) {
    if (sub != replay_cmd) attach_env(sub);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  if (sub == replay_cmd) return cmd_replay(replay_manifest);

  kernels::force_scalar(global.kernels == "scalar");
  Context ctx(global, sub->get_name());
  std::vector<std::string> resolved;
  ordered_json config = ordered_json::object();
  append_resolved(&app, resolved, config);
  resolved.push_back(sub->get_name());
  ordered_json sub_config = ordered_json::object();
  append_resolved(sub, resolved, sub_config);
  config[sub->get_name()] = sub_config;
  ctx.manifest.argv = resolved;
  ctx.manifest.config = config;
  if (!global.manifest.empty()) ctx.force_manifest_path(global.manifest);

  if (sub == gen_graph) {
    cmd_gen_graph(gg, ctx);
  } else if (sub == gen_data) {
    cmd_gen_data(gd, global, ctx);
  } else if (sub == train_cmd) {
    cmd_train(tr, global, ctx);
  } else if (sub == attack_cmd) {
    cmd_attack(at, global, ctx);
  } else if (sub == sweep_cmd) {
    cmd_sweep(sw, global, ctx);
  } else if (sub == verify_cmd) {
    cmd_verify(vf, ctx);
  } else if (sub == expand_cmd) {
    cmd_expand(ex, ctx);
  } else if (sub == plot_cmd) {
    cmd_plot_data(pd, ctx);
  } else if (sub == oracle_cmd) {
    cmd_oracle(orc, ctx);
  }
  ctx.finish();
  return kExitOk;
}

}  // namespace
}  // namespace gcattack::cli

int main(int argc, char** argv) {
  using namespace gcattack::cli;
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return run(args);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const RuntimeFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const gcattack::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
