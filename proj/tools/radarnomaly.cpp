#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "radarnomaly/attack_forge.hpp"
#include "radarnomaly/benign_synth.hpp"
#include "radarnomaly/eval_bench.hpp"
#include "radarnomaly/model_file.hpp"
#include "radarnomaly/monitor.hpp"

namespace fs = std::filesystem;
using namespace radarnomaly;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_logger_st("radarnomaly");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("RADARNOMALY_LOG")) {
    const auto level = spdlog::level::from_str(env);
    if (level == spdlog::level::off && std::string(env) != "off") {
      spdlog::warn("RADARNOMALY_LOG='{}' is not a log level; keeping info", env);
    } else {
      spdlog::set_level(level);
    }
  }
}

FeatureSchema schema_or_default(const std::string& path) { return path.empty() ? default_schema() : load_schema(path); }

SessionStore corpus_or_default(const std::vector<std::string>& paths, const FeatureSchema& schema, std::uint64_t seed) {
  if (!paths.empty()) return load_corpus(paths, schema);
  spdlog::info("no --corpus given; using the default synthetic corpus for seed {}", seed);
  return default_corpus(seed);
}

struct TrainFlags {
  std::size_t max_epochs = TrainConfig{}.max_epochs;
  std::size_t patience = TrainConfig{}.patience;
  std::size_t batch_size = TrainConfig{}.batch_size;
  double learning_rate = TrainConfig{}.adam.learning_rate;
  std::size_t k = TimingConfig{}.window;

  void add(CLI::App* cmd) {
    cmd->add_option("--max-epochs", max_epochs, "Epoch limit")->capture_default_str();
    cmd->add_option("--patience", patience, "Early-stopping patience in epochs")->capture_default_str();
    cmd->add_option("--batch-size", batch_size, "Mini-batch size")->capture_default_str();
    cmd->add_option("--learning-rate", learning_rate, "Adam learning rate")->capture_default_str();
    cmd->add_option("--k", k, "Timing window length K")->capture_default_str();
  }

  PipelineTrainConfig config() const {
    PipelineTrainConfig c;
    c.train.max_epochs = max_epochs;
    c.train.patience = patience;
    c.train.batch_size = batch_size;
    c.train.adam.learning_rate = learning_rate;
    c.timing.window = k;
    return c;
  }
};

void log_epochs(PipelineTrainConfig& c) {
  c.train.on_epoch = [](std::size_t epoch, double loss) { spdlog::debug("epoch {} val_loss {:.6g}", epoch, loss); };
}

int cmd_gen(const std::string& config_path, std::uint64_t seed, bool seed_given, const std::string& out) {
  SynthConfig config = config_path.empty() ? default_corpus_config(seed) : load_synth_config(config_path);
  if (seed_given) config.seed = seed;
  const SessionStore corpus = generate_corpus(config);
  ensure_directory(out);
  for (const auto& [id, tracks] : corpus.sessions) {
    std::vector<PlotRecord> plots;
    for (const auto& t : tracks) plots.insert(plots.end(), t.plots.begin(), t.plots.end());
    std::stable_sort(plots.begin(), plots.end(),
                     [](const PlotRecord& a, const PlotRecord& b) { return a.update_time < b.update_time; });
    const auto path = (fs::path(out) / (id + ".ndjson")).string();
    write_plot_file(path, plots);
    spdlog::info("{}: {} tracks, {} plots", path, tracks.size(), plots.size());
  }
  write_text(fs::path(out) / "schema.json", schema_to_json(config.schema).dump(2) + "\n");
  return 0;
}

int cmd_train(const std::vector<std::string>& corpus_paths, const std::string& schema_path, const std::string& model_path,
              std::uint64_t seed, const TrainFlags& flags, const std::string& only) {
  const FeatureSchema schema = schema_or_default(schema_path);
  const SessionStore corpus = corpus_or_default(corpus_paths, schema, seed);
  PipelineTrainConfig config = flags.config();
  config.with_field = only.empty() || only == "field";
  config.with_timing = only.empty() || only == "timing";
  log_epochs(config);
  const auto tracks = corpus.all_tracks();
  spdlog::info("training on {} tracks", tracks.size());
  const ModelBundle bundle = train_pipeline(tracks, schema, config, seed);
  if (bundle.field) {
    const auto& s = bundle.field->summary;
    spdlog::info("field: {} epochs (best {}), val loss {:.6g} -> {:.6g}, plot thr {:.6g}, track thr {:.6g}",
                 s.epochs_run, s.best_epoch, s.initial_val_loss, s.best_val_loss, bundle.field->plot_threshold,
                 bundle.field->track_threshold);
  }
  if (bundle.timing) {
    const auto& s = bundle.timing->summary;
    spdlog::info("timing: {} epochs (best {}), val loss {:.6g} -> {:.6g}, thr {:.6g}", s.epochs_run, s.best_epoch,
                 s.initial_val_loss, s.best_val_loss, bundle.timing->threshold);
  }
  save_model(model_path, bundle);
  spdlog::info("model written to {}", model_path);
  return 0;
}

std::string attack_name(const std::string& kind, const std::string& feature) {
  if (kind == "drop") return kDropAttack;
  if (kind == "manipulate") {
    if (feature.empty()) throw Error(ErrorKind::invalid_config, "manipulate needs --feature");
    return manipulation_attack(feature);
  }
  return kind;
}

int cmd_attack(const std::vector<std::string>& corpus_paths, const std::string& schema_path, const std::string& kind,
               const std::string& feature, std::size_t c, std::size_t k, std::uint64_t seed, const std::string& out) {
  const FeatureSchema schema = schema_or_default(schema_path);
  const SessionStore corpus = corpus_or_default(corpus_paths, schema, seed);
  const AttackSpec spec = AttackSpec::parse(attack_name(kind, feature), c, k);
  const LabeledTestSet set = forge_attack(corpus, schema, spec, seed);
  write_labeled_set(out, set);
  spdlog::info("{}: {} plots ({} positive)", out, set.plots.size(), set.positives());
  return 0;
}

struct EvalFlags {
  std::string model;
  std::string testset;
  std::vector<std::string> setups;
  std::vector<std::string> attacks;
  std::vector<std::string> features;
  std::vector<std::string> sessions;
  double fraction = 0.9;
  std::size_t c = 10;
};

int cmd_eval(const EvalFlags& e, const std::vector<std::string>& corpus_paths, const std::string& schema_path,
             std::uint64_t seed, const TrainFlags& train_flags, const std::string& out) {
  const FeatureSchema schema = schema_or_default(schema_path);
  if (!e.testset.empty()) {
    if (e.model.empty()) throw Error(ErrorKind::invalid_config, "--testset needs --model");
    const ModelBundle bundle = load_model(e.model, schema_path.empty() ? nullptr : &schema);
    const LabeledTestSet set = read_labeled_set(e.testset, bundle.schema);
    const ExperimentResult r = evaluate_testset(bundle, set);
    OrderedJson echo{{"model", e.model}, {"testset", e.testset}};
    write_experiment(out, r, echo);
    spdlog::info("{}: auc={:.4f} ap={:.4f} tpr={:.4f} fpr={:.4f} (threshold {:.6g})", r.attack.name(),
                 r.primary.curve.auc, r.primary.curve.ap, r.primary.rates.tpr, r.primary.rates.fpr, r.primary.threshold);
    return 0;
  }

  const SessionStore corpus = corpus_or_default(corpus_paths, schema, seed);
  BatteryConfig battery;
  battery.setups.clear();
  for (const auto& s : e.setups.empty() ? std::vector<std::string>{"cross"} : e.setups) {
    battery.setups.push_back(setup_kind_from_string(s));
  }
  std::vector<std::string> attacks = e.attacks;
  for (const auto& f : e.features) attacks.push_back(manipulation_attack(f));
  if (attacks.empty()) {
    attacks = {manipulation_attack("objectType"), manipulation_attack("alertRaised"),
               manipulation_attack("objectCategory"), kDropAttack};
  }
  for (const auto& a : attacks) battery.attacks.push_back(AttackSpec::parse(a, e.c, train_flags.k));
  battery.sessions = e.sessions;
  battery.fraction = e.fraction;
  battery.training = train_flags.config();
  log_epochs(battery.training);

  OrderedJson echo;
  echo["seed"] = seed;
  echo["corpus"] = corpus_paths.empty() ? OrderedJson("default-synthetic") : OrderedJson(corpus_paths);
  echo["setups"] = OrderedJson::array();
  for (auto s : battery.setups) echo["setups"].push_back(to_string(s));
  echo["attacks"] = attacks;
  echo["fraction"] = battery.fraction;
  echo["c"] = e.c;
  echo["k"] = train_flags.k;
  echo["training"] = to_json(battery.training.train);

  const auto results = run_battery(corpus, schema, battery, seed, [](const std::string& m) { spdlog::info("{}", m); });
  write_reports(out, results, echo);
  for (const auto& row : summarize(results)) {
    spdlog::info("{} {} ({} experiments): auc={:.4f} ap={:.4f} tpr={:.4f} fpr={:.4f}", row.setup, row.attack,
                 row.experiments, row.auc, row.ap, row.tpr, row.fpr);
  }
  return 0;
}

int cmd_monitor(const std::string& model_path, const std::string& schema_path, const std::string& in_path,
                const std::string& out_path, Timestamp idle_horizon) {
  std::optional<FeatureSchema> schema;
  if (!schema_path.empty()) schema = load_schema(schema_path);
  const ModelBundle bundle = load_model(model_path, schema ? &*schema : nullptr);

  std::ifstream in_file;
  if (!in_path.empty() && in_path != "-") {
    in_file.open(in_path);
    if (!in_file) throw Error(ErrorKind::io, "cannot open " + in_path);
  }
  std::ofstream out_file;
  if (!out_path.empty() && out_path != "-") {
    out_file.open(out_path, std::ios::binary);
    if (!out_file) throw Error(ErrorKind::io, "cannot write " + out_path);
  }
  std::istream& in = in_file.is_open() ? static_cast<std::istream&>(in_file) : std::cin;
  std::ostream& out = out_file.is_open() ? static_cast<std::ostream&>(out_file) : std::cout;

  MonitorConfig config;
  config.idle_horizon = idle_horizon;
  const MonitorStats stats = run_monitor(in, out, bundle, config, [](const std::string& m) { spdlog::warn("{}", m); });
  spdlog::info("monitor: {}", to_json(stats).dump());
  return 0;
}

int cmd_bench(const std::string& model_path, const std::vector<std::string>& corpus_paths, std::uint64_t seed,
              std::size_t repeats, const std::string& out) {
  const ModelBundle bundle = load_model(model_path);
  const SessionStore corpus = corpus_or_default(corpus_paths, bundle.schema, seed);
  std::vector<PlotRecord> plots;
  for (const auto& [id, tracks] : corpus.sessions) {
    auto part = flatten_chronological(SessionStore{{{id, tracks}}});
    plots.insert(plots.end(), part.begin(), part.end());
  }
  const BenchReport report = bench_monitor(bundle, plots, repeats);
  OrderedJson j = to_json(report);
  j["nominal_load_plots_per_second"] = 400.0 / 60.0;
  j["load_multiple"] = report.plots_per_second / (400.0 / 60.0);
  const std::string text = j.dump(2) + "\n";
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_text(out, text);
  }
  spdlog::info("{:.0f} plots/s, mean {:.2f} us, p99 {:.2f} us", report.plots_per_second, report.mean_latency_us,
               report.p99_latency_us);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Anomaly detection for radar plot streams"};
  app.require_subcommand(1);

  std::vector<std::string> corpus;
  std::string schema_path;
  std::string model_path;
  std::string out;
  std::uint64_t seed = 42;
  TrainFlags train_flags;

  auto* gen = app.add_subcommand("gen", "Generate the synthetic benign corpus");
  std::string synth_config;
  gen->add_option("--config", synth_config, "Generator config (JSON)")->check(CLI::ExistingFile);
  auto* gen_seed = gen->add_option("--seed", seed, "Master seed")->capture_default_str();
  gen->add_option("--out", out, "Output directory")->required();

  auto* train = app.add_subcommand("train", "Train both detectors and write a model file");
  std::string only;
  train->add_option("--corpus", corpus, "Plot files or directories (default: synthetic corpus)");
  train->add_option("--schema", schema_path, "Feature schema (JSON)")->check(CLI::ExistingFile);
  train->add_option("--model,--out", model_path, "Model file to write")->required();
  train->add_option("--seed", seed, "Seed")->capture_default_str();
  train->add_option("--only", only, "Train a single detector")->check(CLI::IsMember({"field", "timing"}));
  train_flags.add(train);

  auto* attack = app.add_subcommand("attack", "Forge a labelled attack test set");
  std::string attack_kind = "drop";
  std::string feature;
  std::size_t c = 10;
  std::size_t k = 5;
  attack->add_option("kind", attack_kind, "drop | manipulate | manipulate:<feature>")->capture_default_str();
  attack->add_option("--corpus", corpus, "Plot files or directories (default: synthetic corpus)");
  attack->add_option("--schema", schema_path, "Feature schema (JSON)")->check(CLI::ExistingFile);
  attack->add_option("--feature", feature, "Categorical to manipulate");
  attack->add_option("--c", c, "Minimum dropped plots")->capture_default_str();
  attack->add_option("--k", k, "Timing window K")->capture_default_str();
  attack->add_option("--seed", seed, "Seed")->capture_default_str();
  attack->add_option("--out", out, "Labelled NDJSON to write")->required();

  auto* eval = app.add_subcommand("eval", "Evaluate a test set, or run the battery over a corpus");
  EvalFlags eval_flags;
  eval->add_option("--model", eval_flags.model, "Model file (single test set)")->check(CLI::ExistingFile);
  eval->add_option("--testset", eval_flags.testset, "Labelled NDJSON")->check(CLI::ExistingFile);
  eval->add_option("--corpus", corpus, "Plot files or directories (default: synthetic corpus)");
  eval->add_option("--schema", schema_path, "Feature schema (JSON)")->check(CLI::ExistingFile);
  eval->add_option("--setup", eval_flags.setups, "cross | chrono | transfer (repeatable)")
      ->check(CLI::IsMember({"cross", "chrono", "transfer"}));
  eval->add_option("--attack", eval_flags.attacks, "drop | manipulate:<feature> (repeatable)");
  eval->add_option("--feature", eval_flags.features, "Shorthand for --attack manipulate:<feature>");
  eval->add_option("--session", eval_flags.sessions, "Examined sessions (default: all)");
  eval->add_option("--fraction", eval_flags.fraction, "Split fraction")->capture_default_str();
  eval->add_option("--c", eval_flags.c, "Minimum dropped plots")->capture_default_str();
  eval->add_option("--seed", seed, "Seed")->capture_default_str();
  eval->add_option("--out", out, "Report directory")->required();
  train_flags.add(eval);

  auto* monitor = app.add_subcommand("monitor", "Score an NDJSON plot stream and emit alerts");
  std::string in_path;
  Timestamp idle_horizon = 0;
  monitor->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);
  monitor->add_option("--schema", schema_path, "Expected schema; the model must match it")->check(CLI::ExistingFile);
  monitor->add_option("--in", in_path, "Input stream (default stdin)");
  monitor->add_option("--out", out, "Alert stream (default stdout)");
  monitor->add_option("--idle-horizon", idle_horizon, "Forget tracks silent this long (0: never)")->capture_default_str();

  auto* bench = app.add_subcommand("bench", "Measure single-threaded monitor throughput");
  std::size_t repeats = 1;
  bench->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);
  bench->add_option("--corpus", corpus, "Plot files or directories (default: synthetic corpus)");
  bench->add_option("--seed", seed, "Seed of the default corpus")->capture_default_str();
  bench->add_option("--repeats", repeats, "Passes over the corpus")->capture_default_str();
  bench->add_option("--out", out, "Report file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_gen(synth_config, seed, gen_seed->count() > 0, out);
    if (train->parsed()) return cmd_train(corpus, schema_path, model_path, seed, train_flags, only);
    if (attack->parsed()) return cmd_attack(corpus, schema_path, attack_kind, feature, c, k, seed, out);
    if (eval->parsed()) return cmd_eval(eval_flags, corpus, schema_path, seed, train_flags, out);
    if (monitor->parsed()) return cmd_monitor(model_path, schema_path, in_path, out, idle_horizon);
    if (bench->parsed()) return cmd_bench(model_path, corpus, seed, repeats, out);
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
