// gnb: synthesize datasets, train and tune MLP/GCN baselines, run studies,
// and render reports.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <iostream>

#include "gnb/gnb.hpp"

namespace fs = std::filesystem;
using namespace gnb;

namespace {

// Seed default for every seed flag: $GNB_SEED, else 0.
std::uint64_t default_seed() {
  const char* env = std::getenv("GNB_SEED");
  if (!env || !*env) return 0;
  auto v = csv::parse_number<std::uint64_t>(env);
  if (!v) throw ParameterError(std::string("GNB_SEED must be a non-negative integer, got '") + env + "'");
  return *v;
}

void log(const std::string& msg) { std::cerr << "gnb: " << msg << '\n'; }

std::string join(const std::vector<std::string>& xs, const std::string& sep = ",") {
  std::string out;
  for (const auto& x : xs) out += (out.empty() ? "" : sep) + x;
  return out;
}

// Everything a command did, written to <out>/manifest.txt.
struct Manifest {
  std::string command;
  std::vector<std::string> argv;
  KeyValues config;
  std::vector<std::string> outputs;

  void write(const fs::path& path, double wall_seconds) const {
    KeyValues kv;
    kv["command"] = command;
    kv["version"] = kVersion;
    kv["argc"] = std::to_string(argv.size());
    for (std::size_t i = 0; i < argv.size(); ++i) kv["argv_" + std::to_string(i)] = argv[i];
    for (const auto& [k, v] : config) kv["config." + k] = v;
    kv["outputs"] = join(outputs);
    kv["wall_seconds"] = format_double(wall_seconds);
    write_key_values(path.string(), kv);
  }
};

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::vector<ModelKind> parse_models(const std::string& s) {
  std::vector<ModelKind> out;
  for (auto m : csv::split(s)) out.push_back(parse_model_kind(std::string(csv::trim(m))));
  if (out.empty()) throw ParameterError("no models given");
  return out;
}

std::string metric_name(Task t) { return t == Task::kLink ? "roc_auc" : "accuracy"; }

// ---- options shared by train / sweep ----------------------------------------

struct CommonOpts {
  std::string data;
  std::string model = "mlp";
  std::string task = "link";
  std::size_t trials = 5;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> split_seed;
  bool resplit = false;
  bool standardize = false;
  std::size_t max_epochs = 2000;
  std::size_t patience = 100;
  double train_ratio = 0.85, val_ratio = 0.05, test_ratio = 0.10;
  std::size_t per_class = 20, val_nodes = 30;
  std::size_t jobs = 1;
  std::string out;
};

void add_common(CLI::App* app, CommonOpts& o) {
  app->add_option("--data", o.data, "Dataset directory")->required();
  app->add_option("--model", o.model, "mlp or gcn")->capture_default_str();
  app->add_option("--task", o.task, "link or node")->capture_default_str();
  app->add_option("--trials", o.trials, "Trials at the final config")->capture_default_str();
  app->add_option("--seed", o.seed, "Base trial seed (default $GNB_SEED or 0)");
  app->add_option("--split-seed", o.split_seed, "Split seed (default $GNB_SEED or 0)");
  app->add_flag("--resplit", o.resplit, "Re-draw the split for every trial");
  app->add_flag("--standardize", o.standardize, "Z-score feature columns");
  app->add_option("--max-epochs", o.max_epochs)->capture_default_str();
  app->add_option("--patience", o.patience)->capture_default_str();
  app->add_option("--train-ratio", o.train_ratio)->capture_default_str();
  app->add_option("--val-ratio", o.val_ratio)->capture_default_str();
  app->add_option("--test-ratio", o.test_ratio)->capture_default_str();
  app->add_option("--per-class", o.per_class, "Node task: train nodes per class")->capture_default_str();
  app->add_option("--val-nodes", o.val_nodes, "Node task: validation nodes")->capture_default_str();
  app->add_option("--jobs", o.jobs, "Worker threads")->capture_default_str();
  app->add_option("--out", o.out, "Output directory")->required();
}

StudyOptions study_options(const CommonOpts& c) {
  StudyOptions o;
  o.task = parse_task(c.task);
  o.models = parse_models(c.model);
  o.trials = c.trials;
  o.seed = c.seed.value_or(default_seed());
  o.split_seed = c.split_seed.value_or(default_seed());
  o.resplit = c.resplit;
  o.standardize = c.standardize;
  o.space.max_epochs = c.max_epochs;
  o.space.patience = c.patience;
  o.link_ratios = {c.train_ratio, c.val_ratio, c.test_ratio};
  o.node_policy = PerClassPolicy{c.per_class, c.val_nodes};
  o.jobs = c.jobs;
  return o;
}

KeyValues common_fields(const StudyOptions& o) {
  return {{"task", to_string(o.task)},
          {"seed", std::to_string(o.seed)},
          {"split_seed", std::to_string(o.split_seed)},
          {"resplit", o.resplit ? "true" : "false"},
          {"standardize", o.standardize ? "true" : "false"},
          {"max_epochs", std::to_string(o.space.max_epochs)},
          {"patience", std::to_string(o.space.patience)},
          {"trials", std::to_string(o.trials)},
          {"jobs", std::to_string(o.jobs)}};
}

// ---- synth --------------------------------------------------------------------

struct SynthOpts {
  std::string family = "ws1000";
  double gamma = 0.0;
  std::optional<std::uint64_t> graph_seed, feature_seed, root_seed, label_seed;
  std::size_t classes = 4;
  std::string out;
};

void run_synth(const SynthOpts& o, Manifest& m) {
  const std::uint64_t gs = o.graph_seed.value_or(default_seed());
  const std::uint64_t fs_ = o.feature_seed.value_or(default_seed());
  GraphDataset ds;
  if (o.family == "ws1000") {
    ds = make_ws1000(gs, fs_);
  } else if (o.family == "ws1000-gamma") {
    ds = make_ws1000_gamma(gs, fs_, o.root_seed.value_or(default_seed()), o.gamma);
  } else if (o.family == "onehot-labels") {
    ds = make_onehot_label_dataset(gs, o.label_seed.value_or(default_seed()), o.classes);
  } else {
    throw ParameterError("unknown family '" + o.family + "' (expected ws1000, ws1000-gamma or onehot-labels)");
  }
  if (ds.provenance["component_reduced"] == "true") {
    log("WS sample is disconnected; kept the giant component (" + ds.provenance["component_nodes"] + " of " +
        ds.provenance["ws_n"] + " nodes)");
  }
  save_dataset(ds, o.out);
  m.config = ds.provenance;
  m.config["name"] = ds.name;
  m.outputs = {"edges.csv", "features.gft", "meta.txt"};
  if (ds.labels) m.outputs.push_back("labels.csv");
  log("wrote " + ds.name + " (" + std::to_string(ds.graph.num_nodes()) + " nodes, " +
      std::to_string(ds.graph.num_edges()) + " edges) to " + o.out);
}

// ---- import -------------------------------------------------------------------

struct ImportOpts {
  std::string edges, features, labels, name = "imported", out;
};

void run_import(const ImportOpts& o, Manifest& m) {
  ImportStats st;
  std::optional<fs::path> labels;
  if (!o.labels.empty()) labels = o.labels;
  GraphDataset ds = import_external(o.edges, o.features, labels, &st);
  ds.name = o.name;
  ds.provenance["source_edges"] = o.edges;
  ds.provenance["source_features"] = o.features;
  if (st.dropped_self_loops || st.dropped_duplicates) {
    log("dropped " + std::to_string(st.dropped_self_loops) + " self-loops and " +
        std::to_string(st.dropped_duplicates) + " duplicate edges");
  }
  save_dataset(ds, o.out);
  m.config = ds.provenance;
  m.outputs = {"edges.csv", "features.gft", "meta.txt"};
  if (ds.labels) m.outputs.push_back("labels.csv");
}

// ---- train --------------------------------------------------------------------

struct TrainOpts {
  CommonOpts common;
  double lr = 1e-2, weight_decay = 0.0, dropout = 0.0;
  std::size_t hidden_dim = 64, layers = 2, eval_every = 1;
};

StudyPoint summary_point(const std::string& dataset, double x, ModelKind kind, const TrialResults& r,
                         const HyperConfig& h) {
  StudyPoint p;
  p.dataset = dataset;
  p.x = x;
  p.model = kind;
  p.test = r.test;
  p.val = r.val;
  p.best = h;
  return p;
}

void add_summary(KeyValues& kv, const std::string& metric, const MetricSummary& test, const MetricSummary& val) {
  std::vector<std::string> values;
  for (double v : test.values) values.push_back(format_double(v));
  kv["metric"] = metric;
  kv["n_trials"] = std::to_string(test.n_trials);
  kv["test_mean"] = format_double(test.mean);
  kv["test_std"] = format_double(test.std);
  kv["test_values"] = join(values);
  kv["val_mean"] = format_double(val.mean);
  kv["val_std"] = format_double(val.std);
  kv["test_" + metric] = format_double(test.mean);
}

void run_train(const TrainOpts& t, Manifest& m) {
  const auto& c = t.common;
  StudyOptions o = study_options(c);
  if (o.models.size() != 1) throw ParameterError("train: give exactly one --model");
  const GraphDataset ds = load_dataset(c.data);
  HyperConfig h{t.lr, t.weight_decay, t.dropout, t.hidden_dim, t.layers};
  TrainJob job = make_job(ds, o.models[0], h, o);
  job.config.eval_every = t.eval_every;
  const auto res = run_trials(job, o.trials, o.seed, o.jobs);

  const fs::path out = c.out;
  KeyValues kv = res.reports.front().config;
  kv.erase("seed");
  kv["dataset"] = ds.name;
  kv["data"] = c.data;
  kv["base_seed"] = std::to_string(o.seed);
  add_summary(kv, metric_name(o.task), res.test, res.val);
  for (std::size_t i = 0; i < res.reports.size(); ++i) {
    const auto& r = res.reports[i];
    const std::string prefix = "trial_" + std::to_string(i) + "_";
    kv[prefix + "seed"] = std::to_string(o.seed + i);
    kv[prefix + "split_seed"] = r.config.at("split_seed");
    kv[prefix + "test_metric"] = format_double(r.test_metric);
    kv[prefix + "best_val_metric"] = format_double(r.best_val_metric);
    kv[prefix + "best_epoch"] = std::to_string(r.best_epoch);
    kv[prefix + "epochs_run"] = std::to_string(r.epochs_run);
    const std::string curve = "curves_trial" + std::to_string(i) + ".csv";
    write_text_file((out / curve).string(), curve_csv(r));
    const std::string ckpt = "checkpoint_trial" + std::to_string(i);
    save_checkpoint(r.best_model, out / ckpt);
    m.outputs.push_back(curve);
    m.outputs.push_back(ckpt);
  }
  write_key_values((out / "report.txt").string(), kv);
  StudyReport sr;
  sr.kind = "train";
  sr.xs = {0.0};
  sr.points = {summary_point(ds.name, 0.0, o.models[0], res, h)};
  write_text_file((out / "summary.csv").string(), study_csv(sr));
  m.outputs.insert(m.outputs.begin(), {"report.txt", "summary.csv"});
  m.config = kv;
  log(ds.name + " " + to_string(o.models[0]) + ": test " + metric_name(o.task) + " " + fixed(100 * res.test.mean, 1) +
      " ± " + fixed(100 * res.test.std, 1) + " over " + std::to_string(o.trials) + " trials");
}

// ---- sweep --------------------------------------------------------------------

struct SearchOpts {
  std::size_t budget = 30;
  std::size_t search_trials = 1;
  std::optional<std::uint64_t> sweep_seed;
  std::string plan;
};

void add_search(CLI::App* app, SearchOpts& s) {
  app->add_option("--budget", s.budget, "Sampled configurations per search")->capture_default_str();
  app->add_option("--search-trials", s.search_trials, "Trials per sampled configuration")->capture_default_str();
  app->add_option("--sweep-seed", s.sweep_seed, "Search seed (default $GNB_SEED or 0)");
}

// Plan keys fill the search space; explicit flags win.
void apply_search(StudyOptions& o, const SearchOpts& s, const KeyValues* plan) {
  if (plan) {
    const StudyPlan p = parse_plan(*plan);
    o.space = p.options.space;
  }
  o.budget = s.budget;
  o.search_trials = s.search_trials;
  o.sweep_seed = s.sweep_seed.value_or(default_seed());
  validate(o.space);
}

KeyValues space_fields(const StudyOptions& o) {
  StudyPlan p;
  p.options = o;
  KeyValues kv = plan_fields(p);
  kv.erase("kind");
  kv.erase("increment");
  return kv;
}

void write_study_outputs(const fs::path& out, const StudyReport& r, Manifest& m) {
  write_text_file((out / "summary.csv").string(), study_csv(r));
  write_text_file((out / "leaderboard.csv").string(), leaderboard_csv(r));
  write_text_file((out / "table.txt").string(), render_table(r.points, false));
  m.outputs = {"summary.csv", "leaderboard.csv", "table.txt"};
}

struct SweepOpts {
  CommonOpts common;
  SearchOpts search;
};

void run_sweep(const SweepOpts& s, Manifest& m) {
  StudyOptions o = study_options(s.common);
  std::optional<KeyValues> plan;
  if (!s.search.plan.empty()) plan = read_key_values(s.search.plan);
  apply_search(o, s.search, plan ? &*plan : nullptr);
  const GraphDataset ds = load_dataset(s.common.data);
  StudyReport r;
  r.kind = "sweep";
  r.xs = {0.0};
  for (auto kind : o.models) {
    SearchResult search;
    r.points.push_back(tune_and_evaluate(ds, kind, 0.0, o, &search));
    log(ds.name + " " + to_string(kind) + ": best " + describe(search.best) + " -> test " +
        fixed(100 * r.points.back().test.mean, 1) + " ± " + fixed(100 * r.points.back().test.std, 1));
    r.searches.push_back(std::move(search));
  }
  const fs::path out = s.common.out;
  write_study_outputs(out, r, m);
  KeyValues kv = space_fields(o);
  kv.merge(common_fields(o));
  kv["dataset"] = ds.name;
  kv["data"] = s.common.data;
  for (const auto& p : r.points) {
    const std::string k = to_string(p.model) + "_";
    kv[k + "best_config"] = describe(p.best);
    kv[k + "test_mean"] = format_double(p.test.mean);
    kv[k + "test_std"] = format_double(p.test.std);
    kv[k + "val_mean"] = format_double(p.val.mean);
  }
  kv["metric"] = metric_name(o.task);
  write_key_values((out / "report.txt").string(), kv);
  m.outputs.push_back("report.txt");
  m.config = kv;
}

// ---- study --------------------------------------------------------------------

struct StudyCmdOpts {
  std::string kind;
  std::string plan;
  std::string data;
  std::optional<std::size_t> increment, budget, search_trials, trials;
  std::optional<std::string> models, task, gammas;
  std::optional<std::uint64_t> seed, sweep_seed, split_seed, graph_seed, feature_seed, root_seed;
  std::optional<std::size_t> max_epochs, patience;
  std::size_t jobs = 1;
  std::string out;
};

void run_study(const StudyCmdOpts& s, Manifest& m) {
  KeyValues kv;
  if (!s.plan.empty()) kv = read_key_values(s.plan);
  // Unset seeds follow $GNB_SEED; flags override the plan file.
  for (const char* key : {"seed", "sweep_seed", "split_seed", "graph_seed", "feature_seed", "root_seed"}) {
    if (!kv.count(key)) kv[key] = std::to_string(default_seed());
  }
  auto set = [&](const std::string& key, const auto& v) {
    if (!v) return;
    if constexpr (std::is_same_v<std::decay_t<decltype(*v)>, std::string>) {
      kv[key] = *v;
    } else {
      kv[key] = std::to_string(*v);
    }
  };
  if (!s.kind.empty()) kv["kind"] = s.kind;
  set("increment", s.increment);
  set("budget", s.budget);
  set("search_trials", s.search_trials);
  set("trials", s.trials);
  set("models", s.models);
  set("task", s.task);
  set("gammas", s.gammas);
  set("seed", s.seed);
  set("sweep_seed", s.sweep_seed);
  set("split_seed", s.split_seed);
  set("graph_seed", s.graph_seed);
  set("feature_seed", s.feature_seed);
  set("root_seed", s.root_seed);
  set("max_epochs", s.max_epochs);
  set("patience", s.patience);
  StudyPlan plan = parse_plan(kv);
  plan.options.jobs = s.jobs;

  StudyReport r;
  if (plan.kind == "features") {
    if (s.data.empty()) throw ParameterError("study --kind features requires --data");
    const GraphDataset ds = load_dataset(s.data);
    log("feature study on " + ds.name + ": x = " + [&] {
      std::vector<std::string> xs;
      for (auto n : feature_grid(ds.features.cols(), plan.increment)) xs.push_back(std::to_string(n));
      return join(xs);
    }());
    r = feature_study(ds, plan.increment, plan.options);
  } else {
    r = gamma_study(plan.gammas, plan.family, plan.options);
  }
  const fs::path out = s.out;
  write_study_outputs(out, r, m);
  KeyValues resolved = plan_fields(plan);
  if (!s.data.empty()) resolved["data"] = s.data;
  write_key_values((out / "plan.txt").string(), resolved);
  m.outputs.push_back("plan.txt");
  resolved["jobs"] = std::to_string(s.jobs);
  m.config = resolved;
}

// ---- report -------------------------------------------------------------------

struct ReportOpts {
  std::vector<std::string> inputs;
  std::string plot;
  std::string table;
  std::string x_label = "x";
  std::string metric = "Test ROC AUC (%)";
  bool random_row = true;
};

void run_report(const ReportOpts& o, Manifest& m) {
  std::vector<StudyPoint> points;
  for (const auto& path : o.inputs) {
    auto r = read_study_csv(path);
    points.insert(points.end(), r.points.begin(), r.points.end());
  }
  const std::string table = render_table(points, o.random_row);
  std::cout << table;
  if (!o.table.empty()) {
    write_text_file(o.table, table);
    m.outputs.push_back(o.table);
  }
  if (!o.plot.empty()) {
    write_text_file(o.plot, render_svg(points, o.x_label, o.metric));
    m.outputs.push_back(o.plot);
  }
  m.config["inputs"] = join(o.inputs);
}

// ---- dispatch -----------------------------------------------------------------

int run(std::vector<std::string> args);

int run_replay(const std::string& manifest_path, const std::string& out) {
  const auto kv = read_key_values(manifest_path);
  auto argc = csv::parse_number<std::size_t>(kv.count("argc") ? kv.at("argc") : "");
  if (!argc) throw FormatError(manifest_path + ": missing argc");
  std::vector<std::string> args;
  for (std::size_t i = 0; i < *argc; ++i) {
    auto it = kv.find("argv_" + std::to_string(i));
    if (it == kv.end()) throw FormatError(manifest_path + ": missing argv_" + std::to_string(i));
    args.push_back(it->second);
  }
  if (args.empty() || args[0] == "replay") throw FormatError(manifest_path + ": nothing to replay");
  // Same command, fresh output directory, single-threaded.
  for (std::size_t i = 0; i + 1 < args.size(); ++i) {
    if (args[i] == "--out") args[i + 1] = out;
    if (args[i] == "--jobs") args[i + 1] = "1";
  }
  log("replaying '" + join(args, " ") + "'");
  return run(args);
}

int run(std::vector<std::string> args) {
  CLI::App app{"gnb: graph-need benchmark toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  SynthOpts synth;
  auto* c_synth = app.add_subcommand("synth", "Synthesize a dataset");
  c_synth->add_option("--family", synth.family, "ws1000, ws1000-gamma or onehot-labels")->capture_default_str();
  c_synth->add_option("--gamma", synth.gamma, "Parental dependence (ws1000-gamma)")->capture_default_str();
  c_synth->add_option("--graph-seed", synth.graph_seed);
  c_synth->add_option("--feature-seed", synth.feature_seed);
  c_synth->add_option("--root-seed", synth.root_seed);
  c_synth->add_option("--label-seed", synth.label_seed);
  c_synth->add_option("--classes", synth.classes, "Classes (onehot-labels)")->capture_default_str();
  c_synth->add_option("--out", synth.out)->required();

  ImportOpts imp;
  auto* c_import = app.add_subcommand("import", "Import an external edge list and feature matrix");
  c_import->add_option("--edges", imp.edges)->required();
  c_import->add_option("--features", imp.features, "CSV (optional id column) or .gft")->required();
  c_import->add_option("--labels", imp.labels);
  c_import->add_option("--name", imp.name)->capture_default_str();
  c_import->add_option("--out", imp.out)->required();

  TrainOpts train;
  auto* c_train = app.add_subcommand("train", "Train one model over several trials");
  add_common(c_train, train.common);
  c_train->add_option("--lr", train.lr)->capture_default_str();
  c_train->add_option("--weight-decay", train.weight_decay)->capture_default_str();
  c_train->add_option("--dropout", train.dropout)->capture_default_str();
  c_train->add_option("--hidden-dim", train.hidden_dim)->capture_default_str();
  c_train->add_option("--layers", train.layers, "Weight layers")->capture_default_str();
  c_train->add_option("--eval-every", train.eval_every)->capture_default_str();

  SweepOpts sweep;
  auto* c_sweep = app.add_subcommand("sweep", "Random hyperparameter search, then evaluate the best config");
  add_common(c_sweep, sweep.common);
  add_search(c_sweep, sweep.search);
  c_sweep->add_option("--plan", sweep.search.plan, "key=value file with search-space overrides");

  StudyCmdOpts study;
  auto* c_study = app.add_subcommand("study", "Feature-slicing or gamma study");
  c_study->add_option("--kind", study.kind, "features or gamma");
  c_study->add_option("--plan", study.plan, "key=value plan file");
  c_study->add_option("--data", study.data, "Dataset directory (features study)");
  c_study->add_option("--increment", study.increment);
  c_study->add_option("--budget", study.budget);
  c_study->add_option("--search-trials", study.search_trials);
  c_study->add_option("--trials", study.trials);
  c_study->add_option("--models", study.models, "Comma-separated: mlp,gcn");
  c_study->add_option("--task", study.task);
  c_study->add_option("--gammas", study.gammas, "Comma-separated gamma values");
  c_study->add_option("--seed", study.seed);
  c_study->add_option("--sweep-seed", study.sweep_seed);
  c_study->add_option("--split-seed", study.split_seed);
  c_study->add_option("--graph-seed", study.graph_seed);
  c_study->add_option("--feature-seed", study.feature_seed);
  c_study->add_option("--root-seed", study.root_seed);
  c_study->add_option("--max-epochs", study.max_epochs);
  c_study->add_option("--patience", study.patience);
  c_study->add_option("--jobs", study.jobs)->capture_default_str();
  c_study->add_option("--out", study.out)->required();

  ReportOpts report;
  auto* c_report = app.add_subcommand("report", "Render tables and plots from StudyReport CSVs");
  c_report->add_option("inputs", report.inputs, "StudyReport CSV files")->required();
  c_report->add_option("--plot", report.plot, "Write an SVG line plot");
  c_report->add_option("--table", report.table, "Also write the table to a file");
  c_report->add_option("--x-label", report.x_label)->capture_default_str();
  c_report->add_option("--metric", report.metric, "Y-axis label")->capture_default_str();
  c_report->add_flag("--random-row,!--no-random-row", report.random_row, "Include the Random row");

  std::string replay_manifest, replay_out;
  auto* c_replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  c_replay->add_option("manifest", replay_manifest)->required();
  c_replay->add_option("--out", replay_out)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (c_replay->parsed()) return run_replay(replay_manifest, replay_out);

  const auto start = std::chrono::steady_clock::now();
  Manifest m;
  m.argv = args;
  fs::path out;
  if (c_synth->parsed()) {
    m.command = "synth";
    out = synth.out;
    make_dir(out);
    run_synth(synth, m);
  } else if (c_import->parsed()) {
    m.command = "import";
    out = imp.out;
    make_dir(out);
    run_import(imp, m);
  } else if (c_train->parsed()) {
    m.command = "train";
    out = train.common.out;
    make_dir(out);
    run_train(train, m);
  } else if (c_sweep->parsed()) {
    m.command = "sweep";
    out = sweep.common.out;
    make_dir(out);
    run_sweep(sweep, m);
  } else if (c_study->parsed()) {
    m.command = "study";
    out = study.out;
    make_dir(out);
    run_study(study, m);
  } else if (c_report->parsed()) {
    m.command = "report";
    run_report(report, m);
    // Report writes no directory of its own; its manifest sits beside the
    // first file it produced.
    const std::string first = !report.plot.empty() ? report.plot : report.table;
    if (first.empty()) return 0;
    m.write(first + ".manifest.txt", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    return 0;
  }
  m.write(out / "manifest.txt", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return run(args);
  } catch (const Error& e) {
    std::cerr << "gnb: " << category(e) << " error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "gnb: internal error: " << e.what() << '\n';
    return 1;
  }
}
