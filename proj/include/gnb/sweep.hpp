#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gnb/dataset_io.hpp"
#include "gnb/error.hpp"
#include "gnb/features.hpp"
#include "gnb/kv.hpp"
#include "gnb/metrics.hpp"
#include "gnb/parallel.hpp"
#include "gnb/rng.hpp"
#include "gnb/train.hpp"

namespace gnb {

struct SearchSpace {
  double lr_min = 1e-4;
  double lr_max = 1e-1;
  double wd_min = 1e-6;
  double wd_max = 1e-2;
  double wd_zero_prob = 0.25;  // probability of sampling weight_decay = 0
  double dropout_min = 0.0;
  double dropout_max = 0.7;
  std::vector<std::size_t> hidden_dims{16, 64, 128, 256};
  std::vector<std::size_t> num_layers{1, 2, 3};
  std::size_t max_epochs = 2000;
  std::size_t patience = 100;
};

inline void validate(const SearchSpace& s) {
  if (!(s.lr_min > 0 && s.lr_min <= s.lr_max)) throw ParameterError("search space: need 0 < lr_min <= lr_max");
  if (!(s.wd_min > 0 && s.wd_min <= s.wd_max)) throw ParameterError("search space: need 0 < wd_min <= wd_max");
  if (!(s.wd_zero_prob >= 0 && s.wd_zero_prob <= 1)) throw ParameterError("search space: wd_zero_prob outside [0, 1]");
  if (!(s.dropout_min >= 0 && s.dropout_min <= s.dropout_max && s.dropout_max < 1)) {
    throw ParameterError("search space: need 0 <= dropout_min <= dropout_max < 1");
  }
  if (s.hidden_dims.empty() || s.num_layers.empty()) throw ParameterError("search space: empty categorical domain");
  for (auto v : s.hidden_dims) {
    if (v < 1) throw ParameterError("search space: hidden_dims must be >= 1");
  }
  for (auto v : s.num_layers) {
    if (v < 1) throw ParameterError("search space: num_layers must be >= 1");
  }
  if (s.patience > s.max_epochs) throw ParameterError("search space: patience exceeds max_epochs");
}

struct HyperConfig {
  double lr = 1e-2;
  double weight_decay = 0.0;
  double dropout = 0.0;
  std::size_t hidden_dim = 64;
  std::size_t num_layers = 2;
  friend bool operator==(const HyperConfig&, const HyperConfig&) = default;
};

inline std::string describe(const HyperConfig& c) {
  return "lr=" + format_double(c.lr) + " weight_decay=" + format_double(c.weight_decay) +
         " dropout=" + format_double(c.dropout) + " hidden_dim=" + std::to_string(c.hidden_dim) +
         " num_layers=" + std::to_string(c.num_layers);
}

inline double log_uniform(Rng& rng, double lo, double hi) {
  return std::exp(rng.uniform(std::log(lo), std::log(hi)));
}

// Draw order is fixed: lr, weight-decay gate, weight decay, dropout, hidden, layers.
inline HyperConfig sample_config(const SearchSpace& s, Rng& rng) {
  HyperConfig c;
  c.lr = log_uniform(rng, s.lr_min, s.lr_max);
  const bool zero_wd = rng.uniform() < s.wd_zero_prob;
  const double wd = log_uniform(rng, s.wd_min, s.wd_max);
  c.weight_decay = zero_wd ? 0.0 : wd;
  c.dropout = rng.uniform(s.dropout_min, s.dropout_max);
  c.hidden_dim = s.hidden_dims[rng.below(s.hidden_dims.size())];
  c.num_layers = s.num_layers[rng.below(s.num_layers.size())];
  return c;
}

struct LeaderboardEntry {
  std::size_t index = 0;
  HyperConfig config;
  std::optional<MetricSummary> val;  // empty when the run diverged
  std::string error;
};

struct SearchResult {
  HyperConfig best;
  std::size_t best_index = 0;
  std::vector<LeaderboardEntry> leaderboard;  // in sample order
};

namespace streams {
inline constexpr std::uint64_t kSweep = 0x53574550;
}

/// Random search: draws `budget` configs i.i.d. from the space, scores each
/// with objective(config) -> MetricSummary of the validation metric, and
/// returns the config with the highest mean (earliest index on ties).
/// Configs whose training diverges are kept on the leaderboard with an error.
template <typename Objective>
SearchResult random_search(const SearchSpace& space, std::size_t budget, Objective&& objective,
                           std::uint64_t seed, std::size_t jobs = 1) {
  validate(space);
  if (budget < 1) throw ParameterError("random_search: budget must be >= 1");
  Rng rng(seed, streams::kSweep);
  SearchResult r;
  r.leaderboard.resize(budget);
  for (std::size_t i = 0; i < budget; ++i) {
    r.leaderboard[i].index = i;
    r.leaderboard[i].config = sample_config(space, rng);
  }
  parallel_for(budget, jobs, [&](std::size_t i) {
    auto& e = r.leaderboard[i];
    try {
      e.val = objective(e.config);
    } catch (const NumericError& err) {
      e.error = err.what();
    }
  });
  std::optional<std::size_t> best;
  for (const auto& e : r.leaderboard) {
    if (!e.val) continue;
    if (!best || e.val->mean > r.leaderboard[*best].val->mean) best = e.index;
  }
  if (!best) {
    std::string why = r.leaderboard.front().error;
    throw SweepError("random_search: all " + std::to_string(budget) + " configs diverged (first: " + why + ")");
  }
  r.best_index = *best;
  r.best = r.leaderboard[*best].config;
  return r;
}

inline TrainConfig train_config(const HyperConfig& h, const SearchSpace& s, Task task, bool standardize) {
  TrainConfig tc;
  tc.task = task;
  tc.lr = h.lr;
  tc.weight_decay = h.weight_decay;
  tc.dropout = h.dropout;
  tc.max_epochs = s.max_epochs;
  tc.patience = s.patience;
  tc.standardize = standardize;
  return tc;
}

struct StudyOptions {
  Task task = Task::kLink;
  std::vector<ModelKind> models{ModelKind::kMlp, ModelKind::kGcn};
  std::size_t budget = 30;
  std::size_t search_trials = 1;  // trials per sampled config during search
  std::size_t trials = 5;         // trials at the selected config
  SearchSpace space;
  std::uint64_t seed = 0;         // base trial seed
  std::uint64_t sweep_seed = 0;
  std::uint64_t split_seed = 0;
  bool resplit = false;
  SplitRatios link_ratios;
  NodeSplitPolicy node_policy = PerClassPolicy{};
  bool standardize = false;
  std::size_t jobs = 1;
};

struct StudyPoint {
  std::string dataset;
  double x = 0.0;
  ModelKind model = ModelKind::kMlp;
  MetricSummary test;
  MetricSummary val;
  HyperConfig best;
};

struct StudyReport {
  std::string kind;  // "features", "gamma" or "train"
  std::vector<double> xs;
  std::vector<StudyPoint> points;  // one per (x, model), x-major
  std::vector<SearchResult> searches;
};

inline TrainJob make_job(const GraphDataset& ds, ModelKind kind, const HyperConfig& h, const StudyOptions& o) {
  TrainJob job;
  job.dataset = &ds;
  job.spec = ModelSpec{kind, h.hidden_dim, h.num_layers};
  job.config = train_config(h, o.space, o.task, o.standardize);
  job.link_ratios = o.link_ratios;
  job.node_policy = o.node_policy;
  job.split_seed = o.split_seed;
  job.resplit = o.resplit;
  return job;
}

/// Tunes one model on one dataset and evaluates the winner over o.trials seeds.
inline StudyPoint tune_and_evaluate(const GraphDataset& ds, ModelKind kind, double x, const StudyOptions& o,
                                    SearchResult* search_out = nullptr) {
  auto objective = [&](const HyperConfig& h) {
    return run_trials(make_job(ds, kind, h, o), o.search_trials, o.seed).val;
  };
  SearchResult search = random_search(o.space, o.budget, objective, o.sweep_seed, o.jobs);
  const auto final_trials = run_trials(make_job(ds, kind, search.best, o), o.trials, o.seed, o.jobs);
  StudyPoint p;
  p.dataset = ds.name;
  p.x = x;
  p.model = kind;
  p.test = final_trials.test;
  p.val = final_trials.val;
  p.best = search.best;
  if (search_out) *search_out = std::move(search);
  return p;
}

/// {increment * k : increment * k < cols} followed by cols.
inline std::vector<std::size_t> feature_grid(std::size_t cols, std::size_t increment) {
  if (increment < 1 || increment > cols) throw ParameterError("feature_study: increment must lie in 1..cols");
  std::vector<std::size_t> xs;
  for (std::size_t n = increment; n < cols; n += increment) xs.push_back(n);
  xs.push_back(cols);
  return xs;
}

inline StudyReport feature_study(const GraphDataset& ds, std::size_t increment, const StudyOptions& o) {
  StudyReport r;
  r.kind = "features";
  for (auto n : feature_grid(ds.features.cols(), increment)) {
    r.xs.push_back(static_cast<double>(n));
    const GraphDataset sliced = slice_features(ds, n);
    for (auto kind : o.models) {
      SearchResult s;
      r.points.push_back(tune_and_evaluate(sliced, kind, static_cast<double>(n), o, &s));
      r.searches.push_back(std::move(s));
    }
  }
  return r;
}

struct GammaFamilySeeds {
  std::uint64_t graph_seed = 0;
  std::uint64_t feature_seed = 0;
  std::uint64_t root_seed = 0;
};

inline StudyReport gamma_study(std::vector<double> gammas, const GammaFamilySeeds& seeds, const StudyOptions& o) {
  if (gammas.empty()) throw ParameterError("gamma_study: no gamma values");
  std::sort(gammas.begin(), gammas.end());
  if (std::adjacent_find(gammas.begin(), gammas.end()) != gammas.end()) {
    throw ParameterError("gamma_study: duplicate gamma values");
  }
  StudyReport r;
  r.kind = "gamma";
  for (double g : gammas) {
    r.xs.push_back(g);
    const GraphDataset ds = make_ws1000_gamma(seeds.graph_seed, seeds.feature_seed, seeds.root_seed, g);
    for (auto kind : o.models) {
      SearchResult s;
      r.points.push_back(tune_and_evaluate(ds, kind, g, o, &s));
      r.searches.push_back(std::move(s));
    }
  }
  return r;
}

// ---- plan files ------------------------------------------------------------

template <typename T>
T plan_number(const KeyValues& kv, const std::string& key, T fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  auto v = csv::parse_number<T>(it->second);
  if (!v) throw FormatError("plan: bad value for " + key + ": '" + it->second + "'");
  return *v;
}

template <typename T>
std::vector<T> plan_list(const KeyValues& kv, const std::string& key, std::vector<T> fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  std::vector<T> out;
  for (auto f : csv::split(it->second)) {
    auto v = csv::parse_number<T>(f);
    if (!v) throw FormatError("plan: bad list entry for " + key + ": '" + std::string(f) + "'");
    out.push_back(*v);
  }
  return out;
}

struct StudyPlan {
  std::string kind = "features";
  std::size_t increment = 100;
  std::vector<double> gammas{0.2, 0.4, 0.6, 0.8, 1.0};
  GammaFamilySeeds family;
  StudyOptions options;
};

/// Reads a `key=value` plan. Unknown keys are rejected.
inline StudyPlan parse_plan(const KeyValues& kv) {
  static const std::vector<std::string> known{
      "kind", "task", "models", "budget", "search_trials", "trials", "increment", "gammas", "lr_min", "lr_max",
      "wd_min", "wd_max", "wd_zero_prob", "dropout_min", "dropout_max", "hidden_dims", "num_layers",
      "max_epochs", "patience", "seed", "sweep_seed", "split_seed", "graph_seed", "feature_seed", "root_seed",
      "resplit", "standardize", "per_class", "val_nodes", "train_ratio", "val_ratio", "test_ratio", "node_policy"};
  for (const auto& [k, v] : kv) {
    if (std::find(known.begin(), known.end(), k) == known.end()) throw FormatError("plan: unknown key '" + k + "'");
  }
  auto flag = [&](const std::string& key, bool fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw FormatError("plan: bad boolean for " + key);
  };
  StudyPlan p;
  auto& o = p.options;
  if (kv.count("kind")) p.kind = kv.at("kind");
  if (p.kind != "features" && p.kind != "gamma") throw FormatError("plan: kind must be features or gamma");
  if (kv.count("task")) o.task = parse_task(kv.at("task"));
  if (kv.count("models")) {
    o.models.clear();
    for (auto m : csv::split(kv.at("models"))) o.models.push_back(parse_model_kind(std::string(csv::trim(m))));
  } else if (p.kind == "gamma") {
    o.models = {ModelKind::kMlp};
  }
  o.budget = plan_number<std::size_t>(kv, "budget", o.budget);
  o.search_trials = plan_number<std::size_t>(kv, "search_trials", o.search_trials);
  o.trials = plan_number<std::size_t>(kv, "trials", o.trials);
  p.increment = plan_number<std::size_t>(kv, "increment", p.increment);
  p.gammas = plan_list<double>(kv, "gammas", p.gammas);
  auto& s = o.space;
  s.lr_min = plan_number<double>(kv, "lr_min", s.lr_min);
  s.lr_max = plan_number<double>(kv, "lr_max", s.lr_max);
  s.wd_min = plan_number<double>(kv, "wd_min", s.wd_min);
  s.wd_max = plan_number<double>(kv, "wd_max", s.wd_max);
  s.wd_zero_prob = plan_number<double>(kv, "wd_zero_prob", s.wd_zero_prob);
  s.dropout_min = plan_number<double>(kv, "dropout_min", s.dropout_min);
  s.dropout_max = plan_number<double>(kv, "dropout_max", s.dropout_max);
  s.hidden_dims = plan_list<std::size_t>(kv, "hidden_dims", s.hidden_dims);
  s.num_layers = plan_list<std::size_t>(kv, "num_layers", s.num_layers);
  s.max_epochs = plan_number<std::size_t>(kv, "max_epochs", s.max_epochs);
  s.patience = plan_number<std::size_t>(kv, "patience", s.patience);
  o.seed = plan_number<std::uint64_t>(kv, "seed", o.seed);
  o.sweep_seed = plan_number<std::uint64_t>(kv, "sweep_seed", o.sweep_seed);
  o.split_seed = plan_number<std::uint64_t>(kv, "split_seed", o.split_seed);
  p.family.graph_seed = plan_number<std::uint64_t>(kv, "graph_seed", p.family.graph_seed);
  p.family.feature_seed = plan_number<std::uint64_t>(kv, "feature_seed", p.family.feature_seed);
  p.family.root_seed = plan_number<std::uint64_t>(kv, "root_seed", p.family.root_seed);
  o.resplit = flag("resplit", o.resplit);
  o.standardize = flag("standardize", o.standardize);
  o.link_ratios.train = plan_number<double>(kv, "train_ratio", o.link_ratios.train);
  o.link_ratios.val = plan_number<double>(kv, "val_ratio", o.link_ratios.val);
  o.link_ratios.test = plan_number<double>(kv, "test_ratio", o.link_ratios.test);
  const std::string policy = kv.count("node_policy") ? kv.at("node_policy") : "per_class";
  if (policy == "per_class") {
    PerClassPolicy pc;
    pc.per_class = plan_number<std::size_t>(kv, "per_class", pc.per_class);
    pc.val = plan_number<std::size_t>(kv, "val_nodes", pc.val);
    o.node_policy = pc;
  } else if (policy == "ratio") {
    o.node_policy = o.link_ratios;
  } else {
    throw FormatError("plan: node_policy must be per_class or ratio");
  }
  validate(s);
  return p;
}

inline KeyValues plan_fields(const StudyPlan& p) {
  const auto& o = p.options;
  KeyValues kv;
  auto join = [](const auto& xs, auto fmt) {
    std::string out;
    for (const auto& x : xs) out += (out.empty() ? "" : ",") + fmt(x);
    return out;
  };
  kv["kind"] = p.kind;
  kv["task"] = to_string(o.task);
  kv["models"] = join(o.models, [](ModelKind k) { return to_string(k); });
  kv["budget"] = std::to_string(o.budget);
  kv["search_trials"] = std::to_string(o.search_trials);
  kv["trials"] = std::to_string(o.trials);
  if (p.kind == "features") kv["increment"] = std::to_string(p.increment);
  if (p.kind == "gamma") {
    kv["gammas"] = join(p.gammas, [](double g) { return format_double(g); });
    kv["graph_seed"] = std::to_string(p.family.graph_seed);
    kv["feature_seed"] = std::to_string(p.family.feature_seed);
    kv["root_seed"] = std::to_string(p.family.root_seed);
  }
  const auto& s = o.space;
  kv["lr_min"] = format_double(s.lr_min);
  kv["lr_max"] = format_double(s.lr_max);
  kv["wd_min"] = format_double(s.wd_min);
  kv["wd_max"] = format_double(s.wd_max);
  kv["wd_zero_prob"] = format_double(s.wd_zero_prob);
  kv["dropout_min"] = format_double(s.dropout_min);
  kv["dropout_max"] = format_double(s.dropout_max);
  kv["hidden_dims"] = join(s.hidden_dims, [](std::size_t v) { return std::to_string(v); });
  kv["num_layers"] = join(s.num_layers, [](std::size_t v) { return std::to_string(v); });
  kv["max_epochs"] = std::to_string(s.max_epochs);
  kv["patience"] = std::to_string(s.patience);
  kv["seed"] = std::to_string(o.seed);
  kv["sweep_seed"] = std::to_string(o.sweep_seed);
  kv["split_seed"] = std::to_string(o.split_seed);
  kv["resplit"] = o.resplit ? "true" : "false";
  kv["standardize"] = o.standardize ? "true" : "false";
  kv["train_ratio"] = format_double(o.link_ratios.train);
  kv["val_ratio"] = format_double(o.link_ratios.val);
  kv["test_ratio"] = format_double(o.link_ratios.test);
  if (const auto* pc = std::get_if<PerClassPolicy>(&o.node_policy)) {
    kv["node_policy"] = "per_class";
    kv["per_class"] = std::to_string(pc->per_class);
    kv["val_nodes"] = std::to_string(pc->val);
  } else {
    kv["node_policy"] = "ratio";
  }
  return kv;
}

// ---- StudyReport CSV ---------------------------------------------------------

inline constexpr const char* kStudyHeader =
    "dataset,x,model,n_trials,mean,std,val_mean,val_std,lr,weight_decay,dropout,hidden_dim,num_layers,values";

inline std::string study_csv(const StudyReport& r) {
  std::ostringstream out;
  out << kStudyHeader << '\n';
  for (const auto& p : r.points) {
    std::string values;
    for (double v : p.test.values) values += (values.empty() ? "" : ";") + format_double(v);
    out << p.dataset << ',' << format_double(p.x) << ',' << to_string(p.model) << ',' << p.test.n_trials << ','
        << format_double(p.test.mean) << ',' << format_double(p.test.std) << ',' << format_double(p.val.mean) << ','
        << format_double(p.val.std) << ',' << format_double(p.best.lr) << ',' << format_double(p.best.weight_decay)
        << ',' << format_double(p.best.dropout) << ',' << p.best.hidden_dim << ',' << p.best.num_layers << ','
        << values << '\n';
  }
  return out.str();
}

inline std::string leaderboard_csv(const StudyReport& r) {
  std::ostringstream out;
  out << "dataset,x,model,index,val_mean,val_std,lr,weight_decay,dropout,hidden_dim,num_layers,error\n";
  for (std::size_t i = 0; i < r.searches.size() && i < r.points.size(); ++i) {
    const auto& p = r.points[i];
    for (const auto& e : r.searches[i].leaderboard) {
      std::string err = e.error;
      std::replace(err.begin(), err.end(), ',', ';');
      out << p.dataset << ',' << format_double(p.x) << ',' << to_string(p.model) << ',' << e.index << ','
          << (e.val ? format_double(e.val->mean) : "") << ',' << (e.val ? format_double(e.val->std) : "") << ','
          << format_double(e.config.lr) << ',' << format_double(e.config.weight_decay) << ','
          << format_double(e.config.dropout) << ',' << e.config.hidden_dim << ',' << e.config.num_layers << ','
          << err << '\n';
    }
  }
  return out.str();
}

/// Parses a StudyReport CSV back into points (searches are not stored).
inline StudyReport parse_study_csv(std::istream& in, const std::string& origin) {
  StudyReport r;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw FormatError(origin + ": empty file");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kStudyHeader) throw FormatError(origin + ":1: unexpected header");
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno) + ": ";
    const auto f = csv::split(line);
    if (f.size() != 14) throw FormatError(where + "expected 14 fields, got " + std::to_string(f.size()));
    auto num = [&](std::size_t i) {
      auto v = csv::parse_number<double>(f[i]);
      if (!v) throw FormatError(where + "bad number in column " + std::to_string(i + 1));
      return *v;
    };
    auto count = [&](std::size_t i) {
      auto v = csv::parse_number<std::size_t>(f[i]);
      if (!v) throw FormatError(where + "bad integer in column " + std::to_string(i + 1));
      return *v;
    };
    StudyPoint p;
    p.dataset = std::string(f[0]);
    p.x = num(1);
    try {
      p.model = parse_model_kind(std::string(f[2]));
    } catch (const ParameterError& e) {
      throw FormatError(where + e.what());
    }
    p.test.n_trials = count(3);
    p.test.mean = num(4);
    p.test.std = num(5);
    p.val.mean = num(6);
    p.val.std = num(7);
    p.best.lr = num(8);
    p.best.weight_decay = num(9);
    p.best.dropout = num(10);
    p.best.hidden_dim = count(11);
    p.best.num_layers = count(12);
    if (!f[13].empty()) {
      for (auto v : csv::split(f[13], ';')) {
        auto d = csv::parse_number<double>(v);
        if (!d) throw FormatError(where + "bad trial value");
        p.test.values.push_back(*d);
      }
    }
    if (std::find(r.xs.begin(), r.xs.end(), p.x) == r.xs.end()) r.xs.push_back(p.x);
    r.points.push_back(std::move(p));
  }
  return r;
}

inline StudyReport read_study_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return parse_study_csv(in, path);
}

}  // namespace gnb
