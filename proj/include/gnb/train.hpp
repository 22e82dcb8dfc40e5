#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gnb/adam.hpp"
#include "gnb/autodiff.hpp"
#include "gnb/dataset_io.hpp"
#include "gnb/error.hpp"
#include "gnb/features.hpp"
#include "gnb/gft.hpp"
#include "gnb/kv.hpp"
#include "gnb/metrics.hpp"
#include "gnb/models.hpp"
#include "gnb/parallel.hpp"
#include "gnb/splits.hpp"

namespace gnb {

enum class Task { kLink, kNode };

inline std::string to_string(Task t) { return t == Task::kLink ? "link" : "node"; }
inline Task parse_task(const std::string& s) {
  if (s == "link") return Task::kLink;
  if (s == "node") return Task::kNode;
  throw ParameterError("unknown task '" + s + "' (expected link or node)");
}

/// Architecture choice shared by both encoders. num_layers counts weight
/// layers; hidden layers have width hidden_dim. For link prediction the
/// output embedding also has width hidden_dim; for node classification it
/// has one column per class.
struct ModelSpec {
  ModelKind kind = ModelKind::kMlp;
  std::size_t hidden_dim = 64;
  std::size_t num_layers = 2;
};

struct TrainConfig {
  Task task = Task::kLink;
  std::size_t max_epochs = 2000;
  std::size_t patience = 100;
  double lr = 1e-2;
  double weight_decay = 0.0;
  double dropout = 0.0;
  std::uint64_t seed = 0;
  std::size_t eval_every = 1;
  bool standardize = false;
};

inline void validate(const TrainConfig& c) {
  if (!(c.lr > 0.0)) throw ParameterError("train: lr must be positive");
  if (c.patience > c.max_epochs) throw ParameterError("train: patience must not exceed max_epochs");
  if (c.max_epochs < 1 || c.eval_every < 1) throw ParameterError("train: max_epochs and eval_every must be >= 1");
  if (!(c.weight_decay >= 0.0)) throw ParameterError("train: weight_decay must be >= 0");
  if (!(c.dropout >= 0.0 && c.dropout < 1.0)) throw ParameterError("train: dropout must lie in [0, 1)");
}

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;
  std::optional<double> val_metric;
};

struct TrainReport {
  double best_val_metric = -1.0;
  double test_metric = 0.0;  // at the best-validation epoch
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
  std::vector<EpochRecord> curve;
  KeyValues config;
  double wall_seconds = 0.0;
  Model best_model;  // parameters restored to the best-validation epoch
};

inline Model build_model(const ModelSpec& spec, std::size_t in_dim, std::size_t out_dim, double dropout,
                         std::uint64_t seed) {
  if (spec.num_layers < 1 || spec.hidden_dim < 1) throw ParameterError("model: layers and hidden_dim must be >= 1");
  Model m;
  m.kind = spec.kind;
  if (spec.kind == ModelKind::kMlp) {
    m.mlp.in_dim = in_dim;
    m.mlp.hidden_dims.assign(spec.num_layers - 1, spec.hidden_dim);
    m.mlp.out_dim = out_dim;
    m.mlp.dropout = dropout;
    m.params = init_params(m.mlp, seed);
  } else {
    m.gcn.in_dim = in_dim;
    m.gcn.hidden_dim = spec.hidden_dim;
    m.gcn.out_dim = out_dim;
    m.gcn.num_layers = spec.num_layers;
    m.gcn.dropout = dropout;
    m.params = init_params(m.gcn, seed);
  }
  return m;
}

// Column-wise z-scoring; constant columns are centred only.
inline Matrix standardize_columns(const Matrix& x) {
  Matrix out = x;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double mean = x.col(j).mean();
    out.col(j).array() -= mean;
    const double var = out.col(j).squaredNorm() / static_cast<double>(std::max<Eigen::Index>(x.rows(), 1));
    if (var > 0) out.col(j) /= std::sqrt(var);
  }
  return out;
}

inline KeyValues echo(const ModelSpec& spec, const TrainConfig& c) {
  return {{"model", to_string(spec.kind)},
          {"hidden_dim", std::to_string(spec.hidden_dim)},
          {"num_layers", std::to_string(spec.num_layers)},
          {"task", to_string(c.task)},
          {"max_epochs", std::to_string(c.max_epochs)},
          {"patience", std::to_string(c.patience)},
          {"lr", format_double(c.lr)},
          {"weight_decay", format_double(c.weight_decay)},
          {"dropout", format_double(c.dropout)},
          {"seed", std::to_string(c.seed)},
          {"eval_every", std::to_string(c.eval_every)},
          {"standardize", c.standardize ? "true" : "false"}};
}

namespace streams {
inline constexpr std::uint64_t kDropout = 0x44524f50;
inline constexpr std::uint64_t kTrainNeg = 0x544e4547;
}  // namespace streams

/// Scores val or test pairs (positives first, then negatives) with a model.
inline double evaluate_link(Model& model, const Matrix& x, const NormAdj* adj, std::span<const Edge> pos,
                            std::span<const Edge> neg) {
  const Matrix z = model.embed(x, adj);
  if (!z.allFinite()) throw NumericError("model produced non-finite embeddings");
  std::vector<double> scores = link_logits(z, pos);
  const auto ns = link_logits(z, neg);
  scores.insert(scores.end(), ns.begin(), ns.end());
  std::vector<double> labels(pos.size(), 1.0);
  labels.resize(pos.size() + neg.size(), 0.0);
  return roc_auc(scores, labels);
}

inline std::vector<std::uint32_t> predict_classes(const Matrix& logits, std::span<const NodeId> ids) {
  std::vector<std::uint32_t> out;
  out.reserve(ids.size());
  for (NodeId i : ids) {
    Eigen::Index arg = 0;
    logits.row(i).maxCoeff(&arg);
    out.push_back(static_cast<std::uint32_t>(arg));
  }
  return out;
}

inline double evaluate_node(Model& model, const Matrix& x, const NormAdj* adj, const Labels& labels,
                            std::span<const NodeId> ids) {
  const Matrix logits = model.embed(x, adj);
  if (!logits.allFinite()) throw NumericError("model produced non-finite outputs");
  const auto pred = predict_classes(logits, ids);
  std::vector<std::uint32_t> truth;
  truth.reserve(ids.size());
  for (NodeId i : ids) truth.push_back(labels[i]);
  return accuracy<std::uint32_t>(pred, truth);
}

namespace detail {

inline std::vector<Edge> sample_train_negatives(const Graph& g, std::size_t count, Rng& rng) {
  std::vector<Edge> out;
  out.reserve(count);
  const std::size_t n = g.num_nodes();
  std::size_t attempts = 0;
  while (out.size() < count) {
    if (++attempts > 100 * count) throw SamplingError("train negatives: graph too dense");
    const auto a = static_cast<NodeId>(rng.below(n));
    const auto b = static_cast<NodeId>(rng.below(n));
    if (a == b || g.has_edge(a, b)) continue;
    out.push_back({a, b});
  }
  return out;
}

// Shared early-stopping loop. step(epoch) trains one epoch and returns the
// loss; validate() returns the validation metric of the current parameters.
template <typename Step, typename Validate>
void fit(Model& model, const TrainConfig& tc, TrainReport& report, Step&& step, Validate&& validate_fn) {
  Params best = model.params;
  bool have_best = false;
  for (std::size_t epoch = 1; epoch <= tc.max_epochs; ++epoch) {
    const double loss = step();
    if (!std::isfinite(loss)) {
      throw NumericError("training diverged: non-finite loss at epoch " + std::to_string(epoch) +
                         " (lr=" + format_double(tc.lr) + ")");
    }
    EpochRecord rec{epoch, loss, std::nullopt};
    report.epochs_run = epoch;
    if (epoch % tc.eval_every == 0 || epoch == tc.max_epochs) {
      double v = 0.0;
      try {
        v = validate_fn();
      } catch (const NumericError& e) {
        throw NumericError(std::string("training diverged: ") + e.what() + " at epoch " + std::to_string(epoch) +
                           " (lr=" + format_double(tc.lr) + ")");
      }
      rec.val_metric = v;
      if (!have_best || v > report.best_val_metric) {
        report.best_val_metric = v;
        report.best_epoch = epoch;
        best = model.params;
        have_best = true;
      }
    }
    report.curve.push_back(rec);
    if (have_best && epoch - report.best_epoch >= tc.patience) break;
  }
  model.params = std::move(best);
  for (auto& p : model.params) p.zero_grad();
}

}  // namespace detail

/// Full-batch link prediction. Each epoch draws fresh uniform negatives
/// (1:1 with train positives); the GCN propagates over the message graph
/// only; validation ROC AUC drives early stopping.
inline TrainReport train_link(const ModelSpec& spec, const GraphDataset& ds, const LinkSplit& split,
                              const TrainConfig& tc) {
  validate(tc);
  if (split.message_graph.num_nodes() != ds.graph.num_nodes()) {
    throw ParameterError("train_link: split does not match dataset");
  }
  const auto start = std::chrono::steady_clock::now();
  const Matrix x = tc.standardize ? standardize_columns(ds.features.data) : ds.features.data;
  std::optional<NormAdj> adj;
  if (spec.kind == ModelKind::kGcn) adj = normalize_adjacency(split.message_graph, true);
  const NormAdj* adj_ptr = adj ? &*adj : nullptr;

  TrainReport report;
  report.config = echo(spec, tc);
  report.best_model = build_model(spec, ds.features.cols(), spec.hidden_dim, tc.dropout, tc.seed);
  Model& model = report.best_model;
  AdamState adam;
  adam.lr = tc.lr;
  adam.weight_decay = tc.weight_decay;
  Rng drop_rng(tc.seed, streams::kDropout);
  Rng neg_rng(tc.seed, streams::kTrainNeg);

  const std::size_t npos = split.train_pos.size();
  std::vector<Edge> pairs(split.train_pos);
  std::vector<double> labels(npos, 1.0);
  labels.resize(2 * npos, 0.0);
  pairs.resize(2 * npos);

  auto step = [&]() {
    const auto negs = detail::sample_train_negatives(split.message_graph, npos, neg_rng);
    std::copy(negs.begin(), negs.end(), pairs.begin() + static_cast<std::ptrdiff_t>(npos));
    Tape tape;
    Var z = model.forward(tape, tape.constant(x), adj_ptr, true, drop_rng);
    Var loss = bce_with_logits(pair_dot(z, pairs), labels);
    const double value = loss.value()(0, 0);
    if (!std::isfinite(value)) return value;
    backward(loss);
    adam_step(model.params, adam);
    for (auto& p : model.params) p.zero_grad();
    return value;
  };
  auto val = [&]() { return evaluate_link(model, x, adj_ptr, split.val_pos, split.val_neg); };
  detail::fit(model, tc, report, step, val);
  report.test_metric = evaluate_link(model, x, adj_ptr, split.test_pos, split.test_neg);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

/// Full-batch node classification: cross-entropy on train ids, early
/// stopping on validation accuracy.
inline TrainReport train_node(const ModelSpec& spec, const GraphDataset& ds, const NodeSplit& split,
                              const TrainConfig& tc) {
  validate(tc);
  if (!ds.labels) throw ParameterError("train_node: dataset has no labels");
  const auto start = std::chrono::steady_clock::now();
  const Matrix x = tc.standardize ? standardize_columns(ds.features.data) : ds.features.data;
  std::optional<NormAdj> adj;
  if (spec.kind == ModelKind::kGcn) adj = normalize_adjacency(ds.graph, true);
  const NormAdj* adj_ptr = adj ? &*adj : nullptr;
  const Labels& labels = *ds.labels;

  TrainReport report;
  report.config = echo(spec, tc);
  report.best_model = build_model(spec, ds.features.cols(), std::max<std::size_t>(ds.num_classes(), 1),
                                  tc.dropout, tc.seed);
  Model& model = report.best_model;
  AdamState adam;
  adam.lr = tc.lr;
  adam.weight_decay = tc.weight_decay;
  Rng drop_rng(tc.seed, streams::kDropout);

  std::vector<std::uint32_t> train_labels;
  for (NodeId i : split.train_ids) train_labels.push_back(labels[i]);

  auto step = [&]() {
    Tape tape;
    Var out = model.forward(tape, tape.constant(x), adj_ptr, true, drop_rng);
    Var loss = softmax_cross_entropy(gather_rows(out, split.train_ids), train_labels);
    const double value = loss.value()(0, 0);
    if (!std::isfinite(value)) return value;
    backward(loss);
    adam_step(model.params, adam);
    for (auto& p : model.params) p.zero_grad();
    return value;
  };
  auto val = [&]() { return evaluate_node(model, x, adj_ptr, labels, split.val_ids); };
  detail::fit(model, tc, report, step, val);
  report.test_metric = evaluate_node(model, x, adj_ptr, labels, split.test_ids);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

struct TrialResults {
  std::vector<TrainReport> reports;
  MetricSummary test;
  MetricSummary val;
};

/// Runs job(seed) for seeds base_seed + t, t = 0..n_trials-1, on up to `jobs`
/// threads, and aggregates the test and validation metrics.
template <typename Job>
TrialResults run_trials(Job&& job, std::size_t n_trials, std::uint64_t base_seed, std::size_t jobs = 1) {
  if (n_trials < 1) throw ParameterError("run_trials: need at least one trial");
  TrialResults r;
  r.reports.resize(n_trials);
  parallel_for(n_trials, jobs, [&](std::size_t t) { r.reports[t] = job(base_seed + t); });
  std::vector<double> test, val;
  for (const auto& rep : r.reports) {
    test.push_back(rep.test_metric);
    val.push_back(rep.best_val_metric);
  }
  r.test = summarize(test);
  r.val = summarize(val);
  return r;
}

/// A training job over a fixed dataset. With resplit set, trial seeds also
/// re-draw the split; otherwise the split drawn from split_seed is shared.
struct TrainJob {
  const GraphDataset* dataset = nullptr;
  ModelSpec spec;
  TrainConfig config;
  SplitRatios link_ratios;
  NodeSplitPolicy node_policy = PerClassPolicy{};
  std::uint64_t split_seed = 0;
  bool resplit = false;

  TrainReport operator()(std::uint64_t seed) const {
    TrainConfig tc = config;
    tc.seed = seed;
    const std::uint64_t ss = resplit ? seed : split_seed;
    TrainReport rep;
    if (tc.task == Task::kLink) {
      rep = train_link(spec, *dataset, link_split(*dataset, link_ratios, ss), tc);
    } else {
      rep = train_node(spec, *dataset, node_split(*dataset, node_policy, ss), tc);
    }
    rep.config["split_seed"] = std::to_string(ss);
    rep.config["resplit"] = resplit ? "true" : "false";
    return rep;
  }
};

// ---- serialization ---------------------------------------------------------

/// key=value report (wall time is excluded so reports are reproducible).
inline KeyValues report_fields(const TrainReport& r) {
  KeyValues kv = r.config;
  kv["best_val_metric"] = format_double(r.best_val_metric);
  kv["test_metric"] = format_double(r.test_metric);
  kv["best_epoch"] = std::to_string(r.best_epoch);
  kv["epochs_run"] = std::to_string(r.epochs_run);
  kv["metric"] = kv["task"] == "node" ? "accuracy" : "roc_auc";
  return kv;
}

inline std::string curve_csv(const TrainReport& r) {
  std::ostringstream out;
  out << "epoch,loss,val_metric\n";
  for (const auto& e : r.curve) {
    out << e.epoch << ',' << format_double(e.loss) << ',';
    if (e.val_metric) out << format_double(*e.val_metric);
    out << '\n';
  }
  return out.str();
}

/// Checkpoint: one `.gft` per tensor plus checkpoint.txt describing the model.
inline void save_checkpoint(const Model& m, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  KeyValues kv;
  kv["model"] = to_string(m.kind);
  if (m.kind == ModelKind::kMlp) {
    kv["in_dim"] = std::to_string(m.mlp.in_dim);
    std::string hidden;
    for (auto h : m.mlp.hidden_dims) hidden += (hidden.empty() ? "" : ",") + std::to_string(h);
    kv["hidden_dims"] = hidden;
    kv["out_dim"] = std::to_string(m.mlp.out_dim);
    kv["dropout"] = format_double(m.mlp.dropout);
  } else {
    kv["in_dim"] = std::to_string(m.gcn.in_dim);
    kv["hidden_dim"] = std::to_string(m.gcn.hidden_dim);
    kv["out_dim"] = std::to_string(m.gcn.out_dim);
    kv["num_layers"] = std::to_string(m.gcn.num_layers);
    kv["dropout"] = format_double(m.gcn.dropout);
  }
  kv["num_tensors"] = std::to_string(m.params.size());
  for (std::size_t i = 0; i < m.params.size(); ++i) {
    const std::string file = "param_" + std::to_string(i) + ".gft";
    gft::write((dir / file).string(), m.params[i].value);
    kv["tensor_" + std::to_string(i)] = file;
  }
  write_key_values((dir / "checkpoint.txt").string(), kv);
}

/// Inverse of save_checkpoint. Tensors come back at 32-bit storage precision.
inline Model load_checkpoint(const std::filesystem::path& dir) {
  const auto kv = read_key_values((dir / "checkpoint.txt").string());
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw FormatError((dir / "checkpoint.txt").string() + ": missing key '" + key + "'");
    return it->second;
  };
  auto count = [&](const std::string& key) {
    auto v = csv::parse_number<std::size_t>(get(key));
    if (!v) throw FormatError((dir / "checkpoint.txt").string() + ": bad value for '" + key + "'");
    return *v;
  };
  Model m;
  m.kind = parse_model_kind(get("model"));
  const double dropout = std::stod(get("dropout"));
  if (m.kind == ModelKind::kMlp) {
    m.mlp.in_dim = count("in_dim");
    m.mlp.hidden_dims.clear();
    for (auto f : csv::split(get("hidden_dims"))) {
      if (csv::trim(f).empty()) continue;
      auto h = csv::parse_number<std::size_t>(f);
      if (!h) throw FormatError((dir / "checkpoint.txt").string() + ": bad hidden_dims");
      m.mlp.hidden_dims.push_back(*h);
    }
    m.mlp.out_dim = count("out_dim");
    m.mlp.dropout = dropout;
  } else {
    m.gcn.in_dim = count("in_dim");
    m.gcn.hidden_dim = count("hidden_dim");
    m.gcn.out_dim = count("out_dim");
    m.gcn.num_layers = count("num_layers");
    m.gcn.dropout = dropout;
  }
  const std::size_t n = count("num_tensors");
  for (std::size_t i = 0; i < n; ++i) m.params.emplace_back(gft::read((dir / get("tensor_" + std::to_string(i))).string()));
  if (m.kind == ModelKind::kMlp) {
    detail::check_params(layer_dims(m.mlp), m.mlp.bias, m.params, "checkpoint");
  } else {
    detail::check_params(layer_dims(m.gcn), m.gcn.bias, m.params, "checkpoint");
  }
  return m;
}

}  // namespace gnb
