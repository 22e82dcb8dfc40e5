#pragma once

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gnb/error.hpp"
#include "gnb/features.hpp"
#include "gnb/gft.hpp"
#include "gnb/graph.hpp"
#include "gnb/kv.hpp"

namespace gnb {

namespace csv {

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

}  // namespace csv

namespace files {
inline constexpr const char* kEdges = "edges.csv";
inline constexpr const char* kFeatures = "features.gft";
inline constexpr const char* kLabels = "labels.csv";
inline constexpr const char* kMeta = "meta.txt";
}  // namespace files

inline std::string edges_csv(const Graph& g) {
  std::string out = "src,dst\n";
  for (const auto& e : g.edges()) {
    out += std::to_string(e.u);
    out += ',';
    out += std::to_string(e.v);
    out += '\n';
  }
  return out;
}

inline std::string labels_csv(const Labels& labels) {
  std::string out = "node,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out += std::to_string(i) + ',' + std::to_string(labels[i]) + '\n';
  }
  return out;
}

/// Writes edges.csv, features.gft, labels.csv (when labelled) and meta.txt.
inline void save_dataset(const GraphDataset& ds, const std::filesystem::path& dir) {
  validate(ds);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  write_text_file((dir / files::kEdges).string(), edges_csv(ds.graph));
  gft::write((dir / files::kFeatures).string(), ds.features.data);
  const auto labels_path = dir / files::kLabels;
  if (ds.labels) {
    write_text_file(labels_path.string(), labels_csv(*ds.labels));
  } else if (std::filesystem::exists(labels_path)) {
    std::filesystem::remove(labels_path);
  }
  KeyValues meta(ds.provenance.begin(), ds.provenance.end());
  meta["name"] = ds.name;
  meta["num_nodes"] = std::to_string(ds.graph.num_nodes());
  meta["num_edges"] = std::to_string(ds.graph.num_edges());
  meta["feature_cols"] = std::to_string(ds.features.cols());
  meta["has_labels"] = ds.labels ? "true" : "false";
  write_key_values((dir / files::kMeta).string(), meta);
}

namespace detail {

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

inline std::vector<Edge> parse_strict_edges(const std::filesystem::path& path, std::size_t num_nodes) {
  const auto lines = read_lines(path);
  const std::string origin = path.string();
  if (lines.empty() || lines[0] != "src,dst") throw FormatError(origin + ":1: expected header 'src,dst'");
  std::vector<Edge> edges;
  std::map<Edge, std::size_t> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string where = origin + ":" + std::to_string(i + 1) + ": ";
    if (lines[i].empty()) continue;
    const auto fields = csv::split(lines[i]);
    if (fields.size() != 2) throw FormatError(where + "expected two fields");
    const auto a = csv::parse_number<std::uint64_t>(fields[0]);
    const auto b = csv::parse_number<std::uint64_t>(fields[1]);
    if (!a || !b) throw FormatError(where + "non-integer node id");
    if (*a == *b) throw FormatError(where + "self-loop on node " + std::to_string(*a));
    if (*a >= num_nodes || *b >= num_nodes) throw FormatError(where + "node id out of range");
    if (*a > *b) throw FormatError(where + "expected src < dst");
    const Edge e{static_cast<NodeId>(*a), static_cast<NodeId>(*b)};
    auto [it, inserted] = seen.emplace(e, i + 1);
    if (!inserted) {
      throw FormatError(where + "duplicate edge (first seen on line " + std::to_string(it->second) + ")");
    }
    edges.push_back(e);
  }
  return edges;
}

inline Labels parse_strict_labels(const std::filesystem::path& path, std::size_t num_nodes) {
  const auto lines = read_lines(path);
  const std::string origin = path.string();
  if (lines.empty() || lines[0] != "node,label") throw FormatError(origin + ":1: expected header 'node,label'");
  Labels labels;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = origin + ":" + std::to_string(i + 1) + ": ";
    const auto fields = csv::split(lines[i]);
    if (fields.size() != 2) throw FormatError(where + "expected two fields");
    const auto node = csv::parse_number<std::uint64_t>(fields[0]);
    const auto label = csv::parse_number<std::uint32_t>(fields[1]);
    if (!node || !label) throw FormatError(where + "non-integer field");
    if (*node != labels.size()) throw FormatError(where + "expected node " + std::to_string(labels.size()));
    labels.push_back(*label);
  }
  if (labels.size() != num_nodes) {
    throw FormatError(origin + ": " + std::to_string(labels.size()) + " labels for " +
                      std::to_string(num_nodes) + " nodes");
  }
  return labels;
}

}  // namespace detail

inline GraphDataset load_dataset(const std::filesystem::path& dir) {
  const auto meta_path = dir / files::kMeta;
  KeyValues meta = read_key_values(meta_path.string());
  GraphDataset ds;
  ds.features = FeatureMatrix(gft::read((dir / files::kFeatures).string()));

  std::size_t num_nodes = ds.features.rows();
  if (auto it = meta.find("num_nodes"); it != meta.end()) {
    auto n = csv::parse_number<std::size_t>(it->second);
    if (!n) throw FormatError(meta_path.string() + ": bad num_nodes");
    num_nodes = *n;
  }
  if (ds.features.rows() != num_nodes) {
    throw FormatError((dir / files::kFeatures).string() + ": " + std::to_string(ds.features.rows()) +
                      " rows but dataset has " + std::to_string(num_nodes) + " nodes");
  }
  ds.graph = Graph(num_nodes, detail::parse_strict_edges(dir / files::kEdges, num_nodes));
  if (std::filesystem::exists(dir / files::kLabels)) {
    ds.labels = detail::parse_strict_labels(dir / files::kLabels, num_nodes);
  }
  ds.name = meta.count("name") ? meta["name"] : dir.filename().string();
  for (const char* key : {"name", "num_nodes", "num_edges", "feature_cols", "has_labels"}) meta.erase(key);
  ds.provenance = Provenance(meta.begin(), meta.end());
  return ds;
}

struct ImportStats {
  std::size_t dropped_self_loops = 0;
  std::size_t dropped_duplicates = 0;
};

/// Imports an external dataset.
///   edges:    CSV `src,dst` (optional header), directed or undirected.
///   features: `.gft`, or a numeric CSV matrix. A CSV whose header's first
///             column is `id` carries explicit node ids; otherwise row i is node i.
///   labels:   CSV `node,label` (optional header); label values are compacted
///             to 0..C-1 in ascending order.
/// Node ids are compacted to 0..n-1 in ascending order. Self-loops and
/// duplicate edges are dropped and counted.
inline GraphDataset import_external(const std::filesystem::path& edges_path,
                                    const std::filesystem::path& features_path,
                                    const std::optional<std::filesystem::path>& labels_path = std::nullopt,
                                    ImportStats* stats = nullptr) {
  ImportStats local;
  ImportStats& st = stats ? *stats : local;

  // Features and the node universe.
  Matrix x;
  std::vector<std::uint64_t> ids;
  if (features_path.extension() == ".gft") {
    x = gft::read(features_path.string());
  } else {
    const auto lines = detail::read_lines(features_path);
    const std::string origin = features_path.string();
    std::size_t first = 0;
    bool id_column = false;
    if (!lines.empty()) {
      const auto head = csv::split(lines[0]);
      if (!csv::parse_number<double>(head[0])) {
        first = 1;
        id_column = csv::trim(head[0]) == "id";
      }
    }
    std::vector<std::vector<double>> rows;
    std::size_t width = 0;
    for (std::size_t i = first; i < lines.size(); ++i) {
      if (csv::trim(lines[i]).empty()) continue;
      const std::string where = origin + ":" + std::to_string(i + 1) + ": ";
      auto fields = csv::split(lines[i]);
      if (id_column) {
        auto id = csv::parse_number<std::uint64_t>(fields[0]);
        if (!id) throw FormatError(where + "bad node id");
        ids.push_back(*id);
        fields.erase(fields.begin());
      }
      if (rows.empty()) width = fields.size();
      if (fields.size() != width || width == 0) {
        throw FormatError(where + "ragged row: " + std::to_string(fields.size()) + " values, expected " +
                          std::to_string(width));
      }
      std::vector<double> row;
      row.reserve(width);
      for (auto f : fields) {
        auto v = csv::parse_number<double>(f);
        if (!v || !std::isfinite(*v)) throw FormatError(where + "non-numeric value '" + std::string(f) + "'");
        row.push_back(*v);
      }
      rows.push_back(std::move(row));
    }
    x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < width; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  if (ids.empty()) {
    ids.resize(static_cast<std::size_t>(x.rows()));
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  }
  std::vector<std::size_t> order(ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return ids[a] < ids[b]; });
  std::map<std::uint64_t, NodeId> compact;
  Matrix sorted_x(x.rows(), x.cols());
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (!compact.emplace(ids[order[r]], static_cast<NodeId>(r)).second) {
      throw FormatError(features_path.string() + ": duplicate node id " + std::to_string(ids[order[r]]));
    }
    sorted_x.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(order[r]));
  }

  // Edges.
  std::vector<Edge> edges;
  {
    const auto lines = detail::read_lines(edges_path);
    std::map<Edge, bool> seen;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (csv::trim(lines[i]).empty()) continue;
      const std::string where = edges_path.string() + ":" + std::to_string(i + 1) + ": ";
      const auto fields = csv::split(lines[i]);
      if (fields.size() < 2) throw FormatError(where + "expected src,dst");
      auto a = csv::parse_number<std::uint64_t>(fields[0]);
      auto b = csv::parse_number<std::uint64_t>(fields[1]);
      if (!a || !b) {
        if (i == 0) continue;  // header
        throw FormatError(where + "non-integer node id");
      }
      auto ia = compact.find(*a);
      auto ib = compact.find(*b);
      if (ia == compact.end() || ib == compact.end()) {
        throw FormatError(where + "edge references a node without features");
      }
      if (*a == *b) {
        ++st.dropped_self_loops;
        continue;
      }
      const Edge e = canonical({ia->second, ib->second});
      if (!seen.emplace(e, true).second) {
        ++st.dropped_duplicates;
        continue;
      }
      edges.push_back(e);
    }
  }

  GraphDataset ds;
  ds.graph = Graph(order.size(), std::move(edges));
  ds.features = FeatureMatrix(std::move(sorted_x));

  if (labels_path) {
    const auto lines = detail::read_lines(*labels_path);
    std::vector<std::optional<std::int64_t>> raw(order.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (csv::trim(lines[i]).empty()) continue;
      const std::string where = labels_path->string() + ":" + std::to_string(i + 1) + ": ";
      const auto fields = csv::split(lines[i]);
      if (fields.size() != 2) throw FormatError(where + "expected node,label");
      auto node = csv::parse_number<std::uint64_t>(fields[0]);
      auto label = csv::parse_number<std::int64_t>(fields[1]);
      if (!node || !label) {
        if (i == 0) continue;
        throw FormatError(where + "non-integer field");
      }
      auto it = compact.find(*node);
      if (it == compact.end()) throw FormatError(where + "label for unknown node");
      raw[it->second] = *label;
    }
    std::vector<std::int64_t> values;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (!raw[i]) throw FormatError(labels_path->string() + ": missing label for node index " + std::to_string(i));
      values.push_back(*raw[i]);
    }
    std::vector<std::int64_t> distinct = values;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    Labels labels(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      labels[i] = static_cast<std::uint32_t>(std::lower_bound(distinct.begin(), distinct.end(), values[i]) -
                                             distinct.begin());
    }
    ds.labels = std::move(labels);
  }

  ds.name = features_path.parent_path().filename().string();
  if (ds.name.empty()) ds.name = "imported";
  ds.provenance["family"] = "import";
  ds.provenance["source_edges"] = edges_path.string();
  ds.provenance["source_features"] = features_path.string();
  if (labels_path) ds.provenance["source_labels"] = labels_path->string();
  ds.provenance["dropped_self_loops"] = std::to_string(st.dropped_self_loops);
  ds.provenance["dropped_duplicates"] = std::to_string(st.dropped_duplicates);
  validate(ds);
  return ds;
}

/// Restricts features to the first n stored columns; graph and labels are shared.
inline GraphDataset slice_features(const GraphDataset& ds, std::size_t n) {
  if (n < 1 || n > ds.features.cols()) {
    throw ParameterError("slice_features: n=" + std::to_string(n) + " outside 1.." +
                         std::to_string(ds.features.cols()));
  }
  GraphDataset out;
  out.graph = ds.graph;
  out.labels = ds.labels;
  out.features = FeatureMatrix(ds.features.data.leftCols(static_cast<Eigen::Index>(n)));
  out.name = ds.name + "-" + std::to_string(n);
  out.provenance = ds.provenance;
  out.provenance["feature_slice"] = std::to_string(n);
  return out;
}

}  // namespace gnb
