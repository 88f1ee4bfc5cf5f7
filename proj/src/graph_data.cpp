#include "eqg/graph_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "eqg/rng.hpp"

namespace eqg {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim surrounding whitespace and CR
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_feature(const std::string& s, const std::string& col, size_t line_no) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (...) {
    throw DataError("non-numeric feature value '" + s + "' in column '" + col +
                    "' at line " + std::to_string(line_no));
  }
}

}  // namespace

SparseCsr normalized_adjacency(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::set<int>> nbr(n);
  for (int i = 0; i < n; ++i) nbr[i].insert(i);  // self-loop
  for (const auto& [u, v] : edges) {
    if (u == v) continue;
    nbr[u].insert(v);
    nbr[v].insert(u);
  }
  std::vector<double> inv_sqrt_deg(n);
  for (int i = 0; i < n; ++i)
    inv_sqrt_deg[i] = 1.0 / std::sqrt(static_cast<double>(nbr[i].size()));
  SparseCsr s(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j : nbr[i]) {
      s.idx.push_back(j);
      s.val.push_back(inv_sqrt_deg[i] * inv_sqrt_deg[j]);
    }
    s.ptr[i + 1] = static_cast<int>(s.idx.size());
  }
  return s;
}

GraphDataset load_dataset(const std::string& nodes_path, const std::string& edges_path,
                          const NodeSchema& schema, int class_count_hint) {
  std::ifstream nodes_in(nodes_path);
  if (!nodes_in) throw DataError("cannot open nodes file: " + nodes_path);
  std::string line;
  if (!std::getline(nodes_in, line)) throw DataError("nodes file is empty: " + nodes_path);
  const auto header = split_csv_line(line);

  auto col_of = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw DataError("missing column '" + name + "' in " + nodes_path);
    return static_cast<int>(it - header.begin());
  };
  const int id_col = col_of(schema.id_column);
  const int label_col = col_of(schema.label_column);
  const int sens_col = col_of(schema.sensitive_column);

  std::vector<int> feature_cols;
  std::vector<std::string> feature_names;
  if (schema.feature_columns.empty()) {
    for (int c = 0; c < static_cast<int>(header.size()); ++c)
      if (c != id_col && c != label_col && c != sens_col) {
        feature_cols.push_back(c);
        feature_names.push_back(header[c]);
      }
  } else {
    for (const auto& name : schema.feature_columns) {
      feature_cols.push_back(col_of(name));
      feature_names.push_back(name);
    }
  }
  if (feature_cols.empty()) throw DataError("no feature columns in " + nodes_path);

  GraphDataset ds;
  ds.feature_names = std::move(feature_names);
  std::map<std::string, int> id_index;
  std::vector<double> feats;
  size_t line_no = 1;
  while (std::getline(nodes_in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw DataError("row at line " + std::to_string(line_no) + " has " +
                      std::to_string(fields.size()) + " fields, header has " +
                      std::to_string(header.size()));
    const std::string& id = fields[id_col];
    if (!id_index.emplace(id, ds.node_count).second)
      throw DataError("duplicate node id '" + id + "' at line " + std::to_string(line_no));
    ds.node_ids.push_back(id);

    int label;
    try {
      label = std::stoi(fields[label_col]);
    } catch (...) {
      throw DataError("non-integer label '" + fields[label_col] + "' at line " +
                      std::to_string(line_no));
    }
    if (label < 0)
      throw DataError("label " + std::to_string(label) + " outside {0..K-1} at line " +
                      std::to_string(line_no));
    ds.labels.push_back(label);

    const std::string& sv = fields[sens_col];
    if (sv != "0" && sv != "1")
      throw DataError("sensitive value '" + sv + "' outside {0,1} at line " +
                      std::to_string(line_no));
    ds.sensitive.push_back(sv == "1" ? 1 : 0);

    for (int c : feature_cols)
      feats.push_back(parse_feature(fields[c], header[c], line_no));
    ++ds.node_count;
  }
  if (ds.node_count == 0) throw DataError("nodes file has no data rows: " + nodes_path);

  ds.feature_dim = static_cast<int>(feature_cols.size());
  ds.feature_matrix = Tensor(ds.node_count, ds.feature_dim, std::move(feats));
  const int max_label = *std::max_element(ds.labels.begin(), ds.labels.end());
  ds.class_count = std::max(class_count_hint, max_label + 1);
  if (class_count_hint > 0 && max_label >= class_count_hint)
    throw DataError("label " + std::to_string(max_label) + " outside {0.." +
                    std::to_string(class_count_hint - 1) + "}");

  std::ifstream edges_in(edges_path);
  if (!edges_in) throw DataError("cannot open edges file: " + edges_path);
  std::vector<std::pair<int, int>> edges;
  line_no = 0;
  while (std::getline(edges_in, line)) {
    ++line_no;
    for (char& ch : line)
      if (ch == ',') ch = ' ';
    std::stringstream ss(line);
    std::string a, b;
    if (!(ss >> a)) continue;  // blank line
    if (!(ss >> b))
      throw DataError("edge line " + std::to_string(line_no) + " has a single endpoint");
    const auto ia = id_index.find(a);
    const auto ib = id_index.find(b);
    if (ia == id_index.end())
      throw DataError("edge references unknown id '" + a + "' at line " +
                      std::to_string(line_no));
    if (ib == id_index.end())
      throw DataError("edge references unknown id '" + b + "' at line " +
                      std::to_string(line_no));
    edges.emplace_back(ia->second, ib->second);
  }
  ds.adjacency = normalized_adjacency(ds.node_count, edges);
  return ds;
}

DatasetManifest DatasetManifest::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw DataError("manifest parse error in " + path + ": " + e.what());
  }
  DatasetManifest m;
  m.nodes_path = j.at("nodes").get<std::string>();
  m.edges_path = j.at("edges").get<std::string>();
  m.schema.id_column = j.value("id_column", std::string("id"));
  m.schema.label_column = j.value("label_column", std::string("label"));
  m.schema.sensitive_column = j.value("sensitive_column", std::string("sensitive"));
  if (j.contains("feature_columns"))
    m.schema.feature_columns = j["feature_columns"].get<std::vector<std::string>>();
  m.class_count = j.value("class_count", 0);
  // paths relative to the manifest location
  const auto dir_end = path.find_last_of('/');
  if (dir_end != std::string::npos) {
    const std::string dir = path.substr(0, dir_end + 1);
    if (!m.nodes_path.empty() && m.nodes_path[0] != '/') m.nodes_path = dir + m.nodes_path;
    if (!m.edges_path.empty() && m.edges_path[0] != '/') m.edges_path = dir + m.edges_path;
  }
  return m;
}

GraphDataset load_dataset(const DatasetManifest& manifest) {
  return load_dataset(manifest.nodes_path, manifest.edges_path, manifest.schema,
                      manifest.class_count);
}

void save_dataset(const GraphDataset& ds, const std::string& nodes_path,
                  const std::string& edges_path) {
  std::ofstream nodes_out(nodes_path);
  if (!nodes_out) throw DataError("cannot write nodes file: " + nodes_path);
  nodes_out << "id,label,sensitive";
  for (const auto& f : ds.feature_names) nodes_out << "," << f;
  nodes_out << "\n";
  nodes_out.precision(17);
  for (int i = 0; i < ds.node_count; ++i) {
    nodes_out << ds.node_ids[i] << "," << ds.labels[i] << "," << ds.sensitive[i];
    for (int c = 0; c < ds.feature_dim; ++c)
      nodes_out << "," << ds.feature_matrix.at(i, c);
    nodes_out << "\n";
  }
  std::ofstream edges_out(edges_path);
  if (!edges_out) throw DataError("cannot write edges file: " + edges_path);
  for (int i = 0; i < ds.node_count; ++i)
    for (int k = ds.adjacency.ptr[i]; k < ds.adjacency.ptr[i + 1]; ++k) {
      const int j = ds.adjacency.idx[k];
      if (j > i) edges_out << ds.node_ids[i] << " " << ds.node_ids[j] << "\n";
    }
}

Split make_split(const GraphDataset& ds, uint64_t seed, double train_frac,
                 double val_frac, double test_frac) {
  if (ds.node_count == 0) throw DataError("make_split: empty dataset");
  if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9)
    throw DataError("make_split: ratios must sum to 1");
  const int n = ds.node_count;
  int n_train = static_cast<int>(std::floor(train_frac * n));
  int n_val = static_cast<int>(std::floor(val_frac * n));
  int n_test = static_cast<int>(std::floor(test_frac * n));
  int leftover = n - n_train - n_val - n_test;
  // leftover nodes go to train, then val, then test
  while (leftover > 0) {
    if (leftover > 0) { ++n_train; --leftover; }
    if (leftover > 0) { ++n_val; --leftover; }
    if (leftover > 0) { ++n_test; --leftover; }
  }
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  Rng rng = Rng::substream(seed, "split");
  rng.shuffle(order);
  Split s;
  s.seed = seed;
  s.train_idx.assign(order.begin(), order.begin() + n_train);
  s.val_idx.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  s.test_idx.assign(order.begin() + n_train + n_val, order.end());
  std::sort(s.train_idx.begin(), s.train_idx.end());
  std::sort(s.val_idx.begin(), s.val_idx.end());
  std::sort(s.test_idx.begin(), s.test_idx.end());
  return s;
}

GraphDataset standardize_features(const GraphDataset& ds, const Split& split,
                                  bool enabled) {
  if (!enabled) return ds;
  if (split.train_idx.empty()) throw DataError("standardize_features: empty train set");
  GraphDataset out = ds;
  const double n = static_cast<double>(split.train_idx.size());
  for (int c = 0; c < ds.feature_dim; ++c) {
    double mean = 0.0;
    for (int r : split.train_idx) mean += ds.feature_matrix.at(r, c);
    mean /= n;
    double var = 0.0;
    for (int r : split.train_idx) {
      const double d = ds.feature_matrix.at(r, c) - mean;
      var += d * d;
    }
    var /= n;  // population formula
    if (var < 1e-24) continue;  // constant column
    const double inv_std = 1.0 / std::sqrt(var);
    for (int r = 0; r < ds.node_count; ++r)
      out.feature_matrix.at(r, c) = (ds.feature_matrix.at(r, c) - mean) * inv_std;
  }
  return out;
}

}  // namespace eqg
