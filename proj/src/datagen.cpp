#include "eqg/datagen.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#include "json.hpp"

#include "eqg/rng.hpp"

namespace eqg {

GraphDataset generate_synthetic(const SynthConfig& cfg, uint64_t seed) {
  if (cfg.nodes < 4 || cfg.features < 1 || cfg.class_count < 2)
    throw std::invalid_argument("generate_synthetic: degenerate configuration");
  int n = cfg.nodes, d = cfg.features, k = cfg.class_count;

  GraphDataset ds;
  ds.node_count = n;
  ds.feature_dim = d;
  ds.class_count = k;
  ds.labels.resize(n);
  ds.sensitive.resize(n);
  ds.feature_matrix = Tensor(n, d);

  Rng attr_rng = Rng::substream(seed, "synth_attr");
  for (int i = 0; i < n; ++i) ds.sensitive[i] = attr_rng.bernoulli(cfg.p_sensitive);

  // Group-dependent label distribution: group 1 leans to low class indices,
  // group 0 to high ones, with a tilt of label_corr.
  Rng label_rng = Rng::substream(seed, "synth_label");
  for (int i = 0; i < n; ++i) {
    std::vector<double> w(k);
    double total = 0.0;
    for (int c = 0; c < k; ++c) {
      double tilt = (k == 1) ? 0.0 : (1.0 - 2.0 * c / (k - 1));  // +1 .. -1
      w[c] = 1.0 + cfg.label_corr * tilt * (ds.sensitive[i] ? 1.0 : -1.0);
      if (w[c] < 0.05) w[c] = 0.05;
      total += w[c];
    }
    double u = label_rng.uniform() * total;
    int y = k - 1;
    for (int c = 0; c < k; ++c) {
      if (u < w[c]) { y = c; break; }
      u -= w[c];
    }
    ds.labels[i] = y;
  }

  // Features: per-feature class effect + sensitive leakage + unit noise.
  Rng effect_rng = Rng::substream(seed, "synth_effects");
  Tensor class_effect(k, d);
  std::vector<double> sens_effect(d);
  for (int c = 0; c < k; ++c)
    for (int j = 0; j < d; ++j)
      class_effect.at(c, j) = cfg.feature_signal * effect_rng.normal();
  for (int j = 0; j < d; ++j) sens_effect[j] = cfg.sensitive_signal * effect_rng.normal();

  Rng feat_rng = Rng::substream(seed, "synth_features");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j)
      ds.feature_matrix.at(i, j) = class_effect.at(ds.labels[i], j) +
                                   ds.sensitive[i] * sens_effect[j] + feat_rng.normal();

  // Homophilous edges by rejection sampling; then patch isolated nodes.
  Rng edge_rng = Rng::substream(seed, "synth_edges");
  double max_w = cfg.homophily_label * cfg.homophily_sens;
  std::set<std::pair<int, int>> chosen;
  long attempts = 0, max_attempts = 400L * cfg.edges + 100000L;
  while (static_cast<int>(chosen.size()) < cfg.edges && attempts++ < max_attempts) {
    int i = edge_rng.uniform_int(n), j = edge_rng.uniform_int(n);
    if (i == j) continue;
    double w = (ds.labels[i] == ds.labels[j] ? cfg.homophily_label : 1.0) *
               (ds.sensitive[i] == ds.sensitive[j] ? cfg.homophily_sens : 1.0);
    if (edge_rng.uniform() * max_w >= w) continue;
    chosen.insert({std::min(i, j), std::max(i, j)});
  }
  std::vector<int> degree(n, 0);
  for (auto& [a, b] : chosen) { ++degree[a]; ++degree[b]; }
  for (int i = 0; i < n; ++i) {
    while (degree[i] == 0) {
      int j = edge_rng.uniform_int(n);
      if (j == i) continue;
      if (chosen.insert({std::min(i, j), std::max(i, j)}).second) {
        ++degree[i];
        ++degree[j];
      }
    }
  }

  std::vector<std::pair<int, int>> edges(chosen.begin(), chosen.end());
  ds.adjacency = normalized_adjacency(n, edges);

  ds.node_ids.resize(n);
  ds.feature_names.resize(d);
  for (int i = 0; i < n; ++i) ds.node_ids[i] = "n" + std::to_string(i);
  for (int j = 0; j < d; ++j) ds.feature_names[j] = "f" + std::to_string(j);
  return ds;
}

void write_dataset_bundle(const GraphDataset& ds, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::filesystem::path base(dir);
  save_dataset(ds, (base / "nodes.csv").string(), (base / "edges.txt").string());

  nlohmann::json j;
  j["nodes"] = "nodes.csv";
  j["edges"] = "edges.txt";
  j["id_column"] = "id";
  j["label_column"] = "label";
  j["sensitive_column"] = "sensitive";
  j["feature_columns"] = nlohmann::json::array();
  j["class_count"] = ds.class_count;
  std::filesystem::path tmp = base / "manifest.json.tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("write_dataset_bundle: cannot write " + tmp.string());
    out << j.dump(2) << "\n";
  }
  std::filesystem::rename(tmp, base / "manifest.json");
}

}  // namespace eqg
