#pragma once

#include <cstdint>
#include <string>

#include "eqg/graph_data.hpp"

namespace eqg {

/// Knobs for the synthetic benchmark graph. Defaults are calibrated so that
/// a plain GCN lands in the 70s of accuracy and leaves a measurable
/// equal-opportunity gap for the adversary to close.
struct SynthConfig {
  int nodes = 355;
  int features = 95;
  int class_count = 2;
  int edges = 1600;           // undirected edge count target
  double p_sensitive = 0.245; // P(A = 1)
  double label_corr = 0.2;    // group shift of the label distribution
  double feature_signal = 0.07;  // per-feature label effect scale
  double sensitive_signal = 0.6; // per-feature sensitive-attribute leakage
  double homophily_label = 1.7;  // same-label edge preference
  double homophily_sens = 1.5;   // same-group edge preference
};

/// Fully seeded generator; identical (cfg, seed) gives identical bytes.
GraphDataset generate_synthetic(const SynthConfig& cfg, uint64_t seed);

/// Writes dir/nodes.csv, dir/edges.txt and dir/manifest.json.
void write_dataset_bundle(const GraphDataset& ds, const std::string& dir);

}  // namespace eqg
