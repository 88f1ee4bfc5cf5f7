#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "eqg/tensor.hpp"

namespace eqg {

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Column selection for the nodes CSV. When feature_columns is empty, every
/// column other than id/label/sensitive becomes a feature, in header order.
struct NodeSchema {
  std::string id_column = "id";
  std::string label_column = "label";
  std::string sensitive_column = "sensitive";
  std::vector<std::string> feature_columns;
};

struct GraphDataset {
  int node_count = 0;
  int feature_dim = 0;
  int class_count = 0;
  Tensor feature_matrix;        // node_count x feature_dim
  std::vector<int> labels;      // values in {0..K-1}
  std::vector<int> sensitive;   // values in {0,1}
  SparseCsr adjacency;          // D^{-1/2}(A+I)D^{-1/2}, symmetric
  std::vector<std::string> node_ids;
  std::vector<std::string> feature_names;
};

struct Split {
  std::vector<int> train_idx;
  std::vector<int> val_idx;
  std::vector<int> test_idx;
  uint64_t seed = 0;
};

/// Points at the node/edge files; loaded from a JSON manifest.
struct DatasetManifest {
  std::string nodes_path;
  std::string edges_path;
  NodeSchema schema;
  int class_count = 0;  // 0 = infer from data

  static DatasetManifest load(const std::string& path);
};

GraphDataset load_dataset(const std::string& nodes_path, const std::string& edges_path,
                          const NodeSchema& schema, int class_count_hint = 0);

GraphDataset load_dataset(const DatasetManifest& manifest);

/// Writes nodes CSV + edge list (one undirected edge per line) for round-trips.
void save_dataset(const GraphDataset& ds, const std::string& nodes_path,
                  const std::string& edges_path);

/// Deterministic shuffled split. Sizes are floored; leftover nodes go to
/// train, then validation, then test.
Split make_split(const GraphDataset& ds, uint64_t seed,
                 double train_frac = 0.5, double val_frac = 0.25,
                 double test_frac = 0.25);

/// Zero-mean unit-variance per feature column, statistics from train rows
/// only (population formula). Constant columns are left unchanged.
GraphDataset standardize_features(const GraphDataset& ds, const Split& split,
                                  bool enabled);

/// Builds D^{-1/2}(A+I)D^{-1/2} from undirected edges (deduplicated pairs,
/// no self pairs). Exposed for tests and the synthetic generator.
SparseCsr normalized_adjacency(int n, const std::vector<std::pair<int, int>>& edges);

}  // namespace eqg
