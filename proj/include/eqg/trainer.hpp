#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eqg/classifier.hpp"
#include "eqg/discriminator.hpp"
#include "eqg/graph_data.hpp"
#include "eqg/metrics.hpp"
#include "eqg/params.hpp"
#include "eqg/sampler.hpp"

namespace eqg {

struct TrainConfig {
  double lambda = 1.0;        // adversarial weight
  double gamma = 50.0;        // covariance weight inside the adversarial term
  double lr = 1e-3;
  double weight_decay = 1e-5;
  int patience = 50;
  int max_epochs = 1000;
  uint64_t seed = 1;
  LossVariant variant = LossVariant::kPermutation;
  int hidden1 = 64;
  int hidden2 = 64;
  int disc_hidden = 64;
  bool standardize = true;
  double smoothing = 1.0;  // sampler pseudo-count

  void validate() const;
};

struct EpochStats {
  double l_task = 0.0;
  double l_adv = 0.0;
  double l_cov = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  ParamCollection best_classifier;
  std::vector<EpochStats> history;
  int selected_epoch = 0;  // 1-based index into history
  int stopped_epoch = 0;
  MetricsReport test_metrics;
  std::vector<int> test_pred;  // full-graph predictions of the selected model
};

TrainResult train(const GraphDataset& dataset, const Split& split,
                  const TrainConfig& config);

/// Evaluates a checkpointed classifier on the test rows of a split.
MetricsReport evaluate_checkpoint(const GraphDataset& dataset, const Split& split,
                                  const ParamCollection& classifier,
                                  bool standardize);

/// Full-graph class probabilities of a checkpointed classifier.
Tensor predict_probs(const GraphDataset& dataset, const ParamCollection& classifier);

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

struct GridCell {
  double lambda = 0.0;
  double gamma = 0.0;
  MeanStderr delta_eo, delta_sp, acc, f1_macro, f1_micro;
  std::vector<MetricsReport> per_seed;
};

/// Trains one run per (lambda, gamma, seed); seeds double as split seeds.
/// Cells run concurrently; each cell's randomness is derived from its own seed.
std::vector<GridCell> grid_search(const GraphDataset& dataset,
                                  const std::vector<uint64_t>& seeds,
                                  const std::vector<double>& lambda_grid,
                                  const std::vector<double>& gamma_grid,
                                  const TrainConfig& base, int workers = 0);

MeanStderr mean_stderr(const std::vector<double>& xs);

void write_history_csv(const std::string& path, const std::vector<EpochStats>& history);

}  // namespace eqg
