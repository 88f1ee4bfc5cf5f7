#pragma once

#include "eqg/graph_data.hpp"
#include "eqg/params.hpp"
#include "eqg/tape.hpp"

namespace eqg {

/// Utility model F: two graph-convolution layers giving the hidden
/// representation h, then a fully connected head giving class scores.
struct ClassifierShape {
  int feature_dim = 0;
  int class_count = 0;
  int hidden1 = 64;
  int hidden2 = 64;
};

/// Parameters: W1 (n x d1), W2 (d1 x d2), W_head (d2 x K) plus biases.
ParamCollection init_classifier(const ClassifierShape& shape, Rng& rng);

struct ClassifierOut {
  Tape::Id logits;  // |V| x K
  Tape::Id hidden;  // |V| x d2
};

/// hidden = A_hat * relu(A_hat * X * W1 + b1) * W2 + b2 (linear before the
/// head); logits = hidden * W_head + b_head.
ClassifierOut classifier_forward(Tape& tape, const BoundParams& params,
                                 const GraphDataset& ds);

/// Same forward on a caller-supplied feature node (for permutation tests on
/// the classifier itself).
ClassifierOut classifier_forward(Tape& tape, const BoundParams& params,
                                 Tape::Id features, const SparseCsr* adjacency);

/// Categorical cross-entropy restricted to the given rows.
Tape::Id task_loss(Tape& tape, Tape::Id logits, const std::vector<int>& labels,
                   const std::vector<int>& rows);

/// Argmax class per row of a logits/probability tensor.
std::vector<int> argmax_rows(const Tensor& t);

}  // namespace eqg
