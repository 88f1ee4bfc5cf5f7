#include "eqg/classifier.hpp"

namespace eqg {

ParamCollection init_classifier(const ClassifierShape& shape, Rng& rng) {
  if (shape.feature_dim <= 0 || shape.class_count <= 0)
    throw std::invalid_argument("init_classifier: bad shape");
  ParamCollection pc;
  pc.add_glorot("W1", shape.feature_dim, shape.hidden1, rng);
  pc.add_zeros("b1", 1, shape.hidden1);
  pc.add_glorot("W2", shape.hidden1, shape.hidden2, rng);
  pc.add_zeros("b2", 1, shape.hidden2);
  pc.add_glorot("W_head", shape.hidden2, shape.class_count, rng);
  pc.add_zeros("b_head", 1, shape.class_count);
  return pc;
}

ClassifierOut classifier_forward(Tape& tape, const BoundParams& params,
                                 Tape::Id features, const SparseCsr* adjacency) {
  const Tape::Id a1 = tape.relu(tape.add_row(
      tape.spmm(adjacency, tape.matmul(features, params["W1"])), params["b1"]));
  const Tape::Id hidden = tape.add_row(
      tape.spmm(adjacency, tape.matmul(a1, params["W2"])), params["b2"]);
  const Tape::Id logits =
      tape.add_row(tape.matmul(hidden, params["W_head"]), params["b_head"]);
  return {logits, hidden};
}

ClassifierOut classifier_forward(Tape& tape, const BoundParams& params,
                                 const GraphDataset& ds) {
  return classifier_forward(tape, params, tape.constant(ds.feature_matrix),
                            &ds.adjacency);
}

Tape::Id task_loss(Tape& tape, Tape::Id logits, const std::vector<int>& labels,
                   const std::vector<int>& rows) {
  return tape.cce_masked(logits, labels, rows);
}

std::vector<int> argmax_rows(const Tensor& t) {
  std::vector<int> out(t.rows, 0);
  for (int r = 0; r < t.rows; ++r) {
    double best = t.at(r, 0);
    for (int c = 1; c < t.cols; ++c)
      if (t.at(r, c) > best) {
        best = t.at(r, c);
        out[r] = c;
      }
  }
  return out;
}

}  // namespace eqg
