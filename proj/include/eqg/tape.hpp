#pragma once

#include <functional>
#include <vector>

#include "eqg/tensor.hpp"

namespace eqg {

/// Reverse-mode tape over Tensor values. A tape is built fresh for each
/// forward pass; nodes are identified by index. Gradient accumulation is a
/// sum over uses, evaluated in reverse node order.
class Tape {
 public:
  using Id = int;

  Id leaf(const Tensor& value);      // gradient tracked
  Id constant(const Tensor& value);  // gradient buffer exists but nothing flows upstream

  Id matmul(Id a, Id b);
  /// s * x with s a constant sparse matrix (the normalized adjacency). The
  /// pointer must outlive the tape.
  Id spmm(const SparseCsr* s, Id x);
  Id add(Id a, Id b);
  Id sub(Id a, Id b);
  Id mul(Id a, Id b);  // elementwise
  Id div(Id a, Id b);  // elementwise
  /// Adds a 1xC bias row to every row of a RxC input.
  Id add_row(Id a, Id bias);
  Id relu(Id a);
  Id sigmoid(Id a);
  Id softmax_rows(Id a);
  Id concat_cols(const std::vector<Id>& parts);
  Id scale(Id a, double c);
  Id add_const(Id a, double c);
  Id square(Id a);
  Id sqrt_op(Id a);
  Id sum(Id a);  // 1x1
  /// Mean of column 0 over the given rows; 1x1.
  Id masked_mean(Id a, const std::vector<int>& rows);
  /// Population variance of column 0 over the given rows; 1x1.
  Id masked_var(Id a, const std::vector<int>& rows);
  /// Mean categorical cross-entropy of row-softmax(logits) against integer
  /// labels, restricted to the given rows; 1x1.
  Id cce_masked(Id logits, const std::vector<int>& labels, const std::vector<int>& rows);
  /// Mean binary cross-entropy of probabilities (column 0) against targets,
  /// restricted to the given rows. Probabilities are clamped to
  /// [1e-7, 1-1e-7] before the logs; 1x1.
  Id bce_masked(Id probs, const std::vector<double>& targets, const std::vector<int>& rows);
  /// Per-column empirical covariance between prob columns and a scalar
  /// attribute over the given rows; 1xK.
  Id cov_cols(Id probs, const std::vector<double>& attr, const std::vector<int>& rows);

  const Tensor& value(Id id) const { return nodes_[id].val; }
  const Tensor& grad(Id id) const { return nodes_[id].grad; }

  /// Seeds the scalar node with gradient 1 and sweeps the tape in reverse.
  void backward(Id scalar);

 private:
  struct Node {
    Tensor val;
    Tensor grad;
    std::function<void(Tape&)> back;  // empty for leaves/constants
  };

  Id push(Tensor val, std::function<void(Tape&)> back);
  Tensor& grad_mut(Id id) { return nodes_[id].grad; }

  std::vector<Node> nodes_;
};

constexpr double kProbClamp = 1e-7;

}  // namespace eqg
