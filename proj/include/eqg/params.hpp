#pragma once

#include <map>
#include <string>

#include "eqg/rng.hpp"
#include "eqg/tape.hpp"
#include "eqg/tensor.hpp"

namespace eqg {

/// Named parameter tensors with paired gradient and Adam moment buffers.
class ParamCollection {
 public:
  struct Entry {
    Tensor value;
    Tensor grad;
    Tensor m;
    Tensor v;
  };

  /// Registers a parameter initialized uniformly in +-sqrt(6/(fan_in+fan_out)).
  void add_glorot(const std::string& name, int rows, int cols, Rng& rng);
  void add_zeros(const std::string& name, int rows, int cols);
  void add(const std::string& name, Tensor value);

  Entry& at(const std::string& name);
  const Entry& at(const std::string& name) const;
  bool has(const std::string& name) const { return entries_.count(name) > 0; }

  void zero_grads();
  long step_count() const { return step_; }

  const std::map<std::string, Entry>& entries() const { return entries_; }
  std::map<std::string, Entry>& entries() { return entries_; }

  /// Standard Adam with L2 weight decay added to the gradient. Increments the
  /// shared step counter once per call.
  void adam_step(double lr, double weight_decay, double beta1 = 0.9,
                 double beta2 = 0.999, double eps = 1e-8);

  void save_json(const std::string& path) const;
  static ParamCollection load_json(const std::string& path);

 private:
  std::map<std::string, Entry> entries_;
  long step_ = 0;
};

/// Leaf ids of a ParamCollection on one tape. pull_grads copies tape gradients
/// back into the collection's grad buffers (accumulating).
struct BoundParams {
  std::map<std::string, Tape::Id> ids;
  ParamCollection* owner = nullptr;

  static BoundParams bind(Tape& tape, ParamCollection& pc);
  Tape::Id operator[](const std::string& name) const { return ids.at(name); }
  void pull_grads(const Tape& tape);
};

}  // namespace eqg
