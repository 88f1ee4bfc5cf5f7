#include "eqg/params.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace eqg {

void ParamCollection::add_glorot(const std::string& name, int rows, int cols, Rng& rng) {
  Tensor t(rows, cols);
  const double bound = std::sqrt(6.0 / (rows + cols));
  for (double& x : t.v) x = rng.uniform(-bound, bound);
  add(name, std::move(t));
}

void ParamCollection::add_zeros(const std::string& name, int rows, int cols) {
  add(name, Tensor(rows, cols));
}

void ParamCollection::add(const std::string& name, Tensor value) {
  if (entries_.count(name)) throw std::invalid_argument("duplicate parameter: " + name);
  Entry e;
  e.grad = Tensor(value.rows, value.cols);
  e.m = Tensor(value.rows, value.cols);
  e.v = Tensor(value.rows, value.cols);
  e.value = std::move(value);
  entries_.emplace(name, std::move(e));
}

ParamCollection::Entry& ParamCollection::at(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::out_of_range("no parameter named " + name);
  return it->second;
}

const ParamCollection::Entry& ParamCollection::at(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::out_of_range("no parameter named " + name);
  return it->second;
}

void ParamCollection::zero_grads() {
  for (auto& [name, e] : entries_)
    for (double& x : e.grad.v) x = 0.0;
}

void ParamCollection::adam_step(double lr, double weight_decay, double beta1,
                                double beta2, double eps) {
  ++step_;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_));
  for (auto& [name, e] : entries_) {
    for (size_t i = 0; i < e.value.size(); ++i) {
      const double g = e.grad.v[i] + weight_decay * e.value.v[i];
      e.m.v[i] = beta1 * e.m.v[i] + (1.0 - beta1) * g;
      e.v.v[i] = beta2 * e.v.v[i] + (1.0 - beta2) * g * g;
      const double mhat = e.m.v[i] / bc1;
      const double vhat = e.v.v[i] / bc2;
      e.value.v[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

void ParamCollection::save_json(const std::string& path) const {
  nlohmann::json j;
  j["step"] = step_;
  for (const auto& [name, e] : entries_) {
    j["params"][name] = {
        {"rows", e.value.rows}, {"cols", e.value.cols}, {"data", e.value.v}};
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << j.dump();
}

ParamCollection ParamCollection::load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  nlohmann::json j;
  in >> j;
  ParamCollection pc;
  pc.step_ = j.value("step", 0L);
  for (auto& [name, t] : j.at("params").items()) {
    Tensor v(t.at("rows").get<int>(), t.at("cols").get<int>(),
             t.at("data").get<std::vector<double>>());
    pc.add(name, std::move(v));
  }
  return pc;
}

BoundParams BoundParams::bind(Tape& tape, ParamCollection& pc) {
  BoundParams bp;
  bp.owner = &pc;
  for (const auto& [name, e] : pc.entries()) bp.ids[name] = tape.leaf(e.value);
  return bp;
}

void BoundParams::pull_grads(const Tape& tape) {
  for (const auto& [name, id] : ids) {
    auto& g = owner->at(name).grad;
    const Tensor& tg = tape.grad(id);
    for (size_t i = 0; i < g.size(); ++i) g.v[i] += tg.v[i];
  }
}

}  // namespace eqg
