#include "eqg/sampler.hpp"

#include <stdexcept>

#include "json.hpp"

namespace eqg {

std::string ConditionalTable::to_json() const {
  nlohmann::json j;
  j["class_count"] = class_count;
  for (int y = 0; y < class_count; ++y) {
    j["probs"].push_back({p(y, 0), p(y, 1)});
    j["counts"].push_back({count(y, 0), count(y, 1)});
  }
  j["marginal_a"] = marginal_a;
  return j.dump(2);
}

ConditionalTable fit_conditional(const std::vector<int>& labels,
                                 const std::vector<int>& sensitive,
                                 const std::vector<int>& train_idx, int class_count,
                                 double smoothing) {
  if (train_idx.empty()) throw std::invalid_argument("fit_conditional: empty train set");
  if (smoothing < 0.0) throw std::invalid_argument("fit_conditional: negative smoothing");
  ConditionalTable t;
  t.class_count = class_count;
  t.counts.assign(static_cast<size_t>(class_count) * 2, 0);
  long total_a[2] = {0, 0};
  for (int i : train_idx) {
    const int y = labels[i];
    const int a = sensitive[i];
    if (y < 0 || y >= class_count)
      throw std::invalid_argument("fit_conditional: label out of range");
    if (a != 0 && a != 1)
      throw std::invalid_argument("fit_conditional: sensitive attribute not in {0,1}");
    ++t.counts[static_cast<size_t>(y) * 2 + a];
    ++total_a[a];
  }
  const double n = static_cast<double>(train_idx.size());
  t.marginal_a = {total_a[0] / n, total_a[1] / n};
  t.probs.assign(static_cast<size_t>(class_count) * 2, 0.0);
  for (int y = 0; y < class_count; ++y) {
    const long cy = t.count(y, 0) + t.count(y, 1);
    if (cy == 0 && smoothing == 0.0)
      throw std::invalid_argument(
          "fit_conditional: class " + std::to_string(y) +
          " absent from train set; use smoothing > 0");
    for (int a = 0; a < 2; ++a)
      t.probs[static_cast<size_t>(y) * 2 + a] =
          (t.count(y, a) + smoothing) / (cy + 2.0 * smoothing);
  }
  return t;
}

std::vector<int> sample_dummies(const ConditionalTable& table,
                                const std::vector<int>& labels,
                                const std::vector<int>& positions, int total_size,
                                Rng& rng) {
  std::vector<int> out(total_size, 0);
  for (int i : positions) out[i] = rng.bernoulli(table.p(labels[i], 1));
  return out;
}

}  // namespace eqg
