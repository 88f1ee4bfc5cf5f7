#pragma once

#include <string>
#include <vector>

#include "eqg/rng.hpp"

namespace eqg {

/// Estimated conditional distribution P(A | Y) for a binary attribute.
struct ConditionalTable {
  int class_count = 0;
  std::vector<double> probs;      // K x 2 row-major, probs[y*2+a] = P(A=a | Y=y)
  std::vector<double> marginal_a; // length 2
  std::vector<long> counts;       // K x 2 raw (y, a) counts

  double p(int y, int a) const { return probs[static_cast<size_t>(y) * 2 + a]; }
  long count(int y, int a) const { return counts[static_cast<size_t>(y) * 2 + a]; }
  std::string to_json() const;
};

/// Counting estimate with Laplace pseudo-count `smoothing`:
///   P(A=a|Y=y) = (count(y,a)+s) / (count(y)+2s)
/// With s=0 this equals the Bayes-rule expression
///   P(Y=y|A=a)P(A=a) / sum_a' P(Y=y|A=a')P(A=a')
/// evaluated from the same counts.
ConditionalTable fit_conditional(const std::vector<int>& labels,
                                 const std::vector<int>& sensitive,
                                 const std::vector<int>& train_idx, int class_count,
                                 double smoothing = 1.0);

/// Draws one dummy attribute per position in `positions`, each from
/// probs[labels[i]]. Positions not listed get value 0.
std::vector<int> sample_dummies(const ConditionalTable& table,
                                const std::vector<int>& labels,
                                const std::vector<int>& positions, int total_size,
                                Rng& rng);

}  // namespace eqg
