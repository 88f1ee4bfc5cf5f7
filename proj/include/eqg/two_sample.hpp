#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "eqg/tensor.hpp"

namespace eqg {

/// Row i of x2 is paired with row i of x1.
struct PairedSample {
  Tensor x1;
  Tensor x2;
  int n() const { return x1.rows; }
  int dim() const { return x1.cols; }
};

struct TwoSampleResult {
  double t_statistic = 0.0;
  double p_value = 1.0;
  double test_accuracy = 0.0;  // accuracy-based tests only
  int n_test = 0;
  bool zero_variance = false;  // degenerate paired differences
};

struct TwoSampleConfig {
  double split_ratio = 0.5;  // fraction of pairs used for training
  int epochs = 200;
  double lr = 1e-3;
  int perm_hidden = 16;  // hidden width of the permutation-test classifier
};

/// x1 ~ standard 2-dim Gaussian; x2 = x1 + (eps, 0).
PairedSample gen_shift(int n, uint64_t seed, double eps = 0.1);

/// x2 = R(theta) x1 rowwise.
PairedSample gen_rotation(int n, uint64_t seed, double theta = M_PI / 2.0);

/// One-sided tail of the null accuracy distribution N(1/2, 1/(4 n_test)).
double p_value_from_accuracy(double accuracy, int n_test);

/// Differentiable permutation test: a one-hidden-layer classifier on the
/// 2d-wide (possibly swapped) pair predicts the swap bit; t = held-out bit
/// accuracy.
TwoSampleResult run_permutation_test(const PairedSample& sample,
                                     const TwoSampleConfig& cfg, uint64_t seed);

/// Classifier two-sample test on single samples (linear classifier, width d).
TwoSampleResult run_c2st(const PairedSample& sample, const TwoSampleConfig& cfg,
                         uint64_t seed);

/// Learned linear projection to a scalar, trained by gradient ascent on the
/// squared unpaired t-statistic; two-sided p of the held-out t.
TwoSampleResult run_ttest_adapted(const PairedSample& sample,
                                  const TwoSampleConfig& cfg, uint64_t seed);

/// Same projection, paired t-statistic on per-pair differences.
TwoSampleResult run_paired_ttest_adapted(const PairedSample& sample,
                                         const TwoSampleConfig& cfg, uint64_t seed);

struct SyntheticTable {
  // row order: t-test, paired t-test, c2st, permutation; columns: shift, rotation
  double p[4][2] = {};
  static const char* row_name(int r);
  std::string to_csv() const;
};

/// The 4x2 averaged p-value table of the study.
SyntheticTable run_synthetic_table(int n_pairs, int runs, uint64_t seed,
                                   const TwoSampleConfig& cfg, bool identical = false);

}  // namespace eqg
