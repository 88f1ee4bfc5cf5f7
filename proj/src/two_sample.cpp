#include "eqg/two_sample.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "eqg/params.hpp"
#include "eqg/rng.hpp"
#include "eqg/stats.hpp"

namespace eqg {

namespace {

std::vector<int> iota_rows(int n) {
  std::vector<int> rows(n);
  for (int i = 0; i < n; ++i) rows[i] = i;
  return rows;
}

int train_count(int n, double ratio) {
  int k = static_cast<int>(std::floor(n * ratio));
  if (k < 1 || k >= n) throw std::invalid_argument("two_sample: split leaves an empty side");
  return k;
}

Tensor slice_rows(const Tensor& t, int begin, int end) {
  Tensor out(end - begin, t.cols);
  for (int r = begin; r < end; ++r)
    for (int c = 0; c < t.cols; ++c) out.at(r - begin, c) = t.at(r, c);
  return out;
}

/// Pairs (x1_i, x2_i) laid side by side, swapped where bit_i == 1.
Tensor pair_rows(const Tensor& x1, const Tensor& x2, const std::vector<int>& bits) {
  int d = x1.cols;
  Tensor out(x1.rows, 2 * d);
  for (int r = 0; r < x1.rows; ++r) {
    const Tensor& a = bits[r] ? x2 : x1;
    const Tensor& b = bits[r] ? x1 : x2;
    for (int c = 0; c < d; ++c) {
      out.at(r, c) = a.at(r, c);
      out.at(r, d + c) = b.at(r, c);
    }
  }
  return out;
}

std::vector<int> draw_bits(int n, Rng& rng) {
  std::vector<int> bits(n);
  for (int& b : bits) b = rng.bernoulli(0.5);
  return bits;
}

}  // namespace

PairedSample gen_shift(int n, uint64_t seed, double eps) {
  Rng rng = Rng::substream(seed, "two_sample_shift");
  PairedSample s{Tensor(n, 2), Tensor(n, 2)};
  for (int i = 0; i < n; ++i) {
    double a = rng.normal(), b = rng.normal();
    s.x1.at(i, 0) = a;
    s.x1.at(i, 1) = b;
    s.x2.at(i, 0) = a + eps;
    s.x2.at(i, 1) = b;
  }
  return s;
}

PairedSample gen_rotation(int n, uint64_t seed, double theta) {
  Rng rng = Rng::substream(seed, "two_sample_rotation");
  double ct = std::cos(theta), st = std::sin(theta);
  PairedSample s{Tensor(n, 2), Tensor(n, 2)};
  for (int i = 0; i < n; ++i) {
    double a = rng.normal(), b = rng.normal();
    s.x1.at(i, 0) = a;
    s.x1.at(i, 1) = b;
    s.x2.at(i, 0) = ct * a - st * b;
    s.x2.at(i, 1) = st * a + ct * b;
  }
  return s;
}

double p_value_from_accuracy(double accuracy, int n_test) {
  // Under H0 the test accuracy is approximately N(1/2, 1/(4 n_test)).
  double z = (accuracy - 0.5) * 2.0 * std::sqrt(static_cast<double>(n_test));
  return normal_sf(z);
}

TwoSampleResult run_permutation_test(const PairedSample& sample,
                                     const TwoSampleConfig& cfg, uint64_t seed) {
  int n = sample.n(), d = sample.dim();
  int n_train = train_count(n, cfg.split_ratio);
  int n_test = n - n_train;
  Tensor x1_tr = slice_rows(sample.x1, 0, n_train);
  Tensor x2_tr = slice_rows(sample.x2, 0, n_train);

  ParamCollection pc;
  Rng init = Rng::substream(seed, "perm_init");
  int h = cfg.perm_hidden;
  pc.add_glorot("W1", 2 * d, h, init);
  pc.add_zeros("b1", 1, h);
  pc.add_glorot("W2", h, 1, init);
  pc.add_zeros("b2", 1, 1);
  std::vector<int> all_train = iota_rows(n_train);

  auto forward = [&](Tape& tape, const BoundParams& bp, const Tensor& input) {
    Tape::Id x = tape.constant(input);
    Tape::Id a1 = tape.relu(tape.add_row(tape.matmul(x, bp["W1"]), bp["b1"]));
    return tape.sigmoid(tape.add_row(tape.matmul(a1, bp["W2"]), bp["b2"]));
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng bit_rng = Rng::substream(seed, "perm_bits", static_cast<uint64_t>(epoch));
    std::vector<int> bits = draw_bits(n_train, bit_rng);
    Tensor input = pair_rows(x1_tr, x2_tr, bits);
    std::vector<double> targets(bits.begin(), bits.end());

    Tape tape;
    BoundParams bp = BoundParams::bind(tape, pc);
    Tape::Id probs = forward(tape, bp, input);
    Tape::Id loss = tape.bce_masked(probs, targets, all_train);
    tape.backward(loss);
    pc.zero_grads();
    bp.pull_grads(tape);
    pc.adam_step(cfg.lr, 0.0);
  }

  Rng test_rng = Rng::substream(seed, "perm_test_bits");
  std::vector<int> test_bits = draw_bits(n_test, test_rng);
  Tensor test_input = pair_rows(slice_rows(sample.x1, n_train, n),
                                slice_rows(sample.x2, n_train, n), test_bits);
  Tape tape;
  BoundParams bp = BoundParams::bind(tape, pc);
  const Tensor& probs = tape.value(forward(tape, bp, test_input));
  int correct = 0;
  for (int i = 0; i < n_test; ++i)
    correct += (probs.at(i, 0) >= 0.5 ? 1 : 0) == test_bits[i];

  TwoSampleResult res;
  res.n_test = n_test;
  res.test_accuracy = static_cast<double>(correct) / n_test;
  res.t_statistic = res.test_accuracy;
  res.p_value = p_value_from_accuracy(res.test_accuracy, n_test);
  return res;
}

TwoSampleResult run_c2st(const PairedSample& sample, const TwoSampleConfig& cfg,
                         uint64_t seed) {
  int n = sample.n(), d = sample.dim();
  int n_train = train_count(n, cfg.split_ratio);
  int n_test = n - n_train;

  // Stacked single samples: group 0 rows then group 1 rows.
  auto stack = [&](int begin, int end) {
    int m = end - begin;
    Tensor out(2 * m, d);
    std::vector<double> targets(2 * m);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < d; ++c) {
        out.at(r, c) = sample.x1.at(begin + r, c);
        out.at(m + r, c) = sample.x2.at(begin + r, c);
      }
    for (int r = 0; r < m; ++r) targets[m + r] = 1.0;
    return std::make_pair(out, targets);
  };
  auto [train_x, train_y] = stack(0, n_train);
  auto [test_x, test_y] = stack(n_train, n);

  ParamCollection pc;
  Rng init = Rng::substream(seed, "c2st_init");
  pc.add_glorot("W", d, 1, init);
  pc.add_zeros("b", 1, 1);
  std::vector<int> all_train = iota_rows(2 * n_train);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Tape tape;
    BoundParams bp = BoundParams::bind(tape, pc);
    Tape::Id x = tape.constant(train_x);
    Tape::Id probs = tape.sigmoid(tape.add_row(tape.matmul(x, bp["W"]), bp["b"]));
    Tape::Id loss = tape.bce_masked(probs, train_y, all_train);
    tape.backward(loss);
    pc.zero_grads();
    bp.pull_grads(tape);
    pc.adam_step(cfg.lr, 0.0);
  }

  Tape tape;
  BoundParams bp = BoundParams::bind(tape, pc);
  Tape::Id x = tape.constant(test_x);
  const Tensor& probs =
      tape.value(tape.sigmoid(tape.add_row(tape.matmul(x, bp["W"]), bp["b"])));
  int correct = 0;
  for (int i = 0; i < 2 * n_test; ++i)
    correct += (probs.at(i, 0) >= 0.5 ? 1.0 : 0.0) == test_y[i];

  TwoSampleResult res;
  res.n_test = 2 * n_test;
  res.test_accuracy = static_cast<double>(correct) / (2 * n_test);
  res.t_statistic = res.test_accuracy;
  res.p_value = p_value_from_accuracy(res.test_accuracy, res.n_test);
  return res;
}

namespace {

/// Unpaired Welch t on projected scalars; sample (n-1) variances.
Tape::Id unpaired_t(Tape& tape, Tape::Id u1, Tape::Id u2, int n1, int n2,
                    const std::vector<int>& rows1, const std::vector<int>& rows2) {
  Tape::Id m1 = tape.masked_mean(u1, rows1);
  Tape::Id m2 = tape.masked_mean(u2, rows2);
  Tape::Id v1 = tape.scale(tape.masked_var(u1, rows1), static_cast<double>(n1) / (n1 - 1));
  Tape::Id v2 = tape.scale(tape.masked_var(u2, rows2), static_cast<double>(n2) / (n2 - 1));
  Tape::Id denom = tape.sqrt_op(
      tape.add(tape.scale(v1, 1.0 / n1), tape.scale(v2, 1.0 / n2)));
  return tape.div(tape.sub(m1, m2), denom);
}

Tape::Id paired_t(Tape& tape, Tape::Id u, int n, const std::vector<int>& rows) {
  Tape::Id m = tape.masked_mean(u, rows);
  Tape::Id v = tape.scale(tape.masked_var(u, rows), static_cast<double>(n) / (n - 1));
  Tape::Id denom = tape.sqrt_op(tape.scale(v, 1.0 / n));
  return tape.div(m, denom);
}

}  // namespace

TwoSampleResult run_ttest_adapted(const PairedSample& sample,
                                  const TwoSampleConfig& cfg, uint64_t seed) {
  int n = sample.n(), d = sample.dim();
  int n_train = train_count(n, cfg.split_ratio);
  int n_test = n - n_train;
  Tensor x1_tr = slice_rows(sample.x1, 0, n_train);
  Tensor x2_tr = slice_rows(sample.x2, 0, n_train);
  std::vector<int> rows_tr = iota_rows(n_train);

  ParamCollection pc;
  Rng init = Rng::substream(seed, "ttest_init");
  pc.add_glorot("w", d, 1, init);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Tape tape;
    BoundParams bp = BoundParams::bind(tape, pc);
    Tape::Id u1 = tape.matmul(tape.constant(x1_tr), bp["w"]);
    Tape::Id u2 = tape.matmul(tape.constant(x2_tr), bp["w"]);
    Tape::Id t = unpaired_t(tape, u1, u2, n_train, n_train, rows_tr, rows_tr);
    Tape::Id loss = tape.scale(tape.square(t), -1.0);  // ascend t^2
    tape.backward(loss);
    pc.zero_grads();
    bp.pull_grads(tape);
    pc.adam_step(cfg.lr, 0.0);
  }

  Tensor x1_te = slice_rows(sample.x1, n_train, n);
  Tensor x2_te = slice_rows(sample.x2, n_train, n);
  std::vector<int> rows_te = iota_rows(n_test);
  Tape tape;
  BoundParams bp = BoundParams::bind(tape, pc);
  Tape::Id u1 = tape.matmul(tape.constant(x1_te), bp["w"]);
  Tape::Id u2 = tape.matmul(tape.constant(x2_te), bp["w"]);
  double t = tape.value(unpaired_t(tape, u1, u2, n_test, n_test, rows_te, rows_te)).at(0, 0);

  TwoSampleResult res;
  res.n_test = n_test;
  res.t_statistic = t;
  res.p_value = normal_sf_two_sided(t);  // df is large enough for the normal tail
  return res;
}

TwoSampleResult run_paired_ttest_adapted(const PairedSample& sample,
                                         const TwoSampleConfig& cfg, uint64_t seed) {
  int n = sample.n(), d = sample.dim();
  int n_train = train_count(n, cfg.split_ratio);
  int n_test = n - n_train;
  Tensor diff(n, d);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < d; ++c) diff.at(r, c) = sample.x1.at(r, c) - sample.x2.at(r, c);
  Tensor diff_tr = slice_rows(diff, 0, n_train);
  Tensor diff_te = slice_rows(diff, n_train, n);
  std::vector<int> rows_tr = iota_rows(n_train);
  std::vector<int> rows_te = iota_rows(n_test);

  ParamCollection pc;
  Rng init = Rng::substream(seed, "paired_ttest_init");
  pc.add_glorot("w", d, 1, init);

  auto project = [&](Tape& tape, const BoundParams& bp, const Tensor& x) {
    return tape.matmul(tape.constant(x), bp["w"]);
  };
  auto projected_stats = [&](const Tensor& x, const std::vector<int>& rows) {
    Tape tape;
    BoundParams bp = BoundParams::bind(tape, pc);
    const Tensor& u = tape.value(project(tape, bp, x));
    double mean = 0.0;
    for (int r : rows) mean += u.at(r, 0);
    mean /= rows.size();
    double var = 0.0;
    for (int r : rows) var += (u.at(r, 0) - mean) * (u.at(r, 0) - mean);
    var /= rows.size();
    return std::make_pair(mean, var);
  };

  TwoSampleResult res;
  res.n_test = n_test;

  // A constant difference vector (pure shift) makes the paired variance
  // exactly zero: the t-statistic is degenerate and no training is possible.
  auto [mean0, var0] = projected_stats(diff_tr, rows_tr);
  if (var0 <= 1e-24 * std::max(1.0, mean0 * mean0)) {
    res.zero_variance = true;
    if (std::abs(mean0) > 0.0) {
      res.t_statistic = std::numeric_limits<double>::infinity();
      res.p_value = 0.0;
    } else {
      res.t_statistic = 0.0;
      res.p_value = 1.0;  // identical samples: nothing to detect
    }
    return res;
  }

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Tape tape;
    BoundParams bp = BoundParams::bind(tape, pc);
    Tape::Id t = paired_t(tape, project(tape, bp, diff_tr), n_train, rows_tr);
    Tape::Id loss = tape.scale(tape.square(t), -1.0);
    tape.backward(loss);
    pc.zero_grads();
    bp.pull_grads(tape);
    pc.adam_step(cfg.lr, 0.0);
  }

  auto [mean_te, var_te] = projected_stats(diff_te, rows_te);
  if (var_te <= 0.0) {
    res.zero_variance = true;
    res.t_statistic = mean_te == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    res.p_value = mean_te == 0.0 ? 1.0 : 0.0;
    return res;
  }
  double sd = std::sqrt(var_te * n_test / (n_test - 1));
  res.t_statistic = mean_te / (sd / std::sqrt(static_cast<double>(n_test)));
  res.p_value = normal_sf_two_sided(res.t_statistic);
  return res;
}

const char* SyntheticTable::row_name(int r) {
  static const char* names[4] = {"t-test", "paired-t-test", "c2st", "permutation"};
  return names[r];
}

std::string SyntheticTable::to_csv() const {
  std::ostringstream os;
  os << "test,shift,rotation\n";
  for (int r = 0; r < 4; ++r)
    os << row_name(r) << "," << p[r][0] << "," << p[r][1] << "\n";
  return os.str();
}

SyntheticTable run_synthetic_table(int n_pairs, int runs, uint64_t seed,
                                   const TwoSampleConfig& cfg, bool identical) {
  SyntheticTable table;
  for (int run = 0; run < runs; ++run) {
    uint64_t run_seed = seed + static_cast<uint64_t>(run);
    PairedSample shift = gen_shift(2 * n_pairs, run_seed, identical ? 0.0 : 0.1);
    PairedSample rot = identical ? gen_shift(2 * n_pairs, run_seed + 1, 0.0)
                                 : gen_rotation(2 * n_pairs, run_seed);
    const PairedSample* sets[2] = {&shift, &rot};
    for (int col = 0; col < 2; ++col) {
      table.p[0][col] += run_ttest_adapted(*sets[col], cfg, run_seed).p_value;
      table.p[1][col] += run_paired_ttest_adapted(*sets[col], cfg, run_seed).p_value;
      table.p[2][col] += run_c2st(*sets[col], cfg, run_seed).p_value;
      table.p[3][col] += run_permutation_test(*sets[col], cfg, run_seed).p_value;
    }
  }
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 2; ++c) table.p[r][c] /= runs;
  return table;
}

}  // namespace eqg
