#pragma once

#include <string>
#include <vector>

namespace eqg {

struct GroupGap {
  std::vector<double> per_class;  // NaN where a required cell is empty
  double max_gap = 0.0;           // over defined classes
  std::vector<std::string> warnings;
};

/// Per class y: |P(pred=y | truth=y, A=0) - P(pred=y | truth=y, A=1)|.
/// Classes where either (y, a) cell is empty are excluded with a warning.
GroupGap delta_eo(const std::vector<int>& pred, const std::vector<int>& truth,
                  const std::vector<int>& sensitive, int class_count);

/// Per class y: |P(pred=y | A=0) - P(pred=y | A=1)|. Errors if a group is empty.
GroupGap delta_sp(const std::vector<int>& pred, const std::vector<int>& sensitive,
                  int class_count);

struct Performance {
  double acc = 0.0;
  double f1_macro = 0.0;
  double f1_micro = 0.0;
  std::vector<double> per_class_f1;
};

Performance performance(const std::vector<int>& pred, const std::vector<int>& truth,
                        int class_count);

struct MetricsReport {
  double delta_eo = 0.0;
  double delta_sp = 0.0;
  std::vector<double> per_class_eo;
  std::vector<double> per_class_sp;
  double acc = 0.0;
  double f1_macro = 0.0;
  double f1_micro = 0.0;
  std::vector<double> per_class_f1;
  std::vector<std::string> warnings;

  std::string to_json() const;
  /// One CSV row, values x100, column order: dEO, dSP, ACC, F1-macro, F1-micro.
  std::string to_csv_row() const;
  static std::string csv_header();
};

MetricsReport evaluate(const std::vector<int>& pred, const std::vector<int>& truth,
                       const std::vector<int>& sensitive, int class_count);

/// Restriction of full-graph sequences to an index subset.
template <class T>
std::vector<T> take(const std::vector<T>& xs, const std::vector<int>& idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(xs[i]);
  return out;
}

}  // namespace eqg
