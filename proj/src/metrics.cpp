#include "eqg/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace eqg {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
}

GroupGap delta_eo(const std::vector<int>& pred, const std::vector<int>& truth,
                  const std::vector<int>& sensitive, int class_count) {
  if (pred.size() != truth.size() || pred.size() != sensitive.size())
    throw std::invalid_argument("delta_eo: sequence lengths differ");
  GroupGap g;
  g.per_class.assign(class_count, kNan);
  for (int y = 0; y < class_count; ++y) {
    long n[2] = {0, 0};
    long hit[2] = {0, 0};
    for (size_t i = 0; i < truth.size(); ++i) {
      if (truth[i] != y) continue;
      const int a = sensitive[i];
      ++n[a];
      if (pred[i] == y) ++hit[a];
    }
    if (n[0] == 0 || n[1] == 0) {
      g.warnings.push_back("delta_eo: class " + std::to_string(y) +
                           " has an empty (y,a) cell; excluded");
      continue;
    }
    const double gap = std::abs(static_cast<double>(hit[0]) / n[0] -
                                static_cast<double>(hit[1]) / n[1]);
    g.per_class[y] = gap;
    g.max_gap = std::max(g.max_gap, gap);
  }
  return g;
}

GroupGap delta_sp(const std::vector<int>& pred, const std::vector<int>& sensitive,
                  int class_count) {
  if (pred.size() != sensitive.size())
    throw std::invalid_argument("delta_sp: sequence lengths differ");
  long n[2] = {0, 0};
  for (int a : sensitive) ++n[a];
  if (n[0] == 0 || n[1] == 0)
    throw std::invalid_argument("delta_sp: one sensitive group is empty");
  GroupGap g;
  g.per_class.assign(class_count, 0.0);
  for (int y = 0; y < class_count; ++y) {
    long hit[2] = {0, 0};
    for (size_t i = 0; i < pred.size(); ++i)
      if (pred[i] == y) ++hit[sensitive[i]];
    const double gap = std::abs(static_cast<double>(hit[0]) / n[0] -
                                static_cast<double>(hit[1]) / n[1]);
    g.per_class[y] = gap;
    g.max_gap = std::max(g.max_gap, gap);
  }
  return g;
}

Performance performance(const std::vector<int>& pred, const std::vector<int>& truth,
                        int class_count) {
  if (pred.size() != truth.size())
    throw std::invalid_argument("performance: sequence lengths differ");
  Performance p;
  long correct = 0;
  long tp_total = 0, fp_total = 0, fn_total = 0;
  p.per_class_f1.assign(class_count, 0.0);
  double f1_sum = 0.0;
  for (int y = 0; y < class_count; ++y) {
    long tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < pred.size(); ++i) {
      if (pred[i] == y && truth[i] == y) ++tp;
      else if (pred[i] == y) ++fp;
      else if (truth[i] == y) ++fn;
    }
    tp_total += tp;
    fp_total += fp;
    fn_total += fn;
    const double denom = 2.0 * tp + fp + fn;
    const double f1 = denom > 0.0 ? 2.0 * tp / denom : 0.0;  // zero-division -> 0
    p.per_class_f1[y] = f1;
    f1_sum += f1;
  }
  for (size_t i = 0; i < pred.size(); ++i)
    if (pred[i] == truth[i]) ++correct;
  p.acc = static_cast<double>(correct) / static_cast<double>(pred.size());
  p.f1_macro = f1_sum / class_count;
  const double micro_denom = 2.0 * tp_total + fp_total + fn_total;
  p.f1_micro = micro_denom > 0.0 ? 2.0 * tp_total / micro_denom : 0.0;
  return p;
}

MetricsReport evaluate(const std::vector<int>& pred, const std::vector<int>& truth,
                       const std::vector<int>& sensitive, int class_count) {
  MetricsReport r;
  const GroupGap eo = delta_eo(pred, truth, sensitive, class_count);
  const GroupGap sp = delta_sp(pred, sensitive, class_count);
  const Performance perf = performance(pred, truth, class_count);
  r.delta_eo = eo.max_gap;
  r.delta_sp = sp.max_gap;
  r.per_class_eo = eo.per_class;
  r.per_class_sp = sp.per_class;
  r.acc = perf.acc;
  r.f1_macro = perf.f1_macro;
  r.f1_micro = perf.f1_micro;
  r.per_class_f1 = perf.per_class_f1;
  r.warnings = eo.warnings;
  return r;
}

std::string MetricsReport::to_json() const {
  nlohmann::json j;
  j["delta_eo"] = delta_eo;
  j["delta_sp"] = delta_sp;
  auto nan_to_null = [](const std::vector<double>& xs) {
    nlohmann::json out = nlohmann::json::array();
    for (double x : xs)
      out.push_back(std::isnan(x) ? nlohmann::json() : nlohmann::json(x));
    return out;
  };
  j["per_class_eo"] = nan_to_null(per_class_eo);
  j["per_class_sp"] = nan_to_null(per_class_sp);
  j["acc"] = acc;
  j["f1_macro"] = f1_macro;
  j["f1_micro"] = f1_micro;
  j["per_class_f1"] = per_class_f1;
  j["warnings"] = warnings;
  return j.dump(2);
}

std::string MetricsReport::csv_header() { return "delta_eo,delta_sp,acc,f1_macro,f1_micro"; }

std::string MetricsReport::to_csv_row() const {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%.2f,%.2f,%.2f,%.2f,%.2f", 100.0 * delta_eo,
                100.0 * delta_sp, 100.0 * acc, 100.0 * f1_macro, 100.0 * f1_micro);
  return buf;
}

}  // namespace eqg
