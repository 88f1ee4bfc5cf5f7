#include "eqg/gradcheck.hpp"

#include <cmath>

namespace eqg {

GradCheckReport check_gradients(const std::function<double()>& loss,
                                ParamCollection& pc, double tolerance, double step) {
  GradCheckReport report;
  for (auto& [name, e] : pc.entries()) {
    for (size_t i = 0; i < e.value.size(); ++i) {
      const double saved = e.value.v[i];
      e.value.v[i] = saved + step;
      const double fp = loss();
      e.value.v[i] = saved - step;
      const double fm = loss();
      e.value.v[i] = saved;
      const double numeric = (fp - fm) / (2.0 * step);
      const double analytic = e.grad.v[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-3});
      const double rel = std::abs(analytic - numeric) / denom;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = name;
        report.worst_index = static_cast<int>(i);
      }
      if (rel >= tolerance)
        report.failures.push_back({name, static_cast<int>(i), analytic, numeric, rel});
    }
  }
  return report;
}

}  // namespace eqg
