#pragma once

#include <functional>
#include <string>
#include <vector>

#include "eqg/params.hpp"

namespace eqg {

struct GradCheckIssue {
  std::string param;
  int index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  int worst_index = 0;
  std::vector<GradCheckIssue> failures;
  bool ok(double tol) const { return max_rel_error < tol; }
};

/// Compares the analytic gradient (populated into pc.grad by the closure via
/// backward) against central finite differences of the scalar loss.
/// `loss` must evaluate the loss at the current parameter values without
/// touching gradients.
GradCheckReport check_gradients(const std::function<double()>& loss,
                                ParamCollection& pc, double tolerance,
                                double step = 1e-4);

}  // namespace eqg
