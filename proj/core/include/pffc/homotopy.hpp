#pragma once

#include <functional>
#include <vector>

#include "pffc/reduced.hpp"

namespace pffc {

struct HomotopyStep {
  int k = 0;
  OptResult result;
};

struct HomotopyResult {
  std::vector<HomotopyStep> steps;
  /// Index of the first step that did not converge, or -1.
  int failed_step = -1;

  [[nodiscard]] bool completed() const { return failed_step < 0; }
};

/// Solves step k from the warm start and returns its result.
using HomotopyStepSolver = std::function<OptResult(int k, const NodalField& warm_start)>;

/// Runs steps 0..K, warm-starting each from the previous optimum, and stops
/// at the first step that does not converge (its result is still recorded).
HomotopyResult run_homotopy(int K, const NodalField& c0, const HomotopyStepSolver& solve_step);

/// Geometric parameter schedule value0 * factor^k.
double homotopy_value(double value0, double factor, int k);

}  // namespace pffc
