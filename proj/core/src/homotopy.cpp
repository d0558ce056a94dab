#include "pffc/homotopy.hpp"

#include <cmath>
#include <stdexcept>

namespace pffc {

HomotopyResult run_homotopy(int K, const NodalField& c0, const HomotopyStepSolver& solve_step) {
  if (K < 0) throw std::invalid_argument("homotopy step count must be non-negative");
  HomotopyResult out;
  NodalField warm = c0;
  for (int k = 0; k <= K; ++k) {
    OptResult r = solve_step(k, warm);
    const bool ok = r.status == OptStatus::Converged;
    if (ok) warm = r.control;
    out.steps.push_back({k, std::move(r)});
    if (!ok) {
      out.failed_step = k;
      break;
    }
  }
  return out;
}

double homotopy_value(double value0, double factor, int k) { return value0 * std::pow(factor, k); }

}  // namespace pffc
