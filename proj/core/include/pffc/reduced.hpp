#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pffc/sensitivity.hpp"

namespace pffc {

struct ReducedGradient {
  /// Dual vector j'(q)(q_i).
  NodalField raw;
  /// Riesz representative, G f = raw.
  NodalField f;
  /// sqrt(f^T G f).
  double norm = 0.0;
};

/// One row of the iteration table.
struct OptState {
  int step = 0;
  int iter = 0;
  int cg = 0;
  double rel_residual = 1.0;
  double abs_residual = 0.0;
  CostValues cost;
  double force = 0.0;
};

enum class OptStatus { Converged, MaxIterations, ForwardFailure, LineSearchFailure };

std::string to_string(OptStatus status);

struct NewtonCgOptions {
  double tol_abs = 5e-11;
  /// Relative tolerance; 0 disables the relative test.
  double tol_rel = 0.0;
  int max_iters = 50;
  double cg_rel_tol = 1e-2;
  double armijo_c1 = 1e-4;
  int max_backtracks = 12;
};

/// The reduced problem j(q) = J(q, S(q)).
class ReducedProblem {
 public:
  struct Evaluation {
    NodalField control;
    Trajectory trajectory;
    CostValues cost;
  };

  ReducedProblem(const ForwardSolver& forward, const CostFunctional& cost, DesiredField desired, NodalField U0,
                 SensitivityOptions options = {});

  [[nodiscard]] const ForwardSolver& forward() const { return *forward_; }
  [[nodiscard]] const CostFunctional& cost() const { return *cost_; }
  [[nodiscard]] const ControlSpace& controls() const { return forward_->controls(); }
  [[nodiscard]] const DesiredField& desired() const { return desired_; }
  [[nodiscard]] const NodalField& initial_state() const { return U0_; }

  /// Forward solve and cost; throws ForwardFailure.
  [[nodiscard]] Evaluation evaluate(const NodalField& c) const;
  [[nodiscard]] std::unique_ptr<Sensitivity> linearize(const Evaluation& at) const;
  [[nodiscard]] ReducedGradient gradient(Sensitivity& sens, const Evaluation& at) const;
  /// Riesz representative of j''(q) dc.
  [[nodiscard]] NodalField hessian_vector(Sensitivity& sens, const NodalField& dc) const;

 private:
  const ForwardSolver* forward_;
  const CostFunctional* cost_;
  DesiredField desired_;
  NodalField U0_;
  SensitivityOptions options_;
};

struct OptResult {
  OptStatus status = OptStatus::MaxIterations;
  std::string message;
  NodalField control;
  std::vector<OptState> history;
  /// Trajectory and adjoint at the returned control (empty if never evaluated).
  Trajectory trajectory;
  std::vector<NodalField> adjoint;
};

/// Called once per recorded iteration.
using IterationObserver = std::function<void(const OptState&)>;

/// Newton-CG with Armijo backtracking. `step` labels the rows (homotopy index).
OptResult newton_cg(const ReducedProblem& problem, const NodalField& c0, const NewtonCgOptions& options,
                    int step = 0, const IterationObserver& observer = {});

}  // namespace pffc
