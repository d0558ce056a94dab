#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "pffc/control.hpp"
#include "pffc/linear_solver.hpp"
#include "pffc/model.hpp"

namespace pffc {

/// The state equation could not be solved at a time step.
class ForwardFailure : public std::runtime_error {
 public:
  ForwardFailure(int step, double residual, const std::string& what)
      : std::runtime_error(what), step_(step), residual_(residual) {}
  [[nodiscard]] int step() const { return step_; }
  [[nodiscard]] double residual() const { return residual_; }

 private:
  int step_;
  double residual_;
};

struct ForwardOptions {
  /// Absolute tolerance on the max-norm of the free residual entries.
  double tol = 1e-10;
  int max_iters = 50;
  int max_halvings = 12;
};

struct NewtonReport {
  int iterations = 0;
  std::vector<double> residuals;
  bool converged = false;
  int halvings = 0;
};

/// States at t_0..t_M, interleaved (u_x, u_y, phi) per node, with the active
/// masks act(m, m-1) of the converged steps (masks[0] is empty).
struct Trajectory {
  TimeGrid grid;
  std::vector<NodalField> states;
  std::vector<ActiveMask> masks;
  std::vector<NewtonReport> reports;

  [[nodiscard]] int steps() const { return grid.steps(); }
};

/// dG(0) time stepping of the state equation.
class ForwardSolver {
 public:
  ForwardSolver(const PhaseFieldForms& forms, const ControlSpace& controls, TimeGrid grid,
                NodalField fixed_load, ForwardOptions options = {});

  [[nodiscard]] const PhaseFieldForms& forms() const { return *forms_; }
  [[nodiscard]] const ControlSpace& controls() const { return *controls_; }
  [[nodiscard]] const TimeGrid& grid() const { return grid_; }
  [[nodiscard]] const ForwardOptions& options() const { return options_; }
  [[nodiscard]] const DofMap& dofs() const { return forms_->dofs(); }

  /// Initial state from nodal data: identity on the free entries.
  [[nodiscard]] NodalField project_initial(const NodalField& U0) const;
  /// Initial state from closed-form fields via mass-matrix projection.
  [[nodiscard]] NodalField project_initial(const std::function<double(Point)>& ux,
                                           const std::function<double(Point)>& uy,
                                           const std::function<double(Point)>& phi) const;

  /// Boundary load at step m: B q(t_m) + fixed traction.
  [[nodiscard]] NodalField load(const NodalField& c, int m) const;
  /// Residual of step m at U given the previous state, Dirichlet entries zeroed.
  [[nodiscard]] NodalField step_residual(int m, const NodalField& c, const NodalField& U,
                                         const NodalField& prev) const;
  /// gamma M_mask + eta M on the phi block plus dt_m a'_u(U), Dirichlet applied.
  [[nodiscard]] SparseOperator step_matrix(int m, const NodalField& U, const ActiveMask& mask) const;
  [[nodiscard]] std::shared_ptr<const SymbolicAnalysis> symbolic(const SparseOperator& A) const;

  /// One damped semismooth Newton solve; throws ForwardFailure.
  [[nodiscard]] std::pair<NodalField, NewtonReport> step(int m, const NodalField& c, const NodalField& prev) const;
  [[nodiscard]] Trajectory solve(const NodalField& c, const NodalField& U0) const;

  [[nodiscard]] double free_max_norm(const NodalField& r) const;

 private:
  const PhaseFieldForms* forms_;
  const ControlSpace* controls_;
  TimeGrid grid_;
  NodalField fixed_load_;
  ForwardOptions options_;
  mutable std::shared_ptr<const SymbolicAnalysis> symbolic_;
};

}  // namespace pffc
