#pragma once

#include <map>
#include <memory>
#include <vector>

#include "pffc/cost.hpp"
#include "pffc/forward.hpp"

namespace pffc {

/// Which mask weights z_m in the backward step. Consistent uses act(m, m-1),
/// the exact transpose of the tangent operator; Literal uses act(m+1, m).
enum class AdjointMaskRule { Consistent, Literal };

struct SensitivityOptions {
  AdjointMaskRule mask_rule = AdjointMaskRule::Consistent;
  /// Upper bound on memory held by cached per-step factorizations.
  std::size_t cache_bytes = std::size_t{1536} << 20;
};

/// Linearized step operators along a converged trajectory, with lazily
/// factorized and cached step matrices.
class StepSystems {
 public:
  StepSystems(const ForwardSolver& forward, const Trajectory& traj, SensitivityOptions options = {});

  /// A_m = gamma M_act(m,m-1) + eta M + dt_m a'_u(U_m), Dirichlet applied.
  [[nodiscard]] SparseOperator tangent_matrix(int m) const;
  /// The operator whose transpose drives the backward sweeps at step m.
  [[nodiscard]] SparseOperator adjoint_matrix(int m) const;

  [[nodiscard]] NodalField solve_tangent(int m, NodalField rhs);
  [[nodiscard]] NodalField solve_adjoint(int m, NodalField rhs);
  /// C_m V = (gamma M_act(m,m-1) + eta M) V on the phi block, m = 1..M.
  [[nodiscard]] NodalField coupling(int m, const NodalField& V) const;

  [[nodiscard]] std::size_t cached_bytes() const { return bytes_; }
  [[nodiscard]] int factorizations() const { return factorizations_; }

 private:
  const DirectSolver& factor(int m, bool adjoint);

  const ForwardSolver* forward_;
  const Trajectory* traj_;
  SensitivityOptions options_;
  std::map<std::pair<int, bool>, DirectSolver> cache_;
  DirectSolver scratch_;
  std::pair<int, bool> scratch_key_{-1, false};
  std::size_t bytes_ = 0;
  int factorizations_ = 0;
};

/// Adjoint, tangent and Hessian-adjoint sweeps at one control and its trajectory.
class Sensitivity {
 public:
  Sensitivity(const ForwardSolver& forward, const CostFunctional& cost, const Trajectory& traj,
              const DesiredField& desired, SensitivityOptions options = {});

  /// z_0..z_M, computed once.
  const std::vector<NodalField>& adjoint();
  [[nodiscard]] std::vector<NodalField> tangent(const NodalField& dc);
  [[nodiscard]] std::vector<NodalField> hessian_adjoint(const std::vector<NodalField>& dU);

  /// j'(q)(q_i) for every control coefficient.
  [[nodiscard]] NodalField gradient_dual(const NodalField& c);
  /// j''(q)(dc, q_i) for every control coefficient.
  [[nodiscard]] NodalField hessian_dual(const NodalField& dc);

  [[nodiscard]] StepSystems& systems() { return systems_; }

 private:
  /// sum_m dt_m B^T w_m collected per control block.
  [[nodiscard]] NodalField boundary_pairing(const std::vector<NodalField>& W) const;

  const ForwardSolver* forward_;
  const CostFunctional* cost_;
  const Trajectory* traj_;
  const DesiredField* desired_;
  StepSystems systems_;
  std::vector<NodalField> adjoint_;
};

}  // namespace pffc
