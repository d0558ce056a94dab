#include "pffc/sensitivity.hpp"

#include <stdexcept>

namespace pffc {

StepSystems::StepSystems(const ForwardSolver& forward, const Trajectory& traj, SensitivityOptions options)
    : forward_(&forward), traj_(&traj), options_(options) {
  if (static_cast<int>(traj.states.size()) != forward.grid().steps() + 1) {
    throw std::invalid_argument("trajectory does not match the time grid");
  }
}

SparseOperator StepSystems::tangent_matrix(int m) const {
  const auto um = static_cast<std::size_t>(m);
  return forward_->step_matrix(m, traj_->states[um], traj_->masks[um]);
}

SparseOperator StepSystems::adjoint_matrix(int m) const {
  const int M = traj_->steps();
  if (options_.mask_rule == AdjointMaskRule::Consistent || m == M) return tangent_matrix(m);
  const auto um = static_cast<std::size_t>(m);
  return forward_->step_matrix(m, traj_->states[um], traj_->masks[um + 1]);
}

const DirectSolver& StepSystems::factor(int m, bool adjoint) {
  // The consistent rule shares one factorization between both sweeps.
  const bool separate = adjoint && options_.mask_rule == AdjointMaskRule::Literal && m != traj_->steps();
  const std::pair<int, bool> key{m, separate};
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  if (scratch_key_ == key && scratch_.ready()) return scratch_;

  const SparseOperator A = separate ? adjoint_matrix(m) : tangent_matrix(m);
  DirectSolver solver;
  try {
    solver.factorize(A, forward_->symbolic(A));
  } catch (const SolverFailure& e) {
    throw SolverFailure("linearized step " + std::to_string(m) + ": " + e.what());
  }
  ++factorizations_;
  if (bytes_ + solver.memory_bytes() <= options_.cache_bytes) {
    bytes_ += solver.memory_bytes();
    return cache_.emplace(key, std::move(solver)).first->second;
  }
  scratch_ = std::move(solver);
  scratch_key_ = key;
  return scratch_;
}

NodalField StepSystems::solve_tangent(int m, NodalField rhs) {
  zero_dirichlet(rhs, forward_->dofs());
  return factor(m, false).solve(rhs);
}

NodalField StepSystems::solve_adjoint(int m, NodalField rhs) {
  zero_dirichlet(rhs, forward_->dofs());
  return factor(m, true).solve_transposed(rhs);
}

NodalField StepSystems::coupling(int m, const NodalField& V) const {
  const auto& forms = forward_->forms();
  const auto& P = forms.params();
  return forms.apply_phi_mass(&traj_->masks[static_cast<std::size_t>(m)], P.gamma, V) +
         forms.apply_phi_mass(nullptr, P.eta, V);
}

Sensitivity::Sensitivity(const ForwardSolver& forward, const CostFunctional& cost, const Trajectory& traj,
                         const DesiredField& desired, SensitivityOptions options)
    : forward_(&forward), cost_(&cost), traj_(&traj), desired_(&desired), systems_(forward, traj, options) {}

const std::vector<NodalField>& Sensitivity::adjoint() {
  if (!adjoint_.empty()) return adjoint_;
  const int M = traj_->steps();
  std::vector<NodalField> z(static_cast<std::size_t>(M) + 1);
  for (int m = M; m >= 1; --m) {
    const auto um = static_cast<std::size_t>(m);
    NodalField rhs = cost_->state_gradient(m, traj_->states[um], *desired_);
    if (m < M) rhs += systems_.coupling(m + 1, z[um + 1]);
    z[um] = systems_.solve_adjoint(m, std::move(rhs));
  }
  z[0] = z[1];
  adjoint_ = std::move(z);
  return adjoint_;
}

std::vector<NodalField> Sensitivity::tangent(const NodalField& dc) {
  const int M = traj_->steps();
  const auto& controls = forward_->controls();
  std::vector<NodalField> dU(static_cast<std::size_t>(M) + 1);
  dU[0] = NodalField::Zero(forward_->dofs().size());
  for (int m = 1; m <= M; ++m) {
    const auto um = static_cast<std::size_t>(m);
    NodalField rhs = systems_.coupling(m, dU[um - 1]) + forward_->grid().dt(m) * controls.load(dc, m);
    dU[um] = systems_.solve_tangent(m, std::move(rhs));
  }
  return dU;
}

std::vector<NodalField> Sensitivity::hessian_adjoint(const std::vector<NodalField>& dU) {
  const auto& z = adjoint();
  const auto& forms = forward_->forms();
  const int M = traj_->steps();
  std::vector<NodalField> dz(static_cast<std::size_t>(M) + 1);
  for (int m = M; m >= 1; --m) {
    const auto um = static_cast<std::size_t>(m);
    NodalField rhs = cost_->state_hessian(m, dU[um]) -
                     forward_->grid().dt(m) * forms.second_uu(traj_->states[um], dU[um], z[um]);
    if (m < M) rhs += systems_.coupling(m + 1, dz[um + 1]);
    dz[um] = systems_.solve_adjoint(m, std::move(rhs));
  }
  dz[0] = dz[1];
  return dz;
}

NodalField Sensitivity::boundary_pairing(const std::vector<NodalField>& W) const {
  const auto& controls = forward_->controls();
  const int ns = controls.spatial_size();
  NodalField out = NodalField::Zero(controls.size());
  for (int m = 1; m <= traj_->steps(); ++m) {
    const int b = controls.block_of_step(m);
    out.segment(b * ns, ns) +=
        forward_->grid().dt(m) * (controls.load_operator().transpose() * W[static_cast<std::size_t>(m)]);
  }
  return out;
}

NodalField Sensitivity::gradient_dual(const NodalField& c) {
  return cost_->control_gradient(c) + boundary_pairing(adjoint());
}

NodalField Sensitivity::hessian_dual(const NodalField& dc) {
  return cost_->control_hessian(dc) + boundary_pairing(hessian_adjoint(tangent(dc)));
}

}  // namespace pffc
