#include "pffc/forward.hpp"

#include <cmath>
#include <string>

namespace pffc {

ForwardSolver::ForwardSolver(const PhaseFieldForms& forms, const ControlSpace& controls, TimeGrid grid,
                             NodalField fixed_load, ForwardOptions options)
    : forms_(&forms),
      controls_(&controls),
      grid_(std::move(grid)),
      fixed_load_(std::move(fixed_load)),
      options_(options) {
  if (fixed_load_.size() == 0) fixed_load_ = NodalField::Zero(forms.dofs().size());
  if (fixed_load_.size() != forms.dofs().size()) throw std::invalid_argument("fixed load has wrong length");
  if (grid_.steps() < 1) throw std::invalid_argument("time grid needs at least one step");
}

NodalField ForwardSolver::project_initial(const NodalField& U0) const {
  if (U0.size() != dofs().size()) throw std::invalid_argument("initial state has wrong length");
  NodalField U = U0;
  zero_dirichlet(U, dofs());
  return U;
}

NodalField ForwardSolver::project_initial(const std::function<double(Point)>& ux,
                                          const std::function<double(Point)>& uy,
                                          const std::function<double(Point)>& phi) const {
  const Mesh& mesh = forms_->mesh();
  const auto& geo = forms_->geometry();
  const auto N = static_cast<Eigen::Index>(mesh.num_vertices());
  std::array<NodalField, kFields> rhs{NodalField::Zero(N), NodalField::Zero(N), NodalField::Zero(N)};
  const std::array<const std::function<double(Point)>*, kFields> fns{&ux, &uy, &phi};
  for (std::size_t c = 0; c < geo.size(); ++c) {
    const auto& cell = mesh.cells[c];
    for (std::size_t q = 0; q < kQuadPerCell; ++q) {
      Point x{0.0, 0.0};
      for (std::size_t a = 0; a < 4; ++a) {
        x.x += geo[c].N[q][a] * mesh.vertices[static_cast<std::size_t>(cell[a])].x;
        x.y += geo[c].N[q][a] * mesh.vertices[static_cast<std::size_t>(cell[a])].y;
      }
      for (std::size_t f = 0; f < kFields; ++f) {
        const double val = (*fns[f])(x) * geo[c].JxW[q];
        for (std::size_t a = 0; a < 4; ++a) rhs[f][cell[a]] += val * geo[c].N[q][a];
      }
    }
  }
  NodalField U(dofs().size());
  for (int f = 0; f < kFields; ++f) {
    insert_field(U, f, solve_cg_jacobi(forms_->mass(), rhs[static_cast<std::size_t>(f)]));
  }
  zero_dirichlet(U, dofs());
  return U;
}

NodalField ForwardSolver::load(const NodalField& c, int m) const { return controls_->load(c, m) + fixed_load_; }

NodalField ForwardSolver::step_residual(int m, const NodalField& c, const NodalField& U,
                                        const NodalField& prev) const {
  const auto& P = forms_->params();
  const NodalField D = U - prev;
  const ActiveMask mask = forms_->active_mask(U, prev);
  NodalField r = forms_->apply_phi_mass(&mask, P.gamma, D) + forms_->apply_phi_mass(nullptr, P.eta, D);
  r += grid_.dt(m) * (forms_->residual(U) - load(c, m));
  zero_dirichlet(r, dofs());
  return r;
}

SparseOperator ForwardSolver::step_matrix(int m, const NodalField& U, const ActiveMask& mask) const {
  const auto& P = forms_->params();
  SparseOperator A = forms_->pattern().prototype();
  forms_->add_phi_mass(&mask, P.gamma, A);
  forms_->add_phi_mass(nullptr, P.eta, A);
  forms_->add_jacobian(U, grid_.dt(m), A);
  apply_dirichlet(A, dofs());
  return A;
}

std::shared_ptr<const SymbolicAnalysis> ForwardSolver::symbolic(const SparseOperator& A) const {
  if (symbolic_ == nullptr || !symbolic_->matches(A)) symbolic_ = std::make_shared<const SymbolicAnalysis>(A);
  return symbolic_;
}

double ForwardSolver::free_max_norm(const NodalField& r) const {
  double m = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    if (dofs().constrained(static_cast<int>(i))) continue;
    const double a = std::abs(r[i]);
    if (!(a <= m)) m = a;  // propagates NaN
  }
  return m;
}

std::pair<NodalField, NewtonReport> ForwardSolver::step(int m, const NodalField& c, const NodalField& prev) const {
  NewtonReport report;
  NodalField U = prev;
  NodalField r = step_residual(m, c, U, prev);
  double norm = free_max_norm(r);
  report.residuals.push_back(norm);
  for (int it = 0; it < options_.max_iters; ++it) {
    if (norm <= options_.tol) {
      report.converged = true;
      return {std::move(U), std::move(report)};
    }
    const ActiveMask mask = forms_->active_mask(U, prev);
    const SparseOperator A = step_matrix(m, U, mask);
    NodalField delta;
    try {
      delta = DirectSolver(A, symbolic(A)).solve(-r);
    } catch (const SolverFailure& e) {
      throw ForwardFailure(m, norm, "step " + std::to_string(m) + ": " + e.what());
    }
    double s = 1.0;
    bool accepted = false;
    NodalField trial;
    NodalField r_trial;
    double n_trial = 0.0;
    for (int h = 0; h <= options_.max_halvings; ++h) {
      trial = U + s * delta;
      r_trial = step_residual(m, c, trial, prev);
      n_trial = free_max_norm(r_trial);
      if (std::isfinite(n_trial) && n_trial < norm) {
        accepted = true;
        break;
      }
      s *= 0.5;
      ++report.halvings;
    }
    if (!accepted) {
      // Nonmonotone fallback: take the full step and let the iteration limit decide.
      trial = U + delta;
      r_trial = step_residual(m, c, trial, prev);
      n_trial = free_max_norm(r_trial);
      if (!std::isfinite(n_trial)) {
        throw ForwardFailure(m, norm, "step " + std::to_string(m) + ": residual became non-finite");
      }
    }
    U = std::move(trial);
    r = std::move(r_trial);
    norm = n_trial;
    report.iterations = it + 1;
    report.residuals.push_back(norm);
  }
  if (norm <= options_.tol) {
    report.converged = true;
    return {std::move(U), std::move(report)};
  }
  throw ForwardFailure(m, norm,
                       "step " + std::to_string(m) + ": Newton did not converge (residual " +
                           std::to_string(norm) + ")");
}

Trajectory ForwardSolver::solve(const NodalField& c, const NodalField& U0) const {
  if (c.size() != controls_->size()) throw std::invalid_argument("control vector has wrong length");
  Trajectory traj;
  traj.grid = grid_;
  const int M = grid_.steps();
  traj.states.reserve(static_cast<std::size_t>(M) + 1);
  traj.states.push_back(project_initial(U0));
  traj.masks.emplace_back();
  traj.reports.emplace_back();
  for (int m = 1; m <= M; ++m) {
    auto [U, report] = step(m, c, traj.states.back());
    traj.masks.push_back(forms_->active_mask(U, traj.states.back()));
    traj.states.push_back(std::move(U));
    traj.reports.push_back(std::move(report));
  }
  return traj;
}

}  // namespace pffc
