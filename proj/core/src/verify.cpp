#include "pffc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

namespace pffc {

namespace {

double rel(double err, double ref) { return std::abs(err) / std::max(std::abs(ref), 1e-300); }

double rel(const NodalField& err, const NodalField& ref) { return err.norm() / std::max(ref.norm(), 1e-300); }

template <class F>
OracleCheck sweep(std::string name, double tolerance, F&& error_at) {
  OracleCheck c{std::move(name), std::numeric_limits<double>::infinity(), tolerance, 0.0};
  for (double t : fd_steps()) {
    const double e = error_at(t);
    if (e < c.error) {
      c.error = e;
      c.tau = t;
    }
  }
  return c;
}

}  // namespace

std::vector<double> fd_steps() { return {1e-4, 1e-5, 1e-6, 1e-7}; }

NodalField random_direction(int n, double scale, std::uint64_t seed, const DofMap* dofs) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  NodalField d(n);
  for (int i = 0; i < n; ++i) d[i] = scale * u(rng);
  if (dofs != nullptr) zero_dirichlet(d, *dofs);
  return d;
}

OracleCheck check_jacobian(const PhaseFieldForms& forms, const NodalField& U, const NodalField& d) {
  const NodalField exact = forms.apply_jacobian(U, d);
  return sweep("form first derivative", 1e-7, [&](double t) {
    const NodalField fd = (forms.residual(U + t * d) - forms.residual(U - t * d)) / (2.0 * t);
    return rel(fd - exact, exact);
  });
}

OracleCheck check_second_derivative(const PhaseFieldForms& forms, const NodalField& U, const NodalField& d,
                                    const NodalField& Z) {
  const NodalField exact = forms.second_uu(U, d, Z);
  // d/dt a'(U + t d) Z is a''(U)(d, Z, test); a is a gradient, so the
  // Z and test slots can swap.
  return sweep("form second derivative", 1e-6, [&](double t) {
    const NodalField fd = (forms.apply_jacobian(U + t * d, Z) - forms.apply_jacobian(U - t * d, Z)) / (2.0 * t);
    return rel(fd - exact, exact);
  });
}

OracleCheck check_jacobian_symmetry(const PhaseFieldForms& forms, const NodalField& U, const NodalField& v,
                                    const NodalField& w) {
  const double a = w.dot(forms.apply_jacobian(U, v));
  const double b = v.dot(forms.apply_jacobian(U, w));
  return OracleCheck{"form Jacobian symmetry", rel(a - b, a), 1e-12, 0.0};
}

OracleCheck check_gradient(const ReducedProblem& problem, const NodalField& q, const NodalField& dq) {
  const auto at = problem.evaluate(q);
  auto sens = problem.linearize(at);
  const double exact = sens->gradient_dual(q).dot(dq);
  return sweep("reduced gradient vs central differences", 1e-6, [&](double t) {
    const double fd = (problem.evaluate(q + t * dq).cost.total - problem.evaluate(q - t * dq).cost.total) / (2.0 * t);
    return rel(fd - exact, exact);
  });
}

OracleCheck check_adjoint_tangent(const ReducedProblem& problem, const NodalField& q, const NodalField& dq) {
  const auto at = problem.evaluate(q);
  auto sens = problem.linearize(at);
  const double adjoint_route = sens->gradient_dual(q).dot(dq);
  const auto dU = sens->tangent(dq);
  double tangent_route = problem.cost().control_gradient(q).dot(dq);
  for (int m = 1; m <= at.trajectory.steps(); ++m) {
    const auto um = static_cast<std::size_t>(m);
    tangent_route += problem.cost().state_gradient(m, at.trajectory.states[um], problem.desired()).dot(dU[um]);
  }
  return OracleCheck{"adjoint vs tangent directional derivative", rel(adjoint_route - tangent_route, adjoint_route),
                     1e-9, 0.0};
}

OracleCheck check_hessian(const ReducedProblem& problem, const NodalField& q, const NodalField& dq) {
  const auto at = problem.evaluate(q);
  auto sens = problem.linearize(at);
  const NodalField exact = sens->hessian_dual(dq);
  auto grad_at = [&](const NodalField& c) {
    const auto e = problem.evaluate(c);
    return NodalField(problem.linearize(e)->gradient_dual(c));
  };
  return sweep("reduced Hessian vs central differences", 1e-5, [&](double t) {
    const NodalField fd = (grad_at(q + t * dq) - grad_at(q - t * dq)) / (2.0 * t);
    return rel(fd - exact, exact);
  });
}

OracleCheck check_hessian_symmetry(const ReducedProblem& problem, const NodalField& q, const NodalField& dq1,
                                   const NodalField& dq2) {
  const auto at = problem.evaluate(q);
  auto sens = problem.linearize(at);
  const double a = dq1.dot(sens->hessian_dual(dq2));
  const double b = dq2.dot(sens->hessian_dual(dq1));
  return OracleCheck{"reduced Hessian symmetry", rel(a - b, a), 1e-9, 0.0};
}

ExperimentConfig oracle_config() {
  ExperimentConfig c = preset(1);
  c.nx = c.ny = 16;
  c.M = 5;
  c.spatial = SpatialLayout::Nodal;
  c.forward_tol = 1e-12;
  c.field_steps.clear();
  return c;
}

std::vector<OracleCheck> run_oracle_suite(std::ostream* log) {
  const ExperimentSetup setup(oracle_config());
  std::vector<OracleCheck> out;
  auto record = [&](OracleCheck c) {
    if (log != nullptr)
      *log << (c.passed() ? "PASS " : "FAIL ") << c.name << ": error " << c.error << " (tol " << c.tolerance
           << ", tau " << c.tau << ")\n";
    out.push_back(std::move(c));
  };

  const auto& forms = setup.forms();
  const int n = setup.dofs().size();
  // A state with a partly degraded phase field and nonzero strain.
  NodalField U = setup.initial_state();
  const NodalField pert = random_direction(n, 1e-3, 11, &setup.dofs());
  U += pert;
  for (int i = 0; i < static_cast<int>(setup.mesh().num_vertices()); ++i)
    U[dof(i, Phi)] = std::clamp(U[dof(i, Phi)] + 0.3 * std::sin(7.0 * i), 0.0, 1.0);
  const NodalField d = random_direction(n, 1e-3, 12, &setup.dofs());
  const NodalField Z = random_direction(n, 1.0, 13, &setup.dofs());
  record(check_jacobian(forms, U, d));
  record(check_second_derivative(forms, U, d, Z));
  record(check_jacobian_symmetry(forms, U, d, Z));

  const auto cost = setup.make_cost(setup.config().params.alpha);
  const ReducedProblem problem(setup.forward(), *cost, setup.desired(), setup.initial_state(),
                               setup.sensitivity_options());
  const int nc = setup.controls().size();
  const NodalField q = setup.controls().constant(1500.0) + random_direction(nc, 100.0, 21);
  const NodalField dq1 = random_direction(nc, 1000.0, 22);
  const NodalField dq2 = random_direction(nc, 1000.0, 23);
  record(check_gradient(problem, q, dq1));
  record(check_adjoint_tangent(problem, q, dq1));
  record(check_hessian(problem, q, dq1));
  record(check_hessian_symmetry(problem, q, dq1, dq2));
  return out;
}

}  // namespace pffc
