#include "pffc/reduced.hpp"

#include <cmath>

namespace pffc {

std::string to_string(OptStatus status) {
  switch (status) {
    case OptStatus::Converged: return "converged";
    case OptStatus::MaxIterations: return "max-iterations";
    case OptStatus::ForwardFailure: return "forward-failure";
    case OptStatus::LineSearchFailure: return "line-search-failure";
  }
  return "unknown";
}

ReducedProblem::ReducedProblem(const ForwardSolver& forward, const CostFunctional& cost, DesiredField desired,
                               NodalField U0, SensitivityOptions options)
    : forward_(&forward), cost_(&cost), desired_(std::move(desired)), U0_(std::move(U0)), options_(options) {}

ReducedProblem::Evaluation ReducedProblem::evaluate(const NodalField& c) const {
  Evaluation e;
  e.control = c;
  e.trajectory = forward_->solve(c, U0_);
  e.cost = cost_->evaluate(c, e.trajectory.states, desired_);
  return e;
}

std::unique_ptr<Sensitivity> ReducedProblem::linearize(const Evaluation& at) const {
  return std::make_unique<Sensitivity>(*forward_, *cost_, at.trajectory, desired_, options_);
}

ReducedGradient ReducedProblem::gradient(Sensitivity& sens, const Evaluation& at) const {
  ReducedGradient g;
  g.raw = sens.gradient_dual(at.control);
  g.f = controls().solve_gram(g.raw);
  g.norm = std::sqrt(std::max(0.0, g.raw.dot(g.f)));
  return g;
}

NodalField ReducedProblem::hessian_vector(Sensitivity& sens, const NodalField& dc) const {
  return controls().solve_gram(sens.hessian_dual(dc));
}

namespace {

struct CgOutcome {
  NodalField d;
  int iterations = 0;
};

/// CG on H d = -f in the Gram inner product, truncated on negative curvature.
CgOutcome truncated_cg(const ReducedProblem& problem, Sensitivity& sens, const ReducedGradient& grad,
                       double rel_tol) {
  const auto& controls = problem.controls();
  const int n = controls.size();
  CgOutcome out;
  out.d = NodalField::Zero(n);
  NodalField r = -grad.f;
  NodalField p = r;
  double rr = r.dot(controls.apply_gram(r));
  for (int i = 0; i < n; ++i) {
    const NodalField Hp = problem.hessian_vector(sens, p);
    ++out.iterations;
    const double curvature = p.dot(controls.apply_gram(Hp));
    if (!(curvature > 0.0)) {
      if (i == 0) out.d = -grad.f;
      break;
    }
    const double a = rr / curvature;
    out.d += a * p;
    r -= a * Hp;
    const double rr_next = r.dot(controls.apply_gram(r));
    if (std::sqrt(std::max(0.0, rr_next)) <= rel_tol * grad.norm) break;
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }
  return out;
}

}  // namespace

OptResult newton_cg(const ReducedProblem& problem, const NodalField& c0, const NewtonCgOptions& options, int step,
                    const IterationObserver& observer) {
  OptResult result;
  result.control = c0;
  ReducedProblem::Evaluation current;
  try {
    current = problem.evaluate(c0);
  } catch (const ForwardFailure& e) {
    result.status = OptStatus::ForwardFailure;
    result.message = e.what();
    return result;
  }
  auto sens = problem.linearize(current);
  ReducedGradient grad = problem.gradient(*sens, current);
  const double abs0 = grad.norm;
  int cg_used = 0;

  for (int k = 0;; ++k) {
    OptState row;
    row.step = step;
    row.iter = k;
    row.cg = cg_used;
    row.abs_residual = grad.norm;
    row.rel_residual = abs0 > 0.0 ? grad.norm / abs0 : 0.0;
    row.cost = current.cost;
    row.force = ControlSpace::max_abs(current.control);
    result.history.push_back(row);
    if (observer) observer(row);

    if (grad.norm <= options.tol_abs || (options.tol_rel > 0.0 && row.rel_residual <= options.tol_rel)) {
      result.status = OptStatus::Converged;
      break;
    }
    if (k >= options.max_iters) {
      result.status = OptStatus::MaxIterations;
      result.message = "iteration limit reached";
      break;
    }

    CgOutcome cg = truncated_cg(problem, *sens, grad, options.cg_rel_tol);
    double slope = grad.raw.dot(cg.d);
    if (!(slope < 0.0)) {
      cg.d = -grad.f;
      slope = -grad.norm * grad.norm;
    }

    double nu = 1.0;
    bool accepted = false;
    bool last_forward_failure = false;
    std::string failure;
    ReducedProblem::Evaluation trial;
    for (int bt = 0; bt <= options.max_backtracks; ++bt) {
      try {
        trial = problem.evaluate(current.control + nu * cg.d);
      } catch (const ForwardFailure& e) {
        last_forward_failure = true;
        failure = e.what();
        nu *= 0.5;
        continue;
      }
      last_forward_failure = false;
      if (trial.cost.total <= current.cost.total + options.armijo_c1 * nu * slope) {
        accepted = true;
        break;
      }
      nu *= 0.5;
    }
    if (!accepted) {
      result.status = last_forward_failure ? OptStatus::ForwardFailure : OptStatus::LineSearchFailure;
      result.message = last_forward_failure ? failure : "no sufficient decrease along the Newton direction";
      break;
    }
    current = std::move(trial);
    sens = problem.linearize(current);
    grad = problem.gradient(*sens, current);
    cg_used = cg.iterations;
  }

  result.control = current.control;
  result.adjoint = sens->adjoint();
  result.trajectory = std::move(current.trajectory);
  return result;
}

}  // namespace pffc
