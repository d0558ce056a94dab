#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pffc/experiment.hpp"

namespace pffc {

/// One derivative check: the smallest relative error over the step sweep
/// compared with a fixed tolerance.
struct OracleCheck {
  std::string name;
  double error = 0.0;
  double tolerance = 0.0;
  /// Step with the smallest error (0 for exact identities).
  double tau = 0.0;
  [[nodiscard]] bool passed() const { return error <= tolerance; }
};

/// Steps used by the central difference sweeps.
std::vector<double> fd_steps();

/// Random direction with entries scale * U[-1,1] on free dofs (zero on Dirichlet dofs when given).
NodalField random_direction(int n, double scale, std::uint64_t seed, const DofMap* dofs = nullptr);

/// a(U + t d) against a'_u(U) d.
OracleCheck check_jacobian(const PhaseFieldForms& forms, const NodalField& U, const NodalField& d);
/// a'_u(U + t d) Z against a''_uu(U)(d, ., Z) (a''(U)(d, test, Z) acts on the test slot).
OracleCheck check_second_derivative(const PhaseFieldForms& forms, const NodalField& U, const NodalField& d,
                                    const NodalField& Z);
/// Symmetry of the Jacobian, <w, a'(U) v> = <v, a'(U) w>.
OracleCheck check_jacobian_symmetry(const PhaseFieldForms& forms, const NodalField& U, const NodalField& v,
                                    const NodalField& w);

/// j(q + t dq) against j'(q) dq from the adjoint sweep.
OracleCheck check_gradient(const ReducedProblem& problem, const NodalField& q, const NodalField& dq);
/// Adjoint route against tangent route for j'(q) dq.
OracleCheck check_adjoint_tangent(const ReducedProblem& problem, const NodalField& q, const NodalField& dq);
/// j'(q + t dq) against j''(q) dq from the second order sweep.
OracleCheck check_hessian(const ReducedProblem& problem, const NodalField& q, const NodalField& dq);
/// <dq1, j'' dq2> against <dq2, j'' dq1>.
OracleCheck check_hessian_symmetry(const ReducedProblem& problem, const NodalField& q, const NodalField& dq1,
                                   const NodalField& dq2);

/// Small instance on the single-notch geometry used by the oracle suite.
ExperimentConfig oracle_config();

/// All checks on the oracle instance. Progress goes to `log` if given.
std::vector<OracleCheck> run_oracle_suite(std::ostream* log = nullptr);

}  // namespace pffc
