#pragma once

#include <vector>

#include "pffc/control.hpp"
#include "pffc/model.hpp"

namespace pffc {

/// TimeStep weights every time point by dt_m (a time integral); Plain uses 1.
enum class CostWeighting { TimeStep, Plain };

struct CostValues {
  double total = 0.0;
  double tracking = 0.0;
  double tikhonov = 0.0;
};

/// Desired phase field per time point (scalar nodal). One entry is broadcast
/// over all time points; otherwise entry m belongs to t_m.
struct DesiredField {
  std::vector<NodalField> phi;

  [[nodiscard]] const NodalField& at(int m) const {
    return phi.size() == 1 ? phi.front() : phi[static_cast<std::size_t>(m)];
  }
};

/// Tracking-type cost 1/2 sum_m w_m |phi_m - phi_d|^2 + alpha/2 sum_m w_m |q_m - q_d|^2_G
/// over m = 1..M.
class CostFunctional {
 public:
  CostFunctional(const PhaseFieldForms& forms, const ControlSpace& controls, TimeGrid grid, double alpha,
                 double qd, CostWeighting weighting = CostWeighting::TimeStep);

  [[nodiscard]] double weight(int m) const;
  [[nodiscard]] double alpha() const { return alpha_; }
  [[nodiscard]] double qd() const { return qd_; }
  [[nodiscard]] CostWeighting weighting() const { return weighting_; }
  [[nodiscard]] const TimeGrid& grid() const { return grid_; }

  [[nodiscard]] CostValues evaluate(const NodalField& c, const std::vector<NodalField>& states,
                                    const DesiredField& desired) const;
  [[nodiscard]] double tracking_at(int m, const NodalField& U, const DesiredField& desired) const;
  [[nodiscard]] double tikhonov(const NodalField& c) const;

  /// J'_u at t_m on interleaved tests (phi block only).
  [[nodiscard]] NodalField state_gradient(int m, const NodalField& U, const DesiredField& desired) const;
  /// J''_uu at t_m applied to dU.
  [[nodiscard]] NodalField state_hessian(int m, const NodalField& dU) const;
  /// J'_q as a dual vector on control coefficients.
  [[nodiscard]] NodalField control_gradient(const NodalField& c) const;
  /// J''_qq dc as a dual vector.
  [[nodiscard]] NodalField control_hessian(const NodalField& dc) const;

 private:
  /// Sum of weights of the steps sharing control block b.
  [[nodiscard]] double block_weight(int b) const;

  const PhaseFieldForms* forms_;
  const ControlSpace* controls_;
  TimeGrid grid_;
  double alpha_;
  double qd_;
  CostWeighting weighting_;
};

}  // namespace pffc
