#include "pffc/cost.hpp"

#include <stdexcept>

namespace pffc {

CostFunctional::CostFunctional(const PhaseFieldForms& forms, const ControlSpace& controls, TimeGrid grid,
                               double alpha, double qd, CostWeighting weighting)
    : forms_(&forms), controls_(&controls), grid_(std::move(grid)), alpha_(alpha), qd_(qd), weighting_(weighting) {}

double CostFunctional::weight(int m) const { return weighting_ == CostWeighting::TimeStep ? grid_.dt(m) : 1.0; }

double CostFunctional::block_weight(int b) const {
  if (controls_->time_layout() == TimeLayout::PerStep) return weight(b + 1);
  double w = 0.0;
  for (int m = 1; m <= grid_.steps(); ++m) w += weight(m);
  return w;
}

double CostFunctional::tracking_at(int m, const NodalField& U, const DesiredField& desired) const {
  const NodalField e = extract_field(U, Phi) - desired.at(m);
  return 0.5 * weight(m) * e.dot(forms_->mass() * e);
}

double CostFunctional::tikhonov(const NodalField& c) const {
  double t = 0.0;
  for (int b = 0; b < controls_->time_blocks(); ++b) {
    const NodalField e = controls_->block(c, b).array() - qd_;
    t += 0.5 * alpha_ * block_weight(b) * e.dot(controls_->gram() * e);
  }
  return t;
}

CostValues CostFunctional::evaluate(const NodalField& c, const std::vector<NodalField>& states,
                                    const DesiredField& desired) const {
  if (static_cast<int>(states.size()) != grid_.steps() + 1) throw std::invalid_argument("trajectory length mismatch");
  if (c.size() != controls_->size()) throw std::invalid_argument("control length mismatch");
  CostValues v;
  for (int m = 1; m <= grid_.steps(); ++m) v.tracking += tracking_at(m, states[static_cast<std::size_t>(m)], desired);
  v.tikhonov = tikhonov(c);
  v.total = v.tracking + v.tikhonov;
  return v;
}

NodalField CostFunctional::state_gradient(int m, const NodalField& U, const DesiredField& desired) const {
  const NodalField e = extract_field(U, Phi) - desired.at(m);
  NodalField out = NodalField::Zero(U.size());
  insert_field(out, Phi, weight(m) * (forms_->mass() * e));
  return out;
}

NodalField CostFunctional::state_hessian(int m, const NodalField& dU) const {
  NodalField out = NodalField::Zero(dU.size());
  insert_field(out, Phi, weight(m) * (forms_->mass() * extract_field(dU, Phi)));
  return out;
}

NodalField CostFunctional::control_gradient(const NodalField& c) const {
  NodalField out(c.size());
  const int ns = controls_->spatial_size();
  for (int b = 0; b < controls_->time_blocks(); ++b) {
    const NodalField e = controls_->block(c, b).array() - qd_;
    out.segment(b * ns, ns) = alpha_ * block_weight(b) * (controls_->gram() * e);
  }
  return out;
}

NodalField CostFunctional::control_hessian(const NodalField& dc) const {
  NodalField out(dc.size());
  const int ns = controls_->spatial_size();
  for (int b = 0; b < controls_->time_blocks(); ++b) {
    out.segment(b * ns, ns) = alpha_ * block_weight(b) * (controls_->gram() * controls_->block(dc, b));
  }
  return out;
}

}  // namespace pffc
