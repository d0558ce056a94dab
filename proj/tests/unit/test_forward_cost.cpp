#include <gtest/gtest.h>

#include <cmath>

#include "pffc/experiment.hpp"
#include "pffc/verify.hpp"

namespace pffc {
namespace {

ExperimentConfig small_config(int M = 3) {
  ExperimentConfig c = oracle_config();
  c.nx = c.ny = 8;
  c.M = M;
  c.spatial = SpatialLayout::Scalar;
  return c;
}

NodalField intact_state(const ExperimentSetup& s) {
  NodalField U = NodalField::Zero(s.dofs().size());
  insert_field(U, Phi, NodalField::Ones(static_cast<int>(s.mesh().num_vertices())));
  return U;
}

TEST(Cost, ZeroAtTarget) {
  const ExperimentSetup s(small_config());
  const auto cost = s.make_cost(1e-3);
  const NodalField U = s.initial_state();
  const std::vector<NodalField> states(4, U);
  const DesiredField d{{extract_field(U, Phi)}};
  const CostValues v = cost->evaluate(s.controls().constant(s.config().params.qd), states, d);
  EXPECT_EQ(v.total, 0.0);
  EXPECT_EQ(v.tracking, 0.0);
  EXPECT_EQ(v.tikhonov, 0.0);
  EXPECT_EQ(cost->state_gradient(2, U, d).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Cost, PlainTikhonovFormula) {
  ExperimentConfig c = small_config(7);
  c.weighting = CostWeighting::Plain;
  const ExperimentSetup s(c);
  const double alpha = 2e-3, q = 40.0, qd = c.params.qd;
  const auto cost = s.make_cost(alpha);
  EXPECT_NEAR(cost->tikhonov(s.controls().constant(q)), 0.5 * alpha * 7 * (q - qd) * (q - qd), 1e-9);
}

TEST(Cost, TimeStepTikhonovFormula) {
  ExperimentConfig c = small_config(7);
  c.T = 2.0;
  const ExperimentSetup s(c);
  const double alpha = 2e-3, q = 40.0, qd = c.params.qd;
  const auto cost = s.make_cost(alpha);
  EXPECT_NEAR(cost->tikhonov(s.controls().constant(q)), 0.5 * alpha * 2.0 * (q - qd) * (q - qd), 1e-9);
}

TEST(Cost, TrackingUsesMass) {
  ExperimentConfig c = small_config(2);
  c.weighting = CostWeighting::Plain;
  const ExperimentSetup s(c);
  const auto cost = s.make_cost(0.0);
  // phi = 1 against phi_d = 0: 1/2 |Omega| per step
  const DesiredField d{{NodalField::Zero(static_cast<int>(s.mesh().num_vertices()))}};
  const std::vector<NodalField> states(3, intact_state(s));
  const CostValues v = cost->evaluate(s.controls().constant(0.0), states, d);
  EXPECT_NEAR(v.tracking, 2 * 0.5, 1e-13);
  EXPECT_NEAR(v.total, v.tracking + v.tikhonov, 1e-15);
}

TEST(Cost, StateDerivativesMatchDifferences) {
  const ExperimentSetup s(small_config());
  const auto cost = s.make_cost(1e-3);
  const DesiredField d = s.desired();
  const int n = s.dofs().size();
  const NodalField U = s.initial_state() + random_direction(n, 0.1, 31);
  const NodalField dU = random_direction(n, 1.0, 32);
  const double t = 1e-4;
  const double fd = (cost->tracking_at(2, U + t * dU, d) - cost->tracking_at(2, U - t * dU, d)) / (2 * t);
  const double an = cost->state_gradient(2, U, d).dot(dU);
  EXPECT_LE(std::abs(fd - an), 1e-8 * std::abs(an));
  const NodalField H = cost->state_hessian(2, dU);
  const NodalField ref = cost->weight(2) * (s.forms().mass() * extract_field(dU, Phi));
  EXPECT_LE((extract_field(H, Phi) - ref).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(extract_field(H, Ux).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Cost, ControlDerivativesMatchDifferences) {
  ExperimentConfig c = small_config();
  c.spatial = SpatialLayout::Nodal;
  const ExperimentSetup s(c);
  const auto cost = s.make_cost(1e-3);
  const int nc = s.controls().size();
  const NodalField q = s.controls().constant(500.0) + random_direction(nc, 50.0, 33);
  const NodalField dq = random_direction(nc, 10.0, 34);
  const double t = 1e-3;
  const double fd = (cost->tikhonov(q + t * dq) - cost->tikhonov(q - t * dq)) / (2 * t);
  const double an = cost->control_gradient(q).dot(dq);
  EXPECT_LE(std::abs(fd - an), 1e-8 * std::abs(an));
  const double second = cost->control_hessian(dq).dot(dq);
  EXPECT_NEAR(second, 2 * cost->tikhonov(s.controls().constant(c.params.qd) + dq), 1e-12 * second);
}

TEST(Forward, UnloadedIntactStateStays) {
  ExperimentConfig c = small_config();
  c.notches.clear();
  const ExperimentSetup s(c);
  const NodalField U0 = intact_state(s);
  const Trajectory tr = s.forward().solve(s.controls().constant(0.0), U0);
  ASSERT_EQ(tr.states.size(), 4u);
  for (const auto& U : tr.states) EXPECT_LE((U - U0).cwiseAbs().maxCoeff(), 1e-14);
  for (int m = 1; m <= 3; ++m) EXPECT_LE(tr.reports[m].iterations, 1);
}

TEST(Forward, SingleStepUnloaded) {
  ExperimentConfig c = small_config(1);
  c.notches.clear();
  const ExperimentSetup s(c);
  const Trajectory tr = s.forward().solve(s.controls().constant(0.0), intact_state(s));
  ASSERT_EQ(tr.states.size(), 2u);
  EXPECT_LE((tr.states[1] - tr.states[0]).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Forward, ResidualBelowTolerance) {
  const ExperimentSetup s(small_config());
  const NodalField q = s.controls().constant(1500.0);
  const Trajectory tr = s.forward().solve(q, s.initial_state());
  for (int m = 1; m <= tr.steps(); ++m) {
    const NodalField r = s.forward().step_residual(m, q, tr.states[m], tr.states[m - 1]);
    EXPECT_LE(s.forward().free_max_norm(r), s.config().forward_tol);
    EXPECT_TRUE(tr.reports[m].converged);
    EXPECT_EQ(tr.masks[m], s.forms().active_mask(tr.states[m], tr.states[m - 1]));
  }
}

TEST(Forward, DirichletEntriesZero) {
  const ExperimentSetup s(small_config());
  const Trajectory tr = s.forward().solve(s.controls().constant(1500.0), s.initial_state());
  for (const auto& U : tr.states)
    for (int d : s.dofs().dirichlet_dofs) EXPECT_EQ(U[d], 0.0);
}

TEST(Forward, MonotoneLoadingGrowsMisfit) {
  ExperimentConfig c = small_config(5);
  c.weighting = CostWeighting::Plain;
  const ExperimentSetup s(c);
  const auto cost = s.make_cost(0.0);
  const DesiredField intact{{NodalField::Ones(static_cast<int>(s.mesh().num_vertices()))}};
  const Trajectory tr = s.forward().solve(s.controls().constant(3000.0), s.initial_state());
  for (int m = 2; m <= 5; ++m)
    EXPECT_GE(cost->tracking_at(m, tr.states[m], intact), cost->tracking_at(m - 1, tr.states[m - 1], intact));
}

TEST(Forward, ProjectionIdentityOnNodalData) {
  const ExperimentSetup s(small_config());
  const NodalField U = s.initial_state();
  EXPECT_EQ(s.forward().project_initial(U), U);
  // notch zeros survive
  EXPECT_EQ(extract_field(U, Phi).minCoeff(), 0.0);
}

TEST(Forward, ProjectionReproducesLinear) {
  const ExperimentSetup s(small_config());
  const NodalField U = s.forward().project_initial([](Point) { return 0.0; }, [](Point) { return 0.0; },
                                                   [](Point p) { return p.x; });
  for (std::size_t v = 0; v < s.mesh().num_vertices(); ++v) {
    EXPECT_NEAR(U[dof(static_cast<int>(v), Phi)], s.mesh().vertices[v].x, 1e-12);
    EXPECT_EQ(U[dof(static_cast<int>(v), Ux)], 0.0);
  }
}

TEST(Forward, FailureCarriesStep) {
  ExperimentConfig c = small_config();
  c.forward_tol = 1e-30;
  c.forward_max_iters = 1;
  const ExperimentSetup s(c);
  try {
    (void)s.forward().solve(s.controls().constant(1500.0), s.initial_state());
    FAIL() << "expected ForwardFailure";
  } catch (const ForwardFailure& e) {
    EXPECT_EQ(e.step(), 1);
    EXPECT_GT(e.residual(), 0.0);
  }
}

TEST(Forward, Deterministic) {
  const ExperimentSetup s(small_config());
  const NodalField q = s.controls().constant(2000.0);
  const Trajectory a = s.forward().solve(q, s.initial_state());
  const Trajectory b = s.forward().solve(q, s.initial_state());
  for (std::size_t m = 0; m < a.states.size(); ++m) EXPECT_EQ(a.states[m], b.states[m]);
}

TEST(Forward, FixedTractionAddsToControl) {
  ExperimentConfig c = small_config();
  c.qc = {850.0, 1800.0};
  const ExperimentSetup s(c);
  // the fixed traction integrates to c0 + c1/2 over the unit top edge
  const NodalField L = s.controls().fixed_load(c.qc);
  EXPECT_NEAR(extract_field(L, Uy).sum(), 850.0 + 900.0, 1e-9);
  const NodalField q = s.controls().constant(5.0);
  EXPECT_LE((s.forward().load(q, 1) - s.controls().load(q, 1) - L).cwiseAbs().maxCoeff(), 1e-12);
}

}  // namespace
}  // namespace pffc
