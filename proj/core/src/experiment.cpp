#include "pffc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "pffc/output.hpp"

namespace pffc {

namespace {

constexpr BandRule kNotchRule{true, false};
constexpr BandRule kOpenBand{true, true};

Band horizontal(double x0, double x1, double y, double hw, BandRule rule) {
  return Band{Segment{{x0, y}, {x1, y}}, hw, rule};
}

ModelParams base_params(double eps, double alpha, double qd) {
  ModelParams p;
  p.eps = eps;
  p.kappa = 1e-10;
  p.eta = 1e3;
  p.gamma = 1e5;
  p.Gc = 1.0;
  p.E = 1e6;
  p.nu = 0.2;
  p.alpha = alpha;
  p.qd = qd;
  return p;
}

bool uses_tag(const ExperimentConfig& c, BoundaryTag tag) {
  return std::any_of(c.control_boundaries.begin(), c.control_boundaries.end(),
                     [tag](const ControlBoundary& b) { return b.tag == tag; });
}

}  // namespace

std::string to_string(HomotopyKind kind) {
  switch (kind) {
    case HomotopyKind::None: return "none";
    case HomotopyKind::Length: return "a";
    case HomotopyKind::Tikhonov: return "b";
  }
  return "none";
}

HomotopyKind homotopy_kind_from_string(const std::string& s) {
  if (s == "none") return HomotopyKind::None;
  if (s == "a" || s == "length") return HomotopyKind::Length;
  if (s == "b" || s == "tikhonov") return HomotopyKind::Tikhonov;
  throw ConfigError("unknown homotopy '" + s + "' (expected a, b or none)");
}

void ExperimentConfig::validate() const {
  if (nx < 1 || ny < 1) throw ConfigError("cell counts must be positive");
  if (!(x.hi > x.lo) || !(y.hi > y.lo)) throw ConfigError("empty domain extent");
  if (!(T > 0.0)) throw ConfigError("final time must be positive");
  if (M < 1) throw ConfigError("need at least one time step");
  params.validate();
  if (control_boundaries.empty()) throw ConfigError("no control boundary");
  for (const auto& b : control_boundaries) {
    if (b.component != Ux && b.component != Uy) throw ConfigError("control acts on a displacement component");
    if (b.tag == BoundaryTag::DirichletBottom || b.tag == BoundaryTag::Free)
      throw ConfigError("control boundary must be a Neumann part");
    if (domain == DomainKind::LShape && b.tag == BoundaryTag::NeumannLeft && reentrant_tag != BoundaryTag::NeumannLeft)
      throw ConfigError("L-shape has no NeumannLeft part");
  }
  for (const auto& band : notches)
    if (band.half_width_h < 0.0) throw ConfigError("negative notch width");
  for (const auto& band : desired)
    if (band.half_width_h < 0.0) throw ConfigError("negative band width");
  if (!(tol_abs > 0.0)) throw ConfigError("tol_abs must be positive");
  if (tol_rel < 0.0) throw ConfigError("tol_rel must be non-negative");
  if (!(forward_tol > 0.0)) throw ConfigError("forward_tol must be positive");
  if (forward_max_iters < 1 || newton_max_iters < 0) throw ConfigError("iteration limits out of range");
  if (!(cg_rel_tol > 0.0 && cg_rel_tol < 1.0)) throw ConfigError("cg_rel_tol must lie in (0,1)");
  if (homotopy_steps < 0) throw ConfigError("homotopy_steps must be non-negative");
  if (!(homotopy_factor > 0.0 && homotopy_factor <= 1.0)) throw ConfigError("homotopy_factor must lie in (0,1]");
  if (homotopy == HomotopyKind::Length && desired.empty()) throw ConfigError("length homotopy needs a desired band");
  for (int m : field_steps)
    if (m < 0 || m > M) throw ConfigError("field step outside 0..M");
}

ExperimentConfig preset(int n) {
  ExperimentConfig c;
  c.experiment = n;
  const Band center_notch = horizontal(0.5, 1.0, 0.5, 0.0, kNotchRule);
  switch (n) {
    case 1:
      c.nx = c.ny = 64;
      c.M = 40;
      c.params = base_params(0.0884, 4.75e-10, 1e3);
      c.notches = {center_notch};
      c.desired = {horizontal(0.3, 0.5, 0.5, 1.0, kOpenBand)};
      c.spatial = SpatialLayout::Scalar;
      c.q0 = 1.0;
      c.tol_abs = 5e-11;
      c.field_steps = {40};
      break;
    case 2:
      c.nx = c.ny = 128;
      c.M = 100;
      c.params = base_params(0.0442, 6.5e-9, 2.2e3);
      c.notches = {center_notch};
      c.desired = {Band{Segment{{0.1, 0.78}, {0.5, 0.5}}, 3.0, BandRule{true, false}}};
      c.control_boundaries = {{BoundaryTag::NeumannTop, Uy, 1.0}, {BoundaryTag::NeumannLeft, Ux, -1.0}};
      c.spatial = SpatialLayout::Nodal;
      c.q0 = 10.0;
      c.tol_abs = 2e-10;
      c.field_steps = {50, 75, 100};
      break;
    case 3:
      c.x = {0.0, 2.2};
      c.y = {0.0, 0.4};
      c.nx = 352;
      c.ny = 64;
      c.M = 2000;
      c.params = base_params(0.035, 2.1e-10, 6.53e3);
      c.notches = {horizontal(0.3, 0.5, 0.2, 0.0, kNotchRule), horizontal(0.7, 0.9, 0.2, 0.0, kNotchRule),
                   horizontal(1.3, 1.5, 0.2, 0.0, kNotchRule), horizontal(1.7, 1.9, 0.2, 0.0, kNotchRule)};
      c.desired = {horizontal(0.5, 0.7, 0.2, 4.0, kOpenBand), horizontal(1.5, 1.7, 0.2, 4.0, kOpenBand)};
      c.spatial = SpatialLayout::Nodal;
      c.tol_abs = 2e-9;
      c.field_steps = {1400, 1800, 2000};
      break;
    case 4:
      c.nx = c.ny = 128;
      c.M = 250;
      c.params = base_params(0.0221, 2e-10, 1.85e3);
      c.notches = {horizontal(0.0, 0.375, 0.5, 0.0, kNotchRule), horizontal(0.625, 1.0, 0.5, 0.0, kNotchRule)};
      c.desired = {horizontal(0.375, 0.625, 0.5, 2.0, kOpenBand)};
      c.spatial = SpatialLayout::Nodal;
      c.tol_abs = 2e-9;
      c.field_steps = {150, 200, 250};
      break;
    case 5:
      c.domain = DomainKind::LShape;
      c.nx = c.ny = 80;
      c.M = 300;
      c.params = base_params(0.0354, 2.625e-9, 1.6e3);
      c.desired = {horizontal(0.5, 1.0, 0.53, 4.0, kOpenBand)};
      c.spatial = SpatialLayout::Nodal;
      c.tol_abs = 2e-10;
      c.field_steps = {200, 250, 300};
      break;
    case 6:
      c.nx = c.ny = 64;
      c.M = 100;
      c.params = base_params(0.0442, 1e-9, -800.0);
      c.notches = {center_notch};
      c.qc = {850.0, 1800.0};
      c.spatial = SpatialLayout::Nodal;
      c.tol_abs = 2e-11;
      c.field_steps = {100};
      break;
    default:
      throw ConfigError("unknown experiment " + std::to_string(n) + " (expected 1..6)");
  }
  return c;
}

void apply_overrides(ExperimentConfig& config, const Overrides& o) {
  if (o.mesh_scale) {
    const double s = *o.mesh_scale;
    if (!(s > 0.0)) throw ConfigError("mesh scale must be positive");
    config.nx = std::max(1, static_cast<int>(std::lround(config.nx * s)));
    config.ny = std::max(1, static_cast<int>(std::lround(config.ny * s)));
  }
  if (o.time_steps) {
    const int M = *o.time_steps;
    if (M < 1) throw ConfigError("time steps must be positive");
    for (int& m : config.field_steps)
      m = std::clamp(static_cast<int>(std::lround(static_cast<double>(m) * M / config.M)), 0, M);
    std::sort(config.field_steps.begin(), config.field_steps.end());
    config.field_steps.erase(std::unique(config.field_steps.begin(), config.field_steps.end()),
                             config.field_steps.end());
    config.M = M;
  }
  if (o.tol_abs) config.tol_abs = *o.tol_abs;
  if (o.homotopy) {
    config.homotopy = *o.homotopy;
    if (!o.homotopy_steps) {
      if (config.homotopy == HomotopyKind::Length) config.homotopy_steps = 21;
      else if (config.homotopy == HomotopyKind::Tikhonov) config.homotopy_steps = 8;
      else config.homotopy_steps = 0;
    }
  }
  if (o.homotopy_steps) config.homotopy_steps = *o.homotopy_steps;
  if (o.output_dir) config.output_dir = *o.output_dir;
}

Mesh build_mesh(const ExperimentConfig& config) {
  if (config.domain == DomainKind::LShape) return build_lshape_mesh(config.nx, config.reentrant_tag);
  RectangleTags tags;
  if (uses_tag(config, BoundaryTag::NeumannLeft)) tags.left = BoundaryTag::NeumannLeft;
  return build_rectangle_mesh(config.x, config.y, config.nx, config.ny, tags);
}

ExperimentSetup::ExperimentSetup(ExperimentConfig config) : config_(std::move(config)) {
  config_.validate();
  mesh_ = std::make_unique<Mesh>(build_mesh(config_));
  h_ = mesh_->max_diameter();
  dofs_ = std::make_unique<DofMap>(make_dof_map(*mesh_, BoundaryTag::DirichletBottom));
  forms_ = std::make_unique<PhaseFieldForms>(*mesh_, *dofs_, config_.params);
  controls_ = std::make_unique<ControlSpace>(*mesh_, config_.control_boundaries, config_.spatial, config_.time,
                                             config_.M);
  NodalField fixed = config_.qc.active() ? controls_->fixed_load(config_.qc)
                                         : NodalField::Zero(kFields * static_cast<int>(mesh_->num_vertices()));
  ForwardOptions fo;
  fo.tol = config_.forward_tol;
  fo.max_iters = config_.forward_max_iters;
  forward_ = std::make_unique<ForwardSolver>(*forms_, *controls_, TimeGrid::uniform(config_.T, config_.M),
                                             std::move(fixed), fo);
}

NodalField ExperimentSetup::initial_phi() const {
  NodalField phi = NodalField::Ones(static_cast<int>(mesh_->num_vertices()));
  for (const auto& band : config_.notches)
    for (int i : nodes_near_segment(*mesh_, band.segment, band.half_width_h * h_, band.rule)) phi[i] = 0.0;
  return phi;
}

NodalField ExperimentSetup::initial_state() const {
  NodalField U = NodalField::Zero(kFields * static_cast<int>(mesh_->num_vertices()));
  insert_field(U, Phi, initial_phi());
  return forward_->project_initial(U);
}

DesiredField ExperimentSetup::desired(double left_scale) const {
  NodalField phi = NodalField::Ones(static_cast<int>(mesh_->num_vertices()));
  for (std::size_t i = 0; i < config_.desired.size(); ++i) {
    Segment seg = config_.desired[i].segment;
    if (i == 0) {
      Point& left = seg.a.x <= seg.b.x ? seg.a : seg.b;
      left.x *= left_scale;
    }
    const double hw = config_.desired[i].half_width_h * h_;
    for (int v : nodes_near_segment(*mesh_, seg, hw, config_.desired[i].rule)) phi[v] = 0.0;
  }
  if (config_.desired_keeps_notch) phi = phi.cwiseMin(initial_phi());
  return DesiredField{{phi}};
}

std::unique_ptr<CostFunctional> ExperimentSetup::make_cost(double alpha) const {
  return std::make_unique<CostFunctional>(*forms_, *controls_, forward_->grid(), alpha, config_.params.qd,
                                          config_.weighting);
}

NewtonCgOptions ExperimentSetup::newton_options() const {
  NewtonCgOptions o;
  o.tol_abs = config_.tol_abs;
  o.tol_rel = config_.tol_rel;
  o.max_iters = config_.newton_max_iters;
  o.cg_rel_tol = config_.cg_rel_tol;
  return o;
}

SensitivityOptions ExperimentSetup::sensitivity_options() const {
  SensitivityOptions o;
  o.mask_rule = config_.mask_rule;
  return o;
}

namespace {

OptResult solve_one(const ExperimentSetup& setup, double alpha, double left_scale, const NodalField& warm, int k,
                    const IterationObserver& observer) {
  const auto cost = setup.make_cost(alpha);
  ReducedProblem problem(setup.forward(), *cost, setup.desired(left_scale), setup.initial_state(),
                         setup.sensitivity_options());
  return newton_cg(problem, warm, setup.newton_options(), k, observer);
}

}  // namespace

HomotopyResult homotopy_length(const ExperimentSetup& setup, int K, const IterationObserver& observer) {
  const auto& c = setup.config();
  return run_homotopy(K, setup.initial_control(), [&](int k, const NodalField& warm) {
    return solve_one(setup, c.params.alpha, homotopy_value(1.0, c.homotopy_factor, k), warm, k, observer);
  });
}

HomotopyResult homotopy_tikhonov(const ExperimentSetup& setup, int K, const IterationObserver& observer) {
  const auto& c = setup.config();
  return run_homotopy(K, setup.initial_control(), [&](int k, const NodalField& warm) {
    return solve_one(setup, homotopy_value(c.params.alpha, c.homotopy_factor, k), 1.0, warm, k, observer);
  });
}

HomotopyResult solve_experiment(const ExperimentSetup& setup, HomotopyKind kind, int K,
                                const IterationObserver& observer) {
  switch (kind) {
    case HomotopyKind::Length: return homotopy_length(setup, K, observer);
    case HomotopyKind::Tikhonov: return homotopy_tikhonov(setup, K, observer);
    case HomotopyKind::None: break;
  }
  return homotopy_length(setup, 0, observer);
}

int exit_code_for(OptStatus status) {
  switch (status) {
    case OptStatus::Converged: return kExitConverged;
    case OptStatus::MaxIterations: return kExitMaxIterations;
    case OptStatus::ForwardFailure: return kExitForwardFailure;
    case OptStatus::LineSearchFailure: return kExitLineSearch;
  }
  return kExitError;
}

RunReport run(const ExperimentConfig& config) {
  namespace fs = std::filesystem;
  ExperimentSetup setup(config);
  const fs::path dir(config.output_dir);
  fs::create_directories(dir);

  RunReport report;
  const fs::path iters_path = dir / "iters.csv";
  std::ofstream iters(iters_path);
  if (!iters) throw std::runtime_error("cannot write " + iters_path.string());
  write_iters_header(iters);
  report.files.push_back(iters_path.string());

  const HomotopyResult hr = solve_experiment(setup, config.homotopy, config.homotopy_steps, [&](const OptState& s) {
    write_iters_row(iters, s);
    iters.flush();
    report.rows.push_back(s);
  });

  const OptResult& last = hr.steps.back().result;
  report.status = last.status;
  report.exit_code = exit_code_for(last.status);
  report.message = last.message;
  if (!hr.completed())
    report.message = "homotopy step " + std::to_string(hr.failed_step) + ": " + to_string(last.status) +
                     (last.message.empty() ? "" : " (" + last.message + ")");

  // Fields come from the last converged step; a failed first step still
  // reports whatever it reached.
  const OptResult& best = hr.failed_step > 0 ? hr.steps[static_cast<std::size_t>(hr.failed_step - 1)].result : last;
  report.control = best.control;

  const fs::path control_path = dir / "control.csv";
  {
    std::ofstream os(control_path);
    const auto& controls = setup.controls();
    write_control_csv(os, controls, best.control, controls.time_blocks() - 1);
  }
  report.files.push_back(control_path.string());

  const auto& states = best.trajectory.states;
  for (int m : config.field_steps) {
    if (static_cast<std::size_t>(m) >= states.size()) continue;
    const fs::path p = dir / state_file_name(m);
    std::ofstream os(p);
    const NodalField* z = static_cast<std::size_t>(m) < best.adjoint.size() ? &best.adjoint[m] : nullptr;
    write_state_vtk(os, setup.mesh(), states[static_cast<std::size_t>(m)], z, best.trajectory.grid.t[m]);
    report.files.push_back(p.string());
  }
  return report;
}

}  // namespace pffc
