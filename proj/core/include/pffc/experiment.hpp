#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pffc/homotopy.hpp"
#include "pffc/reduced.hpp"

namespace pffc {

enum class DomainKind { Rectangle, LShape };
enum class HomotopyKind { None, Length, Tikhonov };

/// Nodes near `segment` get phi = 0. The half width is in units of the cell
/// diameter h so it follows mesh refinement.
struct Band {
  Segment segment;
  double half_width_h = 0.0;
  BandRule rule{true, true};

  friend bool operator==(const Band& a, const Band& b) {
    return a.segment.a.x == b.segment.a.x && a.segment.a.y == b.segment.a.y && a.segment.b.x == b.segment.b.x &&
           a.segment.b.y == b.segment.b.y && a.half_width_h == b.half_width_h &&
           a.rule.open_ends == b.rule.open_ends && a.rule.open_band == b.rule.open_band;
  }
};

struct ExperimentConfig {
  int experiment = 0;

  DomainKind domain = DomainKind::Rectangle;
  Extent x{0.0, 1.0};
  Extent y{0.0, 1.0};
  /// Cells per direction; for the L-shape nx is the cell count per block side.
  int nx = 64;
  int ny = 64;
  BoundaryTag reentrant_tag = BoundaryTag::Free;

  double T = 1.0;
  int M = 40;

  ModelParams params;

  std::vector<Band> notches;
  std::vector<Band> desired;
  /// The desired field also keeps the initial notches at zero.
  bool desired_keeps_notch = true;

  std::vector<ControlBoundary> control_boundaries{{BoundaryTag::NeumannTop, Uy, 1.0}};
  SpatialLayout spatial = SpatialLayout::Scalar;
  TimeLayout time = TimeLayout::Constant;
  double q0 = 1.0;
  AffineForce qc;

  CostWeighting weighting = CostWeighting::TimeStep;
  AdjointMaskRule mask_rule = AdjointMaskRule::Consistent;

  double tol_abs = 5e-11;
  double tol_rel = 0.0;
  double forward_tol = 1e-10;
  int forward_max_iters = 50;
  int newton_max_iters = 50;
  double cg_rel_tol = 1e-2;

  HomotopyKind homotopy = HomotopyKind::None;
  int homotopy_steps = 0;
  double homotopy_factor = 0.99;

  /// Time indices written as VTK field files.
  std::vector<int> field_steps;
  std::string output_dir = "out";

  /// Throws ConfigError on inconsistent values.
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// The six built-in experiments. Throws ConfigError for n outside 1..6.
ExperimentConfig preset(int n);

struct Overrides {
  std::optional<double> mesh_scale;
  std::optional<int> time_steps;
  std::optional<double> tol_abs;
  std::optional<HomotopyKind> homotopy;
  std::optional<int> homotopy_steps;
  std::optional<std::string> output_dir;
};

/// Applies overrides; rescaling M moves the field output steps along.
void apply_overrides(ExperimentConfig& config, const Overrides& overrides);

/// Mesh, discretization and solver objects built from a configuration.
class ExperimentSetup {
 public:
  explicit ExperimentSetup(ExperimentConfig config);
  ExperimentSetup(const ExperimentSetup&) = delete;
  ExperimentSetup& operator=(const ExperimentSetup&) = delete;

  [[nodiscard]] const ExperimentConfig& config() const { return config_; }
  [[nodiscard]] const Mesh& mesh() const { return *mesh_; }
  [[nodiscard]] const DofMap& dofs() const { return *dofs_; }
  [[nodiscard]] const PhaseFieldForms& forms() const { return *forms_; }
  [[nodiscard]] const ControlSpace& controls() const { return *controls_; }
  [[nodiscard]] const ForwardSolver& forward() const { return *forward_; }
  [[nodiscard]] double h() const { return h_; }

  /// Initial nodal phi: zero on the notches, one elsewhere.
  [[nodiscard]] NodalField initial_phi() const;
  [[nodiscard]] NodalField initial_state() const;
  /// Desired phi; `left_scale` multiplies the left end of the first desired band.
  [[nodiscard]] DesiredField desired(double left_scale = 1.0) const;
  [[nodiscard]] NodalField initial_control() const { return controls_->constant(config_.q0); }
  [[nodiscard]] std::unique_ptr<CostFunctional> make_cost(double alpha) const;
  [[nodiscard]] NewtonCgOptions newton_options() const;
  [[nodiscard]] SensitivityOptions sensitivity_options() const;

 private:
  ExperimentConfig config_;
  std::unique_ptr<Mesh> mesh_;
  std::unique_ptr<DofMap> dofs_;
  std::unique_ptr<PhaseFieldForms> forms_;
  std::unique_ptr<ControlSpace> controls_;
  std::unique_ptr<ForwardSolver> forward_;
  double h_ = 0.0;
};

Mesh build_mesh(const ExperimentConfig& config);

/// Runs the configured homotopy (or a single NLP when K = 0 / kind None).
HomotopyResult solve_experiment(const ExperimentSetup& setup, HomotopyKind kind, int K,
                                const IterationObserver& observer = {});
HomotopyResult homotopy_length(const ExperimentSetup& setup, int K, const IterationObserver& observer = {});
HomotopyResult homotopy_tikhonov(const ExperimentSetup& setup, int K, const IterationObserver& observer = {});

enum ExitCode : int {
  kExitConverged = 0,
  kExitError = 1,
  kExitUsage = 2,
  kExitForwardFailure = 3,
  kExitMaxIterations = 4,
  kExitLineSearch = 5,
};

int exit_code_for(OptStatus status);

struct RunReport {
  OptStatus status = OptStatus::MaxIterations;
  int exit_code = kExitMaxIterations;
  std::vector<OptState> rows;
  NodalField control;
  std::string message;
  std::vector<std::string> files;
};

/// Solves the experiment and writes iters.csv, control.csv and state files
/// into config.output_dir.
RunReport run(const ExperimentConfig& config);

std::string to_string(HomotopyKind kind);
HomotopyKind homotopy_kind_from_string(const std::string& s);

}  // namespace pffc
