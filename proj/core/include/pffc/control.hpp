#pragma once

#include <memory>
#include <vector>

#include "pffc/fem.hpp"
#include "pffc/linear_solver.hpp"

namespace pffc {

/// Equidistant or general time points t_0 = 0 < t_1 < ... < t_M.
struct TimeGrid {
  std::vector<double> t;

  static TimeGrid uniform(double T, int M);
  [[nodiscard]] int steps() const { return static_cast<int>(t.size()) - 1; }
  [[nodiscard]] double dt(int m) const { return t[static_cast<std::size_t>(m)] - t[static_cast<std::size_t>(m - 1)]; }
};

/// One control boundary: traction acts on displacement `component` with `sign`.
struct ControlBoundary {
  BoundaryTag tag = BoundaryTag::NeumannTop;
  int component = Uy;
  double sign = 1.0;

  friend bool operator==(const ControlBoundary&, const ControlBoundary&) = default;
};

enum class SpatialLayout { Scalar, Nodal };
enum class TimeLayout { Constant, PerStep };

/// Fixed external traction q_c(x) = c0 + c1 * x along the control directions.
struct AffineForce {
  double c0 = 0.0;
  double c1 = 0.0;

  [[nodiscard]] bool active() const { return c0 != 0.0 || c1 != 0.0; }
  [[nodiscard]] double at(double x) const { return c0 + c1 * x; }

  friend bool operator==(const AffineForce&, const AffineForce&) = default;
};

/// Discrete control space. A control vector stores `time_blocks()` blocks of
/// `spatial_size()` coefficients. Nodal layout has one coefficient per node of
/// each control boundary (a node shared by two boundaries owns two), scalar
/// layout one per boundary.
class ControlSpace {
 public:
  ControlSpace(const Mesh& mesh, std::vector<ControlBoundary> boundaries, SpatialLayout spatial,
               TimeLayout time, int num_steps);

  [[nodiscard]] int spatial_size() const { return static_cast<int>(owner_.size()); }
  [[nodiscard]] int time_blocks() const { return time_ == TimeLayout::Constant ? 1 : num_steps_; }
  [[nodiscard]] int size() const { return spatial_size() * time_blocks(); }
  [[nodiscard]] SpatialLayout spatial_layout() const { return spatial_; }
  [[nodiscard]] TimeLayout time_layout() const { return time_; }
  [[nodiscard]] const std::vector<ControlBoundary>& boundaries() const { return boundaries_; }

  /// Block index used at time step m (1..M).
  [[nodiscard]] int block_of_step(int m) const { return time_ == TimeLayout::Constant ? 0 : m - 1; }
  [[nodiscard]] Eigen::Ref<const NodalField> block(const NodalField& c, int b) const;

  /// Spatial Gram matrix G_ij = (q_i, q_j) over the control boundaries.
  [[nodiscard]] const SparseOperator& gram() const { return gram_; }
  /// Load operator B: interleaved state dofs x spatial control coefficients.
  [[nodiscard]] const SparseOperator& load_operator() const { return load_; }

  /// B * (control block active at step m).
  [[nodiscard]] NodalField load(const NodalField& c, int m) const;
  /// Load of a fixed traction along every control boundary.
  [[nodiscard]] NodalField fixed_load(const AffineForce& force) const;

  [[nodiscard]] NodalField constant(double value) const;
  /// Block-diagonal Gram product over all time blocks.
  [[nodiscard]] NodalField apply_gram(const NodalField& c) const;
  [[nodiscard]] NodalField solve_gram(const NodalField& dual) const;
  /// sqrt(c^T G c) with the block Gram.
  [[nodiscard]] double norm(const NodalField& c) const;
  [[nodiscard]] static double max_abs(const NodalField& c);

  /// One entry per boundary node of each control boundary, in boundary order.
  struct Sample {
    int boundary;
    int node;
    double arclength;
  };
  [[nodiscard]] const std::vector<Sample>& samples() const { return samples_; }
  /// Value of block b at every sample.
  [[nodiscard]] std::vector<double> sample_values(const NodalField& c, int b) const;

 private:
  std::vector<ControlBoundary> boundaries_;
  SpatialLayout spatial_;
  TimeLayout time_;
  int num_steps_;
  /// Boundary index of each spatial coefficient.
  std::vector<int> owner_;
  /// Spatial coefficient of each sample.
  std::vector<int> sample_coeff_;
  std::vector<Sample> samples_;
  SparseOperator gram_;
  SparseOperator load_;
  SparseOperator fixed_shape_;
  std::vector<double> node_x_;
  std::shared_ptr<const DirectSolver> gram_solver_;
};

}  // namespace pffc
