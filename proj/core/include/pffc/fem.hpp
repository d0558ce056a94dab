#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "pffc/mesh.hpp"

namespace pffc {

using SparseOperator = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using NodalField = Eigen::VectorXd;

/// Unknowns are interleaved per node: 3*node + field.
enum Field : int { Ux = 0, Uy = 1, Phi = 2 };
inline constexpr int kFields = 3;
inline constexpr int dof(int node, int field) { return kFields * node + field; }

struct Q1Values {
  std::array<double, 4> value{};
  std::array<std::array<double, 2>, 4> grad{};
};

/// Bilinear shape functions on the reference square [0,1]^2.
Q1Values q1_eval(Point ref);

inline constexpr int kQuadPerCell = 4;

/// 2x2 Gauss rule on [0,1]^2, weights sum to 1.
const std::array<Point, kQuadPerCell>& gauss_points();

/// Shape data of one cell at its four Gauss points, gradients in physical space.
struct CellGeometry {
  std::array<std::array<double, 4>, kQuadPerCell> N{};
  std::array<std::array<std::array<double, 2>, 4>, kQuadPerCell> dN{};
  std::array<double, kQuadPerCell> JxW{};
};

/// Throws InvalidGeometry when a cell Jacobian is not positive at a corner.
std::vector<CellGeometry> precompute_geometry(const Mesh& mesh);

struct DofMap {
  int num_nodes = 0;
  /// True for displacement unknowns of nodes on the Dirichlet boundary.
  std::vector<std::uint8_t> dirichlet_mask;
  std::vector<int> dirichlet_dofs;

  [[nodiscard]] int size() const { return kFields * num_nodes; }
  [[nodiscard]] bool constrained(int d) const { return dirichlet_mask[static_cast<std::size_t>(d)] != 0; }
};

DofMap make_dof_map(const Mesh& mesh, BoundaryTag dirichlet = BoundaryTag::DirichletBottom);

/// Fixed cell-coupling sparsity with precomputed scatter offsets, so repeated
/// assembly only writes into an existing value array.
class BlockPattern {
 public:
  BlockPattern(const Mesh& mesh, int fields);

  [[nodiscard]] int fields() const { return fields_; }
  [[nodiscard]] int local_size() const { return 4 * fields_; }
  /// Compressed matrix with the full pattern and zero values.
  [[nodiscard]] const SparseOperator& prototype() const { return proto_; }
  /// Adds a row-major (4 f) x (4 f) local matrix, local index = f * vertex + field.
  void scatter(SparseOperator& A, int cell, std::span<const double> local) const;

 private:
  int fields_;
  std::vector<int> offsets_;
  SparseOperator proto_;
};

enum class FieldKind { Scalar, Vector };

/// Bulk mass matrix; the vector variant is interleaved (2 per node).
SparseOperator assemble_bulk_mass(const Mesh& mesh, FieldKind kind = FieldKind::Scalar);

/// Scalar mass matrix over the cells in `order` (for order-independence checks).
SparseOperator assemble_bulk_mass(const Mesh& mesh, std::span<const int> order);

/// Scalar boundary mass over the union of edges carrying any of `tags`.
/// Throws InvalidGeometry if no edge matches.
SparseOperator assemble_boundary_mass(const Mesh& mesh, std::span<const BoundaryTag> tags);

/// Zero rows and columns of constrained unknowns and place 1 on the diagonal.
void apply_dirichlet(SparseOperator& A, const DofMap& dofs);
void zero_dirichlet(NodalField& v, const DofMap& dofs);

/// Scalar nodal field of one component of an interleaved vector.
NodalField extract_field(const NodalField& U, int field);
void insert_field(NodalField& U, int field, const NodalField& values);

/// Lifts a scalar nodal operator onto one field of the interleaved layout.
SparseOperator lift_to_field(const SparseOperator& scalar, int field, int num_nodes);

}  // namespace pffc
