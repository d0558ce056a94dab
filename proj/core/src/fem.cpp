#include "pffc/fem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pffc {

Q1Values q1_eval(Point r) {
  const double x = r.x;
  const double y = r.y;
  Q1Values q;
  q.value = {(1 - x) * (1 - y), x * (1 - y), x * y, (1 - x) * y};
  q.grad = {{{-(1 - y), -(1 - x)}, {1 - y, -x}, {y, x}, {-y, 1 - x}}};
  return q;
}

const std::array<Point, kQuadPerCell>& gauss_points() {
  static const std::array<Point, kQuadPerCell> pts = [] {
    const double a = 0.5 - 0.5 / std::sqrt(3.0);
    const double b = 0.5 + 0.5 / std::sqrt(3.0);
    return std::array<Point, kQuadPerCell>{{{a, a}, {b, a}, {b, b}, {a, b}}};
  }();
  return pts;
}

namespace {

struct Jacobian {
  double a, b, c, d;  // [[dx/dxi, dx/deta], [dy/dxi, dy/deta]]
  [[nodiscard]] double det() const { return a * d - b * c; }
};

Jacobian jacobian_at(const Mesh& mesh, int cell, const Q1Values& q) {
  const auto& c = mesh.cells[static_cast<std::size_t>(cell)];
  Jacobian J{0, 0, 0, 0};
  for (std::size_t k = 0; k < 4; ++k) {
    const Point& p = mesh.vertices[static_cast<std::size_t>(c[k])];
    J.a += p.x * q.grad[k][0];
    J.b += p.x * q.grad[k][1];
    J.c += p.y * q.grad[k][0];
    J.d += p.y * q.grad[k][1];
  }
  return J;
}

}  // namespace

std::vector<CellGeometry> precompute_geometry(const Mesh& mesh) {
  static const std::array<Point, 4> corners{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  std::vector<CellGeometry> geo(mesh.num_cells());
  for (std::size_t cell = 0; cell < mesh.num_cells(); ++cell) {
    const int ci = static_cast<int>(cell);
    for (const auto& corner : corners) {
      if (!(jacobian_at(mesh, ci, q1_eval(corner)).det() > 0.0)) {
        throw InvalidGeometry("cell " + std::to_string(cell) + " is degenerate or inverted");
      }
    }
    auto& g = geo[cell];
    for (int qp = 0; qp < kQuadPerCell; ++qp) {
      const auto q = q1_eval(gauss_points()[static_cast<std::size_t>(qp)]);
      const Jacobian J = jacobian_at(mesh, ci, q);
      const double det = J.det();
      const auto uq = static_cast<std::size_t>(qp);
      g.JxW[uq] = 0.25 * det;
      for (std::size_t a = 0; a < 4; ++a) {
        g.N[uq][a] = q.value[a];
        // Inverse-transpose map of reference gradients.
        const double gx = q.grad[a][0];
        const double gy = q.grad[a][1];
        g.dN[uq][a] = {(J.d * gx - J.c * gy) / det, (-J.b * gx + J.a * gy) / det};
      }
    }
  }
  return geo;
}

DofMap make_dof_map(const Mesh& mesh, BoundaryTag dirichlet) {
  DofMap dm;
  dm.num_nodes = static_cast<int>(mesh.num_vertices());
  dm.dirichlet_mask.assign(static_cast<std::size_t>(dm.size()), 0);
  for (int node : mesh.boundary_nodes(dirichlet)) {
    for (int f : {Ux, Uy}) {
      dm.dirichlet_mask[static_cast<std::size_t>(dof(node, f))] = 1;
      dm.dirichlet_dofs.push_back(dof(node, f));
    }
  }
  return dm;
}

BlockPattern::BlockPattern(const Mesh& mesh, int fields) : fields_(fields) {
  const int n = static_cast<int>(mesh.num_vertices()) * fields;
  const int ls = local_size();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.num_cells() * static_cast<std::size_t>(ls * ls));
  for (const auto& c : mesh.cells) {
    for (int a = 0; a < ls; ++a) {
      for (int b = 0; b < ls; ++b) {
        trip.emplace_back(fields * c[static_cast<std::size_t>(a / fields)] + a % fields,
                          fields * c[static_cast<std::size_t>(b / fields)] + b % fields, 0.0);
      }
    }
  }
  proto_.resize(n, n);
  proto_.setFromTriplets(trip.begin(), trip.end());
  proto_.makeCompressed();

  offsets_.resize(mesh.num_cells() * static_cast<std::size_t>(ls * ls));
  const int* outer = proto_.outerIndexPtr();
  const int* inner = proto_.innerIndexPtr();
  std::size_t k = 0;
  for (const auto& c : mesh.cells) {
    for (int a = 0; a < ls; ++a) {
      const int row = fields * c[static_cast<std::size_t>(a / fields)] + a % fields;
      for (int b = 0; b < ls; ++b) {
        const int col = fields * c[static_cast<std::size_t>(b / fields)] + b % fields;
        const int* first = inner + outer[col];
        const int* last = inner + outer[col + 1];
        offsets_[k++] = static_cast<int>(std::lower_bound(first, last, row) - inner);
      }
    }
  }
}

void BlockPattern::scatter(SparseOperator& A, int cell, std::span<const double> local) const {
  const auto ls = static_cast<std::size_t>(local_size());
  const int* off = offsets_.data() + static_cast<std::size_t>(cell) * ls * ls;
  double* values = A.valuePtr();
  for (std::size_t k = 0; k < ls * ls; ++k) values[off[k]] += local[k];
}

namespace {

void add_cell_mass(const CellGeometry& g, const std::array<int, 4>& c, int fields,
                   std::vector<Eigen::Triplet<double>>& trip) {
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = 0; b < 4; ++b) {
      double m = 0.0;
      for (std::size_t q = 0; q < kQuadPerCell; ++q) m += g.N[q][a] * g.N[q][b] * g.JxW[q];
      for (int f = 0; f < fields; ++f) trip.emplace_back(fields * c[a] + f, fields * c[b] + f, m);
    }
  }
}

}  // namespace

SparseOperator assemble_bulk_mass(const Mesh& mesh, FieldKind kind) {
  std::vector<int> order(mesh.num_cells());
  std::iota(order.begin(), order.end(), 0);
  if (kind == FieldKind::Scalar) return assemble_bulk_mass(mesh, order);

  const auto geo = precompute_geometry(mesh);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.num_cells() * 32);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) add_cell_mass(geo[c], mesh.cells[c], 2, trip);
  const auto n = static_cast<int>(2 * mesh.num_vertices());
  SparseOperator M(n, n);
  M.setFromTriplets(trip.begin(), trip.end());
  M.makeCompressed();
  return M;
}

SparseOperator assemble_bulk_mass(const Mesh& mesh, std::span<const int> order) {
  const auto geo = precompute_geometry(mesh);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(order.size() * 16);
  for (int c : order) {
    add_cell_mass(geo[static_cast<std::size_t>(c)], mesh.cells[static_cast<std::size_t>(c)], 1, trip);
  }
  const auto n = static_cast<int>(mesh.num_vertices());
  SparseOperator M(n, n);
  M.setFromTriplets(trip.begin(), trip.end());
  M.makeCompressed();
  return M;
}

SparseOperator assemble_boundary_mass(const Mesh& mesh, std::span<const BoundaryTag> tags) {
  const double g = 0.5 / std::sqrt(3.0);
  const std::array<double, 2> s{0.5 - g, 0.5 + g};
  std::vector<Eigen::Triplet<double>> trip;
  for (const auto& f : mesh.boundary_facets) {
    if (std::find(tags.begin(), tags.end(), f.tag) == tags.end()) continue;
    const auto v = mesh.facet_vertices(f);
    const double w = 0.5 * mesh.facet_length(f);
    for (double t : s) {
      const std::array<double, 2> N{1 - t, t};
      for (std::size_t a = 0; a < 2; ++a) {
        for (std::size_t b = 0; b < 2; ++b) trip.emplace_back(v[a], v[b], w * N[a] * N[b]);
      }
    }
  }
  if (trip.empty()) throw InvalidGeometry("boundary mass: no edge carries the requested tags");
  const auto n = static_cast<int>(mesh.num_vertices());
  SparseOperator G(n, n);
  G.setFromTriplets(trip.begin(), trip.end());
  G.makeCompressed();
  return G;
}

void apply_dirichlet(SparseOperator& A, const DofMap& dofs) {
  for (int col = 0; col < A.outerSize(); ++col) {
    const bool col_fixed = dofs.constrained(col);
    for (SparseOperator::InnerIterator it(A, col); it; ++it) {
      if (col_fixed || dofs.constrained(static_cast<int>(it.row()))) {
        it.valueRef() = it.row() == col ? 1.0 : 0.0;
      }
    }
  }
  // patterns without a stored diagonal (e.g. a lifted single-field operator)
  for (int d : dofs.dirichlet_dofs)
    if (A.coeff(d, d) != 1.0) A.coeffRef(d, d) = 1.0;
}

void zero_dirichlet(NodalField& v, const DofMap& dofs) {
  for (int d : dofs.dirichlet_dofs) v[d] = 0.0;
}

NodalField extract_field(const NodalField& U, int field) {
  const Eigen::Index n = U.size() / kFields;
  NodalField out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = U[kFields * i + field];
  return out;
}

void insert_field(NodalField& U, int field, const NodalField& values) {
  for (Eigen::Index i = 0; i < values.size(); ++i) U[kFields * i + field] = values[i];
}

SparseOperator lift_to_field(const SparseOperator& scalar, int field, int num_nodes) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(scalar.nonZeros()));
  for (int col = 0; col < scalar.outerSize(); ++col) {
    for (SparseOperator::InnerIterator it(scalar, col); it; ++it) {
      trip.emplace_back(dof(static_cast<int>(it.row()), field), dof(col, field), it.value());
    }
  }
  SparseOperator out(kFields * num_nodes, kFields * num_nodes);
  out.setFromTriplets(trip.begin(), trip.end());
  out.makeCompressed();
  return out;
}

}  // namespace pffc
