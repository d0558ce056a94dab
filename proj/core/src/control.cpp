#include "pffc/control.hpp"

#include <algorithm>
#include <cmath>

namespace pffc {

TimeGrid TimeGrid::uniform(double T, int M) {
  if (M < 1 || !(T > 0.0)) throw std::invalid_argument("time grid needs M >= 1 and T > 0");
  TimeGrid g;
  g.t.resize(static_cast<std::size_t>(M) + 1);
  for (int m = 0; m <= M; ++m) g.t[static_cast<std::size_t>(m)] = m == M ? T : T * m / M;
  return g;
}

namespace {

/// Boundary nodes ordered along the (straight) boundary.
std::vector<int> ordered_nodes(const Mesh& mesh, BoundaryTag tag) {
  std::vector<int> nodes = mesh.boundary_nodes(tag);
  if (nodes.empty()) return nodes;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (int n : nodes) {
    const Point& p = mesh.vertices[static_cast<std::size_t>(n)];
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const bool horizontal = xmax - xmin >= ymax - ymin;
  std::stable_sort(nodes.begin(), nodes.end(), [&](int a, int b) {
    const Point& p = mesh.vertices[static_cast<std::size_t>(a)];
    const Point& q = mesh.vertices[static_cast<std::size_t>(b)];
    return horizontal ? (p.x < q.x || (p.x == q.x && p.y < q.y)) : (p.y < q.y || (p.y == q.y && p.x < q.x));
  });
  return nodes;
}

}  // namespace

ControlSpace::ControlSpace(const Mesh& mesh, std::vector<ControlBoundary> boundaries, SpatialLayout spatial,
                           TimeLayout time, int num_steps)
    : boundaries_(std::move(boundaries)), spatial_(spatial), time_(time), num_steps_(num_steps) {
  if (boundaries_.empty()) throw InvalidGeometry("control space needs at least one boundary");
  if (num_steps_ < 1) throw InvalidGeometry("control space needs at least one time step");
  const auto N = static_cast<int>(mesh.num_vertices());
  node_x_.resize(mesh.num_vertices());
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) node_x_[v] = mesh.vertices[v].x;

  std::vector<Eigen::Triplet<double>> gram_t, load_t, fixed_t;
  double offset_length = 0.0;
  for (std::size_t k = 0; k < boundaries_.size(); ++k) {
    const auto& bd = boundaries_[k];
    if (bd.component != Ux && bd.component != Uy) throw InvalidGeometry("control component must be 0 or 1");
    const std::array<BoundaryTag, 1> tags{bd.tag};
    const SparseOperator Gk = assemble_boundary_mass(mesh, tags);
    const std::vector<int> nodes = ordered_nodes(mesh, bd.tag);
    std::vector<int> local(static_cast<std::size_t>(N), -1);
    for (std::size_t i = 0; i < nodes.size(); ++i) local[static_cast<std::size_t>(nodes[i])] = static_cast<int>(i);

    const int base = static_cast<int>(owner_.size());
    if (spatial_ == SpatialLayout::Nodal) {
      owner_.insert(owner_.end(), nodes.size(), static_cast<int>(k));
    } else {
      owner_.push_back(static_cast<int>(k));
    }

    double length = 0.0;
    for (int col = 0; col < Gk.outerSize(); ++col) {
      for (SparseOperator::InnerIterator it(Gk, col); it; ++it) {
        const int row = static_cast<int>(it.row());
        const double g = it.value();
        length += g;
        const int r_local = local[static_cast<std::size_t>(row)];
        const int c_local = local[static_cast<std::size_t>(col)];
        const int coeff_c = spatial_ == SpatialLayout::Nodal ? base + c_local : base;
        if (spatial_ == SpatialLayout::Nodal) gram_t.emplace_back(base + r_local, coeff_c, g);
        load_t.emplace_back(dof(row, bd.component), coeff_c, bd.sign * g);
        fixed_t.emplace_back(dof(row, bd.component), col, bd.sign * g);
      }
    }
    if (spatial_ == SpatialLayout::Scalar) gram_t.emplace_back(base, base, length);

    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (i > 0) {
        const Point& p = mesh.vertices[static_cast<std::size_t>(nodes[i - 1])];
        const Point& q = mesh.vertices[static_cast<std::size_t>(nodes[i])];
        s += std::hypot(q.x - p.x, q.y - p.y);
      }
      samples_.push_back({static_cast<int>(k), nodes[i], offset_length + s});
      sample_coeff_.push_back(spatial_ == SpatialLayout::Nodal ? base + static_cast<int>(i) : base);
    }
    offset_length += s;
  }

  const int ns = spatial_size();
  gram_.resize(ns, ns);
  gram_.setFromTriplets(gram_t.begin(), gram_t.end());
  gram_.makeCompressed();
  load_.resize(kFields * N, ns);
  load_.setFromTriplets(load_t.begin(), load_t.end());
  load_.makeCompressed();
  fixed_shape_.resize(kFields * N, N);
  fixed_shape_.setFromTriplets(fixed_t.begin(), fixed_t.end());
  fixed_shape_.makeCompressed();
  gram_solver_ = std::make_shared<const DirectSolver>(gram_);
}

Eigen::Ref<const NodalField> ControlSpace::block(const NodalField& c, int b) const {
  return c.segment(static_cast<Eigen::Index>(b) * spatial_size(), spatial_size());
}

NodalField ControlSpace::load(const NodalField& c, int m) const {
  return load_ * block(c, block_of_step(m));
}

NodalField ControlSpace::fixed_load(const AffineForce& force) const {
  NodalField values(static_cast<Eigen::Index>(node_x_.size()));
  for (std::size_t v = 0; v < node_x_.size(); ++v) values[static_cast<Eigen::Index>(v)] = force.at(node_x_[v]);
  return fixed_shape_ * values;
}

NodalField ControlSpace::constant(double value) const { return NodalField::Constant(size(), value); }

NodalField ControlSpace::apply_gram(const NodalField& c) const {
  NodalField out(c.size());
  const int ns = spatial_size();
  for (int b = 0; b < time_blocks(); ++b) out.segment(b * ns, ns) = gram_ * block(c, b);
  return out;
}

NodalField ControlSpace::solve_gram(const NodalField& dual) const {
  NodalField out(dual.size());
  const int ns = spatial_size();
  for (int b = 0; b < time_blocks(); ++b) out.segment(b * ns, ns) = gram_solver_->solve(block(dual, b));
  return out;
}

double ControlSpace::norm(const NodalField& c) const { return std::sqrt(std::max(0.0, c.dot(apply_gram(c)))); }

double ControlSpace::max_abs(const NodalField& c) { return c.size() == 0 ? 0.0 : c.cwiseAbs().maxCoeff(); }

std::vector<double> ControlSpace::sample_values(const NodalField& c, int b) const {
  const auto blk = block(c, b);
  std::vector<double> out;
  out.reserve(samples_.size());
  for (int coeff : sample_coeff_) out.push_back(blk[coeff]);
  return out;
}

}  // namespace pffc
