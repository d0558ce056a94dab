#include "pffc/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>

namespace pffc {

std::string_view to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::DirichletBottom: return "DirichletBottom";
    case BoundaryTag::NeumannTop: return "NeumannTop";
    case BoundaryTag::NeumannLeft: return "NeumannLeft";
    case BoundaryTag::Free: return "Free";
  }
  return "Free";
}

BoundaryTag boundary_tag_from_string(std::string_view name) {
  for (auto tag : {BoundaryTag::DirichletBottom, BoundaryTag::NeumannTop, BoundaryTag::NeumannLeft,
                   BoundaryTag::Free}) {
    if (to_string(tag) == name) return tag;
  }
  throw InvalidGeometry("unknown boundary tag '" + std::string(name) + "'");
}

std::array<int, 2> Mesh::facet_vertices(const BoundaryFacet& f) const {
  const auto& c = cells[static_cast<std::size_t>(f.cell)];
  return {c[static_cast<std::size_t>(f.local_edge)],
          c[static_cast<std::size_t>((f.local_edge + 1) % 4)]};
}

double Mesh::facet_length(const BoundaryFacet& f) const {
  const auto [a, b] = facet_vertices(f);
  const Point& p = vertices[static_cast<std::size_t>(a)];
  const Point& q = vertices[static_cast<std::size_t>(b)];
  return std::hypot(q.x - p.x, q.y - p.y);
}

double Mesh::cell_area(int cell) const {
  const auto& c = cells[static_cast<std::size_t>(cell)];
  double twice = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const Point& p = vertices[static_cast<std::size_t>(c[k])];
    const Point& q = vertices[static_cast<std::size_t>(c[(k + 1) % 4])];
    twice += p.x * q.y - q.x * p.y;
  }
  return 0.5 * twice;
}

double Mesh::cell_diameter(int cell) const {
  const auto& c = cells[static_cast<std::size_t>(cell)];
  double d = 0.0;
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = a + 1; b < 4; ++b) {
      const Point& p = vertices[static_cast<std::size_t>(c[a])];
      const Point& q = vertices[static_cast<std::size_t>(c[b])];
      d = std::max(d, std::hypot(q.x - p.x, q.y - p.y));
    }
  }
  return d;
}

double Mesh::max_diameter() const {
  double h = 0.0;
  for (std::size_t c = 0; c < cells.size(); ++c) h = std::max(h, cell_diameter(static_cast<int>(c)));
  return h;
}

double Mesh::total_area() const {
  double a = 0.0;
  for (std::size_t c = 0; c < cells.size(); ++c) a += cell_area(static_cast<int>(c));
  return a;
}

std::vector<int> Mesh::boundary_nodes(BoundaryTag tag) const {
  std::vector<int> nodes;
  for (const auto& f : boundary_facets) {
    if (f.tag != tag) continue;
    const auto [a, b] = facet_vertices(f);
    nodes.push_back(a);
    nodes.push_back(b);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return nodes;
}

double Mesh::boundary_length(BoundaryTag tag) const {
  double len = 0.0;
  for (const auto& f : boundary_facets) {
    if (f.tag == tag) len += facet_length(f);
  }
  return len;
}

namespace {

using KeepCell = std::function<bool(int, int)>;
using ClassifyEdge = std::function<BoundaryTag(Point midpoint, int local_edge)>;

// Structured tensor grid with an optional hole; numbering is lexicographic by (y, x).
Mesh build_structured(Extent x, Extent y, int nx, int ny, const KeepCell& keep,
                      const ClassifyEdge& classify) {
  const auto stride = static_cast<std::size_t>(nx + 1);
  auto kept = [&](int i, int j) { return i >= 0 && j >= 0 && i < nx && j < ny && keep(i, j); };

  std::vector<int> index((stride) * static_cast<std::size_t>(ny + 1), -1);
  auto slot = [&](int i, int j) -> int& {
    return index[static_cast<std::size_t>(j) * stride + static_cast<std::size_t>(i)];
  };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (!kept(i, j)) continue;
      slot(i, j) = slot(i + 1, j) = slot(i + 1, j + 1) = slot(i, j + 1) = 0;
    }
  }

  Mesh mesh;
  const double dx = (x.hi - x.lo) / nx;
  const double dy = (y.hi - y.lo) / ny;
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      if (slot(i, j) < 0) continue;
      slot(i, j) = static_cast<int>(mesh.vertices.size());
      // Snap the last row/column onto the extent to avoid round-off drift.
      const double px = i == nx ? x.hi : x.lo + i * dx;
      const double py = j == ny ? y.hi : y.lo + j * dy;
      mesh.vertices.push_back({px, py});
    }
  }

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (!kept(i, j)) continue;
      const int cell = static_cast<int>(mesh.cells.size());
      mesh.cells.push_back({slot(i, j), slot(i + 1, j), slot(i + 1, j + 1), slot(i, j + 1)});
      const std::array<std::array<int, 2>, 4> neighbour = {
          {{i, j - 1}, {i + 1, j}, {i, j + 1}, {i - 1, j}}};
      for (int e = 0; e < 4; ++e) {
        const auto& nb = neighbour[static_cast<std::size_t>(e)];
        if (kept(nb[0], nb[1])) continue;
        const auto& c = mesh.cells.back();
        const Point& p = mesh.vertices[static_cast<std::size_t>(c[static_cast<std::size_t>(e)])];
        const Point& q =
            mesh.vertices[static_cast<std::size_t>(c[static_cast<std::size_t>((e + 1) % 4)])];
        const Point mid{0.5 * (p.x + q.x), 0.5 * (p.y + q.y)};
        mesh.boundary_facets.push_back({cell, e, classify(mid, e)});
      }
    }
  }
  return mesh;
}

}  // namespace

Mesh build_rectangle_mesh(Extent x, Extent y, int nx, int ny, const RectangleTags& tags) {
  if (nx < 1 || ny < 1) throw InvalidGeometry("cell counts must be positive");
  if (!(x.hi > x.lo) || !(y.hi > y.lo)) throw InvalidGeometry("extents must be non-empty");
  return build_structured(
      x, y, nx, ny, [](int, int) { return true; },
      [&](Point, int edge) {
        switch (edge) {
          case 0: return tags.bottom;
          case 1: return tags.right;
          case 2: return tags.top;
          default: return tags.left;
        }
      });
}

Mesh build_lshape_mesh(int n, BoundaryTag reentrant_vertical) {
  if (n < 1) throw InvalidGeometry("L-shape block size must be positive");
  const double tol = 0.25 / n;
  return build_structured(
      {0.0, 1.0}, {0.0, 1.0}, 2 * n, 2 * n, [n](int i, int j) { return !(i < n && j < n); },
      [&](Point mid, int edge) {
        if (edge == 0 && mid.y < tol) return BoundaryTag::DirichletBottom;
        if (edge == 2 && mid.y > 1.0 - tol) return BoundaryTag::NeumannTop;
        if (edge == 3 && std::abs(mid.x - 0.5) < tol && mid.y < 0.5) return reentrant_vertical;
        return BoundaryTag::Free;
      });
}

std::vector<int> nodes_near_segment(const Mesh& mesh, const Segment& s, double half_width,
                                    BandRule rule) {
  if (half_width < 0.0) throw InvalidGeometry("half width must be non-negative");
  const double dx = s.b.x - s.a.x;
  const double dy = s.b.y - s.a.y;
  const bool along_x = std::abs(dx) >= std::abs(dy);
  const double scale = std::max({1.0, std::abs(s.a.x), std::abs(s.a.y), std::abs(s.b.x),
                                 std::abs(s.b.y)});
  const double tol = 1e-10 * scale;

  const double lo = along_x ? std::min(s.a.x, s.b.x) : std::min(s.a.y, s.b.y);
  const double hi = along_x ? std::max(s.a.x, s.b.x) : std::max(s.a.y, s.b.y);

  std::vector<int> nodes;
  if (dx == 0.0 && dy == 0.0) return nodes;
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const Point& p = mesh.vertices[v];
    const double t = along_x ? p.x : p.y;
    const bool inside_ends = rule.open_ends ? (t > lo + tol && t < hi - tol)
                                            : (t >= lo - tol && t <= hi + tol);
    if (!inside_ends) continue;
    const double offset = along_x ? p.y - (s.a.y + dy * (p.x - s.a.x) / dx)
                                  : p.x - (s.a.x + dx * (p.y - s.a.y) / dy);
    const bool inside_band = rule.open_band ? std::abs(offset) < half_width - tol
                                            : std::abs(offset) <= half_width + tol;
    if (inside_band) nodes.push_back(static_cast<int>(v));
  }
  return nodes;
}

void write_vtk_mesh(std::ostream& os, const Mesh& mesh) {
  os << "# vtk DataFile Version 3.0\npffc mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.vertices.size() << " double\n";
  os.precision(17);
  for (const auto& p : mesh.vertices) os << p.x << ' ' << p.y << " 0\n";
  os << "CELLS " << mesh.cells.size() << ' ' << 5 * mesh.cells.size() << '\n';
  for (const auto& c : mesh.cells) os << "4 " << c[0] << ' ' << c[1] << ' ' << c[2] << ' ' << c[3] << '\n';
  os << "CELL_TYPES " << mesh.cells.size() << '\n';
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) os << "9\n";
}

}  // namespace pffc
