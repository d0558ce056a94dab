#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pffc {

/// Raised for empty extents, non-positive cell counts and similar input errors.
class InvalidGeometry : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

enum class BoundaryTag : std::uint8_t { DirichletBottom, NeumannTop, NeumannLeft, Free };

std::string_view to_string(BoundaryTag tag);
BoundaryTag boundary_tag_from_string(std::string_view name);

/// One boundary edge: the owning cell, its local edge (0 bottom, 1 right,
/// 2 top, 3 left in reference orientation) and the tag.
struct BoundaryFacet {
  int cell = 0;
  int local_edge = 0;
  BoundaryTag tag = BoundaryTag::Free;
};

/// Quadrilateral mesh. Cell vertices are counterclockwise starting at the
/// lower-left corner, so the reference square (0,0),(1,0),(1,1),(0,1) maps
/// onto them in order.
struct Mesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 4>> cells;
  std::vector<BoundaryFacet> boundary_facets;

  [[nodiscard]] std::size_t num_vertices() const { return vertices.size(); }
  [[nodiscard]] std::size_t num_cells() const { return cells.size(); }

  [[nodiscard]] std::array<int, 2> facet_vertices(const BoundaryFacet& f) const;
  [[nodiscard]] double facet_length(const BoundaryFacet& f) const;
  [[nodiscard]] double cell_area(int cell) const;
  [[nodiscard]] double cell_diameter(int cell) const;
  /// Largest cell diameter, the `h` used by all band definitions.
  [[nodiscard]] double max_diameter() const;
  [[nodiscard]] double total_area() const;

  /// Sorted, unique vertex indices touching a facet with the given tag.
  [[nodiscard]] std::vector<int> boundary_nodes(BoundaryTag tag) const;
  [[nodiscard]] double boundary_length(BoundaryTag tag) const;
};

/// Tag assignment for the four sides of a rectangle.
struct RectangleTags {
  BoundaryTag bottom = BoundaryTag::DirichletBottom;
  BoundaryTag right = BoundaryTag::Free;
  BoundaryTag top = BoundaryTag::NeumannTop;
  BoundaryTag left = BoundaryTag::Free;
};

struct Extent {
  double lo = 0.0;
  double hi = 1.0;

  friend bool operator==(const Extent&, const Extent&) = default;
};

Mesh build_rectangle_mesh(Extent x, Extent y, int nx, int ny, const RectangleTags& tags = {});

/// L-shaped domain (0,1)^2 minus the lower-left quadrant (0,0.5)^2, built from
/// three n x n blocks. The Dirichlet part is the retained bottom edge
/// [0.5,1] x {0}; the reentrant corner sits at (0.5,0.5).
Mesh build_lshape_mesh(int n, BoundaryTag reentrant_vertical = BoundaryTag::Free);

struct Segment {
  Point a;
  Point b;
};

/// Selection rule for `nodes_near_segment`. The end test runs along the
/// segment's dominant axis; the band test measures the offset from the
/// segment line along the other axis.
struct BandRule {
  bool open_ends = false;
  bool open_band = false;
};

std::vector<int> nodes_near_segment(const Mesh& mesh, const Segment& segment, double half_width,
                                    BandRule rule = {});

/// Legacy VTK (ASCII) unstructured grid, cells only.
void write_vtk_mesh(std::ostream& os, const Mesh& mesh);

}  // namespace pffc
