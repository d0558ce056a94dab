#include "pffc/output.hpp"

#include <cstdio>
#include <ostream>

namespace pffc {

namespace {

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string sci(double v) { return fmt("%.10e", v); }

}  // namespace

void write_iters_header(std::ostream& os) { os << kItersHeader << '\n'; }

void write_iters_row(std::ostream& os, const OptState& row) {
  os << row.step << ',' << row.iter << ',' << row.cg << ',' << sci(row.rel_residual) << ','
     << sci(row.abs_residual) << ',' << sci(row.cost.total) << ',' << sci(row.cost.tracking) << ','
     << sci(row.cost.tikhonov) << ',' << sci(row.force) << '\n';
}

void write_control_csv(std::ostream& os, const ControlSpace& controls, const NodalField& c, int block) {
  const auto values = controls.sample_values(c, block);
  const auto& samples = controls.samples();
  os << "arclength,q\n";
  for (std::size_t i = 0; i < samples.size(); ++i)
    os << fmt("%.10e", samples[i].arclength) << ',' << sci(values[i]) << '\n';
}

void write_state_vtk(std::ostream& os, const Mesh& mesh, const NodalField& U, const NodalField* adjoint,
                     double time) {
  const auto n = static_cast<int>(mesh.num_vertices());
  os << "# vtk DataFile Version 3.0\n";
  os << "phase-field state t=" << fmt("%.10g", time) << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << n << " double\n";
  for (const auto& p : mesh.vertices) os << sci(p.x) << ' ' << sci(p.y) << " 0\n";
  os << "CELLS " << mesh.num_cells() << ' ' << 5 * mesh.num_cells() << '\n';
  for (const auto& c : mesh.cells) os << "4 " << c[0] << ' ' << c[1] << ' ' << c[2] << ' ' << c[3] << '\n';
  os << "CELL_TYPES " << mesh.num_cells() << '\n';
  for (std::size_t i = 0; i < mesh.num_cells(); ++i) os << "9\n";
  os << "POINT_DATA " << n << '\n';
  os << "SCALARS phi double 1\nLOOKUP_TABLE default\n";
  for (int i = 0; i < n; ++i) os << sci(U[dof(i, Phi)]) << '\n';
  os << "VECTORS displacement double\n";
  for (int i = 0; i < n; ++i) os << sci(U[dof(i, Ux)]) << ' ' << sci(U[dof(i, Uy)]) << " 0\n";
  if (adjoint != nullptr && adjoint->size() == U.size()) {
    os << "VECTORS adjoint_u double\n";
    for (int i = 0; i < n; ++i) os << sci((*adjoint)[dof(i, Ux)]) << ' ' << sci((*adjoint)[dof(i, Uy)]) << " 0\n";
    os << "SCALARS adjoint_phi double 1\nLOOKUP_TABLE default\n";
    for (int i = 0; i < n; ++i) os << sci((*adjoint)[dof(i, Phi)]) << '\n';
  }
}

std::string state_file_name(int m) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "state_m%04d.vtk", m);
  return buf;
}

}  // namespace pffc
