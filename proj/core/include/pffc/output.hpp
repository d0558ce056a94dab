#pragma once

#include <iosfwd>
#include <string>

#include "pffc/reduced.hpp"

namespace pffc {

inline constexpr const char* kItersHeader = "Step,Iter,CG,RelResidual,AbsResidual,Cost,Tracking,Tikhonov,Force";

void write_iters_header(std::ostream& os);
void write_iters_row(std::ostream& os, const OptState& row);

/// Two columns (arclength, q) for time block `block`, one row per boundary
/// sample. With several control boundaries the arclength restarts at each.
void write_control_csv(std::ostream& os, const ControlSpace& controls, const NodalField& c, int block = 0);

/// Legacy ASCII VTK with point data phi, displacement and (if given) the
/// displacement part of the adjoint.
void write_state_vtk(std::ostream& os, const Mesh& mesh, const NodalField& U, const NodalField* adjoint,
                     double time);

/// state_m0040.vtk style name.
std::string state_file_name(int m);

}  // namespace pffc
