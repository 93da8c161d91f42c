#pragma once

#include <string>

#include "integrator.hpp"
#include "levelset.hpp"

namespace precess {

// Absolute-frame direction of the symmetry axis reconstructed from (gamma, psi):
// x = sin(theta) sin(psi), y = -sin(theta) cos(psi), z = g3 with
// sin(theta) = sqrt(1 - g3^2). Requires traj.psi to be filled.
std::string trace_sphere_csv(const Trajectory& traj);

// Orthographic projections of the trace: top view (x, y) and side view (x, z),
// each inside the unit circle. Deterministic output.
std::string trace_sphere_svg(const Trajectory& traj);

// Trajectory samples projected to the (r, g3) plane.
std::string project_rg3_csv(const Trajectory& traj);

std::string project_rg3_svg(const Trajectory& traj);

// Scatter of clustered section points, one color per torus cluster.
std::string project_rg3_svg(const TorusCount& tc);

} // namespace precess
