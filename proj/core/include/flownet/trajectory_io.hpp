#pragma once

#include <iosfwd>
#include <string>

#include "flownet/integrator.hpp"

namespace flownet {

/// CSV with header t,x_0..,xc_0..,u_0..[,V]; one row per sample. Doubles are
/// written in shortest round-trip decimal form, so re-reading reproduces the
/// samples bit for bit. The xc block is omitted when the run carries no
/// controller state. include_lyapunov requires a recorded Lyapunov column.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out, bool include_lyapunov);
std::string trajectory_csv(const Trajectory& traj, bool include_lyapunov);

/// Inverse of write_trajectory_csv; the terminal summary is left empty.
Trajectory read_trajectory_csv(std::istream& in);
Trajectory trajectory_from_csv(const std::string& text);

}  // namespace flownet
