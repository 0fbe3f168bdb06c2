#pragma once

#include <iosfwd>
#include <string>

#include "flownet/integrator.hpp"

namespace flownet {

/// Self-contained 960x540 SVG line plot of every vertex state over time,
/// with auto-scaled axes and a small legend.
void write_svg_timeseries(const Trajectory& traj, const std::string& title, std::ostream& out);

}  // namespace flownet
