#include "flownet/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace flownet {

namespace {

constexpr double kWidth = 960.0;
constexpr double kHeight = 540.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 930.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 495.0;

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// Round tick spacing to 1/2/5 times a power of ten.
double tick_step(double span) {
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  if (norm < 1.5) return mag;
  if (norm < 3.5) return 2.0 * mag;
  if (norm < 7.5) return 5.0 * mag;
  return 10.0 * mag;
}

}  // namespace

void write_svg_timeseries(const Trajectory& traj, const std::string& title, std::ostream& out) {
  if (traj.samples() == 0) throw std::invalid_argument("svg plot: empty trajectory");
  const int n = static_cast<int>(traj.x.front().size());

  double t_min = traj.times.front();
  double t_max = traj.times.back();
  double y_min = traj.x.front().minCoeff();
  double y_max = traj.x.front().maxCoeff();
  for (const Eigen::VectorXd& x : traj.x) {
    y_min = std::min(y_min, x.minCoeff());
    y_max = std::max(y_max, x.maxCoeff());
  }
  if (t_max == t_min) t_max = t_min + 1.0;
  if (y_max == y_min) {
    y_min -= 1.0;
    y_max += 1.0;
  }
  const double y_pad = 0.05 * (y_max - y_min);
  y_min -= y_pad;
  y_max += y_pad;

  auto sx = [&](double t) { return kLeft + (t - t_min) / (t_max - t_min) * (kRight - kLeft); };
  auto sy = [&](double y) { return kBottom - (y - y_min) / (y_max - y_min) * (kBottom - kTop); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";

  const double tx = tick_step(t_max - t_min);
  for (double t = std::ceil(t_min / tx) * tx; t <= t_max + 1e-9 * tx; t += tx) {
    out << "<line x1=\"" << sx(t) << "\" y1=\"" << kTop << "\" x2=\"" << sx(t) << "\" y2=\""
        << kBottom << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << sx(t) << "\" y=\"" << kBottom + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << fmt(t)
        << "</text>\n";
  }
  const double ty = tick_step(y_max - y_min);
  for (double y = std::ceil(y_min / ty) * ty; y <= y_max + 1e-9 * ty; y += ty) {
    out << "<line x1=\"" << kLeft << "\" y1=\"" << sy(y) << "\" x2=\"" << kRight << "\" y2=\""
        << sy(y) << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << kLeft - 8 << "\" y=\"" << sy(y) + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << fmt(y)
        << "</text>\n";
  }
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kRight - kLeft
      << "\" height=\"" << kBottom - kTop << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"" << kHeight - 8
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">t</text>\n";

  for (int i = 0; i < n; ++i) {
    out << "<polyline fill=\"none\" stroke=\"" << kPalette[i % 8]
        << "\" stroke-width=\"1.5\" points=\"";
    for (size_t k = 0; k < traj.samples(); ++k) {
      out << sx(traj.times[k]) << "," << sy(traj.x[k][i]) << " ";
    }
    out << "\"/>\n";
  }

  for (int i = 0; i < n; ++i) {
    const double lx = kRight - 70.0;
    const double ly = kTop + 12.0 + 16.0 * i;
    out << "<rect x=\"" << lx << "\" y=\"" << ly - 9 << "\" width=\"12\" height=\"4\" fill=\""
        << kPalette[i % 8] << "\"/>\n";
    out << "<text x=\"" << lx + 18 << "\" y=\"" << ly
        << "\" font-family=\"sans-serif\" font-size=\"12\">x_" << i << "</text>\n";
  }

  out << "</svg>\n";
}

}  // namespace flownet
