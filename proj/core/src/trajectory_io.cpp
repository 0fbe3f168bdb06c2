#include "flownet/trajectory_io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace flownet {

namespace {

void append_double(std::string& out, double value) {
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof buf, value);
  out.append(buf, result.ptr);
}

double parse_double(std::string_view token, size_t line) {
  double value = 0.0;
  const auto result = std::from_chars(token.data(), token.data() + token.size(), value);
  if (result.ec != std::errc() || result.ptr != token.data() + token.size()) {
    throw std::invalid_argument("trajectory csv: bad number on line " + std::to_string(line));
  }
  return value;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

void write_trajectory_csv(const Trajectory& traj, std::ostream& out, bool include_lyapunov) {
  if (include_lyapunov && !traj.has_lyapunov) {
    throw std::invalid_argument("trajectory csv: no Lyapunov column was recorded");
  }
  if (traj.samples() == 0) throw std::invalid_argument("trajectory csv: empty trajectory");

  const int n = static_cast<int>(traj.x.front().size());
  const int m_xc = static_cast<int>(traj.xc.front().size());
  const int m_u = static_cast<int>(traj.flow.front().size());

  std::string line = "t";
  for (int i = 0; i < n; ++i) line += ",x_" + std::to_string(i);
  for (int i = 0; i < m_xc; ++i) line += ",xc_" + std::to_string(i);
  for (int i = 0; i < m_u; ++i) line += ",u_" + std::to_string(i);
  if (include_lyapunov) line += ",V";
  out << line << "\n";

  for (size_t k = 0; k < traj.samples(); ++k) {
    line.clear();
    append_double(line, traj.times[k]);
    for (int i = 0; i < n; ++i) {
      line += ',';
      append_double(line, traj.x[k][i]);
    }
    for (int i = 0; i < m_xc; ++i) {
      line += ',';
      append_double(line, traj.xc[k][i]);
    }
    for (int i = 0; i < m_u; ++i) {
      line += ',';
      append_double(line, traj.flow[k][i]);
    }
    if (include_lyapunov) {
      line += ',';
      append_double(line, traj.lyapunov[k]);
    }
    out << line << "\n";
  }
}

std::string trajectory_csv(const Trajectory& traj, bool include_lyapunov) {
  std::ostringstream out;
  write_trajectory_csv(traj, out, include_lyapunov);
  return out.str();
}

Trajectory read_trajectory_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw std::invalid_argument("trajectory csv: missing header");

  int n = 0;
  int m_xc = 0;
  int m_u = 0;
  bool has_v = false;
  {
    const std::vector<std::string_view> fields = split(header);
    if (fields.empty() || fields[0] != "t") {
      throw std::invalid_argument("trajectory csv: header must start with t");
    }
    for (size_t i = 1; i < fields.size(); ++i) {
      const std::string_view f = fields[i];
      if (f.rfind("x_", 0) == 0) {
        ++n;
      } else if (f.rfind("xc_", 0) == 0) {
        ++m_xc;
      } else if (f.rfind("u_", 0) == 0) {
        ++m_u;
      } else if (f == "V" && i + 1 == fields.size()) {
        has_v = true;
      } else {
        throw std::invalid_argument("trajectory csv: unexpected header column");
      }
    }
  }

  Trajectory traj;
  traj.has_lyapunov = has_v;
  const size_t expected = 1 + static_cast<size_t>(n + m_xc + m_u) + (has_v ? 1 : 0);
  std::string line;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string_view> fields = split(line);
    if (fields.size() != expected) {
      throw std::invalid_argument("trajectory csv: wrong field count on line " +
                                  std::to_string(line_no));
    }
    size_t at = 0;
    traj.times.push_back(parse_double(fields[at++], line_no));
    Eigen::VectorXd x(n), xc(m_xc), u(m_u);
    for (int i = 0; i < n; ++i) x[i] = parse_double(fields[at++], line_no);
    for (int i = 0; i < m_xc; ++i) xc[i] = parse_double(fields[at++], line_no);
    for (int i = 0; i < m_u; ++i) u[i] = parse_double(fields[at++], line_no);
    traj.x.push_back(std::move(x));
    traj.xc.push_back(std::move(xc));
    traj.flow.push_back(std::move(u));
    if (has_v) traj.lyapunov.push_back(parse_double(fields[at++], line_no));
  }
  if (traj.samples() == 0) throw std::invalid_argument("trajectory csv: no samples");
  return traj;
}

Trajectory trajectory_from_csv(const std::string& text) {
  std::istringstream in(text);
  return read_trajectory_csv(in);
}

}  // namespace flownet
