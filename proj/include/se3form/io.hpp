// Copyright 2026 The se3form Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Trajectory CSV export/import and SVG trajectory plots.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "se3form/error.hpp"
#include "se3form/lie.hpp"
#include "se3form/simulation.hpp"

namespace se3form {

inline constexpr const char* kTrajectoryCsvHeader =
    "t,agent,px,py,pz,r11,r12,r13,r21,r22,r23,r31,r32,r33,vx,vy,vz,wx,wy,wz,phi,"
    "centroid_x,centroid_y,centroid_z,scale";

namespace detail {

// 17 significant digits round-trips every double.
inline void append_real(std::string& out, double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  out += buf;
}

}  // namespace detail

/// One row per agent per recorded sample, in sample order then agent order.
inline void write_trajectory(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  std::string buf;
  buf.reserve(1 << 16);
  buf += kTrajectoryCsvHeader;
  buf += '\n';
  for (const Sample& s : traj.samples) {
    for (int i = 0; i < s.state.size(); ++i) {
      std::array<double, 23> fields{};
      std::size_t f = 0;
      const Vec3& p = s.state.positions[i];
      const Mat3& R = s.state.rotations[i];
      for (int k = 0; k < 3; ++k) fields[f++] = p(k);
      for (int k = 0; k < 9; ++k) fields[f++] = R(k / 3, k % 3);
      for (int k = 0; k < 3; ++k) fields[f++] = s.inputs[i].v(k);
      for (int k = 0; k < 3; ++k) fields[f++] = s.inputs[i].w(k);
      fields[f++] = s.phi;
      for (int k = 0; k < 3; ++k) fields[f++] = s.centroid(k);
      fields[f++] = s.scale;

      detail::append_real(buf, s.t);
      buf += ',';
      buf += std::to_string(i);
      for (double x : fields) {
        buf += ',';
        detail::append_real(buf, x);
      }
      buf += '\n';
    }
    if (buf.size() > (1 << 15)) {
      out << buf;
      buf.clear();
    }
  }
  out << buf;
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path);
}

struct TrajectoryRow {
  double t = 0.0;
  int agent = 0;
  Vec3 p = Vec3::Zero();
  Mat3 R = Mat3::Identity();
  Vec3 v = Vec3::Zero();
  Vec3 w = Vec3::Zero();
  double phi = 0.0;
  Vec3 centroid = Vec3::Zero();
  double scale = 0.0;
};

/// Reads a file produced by write_trajectory.
inline std::vector<TrajectoryRow> read_trajectory(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kTrajectoryCsvHeader) {
    throw Error(ErrorCode::ParseError, path + ": unexpected trajectory header");
  }
  std::vector<TrajectoryRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> f;
    const char* c = line.c_str();
    while (*c) {
      char* end = nullptr;
      f.push_back(std::strtod(c, &end));
      if (end == c) break;
      c = end;
      if (*c == ',') ++c;
    }
    if (f.size() != 25) {
      throw Error(ErrorCode::ParseError, path + ": line " + std::to_string(lineno) + " has " +
                                             std::to_string(f.size()) + " fields, expected 25");
    }
    TrajectoryRow r;
    r.t = f[0];
    r.agent = static_cast<int>(f[1]);
    r.p = Vec3(f[2], f[3], f[4]);
    for (int k = 0; k < 9; ++k) r.R(k / 3, k % 3) = f[5 + k];
    r.v = Vec3(f[14], f[15], f[16]);
    r.w = Vec3(f[17], f[18], f[19]);
    r.phi = f[20];
    r.centroid = Vec3(f[21], f[22], f[23]);
    r.scale = f[24];
    rows.push_back(r);
  }
  return rows;
}

enum class Projection { XY, XZ, YZ, Iso };

inline std::optional<Projection> parse_projection(std::string_view s) {
  if (s == "xy") return Projection::XY;
  if (s == "xz") return Projection::XZ;
  if (s == "yz") return Projection::YZ;
  if (s == "iso") return Projection::Iso;
  return std::nullopt;
}

struct PlotOptions {
  Projection projection = Projection::Iso;
  // Desired formation drawn around the final centroid, when given.
  std::optional<std::vector<Vec3>> target_overlay;
};

namespace detail {

inline Eigen::Vector2d project_point(const Vec3& p, Projection proj) {
  switch (proj) {
    case Projection::XY: return {p.x(), p.y()};
    case Projection::XZ: return {p.x(), p.z()};
    case Projection::YZ: return {p.y(), p.z()};
    case Projection::Iso: {
      const double c = std::cos(M_PI / 6.0);
      return {c * (p.x() - p.y()), 0.5 * (p.x() + p.y()) + p.z()};
    }
  }
  return {p.x(), p.y()};
}

inline std::string fmt_coord(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  return buf;
}

}  // namespace detail

/// Self-contained SVG: one polyline per agent, a circle at each start, a
/// square at each end and, optionally, the target formation.
inline void emit_plot(const Trajectory& traj, const std::string& path, const PlotOptions& opts = {}) {
  if (traj.samples.empty()) {
    throw Error(ErrorCode::InvalidArgument, "cannot plot an empty trajectory");
  }
  const int n = traj.samples.front().state.size();
  std::vector<Eigen::Vector2d> points;
  for (const Sample& s : traj.samples) {
    for (const Vec3& p : s.state.positions) points.push_back(detail::project_point(p, opts.projection));
  }
  std::vector<Eigen::Vector2d> overlay;
  if (opts.target_overlay && !opts.target_overlay->empty()) {
    Vec3 c = Vec3::Zero();
    for (const Vec3& p : *opts.target_overlay) c += p;
    c /= static_cast<double>(opts.target_overlay->size());
    for (const Vec3& p : *opts.target_overlay) {
      overlay.push_back(detail::project_point(p - c + traj.final_sample().centroid, opts.projection));
    }
  }

  Eigen::Vector2d lo = points.front(), hi = points.front();
  for (const auto* set : {&points, &overlay}) {
    for (const auto& q : *set) {
      lo = lo.cwiseMin(q);
      hi = hi.cwiseMax(q);
    }
  }
  constexpr double kSize = 800.0, kMargin = 40.0;
  const double span = std::max({hi.x() - lo.x(), hi.y() - lo.y(), 1e-9});
  const double scale = (kSize - 2 * kMargin) / span;
  auto screen = [&](const Eigen::Vector2d& q) {
    // SVG y grows downward.
    return Eigen::Vector2d(kMargin + (q.x() - lo.x()) * scale, kSize - kMargin - (q.y() - lo.y()) * scale);
  };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\"" << kSize
      << "\" viewBox=\"0 0 " << kSize << ' ' << kSize << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  svg << "<g id=\"trajectories\" fill=\"none\" stroke=\"gray\" stroke-width=\"1\">\n";
  for (int i = 0; i < n; ++i) {
    svg << "<polyline class=\"trajectory\" data-agent=\"" << i << "\" points=\"";
    bool first = true;
    for (const Sample& s : traj.samples) {
      const auto q = screen(detail::project_point(s.state.positions[i], opts.projection));
      svg << (first ? "" : " ") << detail::fmt_coord(q.x()) << ',' << detail::fmt_coord(q.y());
      first = false;
    }
    svg << "\"/>\n";
  }
  svg << "</g>\n";

  svg << "<g id=\"start-markers\" fill=\"darkgray\">\n";
  for (int i = 0; i < n; ++i) {
    const auto q = screen(detail::project_point(traj.samples.front().state.positions[i], opts.projection));
    svg << "<circle class=\"start\" data-agent=\"" << i << "\" cx=\"" << detail::fmt_coord(q.x())
        << "\" cy=\"" << detail::fmt_coord(q.y()) << "\" r=\"4\"/>\n";
  }
  svg << "</g>\n";

  svg << "<g id=\"end-markers\" fill=\"blue\">\n";
  for (int i = 0; i < n; ++i) {
    const auto q = screen(detail::project_point(traj.final_sample().state.positions[i], opts.projection));
    svg << "<rect class=\"end\" data-agent=\"" << i << "\" x=\"" << detail::fmt_coord(q.x() - 4)
        << "\" y=\"" << detail::fmt_coord(q.y() - 4) << "\" width=\"8\" height=\"8\"/>\n";
  }
  svg << "</g>\n";

  if (!overlay.empty()) {
    svg << "<g id=\"target\" fill=\"none\" stroke=\"red\" stroke-width=\"2\">\n";
    for (std::size_t i = 0; i < overlay.size(); ++i) {
      const auto q = screen(overlay[i]);
      svg << "<circle class=\"target\" data-agent=\"" << i << "\" cx=\"" << detail::fmt_coord(q.x())
          << "\" cy=\"" << detail::fmt_coord(q.y()) << "\" r=\"7\"/>\n";
    }
    svg << "</g>\n";
  }
  svg << "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << svg.str();
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path);
}

}  // namespace se3form
