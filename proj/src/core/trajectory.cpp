#include <charconv>
#include <cstdio>
#include <fstream>

#include "matsplat/error.hpp"
#include "matsplat/io/io.hpp"

namespace matsplat::io {

namespace {

bool parse_row(const std::string& line, double (&v)[8]) {
  const char* p = line.data();
  const char* end = p + line.size();
  for (int k = 0; k < 8; ++k) {
    while (p < end && (*p == ' ' || *p == '\t')) ++p;
    const auto res = std::from_chars(p, end, v[k]);
    if (res.ec != std::errc()) return false;
    p = res.ptr;
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    if (k < 7) {
      if (p >= end || *p != ',') return false;
      ++p;
    }
  }
  return p == end;
}

}  // namespace

Trajectory load_trajectory(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  Trajectory traj;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#') continue;
    double v[8];
    if (!parse_row(line, v)) {
      if (traj.poses.empty() && lineno == 1) continue;  // header
      fail(ErrorKind::Format, path.string() + ":" + std::to_string(lineno) +
                                  ": expected timestamp,tx,ty,tz,qw,qx,qy,qz");
    }
    Pose pose;
    pose.timestamp = v[0];
    pose.translation = Vec3(v[1], v[2], v[3]);
    const Quat q(v[4], v[5], v[6], v[7]);
    if (!(q.norm() > 0)) fail(ErrorKind::Data, path.string() + ":" + std::to_string(lineno) + ": zero quaternion");
    pose.rotation = q.normalized();
    traj.poses.push_back(pose);
  }
  traj.validate();
  return traj;
}

void write_trajectory(const Trajectory& trajectory, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << "timestamp,tx,ty,tz,qw,qx,qy,qz\n";
  char buf[400];
  for (const Pose& p : trajectory.poses) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", p.timestamp,
                  p.translation.x(), p.translation.y(), p.translation.z(), p.rotation.w(), p.rotation.x(),
                  p.rotation.y(), p.rotation.z());
    out << buf;
  }
}

}  // namespace matsplat::io
