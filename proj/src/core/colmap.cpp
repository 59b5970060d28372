#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "matsplat/error.hpp"
#include "matsplat/io/io.hpp"

namespace matsplat::io {

namespace {

struct Intrinsics {
  int width = 0, height = 0;
  double fx = 0, fy = 0, cx = 0, cy = 0;
};

bool skippable(const std::string& line) {
  const auto p = line.find_first_not_of(" \t\r");
  return p == std::string::npos || line[p] == '#';
}

std::map<long long, Intrinsics> read_intrinsics(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  std::map<long long, Intrinsics> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skippable(line)) continue;
    std::istringstream ls(line);
    long long id = 0;
    std::string model;
    Intrinsics k;
    if (!(ls >> id >> model >> k.width >> k.height))
      fail(ErrorKind::Format, path.string() + ":" + std::to_string(lineno) + ": malformed camera line");
    std::vector<double> params;
    for (double v; ls >> v;) params.push_back(v);
    if (model == "PINHOLE") {
      if (params.size() != 4)
        fail(ErrorKind::Format, path.string() + ":" + std::to_string(lineno) + ": PINHOLE needs 4 parameters");
      k.fx = params[0];
      k.fy = params[1];
      k.cx = params[2];
      k.cy = params[3];
    } else if (model == "SIMPLE_PINHOLE") {
      if (params.size() != 3)
        fail(ErrorKind::Format, path.string() + ":" + std::to_string(lineno) + ": SIMPLE_PINHOLE needs 3 parameters");
      k.fx = k.fy = params[0];
      k.cx = params[1];
      k.cy = params[2];
    } else {
      fail(ErrorKind::UnsupportedModel, path.string() + ":" + std::to_string(lineno) +
                                            ": unsupported camera model '" + model + "'");
    }
    if (!out.emplace(id, k).second)
      fail(ErrorKind::Data, path.string() + ": duplicate camera id " + std::to_string(id));
  }
  return out;
}

}  // namespace

std::vector<CameraModel> load_cameras(const fs::path& dir) {
  const auto intrinsics = read_intrinsics(dir / "cameras.txt");
  const fs::path images_path = dir / "images.txt";
  std::ifstream in(images_path);
  if (!in) fail(ErrorKind::Io, "cannot open " + images_path.string());

  std::vector<CameraModel> cameras;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skippable(line)) continue;
    std::istringstream ls(line);
    long long image_id = 0, camera_id = 0;
    double qw, qx, qy, qz, tx, ty, tz;
    std::string name;
    if (!(ls >> image_id >> qw >> qx >> qy >> qz >> tx >> ty >> tz >> camera_id >> name))
      fail(ErrorKind::Format, images_path.string() + ":" + std::to_string(lineno) + ": malformed image line");
    // Every image line is followed by its 2D point line, possibly empty.
    std::string points;
    std::getline(in, points);
    ++lineno;

    const auto it = intrinsics.find(camera_id);
    if (it == intrinsics.end())
      fail(ErrorKind::Reference, images_path.string() + ": image '" + name +
                                     "' references unknown camera id " + std::to_string(camera_id));
    CameraModel cam;
    cam.id = name;
    cam.width = it->second.width;
    cam.height = it->second.height;
    cam.fx = it->second.fx;
    cam.fy = it->second.fy;
    cam.cx = it->second.cx;
    cam.cy = it->second.cy;
    cam.rotation = rotation_from_wxyz(qw, qx, qy, qz);
    cam.translation = Vec3(tx, ty, tz);
    cam.validate();
    cameras.push_back(std::move(cam));
  }
  return cameras;
}

void write_cameras(const std::vector<CameraModel>& cameras, const fs::path& dir) {
  fs::create_directories(dir);
  std::ofstream cam_out(dir / "cameras.txt");
  std::ofstream img_out(dir / "images.txt");
  if (!cam_out || !img_out) fail(ErrorKind::Io, "cannot write camera files in " + dir.string());
  cam_out << "# CAMERA_ID, MODEL, WIDTH, HEIGHT, PARAMS[]\n";
  img_out << "# IMAGE_ID, QW, QX, QY, QZ, TX, TY, TZ, CAMERA_ID, NAME\n# POINTS2D[] as (X, Y, POINT3D_ID)\n";
  char buf[512];
  for (std::size_t i = 0; i < cameras.size(); ++i) {
    const CameraModel& c = cameras[i];
    std::snprintf(buf, sizeof buf, "%zu PINHOLE %d %d %.17g %.17g %.17g %.17g\n", i + 1, c.width, c.height,
                  c.fx, c.fy, c.cx, c.cy);
    cam_out << buf;
    Quat q(c.rotation);
    q.normalize();
    std::snprintf(buf, sizeof buf, "%zu %.17g %.17g %.17g %.17g %.17g %.17g %.17g %zu ", i + 1, q.w(), q.x(),
                  q.y(), q.z(), c.translation.x(), c.translation.y(), c.translation.z(), i + 1);
    img_out << buf << c.id << "\n\n";
  }
}

}  // namespace matsplat::io
