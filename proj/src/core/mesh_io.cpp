#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "matsplat/error.hpp"
#include "matsplat/io/io.hpp"
#include "matsplat/io/ply.hpp"

namespace matsplat::io {

namespace {

constexpr const char* kFaceLabelNames[] = {"material", "class_id", "label"};

std::string lower_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

ClassId checked_label(double v, std::size_t face, const fs::path& path) {
  if (!(v >= 0 && v <= 255 && v == std::floor(v)))
    fail(ErrorKind::Data, path.string() + ": face " + std::to_string(face) + " has material id out of range");
  return static_cast<ClassId>(v);
}

std::uint32_t checked_index(double v, std::size_t nverts, std::size_t face, const fs::path& path) {
  if (!(v >= 0 && v < static_cast<double>(nverts) && v == std::floor(v)))
    fail(ErrorKind::Data, path.string() + ": face " + std::to_string(face) + " has vertex index " +
                              std::to_string(static_cast<long long>(v)) + " out of range");
  return static_cast<std::uint32_t>(v);
}

LabeledMesh load_ply_mesh(const fs::path& path) {
  const ply::Data data = ply::read(path);
  const ply::Element* vertex = data.find("vertex");
  const ply::Element* face = data.find("face");
  if (!vertex) fail(ErrorKind::Format, path.string() + ": no 'vertex' element");
  if (!face) fail(ErrorKind::Format, path.string() + ": no 'face' element");

  LabeledMesh mesh;
  const auto& x = vertex->column("x");
  const auto& y = vertex->column("y");
  const auto& z = vertex->column("z");
  mesh.vertices.resize(vertex->count);
  for (std::size_t i = 0; i < vertex->count; ++i) mesh.vertices[i] = Vec3(x[i], y[i], z[i]);

  const auto list_idx = face->find("vertex_indices") ? face->find("vertex_indices") : face->find("vertex_index");
  if (!list_idx || !face->properties[*list_idx].is_list)
    fail(ErrorKind::Format, path.string() + ": face element lacks 'vertex_indices'");
  const auto& lists = face->lists[*list_idx];

  const std::vector<double>* labels = nullptr;
  for (const char* name : kFaceLabelNames) {
    const auto idx = face->find(name);
    if (idx && !face->properties[*idx].is_list) {
      labels = &face->columns[*idx];
      break;
    }
  }

  for (std::size_t f = 0; f < face->count; ++f) {
    const auto& l = lists[f];
    if (l.size() < 3) fail(ErrorKind::Data, path.string() + ": face " + std::to_string(f) + " has fewer than 3 vertices");
    const ClassId label = labels ? checked_label((*labels)[f], f, path) : kUnlabeled;
    // Polygons are fanned; each triangle inherits the face label.
    const std::uint32_t a = checked_index(l[0], mesh.vertices.size(), f, path);
    for (std::size_t k = 1; k + 1 < l.size(); ++k) {
      mesh.triangles.push_back({a, checked_index(l[k], mesh.vertices.size(), f, path),
                                checked_index(l[k + 1], mesh.vertices.size(), f, path)});
      mesh.labels.push_back(label);
    }
  }
  return mesh;
}

std::optional<ClassId> parse_material_name(const std::string& name) {
  std::string_view s(name);
  if (s.rfind("class_", 0) == 0) s.remove_prefix(6);
  unsigned v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || v > 255) return std::nullopt;
  return static_cast<ClassId>(v);
}

LabeledMesh load_obj_mesh(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  LabeledMesh mesh;
  ClassId current = kUnlabeled;
  std::string line;
  std::size_t lineno = 0;
  std::vector<long long> corners;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) fail(ErrorKind::Format, path.string() + ":" + std::to_string(lineno) + ": bad vertex");
      mesh.vertices.emplace_back(x, y, z);
    } else if (tag == "usemtl") {
      std::string name;
      ls >> name;
      current = parse_material_name(name).value_or(kUnlabeled);
    } else if (tag == "f") {
      corners.clear();
      for (std::string tok; ls >> tok;) {
        const std::string head = tok.substr(0, tok.find('/'));
        long long idx = 0;
        const auto res = std::from_chars(head.data(), head.data() + head.size(), idx);
        if (res.ec != std::errc() || idx == 0)
          fail(ErrorKind::Format, path.string() + ":" + std::to_string(lineno) + ": bad face index '" + tok + "'");
        if (idx < 0) idx += static_cast<long long>(mesh.vertices.size()) + 1;
        corners.push_back(idx - 1);
      }
      const std::size_t face = mesh.triangles.size();
      if (corners.size() < 3)
        fail(ErrorKind::Data, path.string() + ":" + std::to_string(lineno) + ": face with fewer than 3 vertices");
      const auto nv = mesh.vertices.size();
      const auto a = checked_index(double(corners[0]), nv, face, path);
      for (std::size_t k = 1; k + 1 < corners.size(); ++k) {
        mesh.triangles.push_back({a, checked_index(double(corners[k]), nv, face, path),
                                  checked_index(double(corners[k + 1]), nv, face, path)});
        mesh.labels.push_back(current);
      }
    }
  }
  return mesh;
}

}  // namespace

LabeledMesh load_mesh(const fs::path& path) {
  if (!fs::exists(path)) fail(ErrorKind::Io, "no such file: " + path.string());
  const std::string ext = lower_extension(path);
  LabeledMesh mesh;
  if (ext == ".ply") mesh = load_ply_mesh(path);
  else if (ext == ".obj") mesh = load_obj_mesh(path);
  else fail(ErrorKind::Format, path.string() + ": unsupported mesh extension '" + ext + "'");
  mesh.finalize();
  return mesh;
}

void write_labeled_mesh(const LabeledMesh& mesh, const fs::path& path, const std::string& mtllib) {
  if (mesh.labels.size() != mesh.triangles.size())
    fail(ErrorKind::Data, "mesh label count does not match triangle count");
  const std::string ext = lower_extension(path);
  if (ext == ".ply") {
    ply::Data data;
    ply::Element v;
    v.name = "vertex";
    v.count = mesh.vertices.size();
    for (int k = 0; k < 3; ++k) {
      std::vector<double> c(v.count);
      for (std::size_t i = 0; i < v.count; ++i) c[i] = mesh.vertices[i][k];
      v.add_scalar(std::string(1, "xyz"[k]), ply::Type::Float64, std::move(c));
    }
    ply::Element f;
    f.name = "face";
    f.count = mesh.triangles.size();
    std::vector<std::vector<double>> idx(f.count);
    std::vector<double> labels(f.count);
    for (std::size_t t = 0; t < f.count; ++t) {
      const Triangle& tri = mesh.triangles[t];
      idx[t] = {double(tri.a), double(tri.b), double(tri.c)};
      labels[t] = mesh.labels[t];
    }
    f.add_list("vertex_indices", ply::Type::UInt8, ply::Type::UInt32, std::move(idx));
    f.add_scalar("material", ply::Type::UInt8, std::move(labels));
    data.elements.push_back(std::move(v));
    data.elements.push_back(std::move(f));
    ply::write(data, path);
  } else if (ext == ".obj") {
    std::string out;
    if (!mtllib.empty()) out += "mtllib " + mtllib + "\n";
    char buf[128];
    for (const Vec3& p : mesh.vertices) {
      const int n = std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", p.x(), p.y(), p.z());
      out.append(buf, static_cast<std::size_t>(n));
    }
    int current = -1;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
      if (mesh.labels[t] != current) {
        current = mesh.labels[t];
        out += "usemtl class_" + std::to_string(current) + "\n";
      }
      const Triangle& tri = mesh.triangles[t];
      const int n = std::snprintf(buf, sizeof buf, "f %u %u %u\n", tri.a + 1, tri.b + 1, tri.c + 1);
      out.append(buf, static_cast<std::size_t>(n));
    }
    std::ofstream fout(path, std::ios::binary | std::ios::trunc);
    if (!fout) fail(ErrorKind::Io, "cannot write " + path.string());
    fout << out;
  } else {
    fail(ErrorKind::Format, path.string() + ": unsupported mesh extension '" + ext + "'");
  }
}

}  // namespace matsplat::io
