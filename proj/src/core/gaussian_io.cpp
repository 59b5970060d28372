#include <algorithm>
#include <array>
#include <cmath>

#include "matsplat/error.hpp"
#include "matsplat/io/io.hpp"
#include "matsplat/io/ply.hpp"

namespace matsplat::io {

namespace {

constexpr std::array<const char*, 11> kCoreProperties = {
    "x", "y", "z", "opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3"};
constexpr const char* kLabelProperty = "class_id";

// logit(1) is infinite; stored opacities are kept this far inside (0, 1).
constexpr double kOpacityEps = 1e-7;

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double logit(double p) {
  p = std::clamp(p, kOpacityEps, 1.0 - kOpacityEps);
  return std::log(p / (1.0 - p));
}

}  // namespace

GaussianCloud load_gaussian_ply(const fs::path& path) {
  const ply::Data data = ply::read(path);
  const ply::Element* vertex = data.find("vertex");
  if (!vertex) fail(ErrorKind::Format, path.string() + ": no 'vertex' element");
  for (const char* name : kCoreProperties) {
    const auto idx = vertex->find(name);
    if (!idx || vertex->properties[*idx].is_list)
      fail(ErrorKind::Format, path.string() + ": missing required property '" + std::string(name) + "'");
  }

  const std::size_t n = vertex->count;
  const auto& x = vertex->column("x");
  const auto& y = vertex->column("y");
  const auto& z = vertex->column("z");
  const auto& op = vertex->column("opacity");
  const auto& s0 = vertex->column("scale_0");
  const auto& s1 = vertex->column("scale_1");
  const auto& s2 = vertex->column("scale_2");
  const auto& r0 = vertex->column("rot_0");
  const auto& r1 = vertex->column("rot_1");
  const auto& r2 = vertex->column("rot_2");
  const auto& r3 = vertex->column("rot_3");

  GaussianCloud cloud;
  cloud.positions.resize(n);
  cloud.scales.resize(n);
  cloud.rotations.resize(n);
  cloud.opacities.resize(n);

  std::vector<std::size_t> extra_idx;
  for (std::size_t p = 0; p < vertex->properties.size(); ++p) {
    const auto& prop = vertex->properties[p];
    if (prop.is_list || prop.name == kLabelProperty) continue;
    if (std::find_if(kCoreProperties.begin(), kCoreProperties.end(),
                     [&](const char* c) { return prop.name == c; }) != kCoreProperties.end())
      continue;
    extra_idx.push_back(p);
    cloud.extra_names.push_back(prop.name);
  }
  cloud.extra_values.resize(n * extra_idx.size());

  const auto label_idx = vertex->find(kLabelProperty);
  if (label_idx && !vertex->properties[*label_idx].is_list) cloud.labels.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    const std::array<double, 11> raw = {x[i], y[i], z[i], op[i], s0[i], s1[i],
                                        s2[i], r0[i], r1[i], r2[i], r3[i]};
    for (std::size_t k = 0; k < raw.size(); ++k) {
      if (!std::isfinite(raw[k]))
        fail(ErrorKind::Data, path.string() + ": non-finite '" + kCoreProperties[k] +
                                  "' at element " + std::to_string(i));
    }
    cloud.positions[i] = Vec3(x[i], y[i], z[i]);
    cloud.opacities[i] = logistic(op[i]);
    cloud.scales[i] = Vec3(std::exp(s0[i]), std::exp(s1[i]), std::exp(s2[i]));
    if (!cloud.scales[i].allFinite() || cloud.scales[i].minCoeff() <= 0)
      fail(ErrorKind::Data, path.string() + ": scale overflows at element " + std::to_string(i));
    Quat q(r0[i], r1[i], r2[i], r3[i]);
    const double norm = q.norm();
    if (!(norm > 0))
      fail(ErrorKind::Data, path.string() + ": zero rotation quaternion at element " + std::to_string(i));
    q.coeffs() /= norm;
    cloud.rotations[i] = q;
    for (std::size_t e = 0; e < extra_idx.size(); ++e)
      cloud.extra_values[i * extra_idx.size() + e] = static_cast<float>(vertex->columns[extra_idx[e]][i]);
    if (!cloud.labels.empty()) {
      const double label = vertex->columns[*label_idx][i];
      if (!(label >= 0 && label <= 255))
        fail(ErrorKind::Data, path.string() + ": class_id out of range at element " + std::to_string(i));
      cloud.labels[i] = static_cast<ClassId>(label);
    }
  }
  cloud.validate();
  return cloud;
}

void write_gaussian_ply(const GaussianCloud& cloud, const fs::path& path, bool ascii) {
  cloud.validate();
  const std::size_t n = cloud.size();
  ply::Data data;
  data.encoding = ascii ? ply::Encoding::Ascii : ply::Encoding::BinaryLittleEndian;
  ply::Element v;
  v.name = "vertex";
  v.count = n;

  auto column = [&](auto&& get) {
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = get(i);
    return c;
  };
  v.add_scalar("x", ply::Type::Float32, column([&](std::size_t i) { return cloud.positions[i].x(); }));
  v.add_scalar("y", ply::Type::Float32, column([&](std::size_t i) { return cloud.positions[i].y(); }));
  v.add_scalar("z", ply::Type::Float32, column([&](std::size_t i) { return cloud.positions[i].z(); }));
  const std::size_t ne = cloud.extra_names.size();
  for (std::size_t e = 0; e < ne; ++e)
    v.add_scalar(cloud.extra_names[e], ply::Type::Float32,
                 column([&](std::size_t i) { return double(cloud.extra_values[i * ne + e]); }));
  v.add_scalar("opacity", ply::Type::Float32, column([&](std::size_t i) { return logit(cloud.opacities[i]); }));
  for (int k = 0; k < 3; ++k)
    v.add_scalar("scale_" + std::to_string(k), ply::Type::Float32,
                 column([&](std::size_t i) { return std::log(cloud.scales[i][k]); }));
  v.add_scalar("rot_0", ply::Type::Float32, column([&](std::size_t i) { return cloud.rotations[i].w(); }));
  v.add_scalar("rot_1", ply::Type::Float32, column([&](std::size_t i) { return cloud.rotations[i].x(); }));
  v.add_scalar("rot_2", ply::Type::Float32, column([&](std::size_t i) { return cloud.rotations[i].y(); }));
  v.add_scalar("rot_3", ply::Type::Float32, column([&](std::size_t i) { return cloud.rotations[i].z(); }));
  if (cloud.has_labels())
    v.add_scalar(kLabelProperty, ply::Type::UInt8, column([&](std::size_t i) { return double(cloud.labels[i]); }));
  data.elements.push_back(std::move(v));
  ply::write(data, path);
}

}  // namespace matsplat::io
