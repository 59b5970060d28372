#include "matsplat/lidar.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <random>

#include <json.hpp>

#include "matsplat/error.hpp"
#include "matsplat/parallel.hpp"

namespace matsplat::lidar {

using json = nlohmann::ordered_json;

void ScanPattern::validate() const {
  if (channels < 1) fail(ErrorKind::Data, "scan pattern needs at least one channel");
  if (channels > 65535 || horizontal_samples > 65535)
    fail(ErrorKind::Data, "scan pattern channel and sample counts must fit in 16 bits");
  if (!(vfov_min_deg < vfov_max_deg)) fail(ErrorKind::Data, "scan pattern needs vfov_min < vfov_max");
  if (vfov_min_deg < -90.0 || vfov_max_deg > 90.0) fail(ErrorKind::Data, "vertical field of view exceeds +-90 degrees");
  if (horizontal_samples < 1) fail(ErrorKind::Data, "scan pattern needs at least one horizontal sample");
  if (!(rotation_hz > 0) || !std::isfinite(rotation_hz)) fail(ErrorKind::Data, "rotation rate must be positive");
  if (!(max_range > 0) || !std::isfinite(max_range)) fail(ErrorKind::Data, "max range must be positive");
}

double ScanPattern::elevation(int channel) const {
  constexpr double deg = std::numbers::pi / 180.0;
  if (channels == 1) return 0.5 * (vfov_min_deg + vfov_max_deg) * deg;
  const double step = (vfov_max_deg - vfov_min_deg) / (channels - 1);
  return (vfov_max_deg - step * channel) * deg;
}

double ScanPattern::azimuth(int column) const {
  return 2.0 * std::numbers::pi * column / horizontal_samples;
}

ScanPattern parse_scan_pattern(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Format, std::string("scan pattern is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail(ErrorKind::Schema, "scan pattern must be a JSON object");
  ScanPattern p;
  auto read = [&](const char* key, auto& field) {
    if (!doc.contains(key)) return;
    const json& v = doc[key];
    using T = std::decay_t<decltype(field)>;
    if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) fail(ErrorKind::Schema, std::string("\"") + key + "\" must be an integer");
    } else {
      if (!v.is_number()) fail(ErrorKind::Schema, std::string("\"") + key + "\" must be a number");
    }
    field = v.get<T>();
  };
  read("channels", p.channels);
  read("vfov_min_deg", p.vfov_min_deg);
  read("vfov_max_deg", p.vfov_max_deg);
  read("horizontal_samples", p.horizontal_samples);
  read("rotation_hz", p.rotation_hz);
  read("max_range_m", p.max_range);
  p.validate();
  return p;
}

ScanPattern load_scan_pattern(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse_scan_pattern(text);
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

std::string to_json(const ScanPattern& p) {
  json doc;
  doc["channels"] = p.channels;
  doc["vfov_min_deg"] = p.vfov_min_deg;
  doc["vfov_max_deg"] = p.vfov_max_deg;
  doc["horizontal_samples"] = p.horizontal_samples;
  doc["rotation_hz"] = p.rotation_hz;
  doc["max_range_m"] = p.max_range;
  return doc.dump(2) + "\n";
}

std::vector<Ray> generate_rays(const ScanPattern& pattern, const RigidTransform& sensor_to_world) {
  pattern.validate();
  std::vector<Ray> rays;
  rays.reserve(pattern.rays_per_revolution());
  std::vector<double> cos_az(pattern.horizontal_samples), sin_az(pattern.horizontal_samples);
  for (int a = 0; a < pattern.horizontal_samples; ++a) {
    cos_az[a] = std::cos(pattern.azimuth(a));
    sin_az[a] = std::sin(pattern.azimuth(a));
  }
  for (int c = 0; c < pattern.channels; ++c) {
    const double el = pattern.elevation(c);
    const double ce = std::cos(el), se = std::sin(el);
    for (int a = 0; a < pattern.horizontal_samples; ++a) {
      const Vec3 local(ce * cos_az[a], ce * sin_az[a], se);
      Vec3 dir = sensor_to_world.rotation * local;
      dir.normalize();
      rays.push_back({sensor_to_world.translation, dir});
    }
  }
  return rays;
}

double compute_power(double albedo, double range, double cos_incidence, double p0) {
  if (!(range > 0)) fail(ErrorKind::Domain, "range must be positive");
  if (!(cos_incidence > 0)) fail(ErrorKind::Domain, "incidence cosine must be positive");
  return p0 * albedo * cos_incidence / (range * range);
}

double compute_power(const Hit& hit, const pbr::PbrMaterial& material, double p0) {
  return compute_power(material.albedo(), hit.range, hit.cos_incidence, p0);
}

int normalize_reflectivity(double power, double range, double cos_incidence, double p0) {
  if (!(cos_incidence > 0)) fail(ErrorKind::Domain, "incidence cosine must be positive");
  if (!(range > 0)) fail(ErrorKind::Domain, "range must be positive");
  if (!(power >= 0)) fail(ErrorKind::Domain, "power must be non-negative");
  if (!(p0 > 0)) fail(ErrorKind::Domain, "emitter constant must be positive");
  const double value = std::round(255.0 * power * range * range / (p0 * cos_incidence));
  return static_cast<int>(std::clamp(value, 0.0, 255.0));
}

std::size_t revolution_count(const ScanPattern& pattern, const Trajectory& trajectory) {
  const double period = 1.0 / pattern.rotation_hz;
  const double span = trajectory.duration();
  // Tolerate rounding in timestamps that are meant to be exact multiples of the period.
  const double revs = std::floor(span / period + 1e-9);
  if (trajectory.poses.size() < 2 || revs < 1)
    fail(ErrorKind::Input, "trajectory spans " + std::to_string(span) + " s, shorter than one revolution (" +
                               std::to_string(period) + " s)");
  return static_cast<std::size_t>(revs);
}

std::vector<LidarReturn> simulate_scan(const pbr::BoundMesh& scene, const ScanPattern& pattern,
                                       const Trajectory& trajectory, const SimulationOptions& options,
                                       SimulationStats* stats) {
  pattern.validate();
  trajectory.validate();
  if (!(options.p0 > 0)) fail(ErrorKind::Domain, "emitter constant must be positive");
  const std::size_t revolutions = revolution_count(pattern, trajectory);
  if (revolutions > 65535) fail(ErrorKind::Input, "trajectory spans more than 65535 revolutions");

  const LabeledMesh& mesh = scene.mesh;
  const Bvh bvh(mesh);
  const std::size_t per_rev = pattern.rays_per_revolution();
  const double period = 1.0 / pattern.rotation_hz;
  const double t0 = trajectory.poses.front().timestamp;

  std::vector<LidarReturn> returns;
  SimulationStats local;
  local.revolutions = revolutions;
  for (std::size_t rev = 0; rev < revolutions; ++rev) {
    const Pose pose = trajectory.interpolate(t0 + static_cast<double>(rev) * period);
    const RigidTransform sensor{pose.rotation.toRotationMatrix(), pose.translation};
    const std::vector<Ray> rays = generate_rays(pattern, sensor);

    std::vector<std::optional<LidarReturn>> slots(rays.size());
    parallel_for(rays.size(), options.threads, [&](std::size_t i) {
      if (mesh.triangles.empty()) return;
      const auto hit = bvh.trace(rays[i], pattern.max_range);
      if (!hit) return;
      const auto channel = static_cast<std::uint16_t>(i / pattern.horizontal_samples);
      const auto column = static_cast<std::uint16_t>(i % pattern.horizontal_samples);
      const pbr::PbrMaterial& material = scene.material(hit->triangle);

      LidarReturn r;
      r.range = hit->range;
      r.cos_incidence = hit->cos_incidence;
      r.triangle = hit->triangle;
      r.class_id = mesh.labels[hit->triangle];
      r.power = compute_power(*hit, material, options.p0);
      r.revolution = static_cast<std::uint16_t>(rev);
      r.channel = channel;
      r.azimuth = column;
      if (options.noise.enabled) {
        std::seed_seq seq{static_cast<std::uint32_t>(options.noise.seed), static_cast<std::uint32_t>(options.noise.seed >> 32),
                          static_cast<std::uint32_t>(rev), static_cast<std::uint32_t>(channel),
                          static_cast<std::uint32_t>(column)};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> unit(0.0, 1.0);
        const double dr = options.noise.range_sigma * unit(rng);
        const double dp = options.noise.power_sigma_relative * unit(rng);
        r.range = std::max(r.range + dr, kMinHitRange);
        r.power = std::max(0.0, r.power * (1.0 + dp));
      }
      r.point = rays[i].origin + r.range * rays[i].direction;
      r.reflectivity = static_cast<std::uint8_t>(normalize_reflectivity(r.power, r.range, r.cos_incidence, options.p0));
      slots[i] = r;
    });
    local.rays += per_rev;
    for (auto& s : slots)
      if (s) returns.push_back(*s);
  }
  local.returns = returns.size();
  if (stats) *stats = local;
  return returns;
}

}  // namespace matsplat::lidar
