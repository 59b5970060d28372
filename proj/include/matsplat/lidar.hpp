#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "matsplat/bvh.hpp"
#include "matsplat/pbr.hpp"
#include "matsplat/types.hpp"

namespace matsplat::lidar {

/// Spinning multi-channel scanner. Defaults follow a 128-channel, 20 Hz unit.
struct ScanPattern {
  int channels = 128;
  double vfov_min_deg = -22.5;
  double vfov_max_deg = 22.5;
  int horizontal_samples = 1024;
  double rotation_hz = 20.0;
  double max_range = 120.0;

  void validate() const;
  /// Elevation of a channel in radians; channel 0 is the top beam.
  double elevation(int channel) const;
  /// Azimuth of a column in radians, counter-clockwise from the sensor's +X.
  double azimuth(int column) const;
  std::size_t rays_per_revolution() const {
    return static_cast<std::size_t>(channels) * static_cast<std::size_t>(horizontal_samples);
  }
};

ScanPattern load_scan_pattern(const std::filesystem::path& path);
ScanPattern parse_scan_pattern(const std::string& json_text);
std::string to_json(const ScanPattern& pattern);

/// One revolution of rays in (channel, azimuth) order. Sensor frame is
/// +X forward, +Y left, +Z up; `sensor_to_world` places it in the world.
std::vector<Ray> generate_rays(const ScanPattern& pattern, const RigidTransform& sensor_to_world);

/// Lambertian monostatic return: P0 * albedo * cos / r^2. Error(Domain) if r <= 0.
double compute_power(double albedo, double range, double cos_incidence, double p0 = 1.0);
double compute_power(const Hit& hit, const pbr::PbrMaterial& material, double p0 = 1.0);

/// Inverts compute_power for range and incidence: clamp(round(255 P r^2 / (P0 cos)), 0, 255).
/// Error(Domain) if cos <= 0, r <= 0 or P < 0.
int normalize_reflectivity(double power, double range, double cos_incidence, double p0 = 1.0);

struct LidarReturn {
  Vec3 point;
  double range = 0;
  double cos_incidence = 0;
  std::uint32_t triangle = 0;
  ClassId class_id = kUnlabeled;
  double power = 0;
  std::uint8_t reflectivity = 0;
  std::uint16_t revolution = 0;
  std::uint16_t channel = 0;
  std::uint16_t azimuth = 0;
};

/// Optional additive Gaussian noise; each ray draws from its own stream seeded
/// by (seed, revolution, channel, azimuth), so results do not depend on threading.
struct NoiseOptions {
  bool enabled = false;
  double range_sigma = 0.0;        // meters
  double power_sigma_relative = 0.0;
  std::uint64_t seed = 0;
};

struct SimulationOptions {
  double p0 = 1.0;
  int threads = 1;
  NoiseOptions noise;
};

struct SimulationStats {
  std::size_t revolutions = 0;
  std::size_t rays = 0;
  std::size_t returns = 0;
};

/// Number of whole revolutions the trajectory spans; Error(Input) if fewer than one.
std::size_t revolution_count(const ScanPattern& pattern, const Trajectory& trajectory);

/// One pose per revolution, sampled at the revolution start time and interpolated
/// along the trajectory. Returns are ordered by (revolution, channel, azimuth).
std::vector<LidarReturn> simulate_scan(const pbr::BoundMesh& scene, const ScanPattern& pattern,
                                       const Trajectory& trajectory, const SimulationOptions& options = {},
                                       SimulationStats* stats = nullptr);

/// Point cloud files. CSV has a header row; the binary format is a sequence of
/// packed little-endian 24-byte records:
///   x, y, z, range : float32; reflectivity, class : uint8; revolution, channel, azimuth : uint16
inline constexpr std::size_t kBinaryRecordSize = 24;

void write_returns_csv(const std::vector<LidarReturn>& returns, const std::filesystem::path& path);
void write_returns_binary(const std::vector<LidarReturn>& returns, const std::filesystem::path& path);
/// Reads either format (by extension: .bin binary, anything else CSV). Power,
/// incidence and triangle are not stored and read back as zero.
std::vector<LidarReturn> read_returns(const std::filesystem::path& path);

}  // namespace matsplat::lidar
