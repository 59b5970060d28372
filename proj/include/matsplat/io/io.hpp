#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "matsplat/image.hpp"
#include "matsplat/types.hpp"

namespace matsplat::io {

namespace fs = std::filesystem;

/// Standard splat PLY: x,y,z, opacity (logit), scale_0..2 (log), rot_0..3 (w,x,y,z),
/// anything else passed through. An optional uchar `class_id` carries labels.
GaussianCloud load_gaussian_ply(const fs::path& path);
void write_gaussian_ply(const GaussianCloud& cloud, const fs::path& path,
                        bool ascii = false);

/// COLMAP text model: `dir/cameras.txt` + `dir/images.txt`. One CameraModel per
/// image, id = image name.
std::vector<CameraModel> load_cameras(const fs::path& dir);
void write_cameras(const std::vector<CameraModel>& cameras, const fs::path& dir);

/// 8-bit single-channel PNG or binary PGM.
MaterialMap load_mask(const fs::path& path, const Palette& palette = default_palette());
void write_mask(const MaterialMap& map, const fs::path& path);

/// Instance sets from either an indexed-label image (0 = background,
/// k = instance k) or a multi-image PGM with one binary page per instance.
InstanceSet load_instances(const fs::path& path);
void write_instances_pgm(const InstanceSet& instances, const fs::path& path);

/// PLY (face property `material`) or OBJ (`usemtl class_<id>`), chosen by extension.
/// `mtllib` only applies to OBJ output.
LabeledMesh load_mesh(const fs::path& path);
void write_labeled_mesh(const LabeledMesh& mesh, const fs::path& path, const std::string& mtllib = {});

/// CSV rows `timestamp,tx,ty,tz,qw,qx,qy,qz`; a non-numeric first row is a header.
Trajectory load_trajectory(const fs::path& path);
void write_trajectory(const Trajectory& trajectory, const fs::path& path);

}  // namespace matsplat::io
