#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "matsplat/types.hpp"

namespace matsplat::pbr {

/// Principled-BSDF parameters for one material class, plus the calibrated
/// LiDAR diffuse albedo on the 0-255 reflectivity scale.
struct PbrMaterial {
  ClassId class_id = kUnlabeled;
  std::string name;
  std::array<double, 3> base_color{0.5, 0.5, 0.5};
  double metallic = 0.0;
  double roughness = 0.5;
  double specular = 0.5;
  double clearcoat = 0.0;
  double opacity = 1.0;
  int diffuse_reflectivity_255 = 0;

  /// Diffuse albedo in [0,1].
  double albedo() const { return diffuse_reflectivity_255 / 255.0; }

  friend bool operator==(const PbrMaterial&, const PbrMaterial&) = default;
};

class MaterialTable {
 public:
  MaterialTable() = default;
  /// Throws Error(Schema) on duplicate class ids or a fallback that uses a
  /// non-sentinel id, Error(Range) on an out-of-range field.
  MaterialTable(PbrMaterial fallback, std::vector<PbrMaterial> materials);

  const PbrMaterial& fallback() const { return fallback_; }
  const std::vector<PbrMaterial>& materials() const { return materials_; }
  const PbrMaterial* find(ClassId id) const;
  /// Material for `id`; kUnlabeled resolves to the fallback.
  const PbrMaterial& resolve(ClassId id) const;
  std::size_t size() const { return materials_.size() + 1; }

  Palette palette() const;

  friend bool operator==(const MaterialTable&, const MaterialTable&) = default;

 private:
  PbrMaterial fallback_;
  std::vector<PbrMaterial> materials_;  // sorted by class id
};

/// Placeholder parameters for the ten urban classes. Replace with lab-calibrated values.
MaterialTable default_table();

MaterialTable load_material_table(const std::filesystem::path& path);
MaterialTable parse_material_table(const std::string& json_text);
std::string to_json(const MaterialTable& table);
void write_material_table(const MaterialTable& table, const std::filesystem::path& path);

/// Range checks one record, naming the offending field and class on failure.
void validate(const PbrMaterial& m);

/// Mesh with a resolved material per triangle.
struct BoundMesh {
  LabeledMesh mesh;
  MaterialTable table;
  std::vector<PbrMaterial> per_triangle;

  const PbrMaterial& material(std::size_t triangle) const { return per_triangle[triangle]; }
};

/// Throws Error(UnmappedClass) listing every class id on the mesh that the
/// table lacks (kUnlabeled always maps to the fallback).
BoundMesh bind_materials(const LabeledMesh& mesh, const MaterialTable& table);

/// Wavefront MTL with the PBR extension keys (Pr, Pm, Ps, Pc, ...), one
/// `class_<id>` material per table entry plus the fallback as `class_255`.
std::string to_mtl(const MaterialTable& table);

}  // namespace matsplat::pbr
