#include "matsplat/pbr.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <json.hpp>

#include "matsplat/error.hpp"

namespace matsplat::pbr {

using json = nlohmann::ordered_json;

namespace {

void check_unit(double v, const char* field, const PbrMaterial& m) {
  if (!(v >= 0.0 && v <= 1.0))
    fail(ErrorKind::Range, "material '" + m.name + "' (class " + std::to_string(m.class_id) + "): field \"" +
                               field + "\" = " + std::to_string(v) + " outside [0,1]");
}

PbrMaterial material_from_json(const json& j, bool is_fallback) {
  if (!j.is_object()) fail(ErrorKind::Schema, "material entry must be an object");
  PbrMaterial m;
  const auto require = [&](const char* key) -> const json& {
    if (!j.contains(key))
      fail(ErrorKind::Schema, std::string("material entry lacks \"") + key + "\"" +
                                  (j.contains("name") && j["name"].is_string() ? " (" + j["name"].get<std::string>() + ")" : ""));
    return j.at(key);
  };
  const auto number = [&](const char* key) -> double {
    const json& v = require(key);
    if (!v.is_number()) fail(ErrorKind::Schema, std::string("\"") + key + "\" must be a number");
    return v.get<double>();
  };

  if (is_fallback) {
    m.class_id = kUnlabeled;
    if (j.contains("class_id")) {
      const json& id = j.at("class_id");
      if (!id.is_number_integer() || id.get<long long>() != kUnlabeled)
        fail(ErrorKind::Schema, "fallback material must use class_id 255");
    }
  } else {
    const json& id = require("class_id");
    if (!id.is_number_integer()) fail(ErrorKind::Schema, "\"class_id\" must be an integer");
    const long long v = id.get<long long>();
    if (v < 0 || v >= kUnlabeled)
      fail(ErrorKind::Range, "class_id " + std::to_string(v) + " outside [0,254]");
    m.class_id = static_cast<ClassId>(v);
  }
  const json& name = require("name");
  if (!name.is_string()) fail(ErrorKind::Schema, "\"name\" must be a string");
  m.name = name.get<std::string>();

  const json& color = require("base_color");
  if (!color.is_array() || color.size() != 3 || !std::all_of(color.begin(), color.end(), [](const json& c) { return c.is_number(); }))
    fail(ErrorKind::Schema, "material '" + m.name + "': \"base_color\" must be an array of 3 numbers");
  for (int k = 0; k < 3; ++k) m.base_color[k] = color[k].get<double>();
  m.metallic = number("metallic");
  m.roughness = number("roughness");
  m.specular = number("specular");
  m.clearcoat = number("clearcoat");
  m.opacity = number("opacity");
  const json& refl = require("diffuse_reflectivity_255");
  if (!refl.is_number_integer())
    fail(ErrorKind::Schema, "material '" + m.name + "': \"diffuse_reflectivity_255\" must be an integer");
  const long long r = refl.get<long long>();
  if (r < 0 || r > 255)
    fail(ErrorKind::Range, "material '" + m.name + "' (class " + std::to_string(m.class_id) +
                               "): field \"diffuse_reflectivity_255\" = " + std::to_string(r) + " outside [0,255]");
  m.diffuse_reflectivity_255 = static_cast<int>(r);
  validate(m);
  return m;
}

json material_to_json(const PbrMaterial& m) {
  json j;
  j["class_id"] = m.class_id;
  j["name"] = m.name;
  j["base_color"] = {m.base_color[0], m.base_color[1], m.base_color[2]};
  j["metallic"] = m.metallic;
  j["roughness"] = m.roughness;
  j["specular"] = m.specular;
  j["clearcoat"] = m.clearcoat;
  j["opacity"] = m.opacity;
  j["diffuse_reflectivity_255"] = m.diffuse_reflectivity_255;
  return j;
}

}  // namespace

void validate(const PbrMaterial& m) {
  for (int k = 0; k < 3; ++k) check_unit(m.base_color[k], "base_color", m);
  check_unit(m.metallic, "metallic", m);
  check_unit(m.roughness, "roughness", m);
  check_unit(m.specular, "specular", m);
  check_unit(m.clearcoat, "clearcoat", m);
  check_unit(m.opacity, "opacity", m);
  if (m.diffuse_reflectivity_255 < 0 || m.diffuse_reflectivity_255 > 255)
    fail(ErrorKind::Range, "material '" + m.name + "': field \"diffuse_reflectivity_255\" outside [0,255]");
}

MaterialTable::MaterialTable(PbrMaterial fallback, std::vector<PbrMaterial> materials)
    : fallback_(std::move(fallback)), materials_(std::move(materials)) {
  if (fallback_.class_id != kUnlabeled) fail(ErrorKind::Schema, "fallback material must use class_id 255");
  validate(fallback_);
  std::sort(materials_.begin(), materials_.end(),
            [](const PbrMaterial& a, const PbrMaterial& b) { return a.class_id < b.class_id; });
  for (std::size_t i = 0; i < materials_.size(); ++i) {
    if (materials_[i].class_id == kUnlabeled)
      fail(ErrorKind::Schema, "class_id 255 is reserved for the fallback material");
    if (i > 0 && materials_[i].class_id == materials_[i - 1].class_id)
      fail(ErrorKind::Schema, "duplicate class_id " + std::to_string(materials_[i].class_id));
    validate(materials_[i]);
  }
}

const PbrMaterial* MaterialTable::find(ClassId id) const {
  if (id == kUnlabeled) return &fallback_;
  auto it = std::lower_bound(materials_.begin(), materials_.end(), id,
                             [](const PbrMaterial& m, ClassId v) { return m.class_id < v; });
  return (it != materials_.end() && it->class_id == id) ? &*it : nullptr;
}

const PbrMaterial& MaterialTable::resolve(ClassId id) const {
  const PbrMaterial* m = find(id);
  if (!m) fail(ErrorKind::UnmappedClass, "class id " + std::to_string(id) + " has no material");
  return *m;
}

Palette MaterialTable::palette() const {
  Palette p;
  for (const auto& m : materials_) p[m.class_id] = m.name;
  return p;
}

MaterialTable default_table() {
  auto make = [](ClassId id, const char* name, std::array<double, 3> color, double metallic, double roughness,
                 double specular, double clearcoat, double opacity, int refl) {
    PbrMaterial m;
    m.class_id = id;
    m.name = name;
    m.base_color = color;
    m.metallic = metallic;
    m.roughness = roughness;
    m.specular = specular;
    m.clearcoat = clearcoat;
    m.opacity = opacity;
    m.diffuse_reflectivity_255 = refl;
    return m;
  };
  using namespace classes;
  std::vector<PbrMaterial> mats = {
      make(kGlass, "glass", {0.85, 0.90, 0.92}, 0.0, 0.05, 0.5, 0.0, 0.15, 5),
      make(kBrickCeramic, "brick_ceramic", {0.55, 0.25, 0.18}, 0.0, 0.85, 0.3, 0.0, 1.0, 45),
      make(kConcrete, "concrete", {0.55, 0.55, 0.52}, 0.0, 0.9, 0.3, 0.0, 1.0, 60),
      make(kAsphalt, "asphalt", {0.05, 0.05, 0.05}, 0.0, 0.9, 0.2, 0.0, 1.0, 20),
      make(kVegetation, "vegetation", {0.15, 0.35, 0.10}, 0.0, 0.8, 0.3, 0.0, 1.0, 150),
      make(kMetal, "metal", {0.70, 0.70, 0.72}, 1.0, 0.3, 0.5, 0.2, 1.0, 40),
      make(kPlastic, "plastic", {0.60, 0.60, 0.60}, 0.0, 0.4, 0.5, 0.1, 1.0, 70),
      make(kGravel, "gravel", {0.45, 0.42, 0.38}, 0.0, 0.95, 0.2, 0.0, 1.0, 50),
      make(kTreeTrunk, "tree_trunk", {0.30, 0.22, 0.15}, 0.0, 0.9, 0.2, 0.0, 1.0, 55),
      make(kRubber, "rubber", {0.03, 0.03, 0.03}, 0.0, 0.8, 0.3, 0.0, 1.0, 8),
  };
  PbrMaterial fallback = make(kUnlabeled, "unknown", {0.5, 0.5, 0.5}, 0.0, 0.8, 0.5, 0.0, 1.0, 40);
  return MaterialTable(std::move(fallback), std::move(mats));
}

MaterialTable parse_material_table(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Format, std::string("material table is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail(ErrorKind::Schema, "material table must be a JSON object");
  if (!doc.contains("fallback")) fail(ErrorKind::Schema, "material table lacks \"fallback\"");
  if (!doc.contains("materials") || !doc["materials"].is_array())
    fail(ErrorKind::Schema, "material table lacks a \"materials\" array");
  PbrMaterial fallback = material_from_json(doc["fallback"], true);
  std::vector<PbrMaterial> mats;
  for (const auto& entry : doc["materials"]) mats.push_back(material_from_json(entry, false));
  return MaterialTable(std::move(fallback), std::move(mats));
}

MaterialTable load_material_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse_material_table(text);
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

std::string to_json(const MaterialTable& table) {
  json doc;
  doc["fallback"] = material_to_json(table.fallback());
  doc["materials"] = json::array();
  for (const auto& m : table.materials()) doc["materials"].push_back(material_to_json(m));
  return doc.dump(2) + "\n";
}

void write_material_table(const MaterialTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << to_json(table);
}

BoundMesh bind_materials(const LabeledMesh& mesh, const MaterialTable& table) {
  std::set<int> missing;
  for (ClassId c : mesh.labels)
    if (!table.find(c)) missing.insert(c);
  if (!missing.empty()) {
    std::string ids;
    for (int c : missing) ids += (ids.empty() ? "" : ", ") + std::to_string(c);
    fail(ErrorKind::UnmappedClass, "mesh uses class ids absent from the material table: " + ids);
  }
  BoundMesh bound{mesh, table, {}};
  bound.per_triangle.reserve(mesh.size());
  for (ClassId c : mesh.labels) bound.per_triangle.push_back(*table.find(c));
  return bound;
}

std::string to_mtl(const MaterialTable& table) {
  std::ostringstream out;
  auto emit = [&](const PbrMaterial& m) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "newmtl class_%d\n# %s, lidar reflectivity %d/255\nKd %.6g %.6g %.6g\nPr %.6g\nPm %.6g\n"
                  "Ks %.6g %.6g %.6g\nPc %.6g\nd %.6g\n\n",
                  m.class_id, m.name.c_str(), m.diffuse_reflectivity_255, m.base_color[0], m.base_color[1],
                  m.base_color[2], m.roughness, m.metallic, m.specular, m.specular, m.specular, m.clearcoat,
                  m.opacity);
    out << buf;
  };
  for (const auto& m : table.materials()) emit(m);
  emit(table.fallback());
  return out.str();
}

}  // namespace matsplat::pbr
