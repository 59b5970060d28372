#include <doctest.h>

#include <random>

#include <json.hpp>

#include "matsplat/pbr.hpp"
#include "test_util.hpp"

using namespace matsplat;
using namespace matsplat::pbr;
using testutil::error_kind;

namespace {

LabeledMesh two_triangles(ClassId a, ClassId b) {
  LabeledMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  m.labels = {a, b};
  m.finalize();
  return m;
}

std::string default_json() { return to_json(default_table()); }

}  // namespace

TEST_CASE("default table covers the ten classes") {
  const MaterialTable t = default_table();
  CHECK(t.size() == 11);
  for (ClassId c = 0; c < 10; ++c) CHECK(t.find(c) != nullptr);
  CHECK(t.find(10) == nullptr);
  CHECK(t.resolve(kUnlabeled).name == "unknown");
  CHECK(t.resolve(classes::kAsphalt).diffuse_reflectivity_255 == 20);
  CHECK(t.resolve(classes::kConcrete).diffuse_reflectivity_255 == 60);
  CHECK(t.resolve(classes::kGlass).diffuse_reflectivity_255 == 5);
}

TEST_CASE("table json round trip") {
  const std::string text = default_json();
  const MaterialTable once = parse_material_table(text);
  CHECK(once == default_table());
  CHECK(to_json(once) == text);
  testutil::TempDir dir;
  write_material_table(once, dir / "m.json");
  CHECK(load_material_table(dir / "m.json") == once);
}

TEST_CASE("table validation errors") {
  auto doc = nlohmann::ordered_json::parse(default_json());
  {
    auto d = doc;
    d["materials"][3]["metallic"] = 1.3;
    const std::string msg = testutil::error_message([&] { parse_material_table(d.dump()); });
    CHECK(error_kind([&] { parse_material_table(d.dump()); }) == "range");
    CHECK(msg.find("metallic") != std::string::npos);
    CHECK(msg.find("asphalt") != std::string::npos);
  }
  {
    auto d = doc;
    d.erase("fallback");
    CHECK(error_kind([&] { parse_material_table(d.dump()); }) == "schema");
  }
  {
    auto d = doc;
    d["materials"][4]["class_id"] = 2;
    CHECK(error_kind([&] { parse_material_table(d.dump()); }) == "schema");
  }
  {
    auto d = doc;
    d["materials"][0].erase("roughness");
    CHECK(error_kind([&] { parse_material_table(d.dump()); }) == "schema");
  }
  {
    auto d = doc;
    d["materials"][0]["diffuse_reflectivity_255"] = 300;
    CHECK(error_kind([&] { parse_material_table(d.dump()); }) == "range");
  }
  CHECK(error_kind([] { parse_material_table("{not json"); }) == "format");
}

TEST_CASE("binding") {
  const MaterialTable t = default_table();
  const BoundMesh all = bind_materials(two_triangles(classes::kAsphalt, classes::kAsphalt), t);
  CHECK(all.material(0).name == "asphalt");
  CHECK(all.material(1).name == "asphalt");

  const BoundMesh fb = bind_materials(two_triangles(classes::kAsphalt, kUnlabeled), t);
  CHECK(fb.material(1) == t.fallback());

  const std::string msg = testutil::error_message([&] { bind_materials(two_triangles(42, 17), t); });
  CHECK(error_kind([&] { bind_materials(two_triangles(42, 17), t); }) == "unmapped-class");
  CHECK(msg.find("17, 42") != std::string::npos);
}

TEST_CASE("binding equals direct lookup on random labels") {
  const MaterialTable t = default_table();
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> cls(0, 10);
  for (int trial = 0; trial < 50; ++trial) {
    LabeledMesh m;
    for (int i = 0; i < 60; ++i) {
      const int b = static_cast<int>(m.vertices.size());
      m.vertices.insert(m.vertices.end(), {Vec3(i, 0, 0), Vec3(i + 1, 0, 0), Vec3(i, 1, 0)});
      m.triangles.push_back({std::uint32_t(b), std::uint32_t(b + 1), std::uint32_t(b + 2)});
      const int c = cls(rng);
      m.labels.push_back(c == 10 ? kUnlabeled : static_cast<ClassId>(c));
    }
    m.finalize();
    const BoundMesh b = bind_materials(m, t);
    for (std::size_t i = 0; i < m.size(); ++i) {
      const PbrMaterial* expect = m.labels[i] == kUnlabeled ? &t.fallback() : nullptr;
      if (!expect)
        for (const auto& mat : t.materials())
          if (mat.class_id == m.labels[i]) expect = &mat;
      REQUIRE(expect);
      CHECK(b.material(i) == *expect);
    }
  }
}

TEST_CASE("mtl export names every class") {
  const std::string mtl = to_mtl(default_table());
  for (int c : {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 255})
    CHECK(mtl.find("newmtl class_" + std::to_string(c) + "\n") != std::string::npos);
  CHECK(mtl.find("Pm 1\n") != std::string::npos);
}
