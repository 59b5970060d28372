#include <doctest.h>

#include <cstdlib>
#include <map>

#include <sys/wait.h>

#include <json.hpp>

#include "matsplat/io/io.hpp"
#include "matsplat/lidar.hpp"
#include "matsplat/pbr.hpp"
#include "test_util.hpp"

using namespace matsplat;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out, err;
};

std::string quote(const std::string& s) { return "'" + s + "'"; }

Run run(const std::string& args, const testutil::TempDir& scratch) {
  const fs::path out = scratch / "stdout.txt", err = scratch / "stderr.txt";
  const std::string cmd = quote(MATSPLAT_CLI) + " " + args + " >" + quote(out.string()) + " 2>" + quote(err.string());
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = testutil::slurp(out);
  r.err = testutil::slurp(err);
  return r;
}

json error_of(const Run& r) { return json::parse(r.err).at("error"); }

/// Relative path -> bytes for every regular file below `dir`.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).generic_string()] = testutil::slurp(e.path());
  return files;
}

fs::path copy_bundled(const testutil::TempDir& dir) {
  const fs::path scene = dir / "scene";
  fs::copy(MATSPLAT_BUNDLED_SCENE, scene, fs::copy_options::recursive);
  fs::remove_all(scene / "output");
  return scene;
}

LabeledMesh split_plane() {
  LabeledMesh m;
  m.vertices = {{-50, -50, 0}, {0, -50, 0}, {0, 50, 0}, {-50, 50, 0}, {50, -50, 0}, {50, 50, 0}};
  m.triangles = {{0, 1, 2}, {0, 2, 3}, {1, 4, 5}, {1, 5, 2}};
  m.labels = {classes::kAsphalt, classes::kAsphalt, classes::kConcrete, classes::kConcrete};
  m.finalize();
  return m;
}

}  // namespace

TEST_CASE("refine reproduces the golden mask") {
  testutil::TempDir dir("cli");
  const fs::path data = MATSPLAT_TEST_DATA;
  const Run r = run("refine --materials " + quote((data / "refine_materials.png").string()) + " --instances " +
                        quote((data / "refine_instances.png").string()) + " -o " + quote((dir / "out.png").string()),
                    dir);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(io::load_mask(dir / "out.png").pixels == io::load_mask(data / "refine_golden.png").pixels);
  CHECK(json::parse(r.out)["command"] == "refine");
  const json prov = json::parse(testutil::slurp(dir / "out.png.provenance.json"));
  CHECK(prov["tool"] == "matsplat");
  CHECK(prov["inputs"]["materials"]["sha256"].get<std::string>().size() == 64);
}

TEST_CASE("errors are reported as JSON with typed exit codes") {
  testutil::TempDir dir("cli");
  SUBCASE("missing input") {
    const Run r = run("assign-pbr --mesh " + quote((dir / "absent.ply").string()) + " -o " +
                          quote((dir / "m.obj").string()),
                      dir);
    CHECK(r.code == 2);
    CHECK(error_of(r)["kind"] == "io");
    CHECK(error_of(r)["exit_code"] == 2);
  }
  SUBCASE("usage") {
    const Run r = run("simulate --no-such-flag", dir);
    CHECK(r.code == 2);
    CHECK(error_of(r)["kind"] == "usage");
  }
  SUBCASE("out of range material") {
    io::write_labeled_mesh(split_plane(), dir / "plane.ply");
    auto doc = json::parse(pbr::to_json(pbr::default_table()));
    doc["materials"][3]["metallic"] = 1.3;
    testutil::spit(dir / "bad.json", doc.dump());
    const Run r = run("assign-pbr --mesh " + quote((dir / "plane.ply").string()) + " --materials " +
                          quote((dir / "bad.json").string()) + " -o " + quote((dir / "m.obj").string()),
                      dir);
    CHECK(r.code == 3);
    CHECK(error_of(r)["kind"] == "range");
  }
  SUBCASE("unmapped class") {
    LabeledMesh m = split_plane();
    m.labels[0] = 42;
    io::write_labeled_mesh(m, dir / "plane.ply");
    const Run r = run("assign-pbr --mesh " + quote((dir / "plane.ply").string()) + " -o " +
                          quote((dir / "m.obj").string()),
                      dir);
    CHECK(r.code == 3);
    CHECK(error_of(r)["kind"] == "unmapped-class");
  }
}

TEST_CASE("simulate over a two-material plane reports table reflectivities") {
  testutil::TempDir dir("cli");
  io::write_labeled_mesh(split_plane(), dir / "plane.ply");
  Trajectory t;
  Pose a, b;
  a.translation = b.translation = Vec3(0.2, 0.1, 2.5);
  b.timestamp = 0.1;
  t.poses = {a, b};
  io::write_trajectory(t, dir / "traj.csv");
  lidar::ScanPattern p;
  p.channels = 8;
  p.vfov_min_deg = -45;
  p.vfov_max_deg = -10;
  p.horizontal_samples = 90;
  testutil::spit(dir / "pattern.json", lidar::to_json(p));
  const Run r = run("simulate --mesh " + quote((dir / "plane.ply").string()) + " --trajectory " +
                        quote((dir / "traj.csv").string()) + " --pattern " + quote((dir / "pattern.json").string()) +
                        " -o " + quote((dir / "scan.csv").string()),
                    dir);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const json report = json::parse(testutil::slurp(dir / "scan.csv.report.json"));
  CHECK(report["revolutions"] == 2);
  CHECK(report["returns"] == 2 * 8 * 90);
  for (const auto& [key, c] : report["classes"].items()) {
    CHECK(c["min_reflectivity"] == c["table_reflectivity"]);
    CHECK(c["max_reflectivity"] == c["table_reflectivity"]);
  }
  CHECK(report["classes"]["3"]["table_reflectivity"] == 20);
  CHECK(report["classes"]["2"]["table_reflectivity"] == 60);
  CHECK(lidar::read_returns(dir / "scan.csv").size() == 2 * 8 * 90);
}

TEST_CASE("pipeline on the bundled scene") {
  testutil::TempDir dir("cli");
  const fs::path scene = copy_bundled(dir);
  const Run r = run("pipeline " + quote((scene / "manifest.json").string()), dir);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const fs::path out = scene / "output";
  for (const char* name : {"labeled_splats.ply", "labeled_mesh.ply", "labeled_mesh.ply.summary.json",
                           "material_mesh.obj", "material_mesh.mtl", "scan.bin", "scan.bin.report.json",
                           "evaluation.json", "evaluation_errors.csv", "labeled_splats.ply.provenance.json",
                           "scan.bin.provenance.json", "evaluation.json.provenance.json"})
    CHECK_MESSAGE(fs::is_regular_file(out / name), name);
  const json eval = json::parse(testutil::slurp(out / "evaluation.json"));
  CHECK(eval["mae"] == 0.0);
  CHECK(eval["match_fraction"].get<double>() > 0.99);
  const json summary = json::parse(testutil::slurp(out / "labeled_mesh.ply.summary.json"));
  CHECK(summary["unlabeled"] == 0);

  SUBCASE("stage outputs equal individual subcommand runs") {
    const fs::path solo = dir / "solo";
    fs::create_directories(solo);
    auto q = [](const fs::path& p) { return quote(p.string()); };
    REQUIRE(run("project --splats " + q(scene / "splats.ply") + " --cameras " + q(scene / "sparse") + " --masks " +
                    q(scene / "masks") + " -o " + q(solo / "labeled_splats.ply"),
                dir)
                .code == 0);
    REQUIRE(run("label-mesh --splats " + q(solo / "labeled_splats.ply") + " --mesh " + q(scene / "mesh.ply") +
                    " -o " + q(solo / "labeled_mesh.ply"),
                dir)
                .code == 0);
    REQUIRE(run("assign-pbr --mesh " + q(solo / "labeled_mesh.ply") + " --materials " +
                    q(scene / "materials.json") + " -o " + q(solo / "material_mesh.obj"),
                dir)
                .code == 0);
    REQUIRE(run("simulate --mesh " + q(solo / "material_mesh.obj") + " --materials " + q(scene / "materials.json") +
                    " --trajectory " + q(scene / "trajectory.csv") + " --pattern " + q(scene / "pattern.json") +
                    " -o " + q(solo / "scan.bin"),
                dir)
                .code == 0);
    for (const char* name : {"labeled_splats.ply", "labeled_mesh.ply", "material_mesh.obj", "material_mesh.mtl",
                             "scan.bin", "scan.bin.report.json"})
      CHECK_MESSAGE(testutil::slurp(solo / name) == testutil::slurp(out / name), name);
  }

  SUBCASE("rerun with more threads is byte-identical") {
    const auto first = snapshot(out);
    const Run again = run("pipeline --threads 8 " + quote((scene / "manifest.json").string()), dir);
    REQUIRE_MESSAGE(again.code == 0, again.err);
    const auto second = snapshot(out);
    CHECK(first.size() == second.size());
    for (const auto& [name, bytes] : first) CHECK_MESSAGE(second.at(name) == bytes, name);
    CHECK(again.out == r.out);
  }
}
