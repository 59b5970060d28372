#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace matsplat::app {

namespace fs = std::filesystem;

inline constexpr const char* kVersion = "0.1.0";

/// Records what a run consumed and produced. Written next to the primary output
/// as `<output>.provenance.json`. Contains no timestamps or thread counts, so
/// identical runs produce identical records.
class Provenance {
 public:
  explicit Provenance(std::string command) : command_(std::move(command)) {}

  void input(const std::string& role, const fs::path& path);
  void output(const std::string& role, const fs::path& path);
  template <typename T>
  void parameter(const std::string& key, const T& value) {
    params_[key] = value;
  }
  nlohmann::ordered_json to_json() const;
  void write(const fs::path& primary_output) const;

 private:
  std::string command_;
  nlohmann::ordered_json inputs_ = nlohmann::ordered_json::object();
  nlohmann::ordered_json outputs_ = nlohmann::ordered_json::object();
  nlohmann::ordered_json params_ = nlohmann::ordered_json::object();
};

/// Lowercase hex SHA-256 of a file (Error(Io) if unreadable); directories hash
/// their sorted regular files by relative name and content.
std::string sha256_file(const fs::path& path);

struct RefineArgs {
  fs::path materials;
  fs::path instances;
  fs::path output;
  int threads = 1;
};
nlohmann::ordered_json run_refine(const RefineArgs& args);

struct ProjectArgs {
  fs::path splats;
  fs::path cameras;  // COLMAP text model directory
  fs::path masks;    // one mask per image, matched by image name
  fs::path output;   // labeled splat PLY
  std::optional<fs::path> debug_dir;
  double alpha_threshold = 0.5;
  int threads = 1;
};
nlohmann::ordered_json run_project(const ProjectArgs& args);

struct LabelMeshArgs {
  fs::path splats;  // labeled
  fs::path mesh;
  fs::path output;
  std::size_t knn_k = 1;
  bool fill = true;
  int threads = 1;
};
/// Also writes `<output>.summary.json`.
nlohmann::ordered_json run_label_mesh(const LabelMeshArgs& args);

struct AssignPbrArgs {
  fs::path mesh;
  std::optional<fs::path> materials;  // default table when absent
  fs::path output;                    // .obj; the .mtl and binding JSON sit next to it
};
nlohmann::ordered_json run_assign_pbr(const AssignPbrArgs& args);

struct SimulateArgs {
  fs::path mesh;
  std::optional<fs::path> materials;
  fs::path trajectory;
  std::optional<fs::path> pattern;
  fs::path output;  // .bin or .csv; report at `<output>.report.json`
  double range_noise = 0.0;
  double power_noise = 0.0;
  std::uint64_t seed = 0;
  int threads = 1;
};
nlohmann::ordered_json run_simulate(const SimulateArgs& args);

struct EvaluateArgs {
  fs::path sim;
  fs::path ref;
  fs::path output;  // JSON report
  std::optional<fs::path> errors_csv;
  double match_radius = 0.2;
  std::vector<std::pair<fs::path, fs::path>> image_pairs;  // (rendered, reference)
  int threads = 1;
};
nlohmann::ordered_json run_evaluate(const EvaluateArgs& args);

struct PipelineArgs {
  fs::path manifest;
  double alpha_threshold = 0.5;
  std::size_t knn_k = 1;
  bool fill = true;
  double match_radius = 0.2;
  std::optional<fs::path> pattern;  // overrides the manifest's
  double range_noise = 0.0;
  double power_noise = 0.0;
  std::uint64_t seed = 0;
  int threads = 1;
};
/// Runs refine (when the scene lists instances), project, label-mesh,
/// assign-pbr, simulate and, given a reference scan, evaluate for every scene.
/// Stage outputs are the same files the subcommands write.
nlohmann::ordered_json run_pipeline(const PipelineArgs& args);

}  // namespace matsplat::app
