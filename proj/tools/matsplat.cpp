#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "matsplat/app/commands.hpp"
#include "matsplat/error.hpp"

namespace {

using matsplat::ErrorKind;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io:
    case ErrorKind::Format:
    case ErrorKind::Schema:
    case ErrorKind::UnsupportedModel:
      return 2;
    case ErrorKind::Internal:
      return 1;
    default:
      return 3;
  }
}

int report_error(const std::string& kind, const std::string& message, int code) {
  nlohmann::ordered_json j;
  j["error"] = {{"kind", kind}, {"message", message}, {"exit_code", code}};
  std::cerr << j.dump() << std::endl;
  return code;
}

template <typename T>
std::optional<T> opt(const std::string& value) {
  if (value.empty()) return std::nullopt;
  return T(value);
}

}  // namespace

int main(int argc, char** argv) {
  namespace app = matsplat::app;
  CLI::App cli{"Material-aware splat labeling and LiDAR simulation"};
  cli.require_subcommand(1);
  cli.set_version_flag("--version", app::kVersion);

  int threads = 1;
  auto add_threads = [&](CLI::App* sub) {
    sub->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1, 1024));
  };

  app::RefineArgs refine;
  auto* c_refine = cli.add_subcommand("refine", "Majority-vote material labels inside instance masks");
  c_refine->add_option("--materials", refine.materials, "Material mask (8-bit single channel)")->required();
  c_refine->add_option("--instances", refine.instances, "Instance masks (label image or multi-page PGM)")->required();
  c_refine->add_option("-o,--output", refine.output, "Refined mask")->required();
  add_threads(c_refine);

  app::ProjectArgs project;
  std::string debug_dir;
  auto* c_project = cli.add_subcommand("project", "Vote mask labels onto splats");
  c_project->add_option("--splats", project.splats, "Splat PLY")->required();
  c_project->add_option("--cameras", project.cameras, "COLMAP text model directory")->required();
  c_project->add_option("--masks", project.masks, "Directory with one mask per image")->required();
  c_project->add_option("-o,--output", project.output, "Labeled splat PLY")->required();
  c_project->add_option("--alpha-threshold", project.alpha_threshold, "Vote threshold on splat alpha")->capture_default_str();
  c_project->add_option("--debug-dir", debug_dir, "Write per-view winner label images here");
  add_threads(c_project);

  app::LabelMeshArgs label;
  auto* c_label = cli.add_subcommand("label-mesh", "Transfer splat labels to mesh triangles");
  c_label->add_option("--splats", label.splats, "Labeled splat PLY")->required();
  c_label->add_option("--mesh", label.mesh, "Mesh (PLY or OBJ)")->required();
  c_label->add_option("-o,--output", label.output, "Labeled mesh")->required();
  c_label->add_option("--knn-k", label.knn_k, "Triangles each splat votes for")->capture_default_str()->check(CLI::PositiveNumber);
  c_label->add_flag("--fill,!--no-fill", label.fill, "Propagate labels into unlabeled triangles")->capture_default_str();
  add_threads(c_label);

  app::AssignPbrArgs assign;
  std::string assign_materials;
  auto* c_assign = cli.add_subcommand("assign-pbr", "Bind PBR materials to a labeled mesh");
  c_assign->add_option("--mesh", assign.mesh, "Labeled mesh")->required();
  c_assign->add_option("--materials", assign_materials, "Material table JSON (default: built-in table)");
  c_assign->add_option("-o,--output", assign.output, "OBJ output; .mtl and .binding.json are written next to it")->required();

  app::SimulateArgs simulate;
  std::string sim_materials, sim_pattern;
  auto* c_sim = cli.add_subcommand("simulate", "Simulate a spinning LiDAR over a material mesh");
  c_sim->add_option("--mesh", simulate.mesh, "Labeled mesh")->required();
  c_sim->add_option("--materials", sim_materials, "Material table JSON (default: built-in table)");
  c_sim->add_option("--trajectory", simulate.trajectory, "Trajectory CSV")->required();
  c_sim->add_option("--pattern", sim_pattern, "Scan pattern JSON (default: 128 channels, 1024 columns, 20 Hz)");
  c_sim->add_option("-o,--output", simulate.output, "Point cloud (.bin or .csv)")->required();
  c_sim->add_option("--range-noise", simulate.range_noise, "Range noise sigma, meters")->capture_default_str();
  c_sim->add_option("--power-noise", simulate.power_noise, "Relative power noise sigma")->capture_default_str();
  c_sim->add_option("--seed", simulate.seed, "Noise seed")->capture_default_str();
  add_threads(c_sim);

  app::EvaluateArgs evaluate;
  std::string errors_csv;
  std::vector<std::string> images, ref_images;
  auto* c_eval = cli.add_subcommand("evaluate", "Compare a simulated scan with a reference");
  c_eval->add_option("--sim", evaluate.sim, "Simulated point cloud")->required();
  c_eval->add_option("--ref", evaluate.ref, "Reference point cloud")->required();
  c_eval->add_option("-o,--output", evaluate.output, "JSON report")->required();
  c_eval->add_option("--errors-csv", errors_csv, "Per-point absolute errors");
  c_eval->add_option("--match-radius", evaluate.match_radius, "Association radius, meters")->capture_default_str();
  c_eval->add_option("--image", images, "Rendered image (repeat; pairs with --reference-image)");
  c_eval->add_option("--reference-image", ref_images, "Reference image (repeat)");
  add_threads(c_eval);

  app::PipelineArgs pipeline;
  std::string pipe_pattern;
  auto* c_pipe = cli.add_subcommand("pipeline", "Run every stage for each scene in a manifest");
  c_pipe->add_option("manifest", pipeline.manifest, "Manifest JSON")->required();
  c_pipe->add_option("--alpha-threshold", pipeline.alpha_threshold, "Vote threshold on splat alpha")->capture_default_str();
  c_pipe->add_option("--knn-k", pipeline.knn_k, "Triangles each splat votes for")->capture_default_str()->check(CLI::PositiveNumber);
  c_pipe->add_flag("--fill,!--no-fill", pipeline.fill, "Propagate labels into unlabeled triangles")->capture_default_str();
  c_pipe->add_option("--match-radius", pipeline.match_radius, "Association radius, meters")->capture_default_str();
  c_pipe->add_option("--pattern", pipe_pattern, "Scan pattern JSON overriding the manifest");
  c_pipe->add_option("--range-noise", pipeline.range_noise, "Range noise sigma, meters")->capture_default_str();
  c_pipe->add_option("--power-noise", pipeline.power_noise, "Relative power noise sigma")->capture_default_str();
  c_pipe->add_option("--seed", pipeline.seed, "Noise seed")->capture_default_str();
  add_threads(c_pipe);

  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return cli.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return cli.exit(e);
  } catch (const CLI::Success& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), 2);
  }

  try {
    nlohmann::ordered_json report;
    if (*c_refine) {
      refine.threads = threads;
      report = app::run_refine(refine);
    } else if (*c_project) {
      project.threads = threads;
      project.debug_dir = opt<std::filesystem::path>(debug_dir);
      report = app::run_project(project);
    } else if (*c_label) {
      label.threads = threads;
      report = app::run_label_mesh(label);
    } else if (*c_assign) {
      assign.materials = opt<std::filesystem::path>(assign_materials);
      report = app::run_assign_pbr(assign);
    } else if (*c_sim) {
      simulate.threads = threads;
      simulate.materials = opt<std::filesystem::path>(sim_materials);
      simulate.pattern = opt<std::filesystem::path>(sim_pattern);
      report = app::run_simulate(simulate);
    } else if (*c_eval) {
      if (images.size() != ref_images.size())
        return report_error("usage", "--image and --reference-image must be given the same number of times", 2);
      for (std::size_t i = 0; i < images.size(); ++i) evaluate.image_pairs.emplace_back(images[i], ref_images[i]);
      evaluate.threads = threads;
      evaluate.errors_csv = opt<std::filesystem::path>(errors_csv);
      report = app::run_evaluate(evaluate);
    } else if (*c_pipe) {
      pipeline.threads = threads;
      pipeline.pattern = opt<std::filesystem::path>(pipe_pattern);
      report = app::run_pipeline(pipeline);
    }
    std::cout << report.dump(2) << std::endl;
    return 0;
  } catch (const matsplat::Error& e) {
    return report_error(std::string(matsplat::to_string(e.kind())), e.what(), exit_code(e.kind()));
  } catch (const std::filesystem::filesystem_error& e) {
    return report_error("io", e.what(), 2);
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), 1);
  }
}
