#include <iostream>

#include <CLI11.hpp>

#include "matsplat/error.hpp"
#include "matsplat/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App cli{"Write the analytic street scene as pipeline inputs"};
  std::string out_dir, pattern;
  bool no_reference = false;
  int threads = 1;
  matsplat::synthetic::SceneOptions options;
  cli.add_option("output", out_dir, "Output directory")->required();
  cli.add_option("--pattern", pattern, "Scan pattern JSON");
  cli.add_option("--seconds", options.trajectory_seconds, "Trajectory duration")->capture_default_str();
  cli.add_flag("--no-reference", no_reference, "Skip the reference scan");
  cli.add_option("--threads", threads, "Worker threads")->check(CLI::Range(1, 1024));
  CLI11_PARSE(cli, argc, argv);

  try {
    if (!pattern.empty()) options.pattern = matsplat::lidar::load_scan_pattern(pattern);
    const auto scene = matsplat::synthetic::make_twin_scene(options);
    matsplat::synthetic::write_scene(scene, out_dir, !no_reference, threads);
    std::cout << out_dir << "/manifest.json\n";
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
