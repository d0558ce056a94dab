// pffc: run, check and mesh subcommands.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "pffc/config_io.hpp"
#include "pffc/experiment.hpp"
#include "pffc/verify.hpp"

namespace {

int do_run(std::optional<int> experiment, const std::string& config_path, const pffc::Overrides& overrides, bool dump) {
  pffc::ExperimentConfig config =
      config_path.empty() ? pffc::preset(*experiment) : pffc::load_config(config_path, experiment);
  pffc::apply_overrides(config, overrides);
  config.validate();
  if (dump) {
    std::cout << pffc::serialize_config(config);
    return pffc::kExitConverged;
  }
  std::printf("experiment %d: %dx%d cells, M=%d, homotopy %s (%d steps) -> %s\n", config.experiment, config.nx,
              config.ny, config.M, pffc::to_string(config.homotopy).c_str(), config.homotopy_steps,
              config.output_dir.c_str());
  const pffc::RunReport report = pffc::run(config);
  if (!report.rows.empty()) {
    const auto& r = report.rows.back();
    std::printf("final: step %d iter %d residual %.4e cost %.6e tracking %.6e tikhonov %.6e force %.6e\n", r.step,
                r.iter, r.abs_residual, r.cost.total, r.cost.tracking, r.cost.tikhonov, r.force);
  }
  std::printf("status: %s%s%s\n", pffc::to_string(report.status).c_str(), report.message.empty() ? "" : ": ",
              report.message.c_str());
  for (const auto& f : report.files) std::printf("wrote %s\n", f.c_str());
  return report.exit_code;
}

int do_check() {
  const auto checks = pffc::run_oracle_suite(&std::cout);
  int failed = 0;
  for (const auto& c : checks) failed += c.passed() ? 0 : 1;
  std::printf("%zu checks, %d failed\n", checks.size(), failed);
  return failed == 0 ? pffc::kExitConverged : pffc::kExitError;
}

int do_mesh(int experiment, const std::optional<double>& scale, const std::string& out) {
  pffc::ExperimentConfig config = pffc::preset(experiment);
  pffc::Overrides o;
  o.mesh_scale = scale;
  pffc::apply_overrides(config, o);
  const pffc::Mesh mesh = pffc::build_mesh(config);
  std::ofstream os(out);
  if (!os) throw std::runtime_error("cannot write " + out);
  pffc::write_vtk_mesh(os, mesh);
  std::printf("%zu vertices, %zu cells -> %s\n", mesh.num_vertices(), mesh.num_cells(), out.c_str());
  return pffc::kExitConverged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal control of phase-field fracture"};
  app.require_subcommand(1);

  int experiment = 0;
  std::string config_path;
  std::optional<double> mesh_scale;
  std::optional<int> time_steps;
  std::optional<double> tol_abs;
  std::string homotopy;
  std::optional<int> homotopy_steps;
  std::optional<std::string> out_dir;
  bool dump = false;

  auto* run = app.add_subcommand("run", "Solve one experiment");
  auto* exp_opt = run->add_option("--experiment,-e", experiment, "Experiment number 1..6")->check(CLI::Range(1, 6));
  run->add_option("--config,-c", config_path, "key = value file applied on top of the preset")
      ->check(CLI::ExistingFile);
  run->add_option("--mesh-scale", mesh_scale, "Multiply the cell counts");
  run->add_option("--time-steps", time_steps, "Number of time steps M");
  run->add_option("--tol-abs", tol_abs, "Absolute residual tolerance");
  run->add_option("--homotopy", homotopy, "a (length), b (Tikhonov) or none")
      ->check(CLI::IsMember({"a", "b", "none"}));
  run->add_option("--homotopy-steps", homotopy_steps, "Homotopy steps K");
  run->add_option("--out,-o", out_dir, "Output directory");
  run->add_flag("--dump-config", dump, "Print the effective configuration and exit");

  app.add_subcommand("check", "Finite-difference derivative checks");

  int mesh_experiment = 1;
  std::optional<double> mesh_only_scale;
  std::string mesh_out;
  auto* mesh = app.add_subcommand("mesh", "Write the experiment mesh as VTK");
  mesh->add_option("--experiment,-e", mesh_experiment, "Experiment number 1..6")
      ->required()
      ->check(CLI::Range(1, 6));
  mesh->add_option("--mesh-scale", mesh_only_scale, "Multiply the cell counts");
  mesh->add_option("--out,-o", mesh_out, "VTK file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : pffc::kExitUsage;
  }

  try {
    if (*run) {
      if (exp_opt->count() == 0 && config_path.empty()) {
        std::cerr << "run: need --experiment or --config\n";
        return pffc::kExitUsage;
      }
      pffc::Overrides o;
      o.mesh_scale = mesh_scale;
      o.time_steps = time_steps;
      o.tol_abs = tol_abs;
      if (!homotopy.empty()) o.homotopy = pffc::homotopy_kind_from_string(homotopy);
      o.homotopy_steps = homotopy_steps;
      o.output_dir = out_dir;
      std::optional<int> n;
      if (exp_opt->count() > 0) n = experiment;
      return do_run(n, config_path, o, dump);
    }
    if (app.got_subcommand("check")) return do_check();
    if (*mesh) return do_mesh(mesh_experiment, mesh_only_scale, mesh_out);
  } catch (const pffc::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return pffc::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return pffc::kExitError;
  }
  return pffc::kExitUsage;
}
