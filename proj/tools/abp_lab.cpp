// abp_lab: generate test surfaces, evaluate the Sobolev inequality on them,
// run the transport-map checks and convergence studies.
//
// Exit codes: 0 all checks passed, 1 a check failed, 2 bad input.

#include "abplab/mesh_io.hpp"
#include "abplab/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <map>

using nlohmann::json;

namespace {

constexpr int kPass = 0;
constexpr int kCheckFailed = 1;
constexpr int kInputError = 2;

struct Flags {
  std::string config_file;
  std::string geometry;
  std::map<std::string, double> params;
  std::string mesh;
  std::string density;
  int m = 0;
  int levels = 0;
  std::vector<int> convergence_levels;
  double tol_psd = 0, tol_open = 0, tol_jac = 0, tol_disc = 0, eps_eq = 0;
  double cg_tol = 0;
  int max_iters = 0;
  std::string precond;
  std::uint64_t seed = 0;
  int samples = 0;
  int normal_samples = 0;
  std::string output;
  std::string csv;
  std::string reference;
  int threads = 1;
};

// Options shared by every subcommand that reads a surface.
void add_input_options(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_file, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--geometry", f.geometry, "flat_disk | catenoid | enneper | holomorphic | sphere");
  for (const char* key : {"radius", "res", "ambient", "a", "k"}) {
    cmd->add_option_function<double>(std::string("--") + key, [&f, key](double v) { f.params[key] = v; },
                                     std::string("geometry parameter ") + key);
  }
  cmd->add_option_function<double>("--half-height", [&f](double v) { f.params["half_height"] = v; },
                                   "catenoid half height");
  cmd->add_option("--levels", f.levels, "refinement rounds applied to the generated geometry");
  cmd->add_option("--threads", f.threads, "accepted for compatibility; runs are single-threaded");
}

void add_run_options(CLI::App* cmd, Flags& f) {
  cmd->add_option("--mesh", f.mesh, "input mesh (.off or .json)");
  cmd->add_option("--density", f.density, "density expression in x1..x4, e.g. \"1 + 0.1*x1\"");
  cmd->add_option("-m,--codim", f.m, "codimension for the constant (default: from the mesh)");
  cmd->add_option("--tol-disc", f.tol_disc, "discretization tolerance (default 5h)");
  cmd->add_option("--tol-psd", f.tol_psd, "relative eigenvalue slack for A");
  cmd->add_option("--tol-open", f.tol_open, "Omega margin below |grad u| = 1");
  cmd->add_option("--tol-jac", f.tol_jac, "allowed excess of det D Phi over f^{n/(n-1)}");
  cmd->add_option("--eps-eq", f.eps_eq, "near-equality deficit threshold");
  cmd->add_option("--cg-tol", f.cg_tol, "CG relative residual tolerance");
  cmd->add_option("--max-iters", f.max_iters, "CG iteration cap (default 10 V)");
  cmd->add_option("--precond", f.precond, "jacobi | none");
  cmd->add_option("-o,--output", f.output, "report path (default: stdout)");
}

abp::RunConfig resolve(const std::string& command, CLI::App* cmd, const Flags& f) {
  abp::RunConfig config;
  if (!f.config_file.empty()) {
    std::ifstream in(f.config_file);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw abp::ConfigError(std::string("config file: ") + e.what());
    }
    config = abp::config_from_json(j);
  }
  config.command = command;
  abp::apply_environment(config);

  auto given = [cmd](const std::string& name) {
    try {
      return cmd->get_option(name)->count() > 0;
    } catch (const CLI::OptionNotFound&) {
      return false;
    }
  };
  if (given("--geometry")) {
    config.geometry = abp::GeometrySpec{f.geometry, {}};
    config.mesh_path.clear();
  }
  if (config.geometry) {
    for (const auto& [key, value] : f.params) config.geometry->params[key] = value;
  }
  if (given("--mesh")) {
    config.mesh_path = f.mesh;
    config.geometry.reset();
  }
  if (given("--density")) config.density = f.density;
  if (given("--codim")) config.m = f.m;
  if (given("--levels")) {
    if (command == "convergence") {
      config.convergence_levels = f.convergence_levels;
    } else {
      config.levels = f.levels;
    }
  }
  if (given("--tol-disc")) config.tol.tol_disc = f.tol_disc;
  if (given("--tol-psd")) config.tol.tol_psd = f.tol_psd;
  if (given("--tol-open")) config.tol.tol_open = f.tol_open;
  if (given("--tol-jac")) config.tol.tol_jac = f.tol_jac;
  if (given("--eps-eq")) config.tol.eps_eq = f.eps_eq;
  if (given("--cg-tol")) config.solver.cg_tol = f.cg_tol;
  if (given("--max-iters")) config.solver.max_iters = f.max_iters;
  if (given("--precond")) {
    if (f.precond != "jacobi" && f.precond != "none") throw abp::ConfigError("precond must be 'jacobi' or 'none'");
    config.solver.precond = f.precond == "jacobi" ? abp::Preconditioner::Jacobi : abp::Preconditioner::None;
  }
  if (given("--seed")) config.seed = f.seed;
  if (given("--samples")) config.samples = f.samples;
  if (given("--normal-samples")) config.normal_samples = f.normal_samples;
  if (given("--output")) config.report_path = f.output;
  if (given("--csv")) config.csv_path = f.csv;
  abp::validate(config);
  return config;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw abp::ConfigError("cannot write " + path);
  out << text;
}

void emit(const abp::RunConfig& config, const json& result) {
  const json doc = {{"config", abp::to_json(config)}, {"result", result}};
  if (config.report_path.empty()) {
    std::cout << doc.dump(2) << '\n';
  } else {
    write_text(config.report_path, doc.dump(2) + "\n");
  }
}

int cmd_generate(CLI::App* cmd, const Flags& f) {
  abp::RunConfig config = resolve("generate", cmd, f);
  if (!config.geometry) throw abp::ConfigError("generate needs --geometry");
  const abp::LoadedInput input = abp::load_input(config);
  const std::string path = f.output.empty() ? config.geometry->name + ".json" : f.output;
  try {
    abp::save_mesh(path, input.mesh);
  } catch (const abp::MeshError& e) {
    throw abp::ConfigError(e.what());
  }
  const std::string ref_path = f.reference.empty() ? path + ".reference.json" : f.reference;
  json ref = abp::to_json(*input.reference);
  ref["levels"] = config.levels;
  ref["vertices"] = input.mesh.num_vertices();
  ref["faces"] = input.mesh.num_faces();
  ref["ambient_dim"] = input.mesh.ambient_dim();
  write_text(ref_path, ref.dump(2) + "\n");
  std::cout << "wrote " << path << " (" << input.mesh.num_vertices() << " vertices, " << input.mesh.num_faces()
            << " faces) and " << ref_path << '\n';
  return kPass;
}

int cmd_verify(CLI::App* cmd, const Flags& f) {
  const abp::RunConfig config = resolve("verify", cmd, f);
  const abp::LoadedInput input = abp::load_input(config);
  const abp::ScalarField density = abp::load_density(config, input.mesh);
  const abp::VerifyReport report = abp::run_verify(input.mesh, density, config);
  emit(config, abp::to_json(report));
  std::cerr << "deficit " << report.inequality.deficit << " (tol " << report.inequality.tol_disc << "): "
            << (report.pass ? "PASS" : "FAIL") << '\n';
  return report.pass ? kPass : kCheckFailed;
}

int cmd_abp(CLI::App* cmd, const Flags& f) {
  const abp::RunConfig config = resolve("abp", cmd, f);
  const abp::LoadedInput input = abp::load_input(config);
  const abp::ScalarField density = abp::load_density(config, input.mesh);
  const abp::AbpReport report = abp::run_abp(input.mesh, density, config);
  emit(config, abp::to_json(report));
  if (!config.csv_path.empty()) write_text(config.csv_path, abp::chain_csv(report));
  for (std::size_t c = 0; c < report.components.size(); ++c) {
    const auto& part = report.components[c];
    std::cerr << "component " << c << ": coverage " << part.coverage.fraction << ", jacobian max ratio "
              << part.jacobian.max_ratio << ", chain " << (part.chain.monotone ? "monotone" : "violated") << '\n';
  }
  return report.pass ? kPass : kCheckFailed;
}

int cmd_convergence(CLI::App* cmd, const Flags& f) {
  const abp::RunConfig config = resolve("convergence", cmd, f);
  const abp::ConvergenceTable table =
      abp::run_convergence(*config.geometry, config.convergence_levels, config.solver);
  emit(config, abp::to_json(table));
  const std::string csv = abp::convergence_csv(table);
  if (config.csv_path.empty()) {
    std::cerr << csv;
  } else {
    write_text(config.csv_path, csv);
  }
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks of the sharp Sobolev inequality on triangulated surfaces"};
  app.require_subcommand(1);
  Flags flags;

  CLI::App* generate = app.add_subcommand("generate", "write an analytic test surface and its reference values");
  add_input_options(generate, flags);
  generate->add_option("-o,--output", flags.output, "mesh path (.json or .off)");
  generate->add_option("--reference", flags.reference, "reference sidecar path (default: <output>.reference.json)");

  CLI::App* verify = app.add_subcommand("verify", "evaluate both sides of the inequality and solve the PDE");
  add_input_options(verify, flags);
  add_run_options(verify, flags);

  CLI::App* abp_cmd = app.add_subcommand("abp", "coverage, Jacobian bound and annulus chain checks");
  add_input_options(abp_cmd, flags);
  add_run_options(abp_cmd, flags);
  abp_cmd->add_option("--seed", flags.seed, "RNG seed (ABP_SEED overrides the config file)");
  abp_cmd->add_option("--samples", flags.samples, "coverage targets");
  abp_cmd->add_option("--normal-samples", flags.normal_samples, "normal samples per vertex for the Jacobian bound");
  abp_cmd->add_option("--csv", flags.csv, "chain table CSV");

  CLI::App* convergence = app.add_subcommand("convergence", "error table over refinement levels");
  convergence->add_option("--config", flags.config_file, "JSON run configuration")->check(CLI::ExistingFile);
  convergence->add_option("--geometry", flags.geometry, "analytic geometry");
  for (const char* key : {"radius", "res", "ambient", "a", "k"}) {
    convergence->add_option_function<double>(std::string("--") + key,
                                             [&flags, key](double v) { flags.params[key] = v; });
  }
  convergence->add_option_function<double>("--half-height",
                                           [&flags](double v) { flags.params["half_height"] = v; });
  convergence->add_option("--levels", flags.convergence_levels, "refinement levels, e.g. --levels 1 2 3 4");
  convergence->add_option("--threads", flags.threads, "accepted for compatibility; runs are single-threaded");
  convergence->add_option("-o,--output", flags.output, "report path (default: stdout)");
  convergence->add_option("--csv", flags.csv, "table CSV (default: stderr)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (generate->parsed()) return cmd_generate(generate, flags);
    if (verify->parsed()) return cmd_verify(verify, flags);
    if (abp_cmd->parsed()) return cmd_abp(abp_cmd, flags);
    return cmd_convergence(convergence, flags);
  } catch (const abp::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const abp::MeshError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const abp::PdeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == abp::PdeError::Kind::NonPositiveDensity ? kInputError : kCheckFailed;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
}
