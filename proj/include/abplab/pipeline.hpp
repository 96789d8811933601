#pragma once

#include "abplab/geometry.hpp"
#include "abplab/harness.hpp"
#include "abplab/mesh.hpp"
#include "abplab/pde.hpp"
#include "abplab/transport.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace abp {

/// Invalid configuration or input; maps to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Tolerances {
  double tol_psd = 1e-6;
  double tol_open = 1e-3;
  double tol_jac = 0.02;
  double tol_disc = 0.0;  // 0 means 5 h
  double eps_eq = 0.01;
};

struct RunConfig {
  std::string command;
  std::optional<GeometrySpec> geometry;
  std::string mesh_path;
  std::string density = "1";
  int n = 2;
  int m = 0;       // 0 means the codimension of the mesh
  int levels = 0;  // refinement rounds applied to a generated geometry
  std::vector<int> convergence_levels{1, 2, 3, 4};
  Tolerances tol;
  SolverConfig solver;
  std::uint64_t seed = 42;
  int samples = 10000;
  int normal_samples = 8;
  std::vector<double> sigmas{0.0, 0.25, 0.5, 0.75, 0.9, 0.99};
  std::string report_path;
  std::string csv_path;
  std::string mesh_output;
};

/// Validates the invariants of a RunConfig (one input source, positive
/// tolerances, n = 2); throws ConfigError.
void validate(const RunConfig& config);

nlohmann::json to_json(const RunConfig& config);
/// Reads a config file body; missing keys keep their defaults.
RunConfig config_from_json(const nlohmann::json& j);
/// Replaces config.seed by ABP_SEED when that variable is set.
void apply_environment(RunConfig& config);

struct LoadedInput {
  Mesh mesh;
  std::optional<AnalyticReference> reference;
};

LoadedInput load_input(const RunConfig& config);

/// Evaluates config.density on the mesh; throws ConfigError when it is not positive.
ScalarField load_density(const RunConfig& config, const Mesh& mesh);

struct ComponentSolve {
  int vertices = 0;
  double normalization = 1.0;
  int cg_iterations = 0;
  double linear_residual = 0.0;
  double interior_pde_residual = 0.0;
  double relative_interior_residual = 0.0;
  double boundary_flux_error = 0.0;
};

struct VerifyReport {
  InequalityReport inequality;
  IsoperimetricReport isoperimetric;
  std::vector<ComponentSolve> components;
  double residual_threshold = 0.0;
  bool residuals_ok = false;
  bool pass = false;
};

VerifyReport run_verify(const Mesh& mesh, const ScalarField& f, const RunConfig& config);

struct ComponentAbp {
  int vertices = 0;
  int omega_vertices = 0;
  double normalization = 1.0;
  CoverageReport coverage;
  JacobianBoundReport jacobian;
  JacobianFormulaReport formula;
  ChainReport chain;
  EqualityDiagnostics equality;
  bool pass = false;
};

struct AbpReport {
  bool padded = false;  // R^3 input embedded in R^4
  std::string note;
  double h = 0.0;
  std::vector<ComponentAbp> components;
  bool pass = false;
};

AbpReport run_abp(const Mesh& mesh, const ScalarField& f, const RunConfig& config);

struct ConvergenceRow {
  int level = 0;
  int vertices = 0;
  double h = 0.0;
  double area_error = 0.0;      // relative
  double boundary_error = 0.0;  // relative; 0 for closed surfaces
  double mean_curvature_error = 0.0;        // max over interior vertices of ||H| - |H|_exact|
  double second_fundamental_error = 0.0;    // max over interior vertices of ||II| - |II|_exact|
  double pde_residual = 0.0;                // relative interior residual
  double boundary_flux_error = 0.0;
  double deficit = 0.0;
  double deficit_error = 0.0;   // against the f = 1 closed form
};

struct OrderFit {
  double order = 0.0;
  double r_squared = 0.0;
  bool valid = false;  // false when an error is zero or fewer than two levels
};

/// Least-squares slope of log(error) against log(h).
OrderFit fit_order(const std::vector<double>& h, const std::vector<double>& error);

struct ConvergenceTable {
  std::string geometry;
  std::vector<ConvergenceRow> rows;
  std::vector<std::pair<std::string, OrderFit>> orders;
};

/// Refines a generated geometry to each requested level with f = 1.
ConvergenceTable run_convergence(const GeometrySpec& spec, const std::vector<int>& levels,
                                 const SolverConfig& solver = {});

nlohmann::json to_json(const InequalityReport& r);
nlohmann::json to_json(const IsoperimetricReport& r);
nlohmann::json to_json(const VerifyReport& r);
nlohmann::json to_json(const CoverageReport& r);
nlohmann::json to_json(const JacobianBoundReport& r);
nlohmann::json to_json(const ChainReport& r);
nlohmann::json to_json(const EqualityDiagnostics& r);
nlohmann::json to_json(const AbpReport& r);
nlohmann::json to_json(const ConvergenceTable& t);
nlohmann::json to_json(const AnalyticReference& r);

std::string convergence_csv(const ConvergenceTable& t);
std::string chain_csv(const AbpReport& r);

}  // namespace abp
