#include "abplab/pipeline.hpp"

#include "abplab/density.hpp"
#include "abplab/mesh_io.hpp"

#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <limits>
#include <sstream>

namespace abp {

using nlohmann::json;

namespace {

json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

std::vector<Submesh> components_of(const Mesh& mesh) {
  if (mesh.num_components() == 1) {
    std::vector<int> identity(mesh.num_vertices());
    for (int v = 0; v < mesh.num_vertices(); ++v) identity[v] = v;
    return {Submesh{mesh, identity}};
  }
  return split_components(mesh);
}

ScalarField restrict_to(const ScalarField& f, const std::vector<int>& vertex_map) {
  ScalarField out(static_cast<Eigen::Index>(vertex_map.size()));
  for (std::size_t i = 0; i < vertex_map.size(); ++i) out[i] = f[vertex_map[i]];
  return out;
}

int codimension(const RunConfig& config, const Mesh& mesh) {
  return config.m > 0 ? config.m : mesh.ambient_dim() - 2;
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

}  // namespace

void validate(const RunConfig& config) {
  const bool needs_input = config.command != "convergence";
  if (config.command == "convergence" && !config.geometry) {
    throw ConfigError("convergence needs an analytic geometry");
  }
  if (needs_input && config.geometry.has_value() == !config.mesh_path.empty()) {
    throw ConfigError("give exactly one of a geometry or a mesh path");
  }
  if (config.n != 2) throw ConfigError("only surfaces (n = 2) are supported");
  if (config.m < 0) throw ConfigError("codimension must be non-negative");
  if (config.levels < 0) throw ConfigError("levels must be non-negative");
  const Tolerances& t = config.tol;
  if (!(t.tol_psd > 0 && t.tol_open > 0 && t.tol_jac > 0 && t.eps_eq > 0 && t.tol_disc >= 0)) {
    throw ConfigError("tolerances must be positive (tol_disc may be 0 for the 5h default)");
  }
  if (config.samples < 1) throw ConfigError("samples must be at least 1");
  if (config.normal_samples < 1) throw ConfigError("normal_samples must be at least 1");
  for (double s : config.sigmas) {
    if (!(s >= 0.0 && s < 1.0)) throw ConfigError("sigma values must lie in [0, 1)");
  }
  if (!(config.solver.cg_tol > 0.0) || config.solver.max_iters < 0) {
    throw ConfigError("solver cg_tol must be positive and max_iters non-negative");
  }
}

json to_json(const RunConfig& c) {
  json j;
  j["command"] = c.command;
  if (c.geometry) {
    j["geometry"] = {{"name", c.geometry->name}, {"params", c.geometry->params}};
  } else {
    j["geometry"] = nullptr;
  }
  j["mesh"] = c.mesh_path;
  j["density"] = c.density;
  j["n"] = c.n;
  j["m"] = c.m;
  j["levels"] = c.levels;
  j["convergence_levels"] = c.convergence_levels;
  j["tolerances"] = {{"tol_psd", c.tol.tol_psd},
                     {"tol_open", c.tol.tol_open},
                     {"tol_jac", c.tol.tol_jac},
                     {"tol_disc", c.tol.tol_disc},
                     {"eps_eq", c.tol.eps_eq}};
  j["solver"] = {{"cg_tol", c.solver.cg_tol},
                 {"max_iters", c.solver.max_iters},
                 {"precond", c.solver.precond == Preconditioner::Jacobi ? "jacobi" : "none"}};
  j["seed"] = c.seed;
  j["samples"] = c.samples;
  j["normal_samples"] = c.normal_samples;
  j["sigmas"] = c.sigmas;
  j["outputs"] = {{"report", c.report_path}, {"csv", c.csv_path}, {"mesh", c.mesh_output}};
  return j;
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  try {
    read(j, "command", c.command);
    if (j.contains("geometry") && !j.at("geometry").is_null()) {
      GeometrySpec spec;
      spec.name = j.at("geometry").at("name").get<std::string>();
      read(j.at("geometry"), "params", spec.params);
      c.geometry = spec;
    }
    read(j, "mesh", c.mesh_path);
    if (j.contains("density") && j.at("density").is_number()) {
      std::ostringstream s;
      s << std::setprecision(17) << j.at("density").get<double>();
      c.density = s.str();
    } else {
      read(j, "density", c.density);
    }
    read(j, "n", c.n);
    read(j, "m", c.m);
    read(j, "levels", c.levels);
    read(j, "convergence_levels", c.convergence_levels);
    if (j.contains("tolerances")) {
      const json& t = j.at("tolerances");
      read(t, "tol_psd", c.tol.tol_psd);
      read(t, "tol_open", c.tol.tol_open);
      read(t, "tol_jac", c.tol.tol_jac);
      read(t, "tol_disc", c.tol.tol_disc);
      read(t, "eps_eq", c.tol.eps_eq);
    }
    if (j.contains("solver")) {
      const json& s = j.at("solver");
      read(s, "cg_tol", c.solver.cg_tol);
      read(s, "max_iters", c.solver.max_iters);
      std::string precond = "jacobi";
      read(s, "precond", precond);
      if (precond != "jacobi" && precond != "none") throw ConfigError("precond must be 'jacobi' or 'none'");
      c.solver.precond = precond == "jacobi" ? Preconditioner::Jacobi : Preconditioner::None;
    }
    read(j, "seed", c.seed);
    read(j, "samples", c.samples);
    read(j, "normal_samples", c.normal_samples);
    read(j, "sigmas", c.sigmas);
    if (j.contains("outputs")) {
      read(j.at("outputs"), "report", c.report_path);
      read(j.at("outputs"), "csv", c.csv_path);
      read(j.at("outputs"), "mesh", c.mesh_output);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

void apply_environment(RunConfig& config) {
  if (const char* env = std::getenv("ABP_SEED")) {
    char* end = nullptr;
    const unsigned long long seed = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') throw ConfigError("ABP_SEED must be a non-negative integer");
    config.seed = seed;
  }
}

LoadedInput load_input(const RunConfig& config) {
  if (config.geometry) {
    try {
      GeneratedSurface surface = refined(generate(*config.geometry), config.levels);
      return {std::move(surface.mesh), std::move(surface.reference)};
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  try {
    return {load_mesh(config.mesh_path), std::nullopt};
  } catch (const MeshError& e) {
    throw ConfigError(e.what());
  }
}

ScalarField load_density(const RunConfig& config, const Mesh& mesh) {
  try {
    return DensityExpression::parse(config.density).evaluate(mesh);
  } catch (const DensityError& e) {
    throw ConfigError(e.what());
  }
}

VerifyReport run_verify(const Mesh& mesh, const ScalarField& f, const RunConfig& config) {
  VerifyReport report;
  const ShapeData shape = second_fundamental_form(mesh);
  report.inequality = deficit(mesh, f, config.n, codimension(config, mesh), shape, config.tol.tol_disc);
  report.isoperimetric = isoperimetric_report(mesh, shape);
  report.residual_threshold = report.inequality.tol_disc;
  report.residuals_ok = true;

  for (const Submesh& part : components_of(mesh)) {
    const ShapeData part_shape = part.mesh.num_vertices() == mesh.num_vertices() ? shape
                                                                                 : second_fundamental_form(part.mesh);
    const ScalarField part_f = restrict_to(f, part.vertex_map);
    const NormalizedDensity nd = normalize_density(part.mesh, part_f, part_shape, config.n);
    const NeumannSolution sol = solve_neumann(part.mesh, nd.f, part_shape, config.solver, config.n);
    const ResidualReport residual = pde_residual(part.mesh, nd.f, sol.u, part_shape, config.n);

    ComponentSolve c;
    c.vertices = part.mesh.num_vertices();
    c.normalization = nd.c;
    c.cg_iterations = sol.cg_iterations;
    c.linear_residual = sol.linear_residual;
    c.interior_pde_residual = residual.interior_pde_residual;
    c.relative_interior_residual = residual.relative_interior_residual;
    c.boundary_flux_error = residual.boundary_flux_error;
    report.residuals_ok = report.residuals_ok && c.relative_interior_residual <= report.residual_threshold &&
                          c.boundary_flux_error <= report.residual_threshold;
    report.components.push_back(c);
  }
  report.pass = report.inequality.pass && report.residuals_ok;
  return report;
}

AbpReport run_abp(const Mesh& input, const ScalarField& f, const RunConfig& config) {
  AbpReport report;
  const Mesh mesh = input.ambient_dim() == 3 ? pad_ambient(input, 4) : input;
  if (input.ambient_dim() == 3) {
    report.padded = true;
    report.note = "R^3 input embedded in R^4 (codimension 2) for the transport map";
  }
  report.h = relative_mesh_size(mesh);
  const double tol_disc = config.tol.tol_disc > 0.0 ? config.tol.tol_disc : 5.0 * report.h;
  TransportTolerances tol;
  tol.tol_psd = config.tol.tol_psd;
  tol.tol_open = config.tol.tol_open;

  report.pass = true;
  for (const Submesh& part : components_of(mesh)) {
    const ShapeData shape = second_fundamental_form(part.mesh);
    const NormalizedDensity nd = normalize_density(part.mesh, restrict_to(f, part.vertex_map), shape, config.n);
    NeumannSolution sol = solve_neumann(part.mesh, nd.f, shape, config.solver, config.n);
    sol.normalization_constant = nd.c;
    const TransportState state = build_transport_state(part.mesh, nd.f, sol, shape, tol, config.n);

    ComponentAbp c;
    c.vertices = part.mesh.num_vertices();
    for (char o : state.omega) c.omega_vertices += o;
    c.normalization = nd.c;
    c.coverage = coverage_check(state, config.samples, config.seed);
    c.jacobian = jacobian_bound_check(state, config.normal_samples, config.seed, config.tol.tol_jac);
    c.formula = jacobian_formula_check(state, 1, config.seed);
    c.chain = annulus_chain_check(state, config.sigmas, tol_disc);
    const double part_deficit = deficit(part.mesh, nd.f, config.n, 2, shape, tol_disc).deficit;
    c.equality = equality_diagnostics(part.mesh, nd.f, state, shape, part_deficit, config.tol.eps_eq, tol_disc);
    c.pass = c.coverage.fraction >= 0.99 && c.jacobian.pass && c.chain.monotone;
    report.pass = report.pass && c.pass;
    report.components.push_back(std::move(c));
  }
  return report;
}

OrderFit fit_order(const std::vector<double>& h, const std::vector<double>& error) {
  OrderFit fit;
  const std::size_t k = h.size();
  if (k < 2 || error.size() != k) return fit;
  std::vector<double> x(k), y(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (!(error[i] > 0.0) || !std::isfinite(error[i])) return fit;
    x[i] = std::log(h[i]);
    y[i] = std::log(error[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += x[i] / k;
    my += y[i] / k;
  }
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0) return fit;
  fit.order = sxy / sxx;
  fit.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  fit.valid = true;
  return fit;
}

ConvergenceTable run_convergence(const GeometrySpec& spec, const std::vector<int>& levels, const SolverConfig& solver) {
  ConvergenceTable table;
  table.geometry = spec.name;
  const GeneratedSurface base = generate(spec);
  const AnalyticReference& ref = base.reference;
  const double exact_deficit = (ref.exact_mean_curvature_integral + ref.exact_boundary_length) /
                               (sobolev_constant(2, 2) * std::sqrt(ref.exact_area));

  for (int level : levels) {
    const GeneratedSurface surface = refined(base, level);
    const Mesh& mesh = surface.mesh;
    const ShapeData shape = second_fundamental_form(mesh);
    ConvergenceRow row;
    row.level = level;
    row.vertices = mesh.num_vertices();
    row.h = relative_mesh_size(mesh);
    row.area_error = std::abs(mesh.total_area() - ref.exact_area) / ref.exact_area;
    if (ref.exact_boundary_length > 0.0) {
      double length = 0.0;
      for (const auto& loop : mesh.boundary_loops()) length += loop.length;
      row.boundary_error = std::abs(length - ref.exact_boundary_length) / ref.exact_boundary_length;
    }
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      if (!shape.pointwise_ok[v]) continue;
      const Eigen::VectorXd x = mesh.position(v);
      row.mean_curvature_error = std::max(
          row.mean_curvature_error, std::abs(shape.mean_curvature.row(v).norm() - ref.mean_curvature_norm(x)));
      row.second_fundamental_error =
          std::max(row.second_fundamental_error,
                   std::abs(shape.second_fundamental_norm(v) - std::sqrt(ref.second_fundamental_norm_sq(x))));
    }
    const ScalarField ones = ScalarField::Ones(mesh.num_vertices());
    const NormalizedDensity nd = normalize_density(mesh, ones, shape);
    const NeumannSolution sol = solve_neumann(mesh, nd.f, shape, solver);
    const ResidualReport residual = pde_residual(mesh, nd.f, sol.u, shape);
    row.pde_residual = residual.relative_interior_residual;
    row.boundary_flux_error = residual.boundary_flux_error;
    row.deficit = deficit(mesh, ones, 2, std::max(2, mesh.ambient_dim() - 2), shape).deficit;
    row.deficit_error = std::abs(row.deficit - exact_deficit);
    table.rows.push_back(row);
  }

  auto column = [&](auto member) {
    std::vector<double> out;
    for (const auto& row : table.rows) out.push_back(row.*member);
    return out;
  };
  const std::vector<double> h = column(&ConvergenceRow::h);
  table.orders = {
      {"area", fit_order(h, column(&ConvergenceRow::area_error))},
      {"boundary", fit_order(h, column(&ConvergenceRow::boundary_error))},
      {"mean_curvature", fit_order(h, column(&ConvergenceRow::mean_curvature_error))},
      {"second_fundamental", fit_order(h, column(&ConvergenceRow::second_fundamental_error))},
      {"pde_residual", fit_order(h, column(&ConvergenceRow::pde_residual))},
      {"boundary_flux", fit_order(h, column(&ConvergenceRow::boundary_flux_error))},
      {"deficit", fit_order(h, column(&ConvergenceRow::deficit_error))},
  };
  return table;
}

json to_json(const InequalityReport& r) {
  json j = {{"n", r.n},
            {"m", r.m},
            {"m_requested", r.m_requested},
            {"lhs", r.lhs},
            {"rhs", r.rhs},
            {"deficit", r.deficit},
            {"constant", r.constant},
            {"f_power_integral", r.f_power_integral},
            {"curvature_term", r.curvature_term},
            {"boundary_term", r.boundary_term},
            {"tol_disc", r.tol_disc},
            {"pass", r.pass}};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

json to_json(const IsoperimetricReport& r) {
  return {{"area", r.area},
          {"boundary_length", r.boundary_length},
          {"ratio", r.ratio},
          {"ratio_sq", r.ratio_sq},
          {"max_interior_mean_curvature", r.max_interior_mean_curvature}};
}

json to_json(const VerifyReport& r) {
  json components = json::array();
  for (const auto& c : r.components) {
    components.push_back({{"vertices", c.vertices},
                          {"normalization", c.normalization},
                          {"cg_iterations", c.cg_iterations},
                          {"linear_residual", c.linear_residual},
                          {"interior_pde_residual", c.interior_pde_residual},
                          {"relative_interior_residual", c.relative_interior_residual},
                          {"boundary_flux_error", c.boundary_flux_error}});
  }
  return {{"inequality", to_json(r.inequality)},
          {"isoperimetric", to_json(r.isoperimetric)},
          {"components", components},
          {"residual_threshold", r.residual_threshold},
          {"residuals_ok", r.residuals_ok},
          {"pass", r.pass}};
}

json to_json(const CoverageReport& r) {
  json failures = json::array();
  for (const auto& f : r.failures) failures.push_back({{"xi", vec(f.xi)}, {"reason", to_string(f.reason)}});
  return {{"samples", r.samples},
          {"hits", r.hits},
          {"fraction", r.fraction},
          {"max_reconstruction_error", r.max_reconstruction_error},
          {"near_boundary_samples", r.near_boundary_samples},
          {"near_boundary_hits", r.near_boundary_hits},
          {"failures", failures}};
}

json to_json(const JacobianBoundReport& r) {
  return {{"max_ratio", r.max_ratio},       {"argmax_vertex", r.argmax_vertex},
          {"argmax_y", vec(r.argmax_y)},     {"min_det", r.min_det},
          {"samples", r.samples},           {"samples_in_a", r.samples_in_a},
          {"pass", r.pass}};
}

json to_json(const ChainReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"sigma", row.sigma},
                    {"lhs", row.lhs},
                    {"middle", row.middle},
                    {"rhs", row.rhs},
                    {"monotone", row.monotone}});
  }
  return {{"rows", rows},
          {"tol", r.tol},
          {"lhs_slope", r.lhs_slope},
          {"rhs_slope", r.rhs_slope},
          {"lhs_limit", r.lhs_limit},
          {"rhs_limit", r.rhs_limit},
          {"monotone", r.monotone}};
}

json to_json(const EqualityDiagnostics& r) {
  return {{"max_second_fundamental", r.max_second_fundamental},
          {"f_variation", r.f_variation},
          {"hessian_deviation", r.hessian_deviation},
          {"quadratic_fit",
           {{"lambda", r.quadratic_fit.lambda},
            {"p", vec(r.quadratic_fit.p)},
            {"c", r.quadratic_fit.c},
            {"residual", r.quadratic_fit.residual},
            {"ok", r.quadratic_fit.ok}}},
          {"flatness", r.flatness},
          {"containment", r.containment},
          {"deficit", r.deficit},
          {"tolerance", r.tolerance},
          {"near_equality", r.near_equality}};
}

json to_json(const AbpReport& r) {
  json components = json::array();
  for (const auto& c : r.components) {
    components.push_back({{"vertices", c.vertices},
                          {"omega_vertices", c.omega_vertices},
                          {"normalization", c.normalization},
                          {"coverage", to_json(c.coverage)},
                          {"jacobian_bound", to_json(c.jacobian)},
                          {"jacobian_formula",
                           {{"max_relative_error", c.formula.max_relative_error},
                            {"worst_vertex", c.formula.worst_vertex},
                            {"samples", c.formula.samples}}},
                          {"chain", to_json(c.chain)},
                          {"equality", to_json(c.equality)},
                          {"pass", c.pass}});
  }
  json j = {{"padded", r.padded}, {"h", r.h}, {"components", components}, {"pass", r.pass}};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

json to_json(const ConvergenceTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"level", r.level},
                    {"vertices", r.vertices},
                    {"h", r.h},
                    {"area_error", r.area_error},
                    {"boundary_error", r.boundary_error},
                    {"mean_curvature_error", r.mean_curvature_error},
                    {"second_fundamental_error", r.second_fundamental_error},
                    {"pde_residual", r.pde_residual},
                    {"boundary_flux_error", r.boundary_flux_error},
                    {"deficit", r.deficit},
                    {"deficit_error", r.deficit_error}});
  }
  json orders = json::object();
  for (const auto& [name, fit] : t.orders) {
    orders[name] = fit.valid ? json{{"order", fit.order}, {"r_squared", fit.r_squared}} : json(nullptr);
  }
  return {{"geometry", t.geometry}, {"rows", rows}, {"orders", orders}};
}

json to_json(const AnalyticReference& r) {
  return {{"name", r.name},
          {"parameters", r.parameters},
          {"exact_area", r.exact_area},
          {"exact_boundary_length", r.exact_boundary_length},
          {"exact_mean_curvature_integral", r.exact_mean_curvature_integral},
          {"is_minimal", r.is_minimal}};
}

std::string convergence_csv(const ConvergenceTable& t) {
  std::ostringstream out;
  out << std::setprecision(10);
  out << "level,vertices,h,area_error,boundary_error,mean_curvature_error,second_fundamental_error,"
         "pde_residual,boundary_flux_error,deficit,deficit_error\n";
  for (const auto& r : t.rows) {
    out << r.level << ',' << r.vertices << ',' << r.h << ',' << r.area_error << ',' << r.boundary_error << ','
        << r.mean_curvature_error << ',' << r.second_fundamental_error << ',' << r.pde_residual << ','
        << r.boundary_flux_error << ',' << r.deficit << ',' << r.deficit_error << '\n';
  }
  return out.str();
}

std::string chain_csv(const AbpReport& r) {
  std::ostringstream out;
  out << std::setprecision(12);
  out << "component,sigma,lhs,middle,rhs,monotone\n";
  for (std::size_t c = 0; c < r.components.size(); ++c) {
    for (const auto& row : r.components[c].chain.rows) {
      out << c << ',' << row.sigma << ',' << row.lhs << ',' << row.middle << ',' << row.rhs << ','
          << (row.monotone ? 1 : 0) << '\n';
    }
  }
  return out.str();
}

}  // namespace abp
