#include "abplab/pde.hpp"
#include "support.hpp"

#include <Eigen/SparseCholesky>
#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace abp;
using std::numbers::pi;

namespace {

// The load the solver actually uses: dual-mass source, total removed.
Eigen::VectorXd solved_load(const Mesh& m, const ScalarField& f, const ShapeData& s) {
  const Eigen::VectorXd dual = dual_cell_mass(m);
  Eigen::VectorXd b = neumann_load(m, f, s, 2, dual);
  b -= dual * (b.sum() / dual.sum());
  return b;
}

// Pins vertex 0, factors the rest with a sparse LDLT, then moves to lumped mean zero.
Eigen::VectorXd direct_solution(const Eigen::SparseMatrix<double>& K, const Eigen::VectorXd& b,
                                const Eigen::VectorXd& mass) {
  const int n = static_cast<int>(K.rows());
  std::vector<Eigen::Triplet<double>> trips;
  for (int k = 0; k < K.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(K, k); it; ++it) {
      if (it.row() > 0 && it.col() > 0) trips.emplace_back(it.row() - 1, it.col() - 1, it.value());
    }
  }
  Eigen::SparseMatrix<double> Kr(n - 1, n - 1);
  Kr.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Kr);
  REQUIRE(ldlt.info() == Eigen::Success);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  u.tail(n - 1) = ldlt.solve(b.tail(n - 1));
  u.array() -= u.dot(mass) / mass.sum();
  return u;
}

}  // namespace

TEST_CASE("normalization constants") {
  const Mesh& d = testing::surface("flat_disk", 3).mesh;
  const double h = relative_mesh_size(d);
  const ShapeData sd = second_fundamental_form(d);
  const NormalizedDensity one = normalize_density(d, ScalarField::Ones(d.num_vertices()), sd);
  CHECK(one.lhs == doctest::Approx(2 * pi).epsilon(h * h));
  CHECK(one.rhs == doctest::Approx(2 * pi).epsilon(h * h));
  CHECK(one.c == doctest::Approx(1.0).epsilon(h * h));

  const NormalizedDensity four = normalize_density(d, ScalarField::Constant(d.num_vertices(), 4.0), sd);
  CHECK(four.lhs == doctest::Approx(8 * pi).epsilon(h * h));
  CHECK(four.rhs == doctest::Approx(32 * pi).epsilon(h * h));
  CHECK(four.c == doctest::Approx(0.25).epsilon(h * h));
  CHECK((four.f - one.f).norm() < 1e-12 * std::sqrt(d.num_vertices()));

  const Mesh& s = testing::surface("sphere", 3).mesh;
  const NormalizedDensity sphere = normalize_density(s, ScalarField::Ones(s.num_vertices()), second_fundamental_form(s));
  CHECK(sphere.lhs == doctest::Approx(8 * pi).epsilon(0.01));
  CHECK(sphere.rhs == doctest::Approx(8 * pi).epsilon(0.01));
}

TEST_CASE("weighted stiffness") {
  const Mesh& m = testing::surface("catenoid", 1).mesh;
  const ScalarField f = (1.5 + m.vertices().col(2).array()).matrix();
  const Eigen::SparseMatrix<double> K = assemble_weighted_stiffness(m, f);
  const Eigen::VectorXd rows = K * Eigen::VectorXd::Ones(m.num_vertices());
  CHECK(rows.cwiseAbs().maxCoeff() < 1e-12);
  CHECK((Eigen::MatrixXd(K) - Eigen::MatrixXd(K).transpose()).norm() < 1e-12);
  const Eigen::SparseMatrix<double> K2 = assemble_weighted_stiffness(m, 2.0 * f);
  CHECK((Eigen::MatrixXd(K2) - 2.0 * Eigen::MatrixXd(K)).norm() < 1e-12);
  const Eigen::SparseMatrix<double> K1 = assemble_weighted_stiffness(m, ScalarField::Ones(m.num_vertices()));
  CHECK((Eigen::MatrixXd(K1) - Eigen::MatrixXd(cotan_stiffness(m, Eigen::VectorXd::Ones(m.num_faces())))).norm() <
        1e-12);
  // Quadratic form of a linear function on a flat mesh is its Dirichlet energy.
  const Mesh& d = testing::surface("flat_disk", 1).mesh;
  const Eigen::VectorXd x1 = d.vertices().col(0);
  const double energy = x1.dot(assemble_weighted_stiffness(d, ScalarField::Ones(d.num_vertices())) * x1);
  CHECK(energy == doctest::Approx(d.total_area()).epsilon(1e-12));
}

TEST_CASE("flat disk Neumann solution") {
  const Mesh& m = testing::surface("flat_disk", 3).mesh;
  const double h = relative_mesh_size(m);
  const ShapeData s = second_fundamental_form(m);
  const NormalizedDensity nd = normalize_density(m, ScalarField::Ones(m.num_vertices()), s);
  const NeumannSolution sol = solve_neumann(m, nd.f, s);
  const ScalarField exact = (0.5 * m.vertices().rowwise().squaredNorm().array() - 0.25).matrix();
  CHECK((sol.u - exact).cwiseAbs().maxCoeff() < h * h);
  CHECK(sol.cg_iterations <= 10 * m.num_vertices());
  CHECK(sol.boundary_flux_error < h);
  CHECK(std::abs(sol.u.dot(m.lumped_mass())) < 1e-12);

  const ResidualReport injected = pde_residual(m, nd.f, exact, s);
  CHECK(injected.relative_interior_residual < h);
  CHECK(injected.boundary_flux_error < h);
}

TEST_CASE("conjugate gradients agree with a sparse direct solve") {
  for (const char* name : {"flat_disk", "catenoid", "enneper", "holomorphic"}) {
    CAPTURE(name);
    const Mesh m = testing::surface(name, 2).mesh;
    const ShapeData s = second_fundamental_form(m);
    const ScalarField f0 = (1.0 + 0.2 * m.vertices().col(0).array()).matrix();
    const NormalizedDensity nd = normalize_density(m, f0, s);
    const NeumannSolution sol = solve_neumann(m, nd.f, s);
    const Eigen::SparseMatrix<double> K = assemble_weighted_stiffness(m, nd.f);
    const Eigen::VectorXd b = solved_load(m, nd.f, s);
    const Eigen::VectorXd u = direct_solution(K, b, m.lumped_mass());
    CHECK((sol.u - u).cwiseAbs().maxCoeff() < 1e-7 * u.cwiseAbs().maxCoeff());
    // energy identity
    CHECK(sol.u.dot(K * sol.u) == doctest::Approx(sol.u.dot(b)).epsilon(1e-10));
  }
}

TEST_CASE("sphere with constant density has a trivial potential") {
  const Mesh& m = testing::surface("sphere", 2).mesh;
  const ShapeData s = second_fundamental_form(m);
  const NormalizedDensity nd = normalize_density(m, ScalarField::Ones(m.num_vertices()), s);
  const NeumannSolution sol = solve_neumann(m, nd.f, s);
  CHECK(sol.u.cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("gauge and scale invariance of the solution") {
  const Mesh& m = testing::surface("catenoid", 2).mesh;
  const ShapeData s = second_fundamental_form(m);
  const ScalarField f = (1.0 + 0.1 * m.vertices().col(2).array().square()).matrix();
  const NormalizedDensity nd = normalize_density(m, f, s);
  const NeumannSolution a = solve_neumann(m, nd.f, s);
  const NeumannSolution b = solve_neumann(m, nd.f, s, {}, 2, ScalarField::Constant(m.num_vertices(), 7.0));
  CHECK((a.u - b.u).cwiseAbs().maxCoeff() < 1e-8);
  const NormalizedDensity scaled = normalize_density(m, 3.7 * f, s);
  CHECK((scaled.f - nd.f).cwiseAbs().maxCoeff() < 1e-10 * nd.f.maxCoeff());
  const NeumannSolution c = solve_neumann(m, scaled.f, s);
  CHECK((a.u - c.u).cwiseAbs().maxCoeff() < 1e-10 * (1.0 + a.u.cwiseAbs().maxCoeff()));
}

TEST_CASE("perturbing the solution raises the residual") {
  const Mesh& m = testing::surface("flat_disk", 2).mesh;
  const ShapeData s = second_fundamental_form(m);
  const NormalizedDensity nd = normalize_density(m, ScalarField::Ones(m.num_vertices()), s);
  const NeumannSolution sol = solve_neumann(m, nd.f, s);
  const double base = pde_residual(m, nd.f, sol.u, s).interior_pde_residual;
  ScalarField bumped = sol.u;
  const Eigen::VectorXd x = m.vertices().col(0), y = m.vertices().col(1);
  bumped += 0.05 * (x.array().square() - 0.5 * y.array().square()).matrix();
  CHECK(pde_residual(m, nd.f, bumped, s).interior_pde_residual > base + 0.01);
}

TEST_CASE("solver errors") {
  const Mesh& m = testing::surface("flat_disk", 1).mesh;
  const ShapeData s = second_fundamental_form(m);
  auto kind_of = [](auto&& call) {
    try {
      call();
    } catch (const PdeError& e) {
      return static_cast<int>(e.kind());
    }
    return -1;
  };
  const ScalarField two = ScalarField::Constant(m.num_vertices(), 2.0);
  CHECK(kind_of([&] { solve_neumann(m, two, s); }) == static_cast<int>(PdeError::Kind::CompatibilityViolation));
  ScalarField bad = ScalarField::Ones(m.num_vertices());
  bad[3] = -1.0;
  CHECK(kind_of([&] { normalize_density(m, bad, s); }) == static_cast<int>(PdeError::Kind::NonPositiveDensity));
  const NormalizedDensity nd = normalize_density(m, ScalarField::Ones(m.num_vertices()), s);
  SolverConfig tight;
  tight.max_iters = 1;
  CHECK(kind_of([&] { solve_neumann(m, nd.f, s, tight); }) == static_cast<int>(PdeError::Kind::NoConvergence));

  const Mesh two_disks = disjoint_union(m, rigid_transform(m, Eigen::Matrix4d::Identity(), Eigen::Vector4d(3, 0, 0, 0)));
  const ShapeData s2 = second_fundamental_form(two_disks);
  const NormalizedDensity n2 = normalize_density(two_disks, ScalarField::Ones(two_disks.num_vertices()), s2);
  CHECK(kind_of([&] { solve_neumann(two_disks, n2.f, s2); }) == static_cast<int>(PdeError::Kind::DisconnectedMesh));
}
