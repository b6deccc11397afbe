#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "dyncap/config.hpp"
#include "dyncap/diagnostics.hpp"
#include "dyncap/errors.hpp"
#include "dyncap/solver.hpp"

using namespace dyncap;

namespace {

const Constitutive& p0() {
  static const Constitutive model{ModelParams{}};
  return model;
}

SparseMatrix random_spd(int size, std::mt19937_64& rng) {
  // Banded SPD: B^T B + I with B having a few random off-diagonals.
  std::normal_distribution<double> g;
  Matrix b = Matrix::Zero(size, size);
  for (int i = 0; i < size; ++i) {
    for (int j = std::max(0, i - 3); j <= std::min(size - 1, i + 3); ++j) b(i, j) = g(rng);
  }
  const Matrix a = b.transpose() * b + Matrix::Identity(size, size);
  return a.sparseView();
}

}  // namespace

TEST(SolveLinear, ZeroAndIdentity) {
  LinearSystem sys;
  sys.matrix = Matrix::Identity(6, 6).sparseView();
  sys.rhs = Vector::Zero(6);
  EXPECT_EQ(solve_linear(sys, 1e-12).cwiseAbs().maxCoeff(), 0.0);
  sys.rhs << 1, -2, 3, -4, 5, -6;
  EXPECT_LE((solve_linear(sys, 1e-12) - sys.rhs).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(SolveLinear, MatchesDenseOracle) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  LinearSystem sys;
  sys.matrix = random_spd(45, rng);  // 3 species on 15 interior nodes
  sys.rhs = Vector(45);
  for (int i = 0; i < 45; ++i) sys.rhs[i] = g(rng);
  const Vector x = solve_linear(sys, 1e-12);
  const Matrix dense(sys.matrix);
  const Vector ref = dense.llt().solve(sys.rhs);
  EXPECT_LE((sys.matrix * x - sys.rhs).norm(), 1e-12 * sys.rhs.norm());
  EXPECT_LE((x - ref).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SolveLinear, IterativePathForLargeSystems) {
  const int size = kDirectLimit + 100;
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < size; ++i) {
    t.emplace_back(i, i, 4.0);
    if (i + 1 < size) {
      t.emplace_back(i, i + 1, -1.0);
      t.emplace_back(i + 1, i, -1.0);
    }
  }
  LinearSystem sys;
  sys.matrix.resize(size, size);
  sys.matrix.setFromTriplets(t.begin(), t.end());
  sys.rhs = Vector::Ones(size);
  const Vector x = solve_linear(sys, 1e-10);
  EXPECT_LE((sys.matrix * x - sys.rhs).norm(), 1e-10 * sys.rhs.norm());
}

TEST(SolveLinear, IndefiniteRejected) {
  LinearSystem sys;
  Matrix a = Matrix::Identity(3, 3);
  a(1, 1) = -1.0;
  sys.matrix = a.sparseView();
  sys.rhs = Vector::Ones(3);
  EXPECT_THROW(solve_linear(sys, 1e-12), LinearSolveError);
}

TEST(TimeStep, EquilibriumIsFixed) {
  const auto mesh = build_mesh(16, 0.0, 1.0);
  const auto eq = interpolate_state(constant_field(mesh, boundary_state(p0()).state.s), mesh);
  const auto r = solve_time_step(eq, mesh, p0(), DiffusionMatrixSpec{}, SolverConfig{});
  EXPECT_EQ(r.stats.iterations, 1);
  EXPECT_LE((r.state.nodal.values - eq.nodal.values).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(TimeStep, SmoothPerturbationConvergesAndDissipates) {
  RunConfig cfg;
  const auto mesh = build_mesh(cfg.mesh);
  const auto prev = interpolate_state(initial_field(cfg, mesh), mesh);
  const auto r = solve_time_step(prev, mesh, p0(), cfg.diffusion, cfg.solver);
  EXPECT_LE(r.stats.residual, 1e-9);
  EXPECT_LE(r.stats.iterations, 100);
  EXPECT_LE(lyapunov_functional(r.state, p0(), mesh), lyapunov_functional(prev, p0(), mesh) + 1e-8);
}

TEST(TimeStep, NearBoundaryStateStaysAdmissible) {
  const auto mesh = build_mesh(32, 0.0, 1.0);
  NodalField f = constant_field(mesh, boundary_state(p0()).state.s);
  f.values(16, 2) = 1e-4;
  f.values(17, 0) = 0.6;
  const auto prev = interpolate_state(f, mesh);
  try {
    const auto r = solve_time_step(prev, mesh, p0(), DiffusionMatrixSpec{}, SolverConfig{});
    for (int k = 0; k < r.state.nodal.num_nodes(); ++k) EXPECT_TRUE(r.state.nodal.state(k).in_domain());
  } catch (const FixedPointError& e) {
    EXPECT_GE(e.last_residual(), 0.0);
  }
}

TEST(Simulation, EquilibriumTrajectoryIsConstant) {
  const auto mesh = build_mesh(16, 0.0, 1.0);
  const auto b = boundary_state(p0());
  SolverConfig cfg;
  cfg.t_end = 10e-3;
  const auto traj = run_simulation(constant_field(mesh, b.state.s), mesh, p0(), DiffusionMatrixSpec{}, cfg);
  ASSERT_EQ(traj.states.size(), 11u);
  ASSERT_EQ(traj.diagnostics.size(), 10u);
  for (const auto& r : traj.diagnostics) {
    EXPECT_NEAR(r.lyapunov, 0.0, 1e-14);
    EXPECT_EQ(r.fp_iters, 1);
  }
  for (std::size_t k = 1; k < traj.times.size(); ++k) EXPECT_NEAR(traj.times[k] - traj.times[k - 1], 1e-3, 1e-15);
}

TEST(Simulation, PreconditionErrors) {
  const auto mesh = build_mesh(16, 0.0, 1.0);
  const auto b = boundary_state(p0());
  SolverConfig cfg;
  cfg.t_end = 2e-3;
  NodalField bad = constant_field(mesh, b.state.s);
  bad.values.row(5).setConstant(0.4);
  EXPECT_THROW(run_simulation(bad, mesh, p0(), DiffusionMatrixSpec{}, cfg), PreconditionError);
  NodalField wrong_boundary = constant_field(mesh, b.state.s);
  wrong_boundary.values(0, 0) = 0.2;
  EXPECT_THROW(run_simulation(wrong_boundary, mesh, p0(), DiffusionMatrixSpec{}, cfg), PreconditionError);
  ModelParams rejected;
  rejected.gamma = 7.0;
  EXPECT_THROW(run_simulation(constant_field(mesh, b.state.s), mesh, Constitutive(rejected), DiffusionMatrixSpec{}, cfg),
               PreconditionError);
  SolverConfig broken = cfg;
  broken.fp_tol = -1.0;
  EXPECT_THROW(run_simulation(constant_field(mesh, b.state.s), mesh, p0(), DiffusionMatrixSpec{}, broken),
               ValidationError);
}

TEST(Simulation, RecordEveryAndStrictMode) {
  RunConfig cfg;
  cfg.mesh.num_cells = 32;
  cfg.solver.t_end = 10e-3;
  cfg.solver.record_every = 3;
  cfg.solver.strict_entropy = true;
  const auto mesh = build_mesh(cfg.mesh);
  const auto traj = run_simulation(initial_field(cfg, mesh), mesh, p0(), cfg.diffusion, cfg.solver);
  ASSERT_EQ(traj.diagnostics.size(), 3u);
  EXPECT_EQ(traj.diagnostics[0].step, 3);
  EXPECT_EQ(traj.diagnostics[2].step, 9);
  EXPECT_EQ(traj.states.size(), 11u);
  for (double m : traj.entropy_margins) EXPECT_GE(m, 0.0);
}

TEST(Simulation, BitIdenticalReruns) {
  RunConfig cfg;
  cfg.mesh.num_cells = 32;
  cfg.solver.t_end = 5e-3;
  const auto mesh = build_mesh(cfg.mesh);
  const auto a = run_simulation(initial_field(cfg, mesh), mesh, p0(), cfg.diffusion, cfg.solver);
  const auto b = run_simulation(initial_field(cfg, mesh), mesh, p0(), cfg.diffusion, cfg.solver);
  for (std::size_t k = 0; k < a.states.size(); ++k) {
    EXPECT_EQ(a.states[k].nodal.values, b.states[k].nodal.values);
    EXPECT_EQ(a.states[k].w, b.states[k].w);
  }
}

TEST(Study, RepeatedKappaGivesZeroDifference) {
  RunConfig cfg;
  cfg.mesh.num_cells = 16;
  cfg.solver.t_end = 5e-3;
  const auto mesh = build_mesh(cfg.mesh);
  const auto r = refinement_study(initial_field(cfg, mesh), mesh, cfg.model, cfg.diffusion, cfg.solver, {1e-3, 1e-3},
                                  {1e-3}, 1);
  ASSERT_EQ(r.kappa_sweep.differences.size(), 1u);
  EXPECT_EQ(r.kappa_sweep.differences[0], 0.0);
  EXPECT_TRUE(r.kappa_sweep.orders.empty());
}

TEST(Study, ThreadCountDoesNotChangeResults) {
  RunConfig cfg;
  cfg.mesh.num_cells = 16;
  cfg.solver.t_end = 4e-3;
  const auto mesh = build_mesh(cfg.mesh);
  const auto init = initial_field(cfg, mesh);
  const std::vector<double> kappas{1e-3, 5e-4, 2.5e-4};
  const std::vector<double> epss{1e-2, 1e-3};
  const auto one = refinement_study(init, mesh, cfg.model, cfg.diffusion, cfg.solver, kappas, epss, 1);
  const auto many = refinement_study(init, mesh, cfg.model, cfg.diffusion, cfg.solver, kappas, epss, 4);
  ASSERT_EQ(one.kappa_sweep.differences.size(), 2u);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_NEAR(one.kappa_sweep.differences[k], many.kappa_sweep.differences[k], 1e-12);
  }
  EXPECT_NEAR(one.eps_sweep.differences[0], many.eps_sweep.differences[0], 1e-12);
  ASSERT_EQ(one.kappa_sweep.runs.size(), many.kappa_sweep.runs.size());
  for (std::size_t k = 0; k < one.kappa_sweep.runs.size(); ++k) {
    for (const auto& [name, v] : one.kappa_sweep.runs[k].apriori.values) {
      EXPECT_NEAR(v, many.kappa_sweep.runs[k].apriori.values.at(name), 1e-12 * std::max(1.0, std::abs(v))) << name;
    }
  }
}

TEST(Study, ListValidation) {
  RunConfig cfg;
  cfg.mesh.num_cells = 8;
  const auto mesh = build_mesh(cfg.mesh);
  const auto init = initial_field(cfg, mesh);
  EXPECT_THROW(refinement_study(init, mesh, cfg.model, cfg.diffusion, cfg.solver, {}, {1e-3}), ArgumentError);
  EXPECT_THROW(refinement_study(init, mesh, cfg.model, cfg.diffusion, cfg.solver, {1e-3, 2e-3}, {1e-3}), ArgumentError);
  EXPECT_THROW(refinement_study(init, mesh, cfg.model, cfg.diffusion, cfg.solver, {1e-3}, {1e-4, 1e-3}), ArgumentError);
}
