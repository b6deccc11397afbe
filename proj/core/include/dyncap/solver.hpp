#pragma once

#include <string>
#include <vector>

#include "dyncap/diagnostics.hpp"

namespace dyncap {

struct SolverConfig {
  double fp_tol = 1e-9;
  int fp_max_iters = 100;
  double damping = 1.0;
  int homotopy_steps = 4;
  double linear_tol = 1e-10;
  double t_end = 0.05;
  int record_every = 1;
  bool strict_entropy = false;

  bool operator==(const SolverConfig&) const = default;
};

/// Throws ValidationError unless every tolerance is positive and the
/// iteration counts are at least one.
void validate_solver_config(const SolverConfig& cfg);

struct Trajectory {
  std::vector<double> times;             // every level, starting at 0
  std::vector<DiscreteState> states;     // every level
  std::vector<int> fp_iters;             // per step (size = levels - 1)
  std::vector<double> entropy_margins;   // per step
  std::vector<DiagnosticsRecord> diagnostics;  // recorded steps only
  double kappa = 0.0;
  int record_every = 1;
};

/// Solves the SPD system: sparse LDL^T up to kDirectLimit unknowns,
/// conjugate gradients beyond. Throws LinearSolveError if the factorization
/// fails or the relative residual exceeds linear_tol.
Vector solve_linear(const LinearSystem& system, double linear_tol);
inline constexpr int kDirectLimit = 20000;

struct StepStats {
  int iterations = 0;
  double residual = 0.0;
  bool used_homotopy = false;
};

struct StepResult {
  DiscreteState state;
  StepStats stats;
};

/// One implicit Euler step by damped Picard iteration on the linearized
/// system, starting from w = 0, with a sigma-homotopy ladder as fallback.
/// Throws FixedPointError with the last increment if neither converges.
StepResult solve_time_step(const DiscreteState& prev, const Mesh& mesh, const Constitutive& model,
                           const DiffusionMatrixSpec& spec, const SolverConfig& cfg);
StepResult solve_time_step(const DiscreteState& prev, const Mesh& mesh, const Constitutive& model,
                           const BoundaryState& boundary, const DiffusionMatrixSpec& spec,
                           const SolverConfig& cfg);

/// Checks the initial field (admissible interior, boundary rows equal to the
/// boundary state) and the parameters, then advances round(t_end / kappa)
/// steps. Every step is checked against the entropy inequality with
/// tol = 10 fp_tol; in strict mode a violation throws EntropyViolation.
Trajectory run_simulation(const NodalField& initial, const Mesh& mesh, const Constitutive& model,
                          const DiffusionMatrixSpec& spec, const SolverConfig& cfg);

struct SweepRun {
  double kappa = 0.0;
  double eps = 0.0;
  AprioriReport apriori;
  double min_entropy_margin = 0.0;
};

struct SweepReport {
  std::vector<SweepRun> runs;
  std::vector<double> differences;  // L2(space-time) distance of totals between successive runs
  std::vector<double> orders;       // log(e_k / e_{k+1}) / log(r_k), r_k the parameter ratio
  std::vector<std::string> growing_quantities;  // names whose value exceeds twice the first run's
};

struct StudyReport {
  SweepReport kappa_sweep;  // eps = eps_list[0]
  SweepReport eps_sweep;    // kappa = kappa_list[0]
};

/// Runs the problem for every kappa (at eps_list[0]) and every eps (at
/// kappa_list[0]) using up to `threads` concurrent runs. Both lists must be
/// non-increasing and non-empty.
StudyReport refinement_study(const NodalField& initial, const Mesh& mesh, const ModelParams& params,
                             const DiffusionMatrixSpec& spec, const SolverConfig& cfg,
                             const std::vector<double>& kappa_list, const std::vector<double>& eps_list,
                             int threads = 1);

/// Space-time L2 distance between the nodal totals of two trajectories,
/// sampled at the levels of the coarser one; the finer one is linearly
/// interpolated in time.
double trajectory_distance(const Trajectory& coarse, const Trajectory& fine, const Mesh& mesh);

}  // namespace dyncap
