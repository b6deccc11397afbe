#include "dyncap/solver.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "dyncap/errors.hpp"

namespace dyncap {

void validate_solver_config(const SolverConfig& cfg) {
  std::vector<std::string> problems;
  if (!(cfg.fp_tol > 0.0)) problems.emplace_back("fp_tol must be positive");
  if (cfg.fp_max_iters < 1) problems.emplace_back("fp_max_iters must be at least 1");
  if (!(cfg.damping > 0.0 && cfg.damping <= 1.0)) problems.emplace_back("damping must lie in (0,1]");
  if (cfg.homotopy_steps < 1) problems.emplace_back("homotopy_steps must be at least 1");
  if (!(cfg.linear_tol > 0.0)) problems.emplace_back("linear_tol must be positive");
  if (!(cfg.t_end > 0.0)) problems.emplace_back("t_end must be positive");
  if (cfg.record_every < 1) problems.emplace_back("record_every must be at least 1");
  if (!problems.empty()) {
    std::ostringstream msg;
    msg << "invalid solver configuration:";
    for (const auto& p : problems) msg << ' ' << p << ';';
    throw ValidationError(msg.str());
  }
}

Vector solve_linear(const LinearSystem& system, double linear_tol) {
  const auto& a = system.matrix;
  const auto& b = system.rhs;
  if (a.rows() != a.cols() || a.rows() != b.size()) throw LinearSolveError("solve_linear: size mismatch");
  const double bnorm = b.norm();
  if (bnorm == 0.0) return Vector::Zero(b.size());
  Vector x;
  if (a.rows() <= kDirectLimit) {
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(a);
    if (ldlt.info() != Eigen::Success) throw LinearSolveError("solve_linear: factorization failed");
    if ((ldlt.vectorD().array() <= 0.0).any()) {
      throw LinearSolveError("solve_linear: operator is not positive definite");
    }
    x = ldlt.solve(b);
    // A few sweeps of iterative refinement absorb the rounding of the
    // factorization on the poorly scaled (1/kappa) operator.
    for (int sweep = 0; sweep < 3 && (a * x - b).norm() > 0.1 * linear_tol * bnorm; ++sweep) {
      x += ldlt.solve(b - a * x);
    }
  } else {
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg(a);
    cg.setTolerance(0.5 * linear_tol);
    cg.setMaxIterations(static_cast<Eigen::Index>(10 * a.rows()));
    x = cg.solve(b);
    if (cg.info() != Eigen::Success) throw LinearSolveError("solve_linear: conjugate gradients did not converge");
  }
  const double rel = (a * x - b).norm() / bnorm;
  if (!x.allFinite() || !(rel <= linear_tol)) {
    std::ostringstream msg;
    msg << "solve_linear: relative residual " << rel << " exceeds " << linear_tol;
    throw LinearSolveError(msg.str());
  }
  return x;
}

namespace {

struct PicardOutcome {
  bool converged = false;
  int iterations = 0;
  double increment = std::numeric_limits<double>::infinity();
};

// Damped Picard at fixed sigma; w is updated in place.
PicardOutcome picard(Matrix& w, double sigma, const DiscreteState& prev, const Mesh& mesh,
                     const Constitutive& model, const BoundaryState& boundary, const DiffusionMatrixSpec& spec,
                     const SolverConfig& cfg) {
  PicardOutcome out;
  double damping = cfg.damping;
  double last = std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(w.cols());
  for (int it = 1; it <= cfg.fp_max_iters; ++it) {
    out.iterations = it;
    Matrix w_new;
    try {
      const auto sys = assemble_system(mesh, w, prev, model, boundary, spec, sigma);
      w_new = scatter_interior(solve_linear(sys, cfg.linear_tol), mesh.num_nodes(), n);
    } catch (const std::runtime_error&) {
      return out;
    } catch (const std::domain_error&) {
      return out;
    }
    const double inc = field_norms(Matrix(w_new - w), mesh).l2;
    if (inc > last) damping = std::max(0.5 * damping, 0.125);
    w += damping * (w_new - w);
    last = inc;
    out.increment = inc;
    if (inc <= cfg.fp_tol) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

}  // namespace

StepResult solve_time_step(const DiscreteState& prev, const Mesh& mesh, const Constitutive& model,
                           const DiffusionMatrixSpec& spec, const SolverConfig& cfg) {
  return solve_time_step(prev, mesh, model, boundary_state(model), spec, cfg);
}

StepResult solve_time_step(const DiscreteState& prev, const Mesh& mesh, const Constitutive& model,
                           const BoundaryState& boundary, const DiffusionMatrixSpec& spec,
                           const SolverConfig& cfg) {
  const int n = prev.nodal.num_species();
  StepResult result;
  Matrix w = Matrix::Zero(mesh.num_nodes(), n);
  auto direct = picard(w, 1.0, prev, mesh, model, boundary, spec, cfg);
  result.stats.iterations = direct.iterations;
  result.stats.residual = direct.increment;
  if (!direct.converged) {
    result.stats.used_homotopy = true;
    w.setZero();
    for (int k = 1; k <= cfg.homotopy_steps; ++k) {
      const double sigma = static_cast<double>(k) / cfg.homotopy_steps;
      const auto stage = picard(w, sigma, prev, mesh, model, boundary, spec, cfg);
      result.stats.iterations += stage.iterations;
      result.stats.residual = stage.increment;
      if (!stage.converged) {
        std::ostringstream msg;
        msg << "solve_time_step: fixed-point iteration failed at sigma = " << sigma
            << " with last increment " << stage.increment;
        throw FixedPointError(msg.str(), stage.increment);
      }
    }
  }
  result.state = recover_state(mesh, w, prev, model, boundary);
  return result;
}

namespace {

void check_initial(const NodalField& initial, const Mesh& mesh, const Constitutive& model,
                   const BoundaryState& boundary) {
  const auto& p = model.params();
  if (initial.num_nodes() != mesh.num_nodes() || initial.num_species() != p.n_species) {
    throw PreconditionError("run_simulation: initial field does not match mesh and species count");
  }
  for (int k = 1; k + 1 < mesh.num_nodes(); ++k) {
    const auto st = initial.state(k);
    if (!st.in_domain()) {
      std::ostringstream msg;
      msg << "run_simulation: initial state at node " << k << " (total " << st.total
          << ") is outside the admissible set";
      throw PreconditionError(msg.str());
    }
  }
  for (int k : {0, mesh.num_nodes() - 1}) {
    if ((initial.values.row(k).transpose() - boundary.state.s).cwiseAbs().maxCoeff() > 1e-12) {
      std::ostringstream msg;
      msg << "run_simulation: boundary node " << k << " does not carry the boundary state";
      throw PreconditionError(msg.str());
    }
  }
  const auto report = validate_assumptions(p);
  if (!report.accepted) {
    std::ostringstream msg;
    msg << "run_simulation: parameter assumptions violated:";
    for (const auto& c : report.violated_clauses) msg << " [" << c << "]";
    throw PreconditionError(msg.str());
  }
  if (!(p.kappa > 0.0) || !(p.eps >= 0.0)) throw PreconditionError("run_simulation: kappa must be positive and eps non-negative");
}

}  // namespace

Trajectory run_simulation(const NodalField& initial, const Mesh& mesh, const Constitutive& model,
                          const DiffusionMatrixSpec& spec, const SolverConfig& cfg) {
  validate_solver_config(cfg);
  const auto boundary = boundary_state(model);
  check_initial(initial, mesh, model, boundary);
  const double kappa = model.params().kappa;
  const auto steps = static_cast<int>(std::llround(cfg.t_end / kappa));
  if (steps < 1) throw PreconditionError("run_simulation: t_end shorter than one time step");

  const auto weights = entropy_weights(model, spec, mesh);
  const double tol = 10.0 * cfg.fp_tol;

  Trajectory traj;
  traj.kappa = kappa;
  traj.record_every = cfg.record_every;
  traj.times.push_back(0.0);
  traj.states.push_back(interpolate_state(initial, mesh));
  double l_prev = lyapunov_functional(traj.states.back(), model, mesh, boundary);

  for (int k = 1; k <= steps; ++k) {
    auto step = solve_time_step(traj.states.back(), mesh, model, boundary, spec, cfg);
    const auto budget = dissipation_budget(step.state, traj.states.back(), model, spec, mesh);
    const double l_new = lyapunov_functional(step.state, model, mesh, boundary);
    const auto check = check_entropy_step(l_prev, l_new, budget, kappa, tol, weights);
    if (!check.pass && cfg.strict_entropy) {
      std::ostringstream msg;
      msg << "entropy inequality violated at step " << k << " (margin " << check.margin << ")";
      throw EntropyViolation(msg.str(), k, check.margin);
    }
    traj.fp_iters.push_back(step.stats.iterations);
    traj.entropy_margins.push_back(check.margin);
    traj.times.push_back(k * kappa);
    traj.states.push_back(std::move(step.state));
    if (k % cfg.record_every == 0) {
      DiagnosticsRecord rec;
      rec.step = k;
      rec.time = k * kappa;
      rec.lyapunov = l_new;
      rec.budget = budget;
      rec.min_species = traj.states.back().nodal.values.minCoeff();
      rec.max_total = traj.states.back().nodal.values.rowwise().sum().maxCoeff();
      rec.fp_iters = step.stats.iterations;
      rec.entropy_margin = check.margin;
      traj.diagnostics.push_back(rec);
    }
    l_prev = l_new;
  }
  return traj;
}

double trajectory_distance(const Trajectory& coarse, const Trajectory& fine, const Mesh& mesh) {
  if (coarse.states.empty() || fine.states.empty()) throw ArgumentError("trajectory_distance: empty trajectory");
  auto totals = [](const DiscreteState& s) -> Vector { return s.nodal.values.rowwise().sum(); };
  double sum = 0.0;
  std::size_t j = 0;
  for (std::size_t k = 1; k < coarse.times.size(); ++k) {
    const double t = coarse.times[k];
    while (j + 1 < fine.times.size() && fine.times[j + 1] < t - 1e-12 * std::max(1.0, t)) ++j;
    Vector other;
    if (j + 1 >= fine.times.size()) {
      other = totals(fine.states.back());
    } else {
      const double t0 = fine.times[j];
      const double t1 = fine.times[j + 1];
      const double theta = std::clamp((t - t0) / (t1 - t0), 0.0, 1.0);
      other = (1.0 - theta) * totals(fine.states[j]) + theta * totals(fine.states[j + 1]);
    }
    const Vector diff = totals(coarse.states[k]) - other;
    double sq = 0.0;
    for (int node = 0; node < mesh.num_nodes(); ++node) sq += mesh.lumped_mass(node) * diff[node] * diff[node];
    sum += (coarse.times[k] - coarse.times[k - 1]) * sq;
  }
  return std::sqrt(sum);
}

namespace {

struct RunOutput {
  Trajectory trajectory;
  SweepRun summary;
};

RunOutput single_run(const NodalField& initial, const Mesh& mesh, ModelParams params, double kappa, double eps,
                     const DiffusionMatrixSpec& spec, const SolverConfig& cfg) {
  params.kappa = kappa;
  params.eps = eps;
  const Constitutive model(params);
  RunOutput out;
  out.trajectory = run_simulation(initial, mesh, model, spec, cfg);
  out.summary.kappa = kappa;
  out.summary.eps = eps;
  out.summary.apriori = apriori_report(out.trajectory, model, mesh);
  out.summary.min_entropy_margin =
      *std::min_element(out.trajectory.entropy_margins.begin(), out.trajectory.entropy_margins.end());
  return out;
}

void require_non_increasing(const std::vector<double>& v, const char* name) {
  if (v.empty()) throw ArgumentError(std::string("refinement_study: empty ") + name);
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (v[k] > v[k - 1]) throw ArgumentError(std::string("refinement_study: ") + name + " must be decreasing");
  }
}

SweepReport summarize(const std::vector<const RunOutput*>& runs, const std::vector<double>& parameter,
                      const Mesh& mesh) {
  SweepReport rep;
  for (const auto* r : runs) rep.runs.push_back(r->summary);
  for (std::size_t k = 0; k + 1 < runs.size(); ++k) {
    rep.differences.push_back(trajectory_distance(runs[k]->trajectory, runs[k + 1]->trajectory, mesh));
  }
  for (std::size_t k = 0; k + 1 < rep.differences.size(); ++k) {
    const double ratio = parameter[k] / parameter[k + 1];
    const double e0 = rep.differences[k];
    const double e1 = rep.differences[k + 1];
    rep.orders.push_back(ratio > 1.0 && e0 > 0.0 && e1 > 0.0 ? std::log(e0 / e1) / std::log(ratio)
                                                             : std::numeric_limits<double>::quiet_NaN());
  }
  if (!runs.empty()) {
    for (const auto& [name, first] : runs.front()->summary.apriori.values) {
      for (const auto* r : runs) {
        if (std::abs(r->summary.apriori.values.at(name)) > 2.0 * std::abs(first)) {
          rep.growing_quantities.push_back(name);
          break;
        }
      }
    }
  }
  return rep;
}

}  // namespace

StudyReport refinement_study(const NodalField& initial, const Mesh& mesh, const ModelParams& params,
                             const DiffusionMatrixSpec& spec, const SolverConfig& cfg,
                             const std::vector<double>& kappa_list, const std::vector<double>& eps_list,
                             int threads) {
  require_non_increasing(kappa_list, "kappa_list");
  require_non_increasing(eps_list, "eps_list");
  threads = std::max(1, threads);

  std::vector<std::pair<double, double>> keys;
  auto add_key = [&keys](double k, double e) {
    if (std::find(keys.begin(), keys.end(), std::make_pair(k, e)) == keys.end()) keys.emplace_back(k, e);
  };
  for (double k : kappa_list) add_key(k, eps_list.front());
  for (double e : eps_list) add_key(kappa_list.front(), e);

  std::vector<RunOutput> results(keys.size());
  for (std::size_t start = 0; start < keys.size(); start += static_cast<std::size_t>(threads)) {
    const std::size_t stop = std::min(keys.size(), start + static_cast<std::size_t>(threads));
    std::vector<std::future<RunOutput>> pending;
    for (std::size_t k = start; k < stop; ++k) {
      pending.push_back(std::async(threads > 1 ? std::launch::async : std::launch::deferred, single_run,
                                   std::cref(initial), std::cref(mesh), params, keys[k].first, keys[k].second,
                                   std::cref(spec), std::cref(cfg)));
    }
    for (std::size_t k = start; k < stop; ++k) results[k] = pending[k - start].get();
  }
  auto lookup = [&](double k, double e) {
    const auto it = std::find(keys.begin(), keys.end(), std::make_pair(k, e));
    return &results[static_cast<std::size_t>(it - keys.begin())];
  };

  StudyReport report;
  std::vector<const RunOutput*> kappa_runs;
  for (double k : kappa_list) kappa_runs.push_back(lookup(k, eps_list.front()));
  report.kappa_sweep = summarize(kappa_runs, kappa_list, mesh);
  std::vector<const RunOutput*> eps_runs;
  for (double e : eps_list) eps_runs.push_back(lookup(kappa_list.front(), e));
  report.eps_sweep = summarize(eps_runs, eps_list, mesh);
  return report;
}

}  // namespace dyncap
