#include "dyncap/selftest.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "dyncap/config.hpp"
#include "dyncap/diagnostics.hpp"

namespace dyncap {

bool SelfTestReport::all_passed() const {
  for (const auto& i : items) {
    if (!i.passed) return false;
  }
  return true;
}

namespace {

SpeciesState random_state(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector s(n);
  for (int i = 0; i < n; ++i) s[i] = 0.05 + u(rng);
  s *= (lo + (hi - lo) * u(rng)) / s.sum();
  return SpeciesState(s);
}

}  // namespace

SelfTestReport run_selftest(std::uint64_t seed) {
  const ModelParams params;
  const Constitutive model(params);
  const auto boundary = boundary_state(model);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SelfTestReport report;

  auto add = [&report](std::string name, bool ok, std::string detail) {
    report.items.push_back({std::move(name), ok, std::move(detail)});
  };

  {
    const auto r = validate_assumptions(params);
    std::ostringstream d;
    d << "alpha1=" << r.alpha1 << " alpha2=" << r.alpha2 << " p=" << r.p << " q=" << r.q;
    add("assumptions", r.accepted && std::abs(r.alpha1 + 1.9) < 1e-12 && std::abs(r.alpha2 + 2.0) < 1e-12 &&
                           r.p > 1.0 && r.q > 1.0 && r.q < 2.0,
        d.str());
  }
  {
    std::size_t violations = 0;
    for (int k = 1; k <= 10000; ++k) {
      const auto c = model.coeffs(k / 10001.0);
      if (!(c.pc_prime <= c.tau_over_a)) ++violations;
    }
    add("coefficient_bound", violations == 0, std::to_string(violations) + " violations");
  }
  {
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const auto st = random_state(rng, params.n_species, 0.05, 0.9);
      const double prev = 0.05 + 0.85 * unit(rng);
      const auto w = w_from_state(st, prev, model);
      const auto back = state_from_w(w.w, prev, model, boundary);
      worst = std::max(worst, (back.state.s - st.s).cwiseAbs().maxCoeff());
    }
    std::ostringstream d;
    d << "max round-trip error " << worst;
    add("transform_round_trip", worst <= 1e-10, d.str());
  }
  {
    double worst_sym = 0.0;
    double worst_eig = 0.0;
    for (int k = 0; k < 200; ++k) {
      const auto st = random_state(rng, params.n_species, 0.05, 0.9);
      const auto t = state_from_w(w_from_state(st, 0.3, model).w, 0.3, model, boundary);
      const Matrix m = mobility_matrix(t);
      worst_sym = std::max(worst_sym, (m - m.transpose()).cwiseAbs().maxCoeff());
      Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
      worst_eig = std::min(worst_eig, es.eigenvalues().minCoeff());
    }
    std::ostringstream d;
    d << "asymmetry " << worst_sym << ", min eigenvalue " << worst_eig;
    add("mobility_structure", worst_sym <= 1e-12 && worst_eig >= -1e-12, d.str());
  }
  {
    std::normal_distribution<double> g;
    int violations = 0;
    for (int k = 0; k < 10000; ++k) {
      Vector a(3), b(3), v(3);
      for (int i = 0; i < 3; ++i) {
        a[i] = g(rng);
        b[i] = g(rng);
        v[i] = g(rng);
      }
      if (!jmz_inequality_check(a.normalized(), b.normalized(), v)) ++violations;
    }
    add("jmz_inequality", violations == 0, std::to_string(violations) + " violations");
  }
  {
    const auto mesh = build_mesh(16, 0.0, 1.0);
    RunConfig cfg;
    const auto initial = interpolate_state(initial_field(cfg, mesh), mesh);
    Matrix w = Matrix::Zero(mesh.num_nodes(), params.n_species);
    for (int k = 1; k + 1 < mesh.num_nodes(); ++k) {
      for (int i = 0; i < params.n_species; ++i) w(k, i) = unit(rng) - 0.5;
    }
    const auto sys = assemble_system(mesh, w, initial, model, DiffusionMatrixSpec{}, 1.0);
    const Matrix dense(sys.matrix);
    Eigen::SelfAdjointEigenSolver<Matrix> es(dense, Eigen::EigenvaluesOnly);
    const double asym = (dense - dense.transpose()).cwiseAbs().maxCoeff() / dense.cwiseAbs().maxCoeff();
    std::ostringstream d;
    d << "min eigenvalue " << es.eigenvalues().minCoeff() << ", relative asymmetry " << asym;
    add("coercivity", es.eigenvalues().minCoeff() > 0.0 && asym <= 1e-12, d.str());
  }
  {
    const auto mesh = build_mesh(16, 0.0, 1.0);
    SolverConfig cfg;
    cfg.t_end = 10 * params.kappa;
    const auto traj = run_simulation(constant_field(mesh, boundary.state.s), mesh, model, DiffusionMatrixSpec{}, cfg);
    double drift = 0.0;
    for (const auto& st : traj.states) {
      drift = std::max(drift, (st.nodal.values.rowwise() - boundary.state.s.transpose()).cwiseAbs().maxCoeff());
    }
    add("equilibrium_stationary", drift <= 1e-9, "max drift " + format_double(drift));
  }
  {
    RunConfig cfg;
    cfg.mesh.num_cells = 32;
    cfg.solver.t_end = 0.01;
    cfg.solver.strict_entropy = false;
    const auto mesh = build_mesh(cfg.mesh);
    const auto traj = run_simulation(initial_field(cfg, mesh), mesh, model, cfg.diffusion, cfg.solver);
    double min_margin = traj.entropy_margins.front();
    bool positive = true;
    for (double m : traj.entropy_margins) min_margin = std::min(min_margin, m);
    for (const auto& st : traj.states) {
      positive = positive && st.nodal.values.minCoeff() > 0.0 && st.nodal.values.rowwise().sum().maxCoeff() < 1.0;
    }
    add("entropy_inequality", min_margin >= 0.0, "min margin " + format_double(min_margin));
    add("positivity", positive, positive ? "all states admissible" : "state left the admissible set");
  }
  {
    double last = std::numeric_limits<double>::infinity();
    bool decreasing = true;
    std::ostringstream d;
    for (int cells : {32, 64, 128}) {
      const auto mesh = build_mesh(cells, 0.0, 1.0);
      NodalField f = constant_field(mesh, boundary.state.s);
      for (int k = 1; k + 1 < mesh.num_nodes(); ++k) {
        const double x = mesh.nodes[k];
        f.values(k, 0) += 0.2 * std::sin(std::numbers::pi * x);
        f.values(k, 1) += 0.1 * std::sin(2.0 * std::numbers::pi * x) * x;
      }
      const double r = gibbs_duhem_check(f, model, mesh);
      d << cells << ":" << r << ' ';
      decreasing = decreasing && r < last;
      last = r;
    }
    add("gibbs_duhem", decreasing, d.str());
  }
  return report;
}

}  // namespace dyncap
