#include "dyncap/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseCholesky>

#include "dyncap/errors.hpp"
#include "dyncap/solver.hpp"

namespace dyncap {

EntropyWeights entropy_weights(const Constitutive& model, const DiffusionMatrixSpec& spec, const Mesh& mesh) {
  const auto& p = model.params();
  EntropyWeights w;
  w.c_dbeta = 1.0 / model.tau_max();
  w.c_mu = 0.5 * spec.d0;
  if (p.eps > 0.0) {
    const double n = p.n_species;
    const double lambda_h = discrete_poincare_constant(mesh);
    w.c_eps = std::min(0.5 * spec.d0, p.eps) / (4.0 * n * n * p.eps * (1.0 + 1.0 / lambda_h));
  }
  return w;
}

EntropyCheck check_entropy_step(double l_prev, double l_new, const DissipationBudget& b, double kappa, double tol,
                                const EntropyWeights& w) {
  const double weighted = w.c_dbeta * b.diss_dbeta_sq + w.c_capillary * b.diss_capillary +
                          w.c_grad_dbeta * b.diss_grad_dbeta + w.c_eps * b.diss_eps_w + w.c_mu * b.diss_proj_mu;
  EntropyCheck out;
  out.margin = (l_prev + tol) - (l_new + kappa * weighted);
  out.pass = out.margin >= 0.0;
  return out;
}

double lyapunov_functional(const DiscreteState& state, const Constitutive& model, const Mesh& mesh) {
  return lyapunov_functional(state, model, mesh, boundary_state(model));
}

double lyapunov_functional(const DiscreteState& state, const Constitutive& model, const Mesh& mesh,
                           const BoundaryState& boundary) {
  double sum = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto quad = cell_quadrature(mesh, c);
    for (int q = 0; q < 2; ++q) {
      const auto& p = state.points[2 * c + q];
      const double tg = model.tau(p.total) * p.grad_total;
      sum += quad.weight[q] * (relative_free_energy(SpeciesState(p.s), model, boundary) + 0.5 * tg * tg);
    }
  }
  return sum;
}

double lyapunov_functional(const NodalField& state, const Constitutive& model, const Mesh& mesh) {
  return lyapunov_functional(interpolate_state(state, mesh), model, mesh);
}

DissipationBudget dissipation_budget(const DiscreteState& next, const DiscreteState& prev,
                                     const Constitutive& model, const DiffusionMatrixSpec& /*spec*/,
                                     const Mesh& mesh) {
  const auto& par = model.params();
  const double kappa = par.kappa;
  DissipationBudget b;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto quad = cell_quadrature(mesh, c);
    const Vector grad_w = (next.w.row(c + 1) - next.w.row(c)).transpose() / mesh.width(c);
    const double proj_sq = project_orthogonal(grad_w).squaredNorm();
    for (int q = 0; q < 2; ++q) {
      const auto& s = next.points[2 * c + q];
      const auto& sp = prev.points[2 * c + q];
      const double wq = quad.weight[q];
      const auto co = model.coeffs(s.total);
      const double dbeta = (model.beta(s.total) - model.beta(sp.total)) / kappa;
      const double grad_dbeta = (co.tau * s.grad_total - model.tau(sp.total) * sp.grad_total) / kappa;
      b.diss_dbeta_sq += wq * dbeta * dbeta;
      b.diss_capillary += wq * co.tau * co.pc_prime * s.grad_total * s.grad_total;
      b.diss_grad_dbeta += wq * co.a * grad_dbeta * grad_dbeta;
      b.diss_proj_mu += wq * proj_sq;
    }
  }
  const auto norms = field_norms(next.w, mesh);
  b.diss_eps_w = par.eps * (norms.l2 * norms.l2 + norms.h1_semi * norms.h1_semi);
  return b;
}

DissipationBudget dissipation_budget(const NodalField& next, const NodalField& prev, const Constitutive& model,
                                     const DiffusionMatrixSpec& spec, const Mesh& mesh) {
  auto next_state = interpolate_state(next, mesh);
  const auto prev_state = interpolate_state(prev, mesh);
  for (int k = 0; k < mesh.num_nodes(); ++k) {
    next_state.w.row(k) = w_from_state(next.state(k), prev.state(k).total, model).w.transpose();
  }
  return dissipation_budget(next_state, prev_state, model, spec, mesh);
}

namespace {

// Lumped-mass integral of g over the nodal states.
template <class G>
double nodal_integral(const NodalField& f, const Mesh& mesh, G&& g) {
  double sum = 0.0;
  for (int k = 0; k < mesh.num_nodes(); ++k) sum += mesh.lumped_mass(k) * g(f.values.row(k).sum());
  return sum;
}

// Sum over Gauss points of weight * g(point).
template <class G>
double point_integral(const DiscreteState& s, const Mesh& mesh, G&& g) {
  double sum = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto quad = cell_quadrature(mesh, c);
    for (int q = 0; q < 2; ++q) sum += quad.weight[q] * g(s.points[2 * c + q]);
  }
  return sum;
}

}  // namespace

AprioriReport apriori_report(const Trajectory& traj, const Constitutive& model, const Mesh& mesh) {
  if (traj.states.empty()) throw ArgumentError("apriori_report: empty trajectory");
  const auto& par = model.params();
  const auto assumptions = validate_assumptions(par);
  const double kappa = par.kappa;
  const double p = assumptions.p;
  const double q = assumptions.q;
  const DiffusionMatrixSpec unit_spec{};

  double e_sup = -std::numeric_limits<double>::infinity();
  double grad_beta_sup = 0.0;
  double s_pow_sup = 0.0;
  double u_pow_sup = 0.0;
  for (const auto& st : traj.states) {
    e_sup = std::max(e_sup, point_integral(st, mesh, [&](const PointState& ps) { return model.entropy(ps.total); }));
    grad_beta_sup = std::max(grad_beta_sup, std::sqrt(point_integral(st, mesh, [&](const PointState& ps) {
                                              const double tg = model.tau(ps.total) * ps.grad_total;
                                              return tg * tg;
                                            })));
    s_pow_sup = std::max(s_pow_sup, point_integral(st, mesh, [&](const PointState& ps) {
                           return std::pow(ps.total, 2.0 - par.gamma1);
                         }));
    u_pow_sup = std::max(u_pow_sup, point_integral(st, mesh, [&](const PointState& ps) {
                           return std::pow(1.0 - ps.total, 2.0 - par.lambda);
                         }));
  }

  // Dirichlet stiffness on interior nodes for the dual-norm surrogate.
  const int interior = mesh.num_interior();
  SparseMatrix lap(interior, interior);
  {
    std::vector<Eigen::Triplet<double>> t;
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const double inv_h = 1.0 / mesh.width(c);
      const int a = c - 1;
      const int b = c;
      if (a >= 0) t.emplace_back(a, a, inv_h);
      if (b < interior) t.emplace_back(b, b, inv_h);
      if (a >= 0 && b < interior) {
        t.emplace_back(a, b, -inv_h);
        t.emplace_back(b, a, -inv_h);
      }
    }
    lap.setFromTriplets(t.begin(), t.end());
  }
  Eigen::SimplicialLDLT<SparseMatrix> poisson(lap);

  double dbeta = 0.0, cap = 0.0, grad_dbeta = 0.0, eps_w = 0.0, proj_mu = 0.0;
  double s_alpha = 0.0, u_alpha = 0.0, a_inv_p = 0.0, lq = 0.0, dt_s = 0.0;
  for (std::size_t k = 1; k < traj.states.size(); ++k) {
    const auto& next = traj.states[k];
    const auto& prev = traj.states[k - 1];
    const auto b = dissipation_budget(next, prev, model, unit_spec, mesh);
    dbeta += kappa * b.diss_dbeta_sq;
    cap += kappa * b.diss_capillary;
    grad_dbeta += kappa * b.diss_grad_dbeta;
    eps_w += kappa * b.diss_eps_w;
    proj_mu += kappa * b.diss_proj_mu;
    s_alpha += kappa * std::cbrt(nodal_integral(next.nodal, mesh, [&](double s) {
                 return std::pow(s, 6.0 * assumptions.alpha1);
               }));
    u_alpha += kappa * std::cbrt(nodal_integral(next.nodal, mesh, [&](double s) {
                 return std::pow(1.0 - s, 6.0 * assumptions.alpha2);
               }));
    a_inv_p += kappa * point_integral(next, mesh, [&](const PointState& ps) {
                 return std::pow(model.coeffs(ps.total).a, -p);
               });
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const auto quad = cell_quadrature(mesh, c);
      for (int j = 0; j < 2; ++j) {
        const auto& s = next.points[2 * c + j];
        const auto& sp = prev.points[2 * c + j];
        const double g = (model.tau(s.total) * s.grad_total - model.tau(sp.total) * sp.grad_total) / kappa;
        lq += kappa * quad.weight[j] * std::pow(std::abs(g), q);
      }
    }
    for (int i = 0; i < next.nodal.num_species(); ++i) {
      Vector load(interior);
      for (int node = 1; node <= interior; ++node) {
        load[node - 1] = mesh.lumped_mass(node) * (next.nodal.values(node, i) - prev.nodal.values(node, i)) / kappa;
      }
      const Vector u = poisson.solve(load);
      dt_s += kappa * u.dot(load);
    }
  }

  AprioriReport r;
  auto& v = r.values;
  v["E_sup"] = e_sup;
  v["grad_beta_sup"] = grad_beta_sup;
  v["dbeta_L2L2"] = std::sqrt(dbeta);
  v["capillary_L2L2"] = std::sqrt(cap);
  v["grad_dbeta_L2L2"] = std::sqrt(grad_dbeta);
  v["eps_w_L2H1"] = std::sqrt(eps_w);
  v["grad_proj_mu_L2L2"] = std::sqrt(proj_mu);
  v["S_pow_2_minus_gamma1_sup"] = s_pow_sup;
  v["one_minus_S_pow_2_minus_lambda_sup"] = u_pow_sup;
  v["S_alpha1_L2L6"] = std::sqrt(s_alpha);
  v["one_minus_S_alpha2_L2L6"] = std::sqrt(u_alpha);
  v["a_inv_p"] = a_inv_p;
  v["grad_dbeta_Lq"] = std::pow(lq, 1.0 / q);
  v["dt_S_L2Hm1"] = std::sqrt(dt_s);

  const double t_end = traj.times.back();
  const double reference = mesh.length() * t_end * std::pow(model.coeffs(par.boundary_total()).a, -p);
  r.degeneracy_flag = a_inv_p > 100.0 * reference;
  return r;
}

namespace {

struct Bubble {
  double left;
  double right;
  double value(double x) const {
    if (x <= left || x >= right) return 0.0;
    const double r = 0.5 * (right - left);
    const double g = (x - left) * (right - x) / (r * r);
    return g * g;
  }
  double derivative(double x) const {
    if (x <= left || x >= right) return 0.0;
    const double r = 0.5 * (right - left);
    const double g = (x - left) * (right - x) / (r * r);
    return 2.0 * g * ((right - x) - (x - left)) / (r * r);
  }
};

}  // namespace

double weak_residual(const Trajectory& traj, const Constitutive& model, const DiffusionMatrixSpec& spec,
                     const Mesh& mesh, int num_test_functions) {
  if (num_test_functions < 1) throw ArgumentError("weak_residual: need at least one test function");
  if (traj.states.size() < 2) return 0.0;
  const auto& par = model.params();
  const double kappa = par.kappa;
  const double t_end = traj.times.back();
  const double length = mesh.length();
  std::vector<Bubble> bubbles;
  for (int j = 0; j < num_test_functions; ++j) {
    const double c = mesh.x_left() + (j + 0.5) / num_test_functions * length;
    const double r = std::min({0.25 * length, c - mesh.x_left(), mesh.x_right() - c});
    bubbles.push_back({c - r, c + r});
  }
  auto time_hat = [t_end](double t) { return std::max(0.0, 1.0 - std::abs(t - 0.5 * t_end) / (0.5 * t_end)); };

  const int n = traj.states.front().nodal.num_species();
  Matrix residual = Matrix::Zero(num_test_functions, n);
  for (std::size_t k = 1; k < traj.states.size(); ++k) {
    const double theta = time_hat(traj.times[k]);
    if (theta == 0.0) continue;
    const auto& next = traj.states[k];
    const auto& prev = traj.states[k - 1];
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const auto quad = cell_quadrature(mesh, c);
      const Vector grad_w = (next.w.row(c + 1) - next.w.row(c)).transpose() / mesh.width(c);
      for (int q = 0; q < 2; ++q) {
        const auto& s = next.points[2 * c + q];
        const auto& sp = prev.points[2 * c + q];
        const auto co = model.coeffs(s.total);
        const Vector x = s.s / s.total;
        const double grad_dbeta = (co.tau * s.grad_total - model.tau(sp.total) * sp.grad_total) / kappa;
        const Vector flux = x * (co.a * (co.pc_prime * s.grad_total + grad_dbeta)) +
                            diffusion_matrix(SpeciesState(s.s), spec) * grad_w +
                            par.eps * x.cwiseProduct(grad_w);
        const Vector ds = s.s - sp.s;
        for (int j = 0; j < num_test_functions; ++j) {
          const double psi = bubbles[j].value(quad.x[q]);
          const double dpsi = bubbles[j].derivative(quad.x[q]);
          if (psi == 0.0 && dpsi == 0.0) continue;
          residual.row(j) += (theta * quad.weight[q] * (ds * psi + kappa * flux * dpsi)).transpose();
        }
      }
    }
  }
  return residual.cwiseAbs().maxCoeff();
}

double gibbs_duhem_check(const NodalField& state, const Constitutive& model, const Mesh& mesh) {
  if (state.num_nodes() != mesh.num_nodes()) throw ArgumentError("gibbs_duhem_check: size mismatch");
  std::vector<Vector> mu(static_cast<std::size_t>(mesh.num_nodes()));
  std::vector<double> pressure(static_cast<std::size_t>(mesh.num_nodes()));
  for (int k = 0; k < mesh.num_nodes(); ++k) {
    const auto st = state.state(k);
    mu[k] = chem_potentials(st, model);
    pressure[k] = model.pressure(st.total);
  }
  double sum = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const double h = mesh.width(c);
    const Vector avg = 0.5 * (state.values.row(c) + state.values.row(c + 1)).transpose();
    const double r = (avg.dot(mu[c + 1] - mu[c]) - (pressure[c + 1] - pressure[c])) / h;
    sum += h * r * r;
  }
  return std::sqrt(sum);
}

}  // namespace dyncap
