#include "dyncap/discretization.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "dyncap/errors.hpp"

namespace dyncap {

double Mesh::lumped_mass(int node) const {
  double m = 0.0;
  if (node > 0) m += 0.5 * width(node - 1);
  if (node < num_cells()) m += 0.5 * width(node);
  return m;
}

Mesh build_mesh(int num_cells, double x_left, double x_right) {
  if (num_cells < 2) throw ArgumentError("build_mesh: at least two cells are required");
  if (!(x_left < x_right)) throw ArgumentError("build_mesh: x_left must be smaller than x_right");
  Mesh mesh;
  mesh.nodes.resize(static_cast<std::size_t>(num_cells) + 1);
  const double h = (x_right - x_left) / num_cells;
  for (int k = 0; k <= num_cells; ++k) mesh.nodes[k] = x_left + k * h;
  mesh.nodes.back() = x_right;
  return mesh;
}

NodalField constant_field(const Mesh& mesh, const Vector& state) {
  NodalField f;
  f.values = state.transpose().replicate(mesh.num_nodes(), 1);
  return f;
}

CellQuadrature cell_quadrature(const Mesh& mesh, int cell) {
  const double h = mesh.width(cell);
  const double mid = 0.5 * (mesh.nodes[cell] + mesh.nodes[cell + 1]);
  const double off = 0.5 * h / std::numbers::sqrt3;
  return {{mid - off, mid + off}, {0.5 * h, 0.5 * h}};
}

namespace {

// Value of the left hat function at x inside the cell.
double left_shape(const Mesh& mesh, int cell, double x) {
  return (mesh.nodes[cell + 1] - x) / mesh.width(cell);
}

}  // namespace

DiscreteState interpolate_state(const NodalField& field, const Mesh& mesh) {
  if (field.num_nodes() != mesh.num_nodes()) throw ArgumentError("interpolate_state: size mismatch");
  DiscreteState out;
  out.nodal = field;
  out.w = Matrix::Zero(field.num_nodes(), field.num_species());
  out.points.reserve(2 * static_cast<std::size_t>(mesh.num_cells()));
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto quad = cell_quadrature(mesh, c);
    const Vector left = field.values.row(c).transpose();
    const Vector right = field.values.row(c + 1).transpose();
    const double slope = (right.sum() - left.sum()) / mesh.width(c);
    for (double xq : quad.x) {
      const double phi = left_shape(mesh, c, xq);
      PointState p;
      p.s = right + phi * (left - right);  // exact when both ends agree
      p.total = p.s.sum();
      p.grad_total = slope;
      require_in_domain(SpeciesState(p.s), "interpolate_state");
      out.points.push_back(std::move(p));
    }
  }
  return out;
}

std::vector<PointEval> evaluate_points(const Mesh& mesh, const Matrix& w, const DiscreteState& prev,
                                       const Constitutive& model, const BoundaryState& boundary) {
  const double kappa = model.params().kappa;
  std::vector<PointEval> out;
  out.reserve(prev.points.size());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto quad = cell_quadrature(mesh, c);
    const Vector wl = w.row(c).transpose();
    const Vector wr = w.row(c + 1).transpose();
    const Vector grad_w = (wr - wl) / mesh.width(c);
    for (int q = 0; q < 2; ++q) {
      const auto& pp = prev.points[2 * c + q];
      const double phi = left_shape(mesh, c, quad.x[q]);
      PointEval e;
      e.transform = state_from_w(phi * wl + (1.0 - phi) * wr, pp.total, model, boundary);
      e.grad_w = grad_w;
      e.tau = model.tau(e.transform.state.total);
      e.tau_prev_grad_prev = model.tau(pp.total) * pp.grad_total;
      e.grad_total = (e.transform.vars.ds_dw.dot(grad_w) + e.tau_prev_grad_prev / (kappa * e.transform.f_prime));
      out.push_back(std::move(e));
    }
  }
  return out;
}

DiscreteState recover_state(const Mesh& mesh, const Matrix& w, const DiscreteState& prev,
                            const Constitutive& model, const BoundaryState& boundary) {
  const auto evals = evaluate_points(mesh, w, prev, model, boundary);
  DiscreteState out;
  out.w = w;
  out.points.reserve(evals.size());
  for (const auto& e : evals) {
    out.points.push_back({e.transform.state.s, e.transform.state.total, e.grad_total});
  }
  const int n = static_cast<int>(w.cols());
  out.nodal.values.resize(mesh.num_nodes(), n);
  out.nodal.values.row(0) = boundary.state.s.transpose();
  out.nodal.values.row(mesh.num_nodes() - 1) = boundary.state.s.transpose();
  for (int k = 1; k + 1 < mesh.num_nodes(); ++k) {
    const double prev_total = prev.nodal.values.row(k).sum();
    out.nodal.values.row(k) =
        state_from_w(w.row(k).transpose(), prev_total, model, boundary).state.s.transpose();
  }
  return out;
}

Vector gather_interior(const Matrix& w) {
  const auto interior = w.rows() - 2;
  const auto n = w.cols();
  Vector out(interior * n);
  for (Eigen::Index k = 0; k < interior; ++k) out.segment(k * n, n) = w.row(k + 1).transpose();
  return out;
}

Matrix scatter_interior(const Vector& dofs, int num_nodes, int n) {
  Matrix w = Matrix::Zero(num_nodes, n);
  for (int k = 1; k + 1 < num_nodes; ++k) w.row(k) = dofs.segment(dof_index(k, 0, n), n).transpose();
  return w;
}

LinearSystem assemble_system(const Mesh& mesh, const Matrix& w_star, const DiscreteState& prev,
                             const Constitutive& model, const DiffusionMatrixSpec& spec, double sigma) {
  return assemble_system(mesh, w_star, prev, model, boundary_state(model), spec, sigma);
}

LinearSystem assemble_system(const Mesh& mesh, const Matrix& w_star, const DiscreteState& prev,
                             const Constitutive& model, const BoundaryState& boundary,
                             const DiffusionMatrixSpec& spec, double sigma) {
  if (!(sigma >= 0.0 && sigma <= 1.0)) throw ArgumentError("assemble_system: sigma outside [0,1]");
  const int n = static_cast<int>(w_star.cols());
  const int nodes = mesh.num_nodes();
  if (w_star.rows() != nodes || prev.nodal.num_nodes() != nodes ||
      static_cast<int>(prev.points.size()) != 2 * mesh.num_cells()) {
    throw ArgumentError("assemble_system: field sizes do not match the mesh");
  }
  const double kappa = model.params().kappa;
  const double eps = model.params().eps;
  const auto evals = evaluate_points(mesh, w_star, prev, model, boundary);

  const int ndof = (nodes - 2) * n;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.num_cells()) * 4 * n * n);
  Vector rhs = Vector::Zero(ndof);

  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto quad = cell_quadrature(mesh, c);
    const double h = mesh.width(c);
    const int cell_nodes[2] = {c, c + 1};
    const double grads[2] = {-1.0 / h, 1.0 / h};
    for (int q = 0; q < 2; ++q) {
      const auto& e = evals[2 * c + q];
      const auto& pp = prev.points[2 * c + q];
      const auto& st = e.transform.state;
      const double s = st.total;
      const auto co = model.coeffs(s);
      const Vector x = st.s / s;
      const double fp = e.transform.f_prime;
      const double g = co.a / s * (co.pc_prime + e.tau / kappa);

      Matrix stiff = (s * g / fp) * (x * x.transpose());
      stiff += diffusion_matrix(st, spec);
      stiff.diagonal() += eps * x;
      const Matrix jac = species_jacobian(e.transform);
      if (!stiff.allFinite() || !jac.allFinite()) {
        std::ostringstream msg;
        msg << "assemble_system: non-finite frozen coefficient in cell " << c;
        throw AssemblyError(msg.str());
      }
      const Vector w_q = e.transform.vars.w;
      const Vector time_load = (-(st.s - pp.s) + jac * w_q) / kappa;
      const Vector hist_load = x * (co.a * e.tau_prev_grad_prev * (co.tau_over_a - co.pc_prime) / (kappa * fp));
      if (!time_load.allFinite() || !hist_load.allFinite()) {
        throw AssemblyError("assemble_system: non-finite load");
      }

      const double wq = quad.weight[q];
      const double phi[2] = {left_shape(mesh, c, quad.x[q]), 1.0 - left_shape(mesh, c, quad.x[q])};
      for (int a = 0; a < 2; ++a) {
        const int na = cell_nodes[a];
        if (na == 0 || na == nodes - 1) continue;
        rhs.segment(dof_index(na, 0, n), n) +=
            sigma * wq * (time_load * phi[a] + hist_load * grads[a]);
        for (int b = 0; b < 2; ++b) {
          const int nb = cell_nodes[b];
          if (nb == 0 || nb == nodes - 1) continue;
          const Matrix block = wq * (jac * (phi[a] * phi[b] / kappa) + stiff * (grads[a] * grads[b]));
          for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
              triplets.emplace_back(dof_index(na, i, n), dof_index(nb, j, n), block(i, j));
            }
          }
        }
      }
    }
  }

  LinearSystem sys;
  sys.matrix.resize(ndof, ndof);
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  sys.matrix.makeCompressed();
  sys.rhs = std::move(rhs);
  sys.sigma = sigma;
  return sys;
}

FieldNorms field_norms(const Matrix& values, const Mesh& mesh) {
  if (values.rows() != mesh.num_nodes()) throw ArgumentError("field_norms: size mismatch");
  FieldNorms out;
  for (int k = 0; k < mesh.num_nodes(); ++k) out.l2 += mesh.lumped_mass(k) * values.row(k).squaredNorm();
  for (int c = 0; c < mesh.num_cells(); ++c) {
    out.h1_semi += (values.row(c + 1) - values.row(c)).squaredNorm() / mesh.width(c);
  }
  out.l2 = std::sqrt(out.l2);
  out.h1_semi = std::sqrt(out.h1_semi);
  return out;
}

FieldNorms field_norms(const Vector& values, const Mesh& mesh) {
  return field_norms(Matrix(values), mesh);
}

double discrete_poincare_constant(const Mesh& mesh) {
  const double h = mesh.length() / mesh.num_cells();
  const double s = std::sin(std::numbers::pi * h / (2.0 * mesh.length()));
  return 4.0 / (h * h) * s * s;
}

}  // namespace dyncap
