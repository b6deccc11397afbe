#pragma once

// Piecewise-linear finite elements on a 1D interval. The scheme keeps its
// state at the two Gauss points of every cell: the species densities, the
// total density and its gradient. Each time step recovers these from the
// interpolated entropy variables and the previous point state, so the
// discrete chain rule holds exactly at every quadrature point.

#include <vector>

#include <Eigen/Sparse>

#include "dyncap/entropy.hpp"

namespace dyncap {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct Mesh {
  std::vector<double> nodes;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_cells() const { return num_nodes() - 1; }
  double width(int cell) const { return nodes[cell + 1] - nodes[cell]; }
  double x_left() const { return nodes.front(); }
  double x_right() const { return nodes.back(); }
  double length() const { return x_right() - x_left(); }
  // Lumped mass of a node: half the widths of the adjacent cells.
  double lumped_mass(int node) const;
  int num_interior() const { return num_nodes() - 2; }
};

Mesh build_mesh(int num_cells, double x_left, double x_right);

/// Per-node species values, one row per node and one column per species.
struct NodalField {
  Matrix values;

  int num_nodes() const { return static_cast<int>(values.rows()); }
  int num_species() const { return static_cast<int>(values.cols()); }
  SpeciesState state(int node) const { return SpeciesState(values.row(node).transpose()); }
  bool operator==(const NodalField& other) const { return values == other.values; }
};

/// NodalField with every row equal to the boundary state.
NodalField constant_field(const Mesh& mesh, const Vector& state);

struct PointState {
  Vector s;             // species densities
  double total = 0.0;   // sum of s
  double grad_total = 0.0;
};

/// Full discrete state of one time level.
struct DiscreteState {
  NodalField nodal;
  std::vector<PointState> points;  // index 2*cell + q
  Matrix w;                        // nodal entropy variables that produced this state (zero initially)
};

/// Gauss points and weights of a cell (two-point rule).
struct CellQuadrature {
  double x[2];
  double weight[2];
};
CellQuadrature cell_quadrature(const Mesh& mesh, int cell);

/// Builds point data from nodal values by linear interpolation; used for the
/// initial level and for stand-alone diagnostics of nodal fields. Throws
/// DomainError if an interpolated state leaves the admissible set.
DiscreteState interpolate_state(const NodalField& field, const Mesh& mesh);

/// Per-point evaluation of the inverse transform at a trial w.
struct PointEval {
  TransformResult transform;
  Vector grad_w;
  double grad_total = 0.0;  // chain-rule gradient of the total density
  double tau = 0.0;
  double tau_prev_grad_prev = 0.0;  // tau(S_prev) grad S_prev
};

std::vector<PointEval> evaluate_points(const Mesh& mesh, const Matrix& w, const DiscreteState& prev,
                                       const Constitutive& model, const BoundaryState& boundary);

/// New time level from nodal entropy variables: point states from the
/// quadrature recursion, nodal states from the nodal recursion. Boundary rows
/// are set to the boundary state.
DiscreteState recover_state(const Mesh& mesh, const Matrix& w, const DiscreteState& prev,
                            const Constitutive& model, const BoundaryState& boundary);

struct LinearSystem {
  SparseMatrix matrix;
  Vector rhs;
  double sigma = 1.0;
};

/// Unknown numbering over interior nodes: dof = (node - 1) * n + species.
inline int dof_index(int node, int species, int n) { return (node - 1) * n + species; }
Vector gather_interior(const Matrix& w);
Matrix scatter_interior(const Vector& dofs, int num_nodes, int n);

/// Linearized system at w_star. The operator combines the species Jacobian
/// of the inverse transform (mass type, scaled by 1/kappa) with the frozen
/// stiffness S_i dS/dw_j G + D_ij + eps x_i delta_ij, G = (a/S)(p_c' + tau/kappa).
/// The load holds the time difference, the Jacobian correction and the
/// history flux, all scaled by sigma. Throws AssemblyError on non-finite
/// coefficients; state recovery errors propagate.
LinearSystem assemble_system(const Mesh& mesh, const Matrix& w_star, const DiscreteState& prev,
                             const Constitutive& model, const DiffusionMatrixSpec& spec, double sigma);
LinearSystem assemble_system(const Mesh& mesh, const Matrix& w_star, const DiscreteState& prev,
                             const Constitutive& model, const BoundaryState& boundary,
                             const DiffusionMatrixSpec& spec, double sigma);

struct FieldNorms {
  double l2 = 0.0;
  double h1_semi = 0.0;
};

/// Mass-lumped L2 norm and H1 seminorm of nodal values (one column per
/// component). Throws ArgumentError on a size mismatch.
FieldNorms field_norms(const Matrix& values, const Mesh& mesh);
FieldNorms field_norms(const Vector& values, const Mesh& mesh);

/// Smallest eigenvalue of the lumped Dirichlet Laplacian on a uniform mesh,
/// (4/h^2) sin^2(pi h / (2L)).
double discrete_poincare_constant(const Mesh& mesh);

}  // namespace dyncap
