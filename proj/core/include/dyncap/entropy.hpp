#pragma once

// Free energy F(S) = sum_i S_i log(S_i/S) + E(S), its gradient (the chemical
// potentials), and the entropy-variable transform
//
//   w = mu(S) - mu(S^Gamma) + (beta(S) - beta(S_prev)) / kappa * 1
//
// together with its inverse and derivative data.

#include <Eigen/Dense>

#include "dyncap/constitutive.hpp"

namespace dyncap {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct SpeciesState {
  Vector s;
  double total = 0.0;

  SpeciesState() = default;
  explicit SpeciesState(Vector species);

  int size() const { return static_cast<int>(s.size()); }
  bool in_domain() const;  // all S_i > 0 and total < 1
};

/// Throws DomainError unless the state lies in the admissible set.
void require_in_domain(const SpeciesState& state, const char* who);

struct EntropyVars {
  Vector w;
  Vector ds_dw;         // dS/dw_j, S the total density
  double f_value = 0.0; // f0(S) - f0(S^Gamma) + (beta(S) - beta(S_prev))/kappa
};

/// Output of the inverse transform. f_prime is f'(S) = tau/a + tau/kappa.
struct TransformResult {
  EntropyVars vars;
  SpeciesState state;
  double f_prime = 0.0;
};

enum class DiffusionKind { ScaledProjection, StateWeighted };

struct DiffusionMatrixSpec {
  DiffusionKind kind = DiffusionKind::ScaledProjection;
  double d0 = 1.0;
  double d1 = 1.0;

  bool operator==(const DiffusionMatrixSpec&) const = default;
};

/// Boundary data derived once per model: S^Gamma, its total, fractions and
/// chemical potentials.
struct BoundaryState {
  SpeciesState state;
  Vector fractions;  // S_i^Gamma / S^Gamma
  Vector mu;         // mu(S^Gamma)
  double f0 = 0.0;   // f0(S^Gamma)
  double free_energy = 0.0;
};

BoundaryState boundary_state(const Constitutive& model);

double free_energy(const SpeciesState& state, const Constitutive& model);

/// mu_i = log(S_i/S) + f0(S).
Vector chem_potentials(const SpeciesState& state, const Constitutive& model);

double relative_free_energy(const SpeciesState& state, const Constitutive& model);
double relative_free_energy(const SpeciesState& state, const Constitutive& model,
                            const BoundaryState& boundary);

/// Pi v = v - mean(v) 1.
Vector project_orthogonal(const Vector& v);

/// S_i = total * softmax(mu_star)_i.
SpeciesState species_from_relative(double total, const Vector& mu_star);

EntropyVars w_from_state(const SpeciesState& state, double s_prev_total, const Constitutive& model);

/// Inverts the transform: solves sum_j x_j^Gamma e^(w_j) = e^(f(S)) for the
/// total S by safeguarded Newton inside a geometrically grown bracket, then
/// distributes S over the species. Throws RootFindError if rootfind_tol is not
/// met within the iteration budget.
TransformResult state_from_w(const Vector& w, double s_prev_total, const Constitutive& model);
TransformResult state_from_w(const Vector& w, double s_prev_total, const Constitutive& model,
                             const BoundaryState& boundary);

/// M_ij = S_i dS/dw_j. Symmetric, PSD, rank one.
Matrix mobility_matrix(const TransformResult& t);

/// Full Jacobian dS_i/dw_j of the inverse transform (symmetric positive definite).
Matrix species_jacobian(const TransformResult& t);

Matrix diffusion_matrix(const SpeciesState& state, const DiffusionMatrixSpec& spec);

struct HypocoercivityConstants {
  double d_low;
  double d_high;
};

/// Extremes of v.Dv/|Pi v|^2 over the complement of span{1}. Throws
/// ArgumentError for non-symmetric input.
HypocoercivityConstants hypocoercivity_constants(const Matrix& matrix);

/// |alpha.v|^2 + |v - (beta.v) beta|^2 >= (1/4)(alpha.beta)^2 |v|^2 for unit
/// alpha, beta. Throws ArgumentError if either is not a unit vector.
bool jmz_inequality_check(const Vector& alpha, const Vector& beta, const Vector& v);

}  // namespace dyncap
