#pragma once

// Lyapunov functional, the dissipation terms of the discrete entropy
// inequality, a-priori bound trackers and consistency residuals. Every
// quadrature here uses the scheme's own Gauss points so that the checked
// inequality is the one the scheme satisfies exactly.

#include <map>
#include <string>
#include <vector>

#include "dyncap/discretization.hpp"

namespace dyncap {

struct DissipationBudget {
  double diss_dbeta_sq = 0.0;    // int (D_kappa beta)^2
  double diss_capillary = 0.0;   // int tau p_c' |grad S|^2
  double diss_grad_dbeta = 0.0;  // int a |grad D_kappa beta|^2
  double diss_eps_w = 0.0;       // eps sum_i ||w_i||_{H1}^2
  double diss_proj_mu = 0.0;     // ||Pi grad mu||^2
};

struct DiagnosticsRecord {
  int step = 0;
  double time = 0.0;
  double lyapunov = 0.0;
  DissipationBudget budget;
  double min_species = 0.0;
  double max_total = 0.0;
  int fp_iters = 0;
  double entropy_margin = 0.0;
};

/// Weights of the checked inequality
///   L_new + kappa (c_dbeta d1 + c_capillary d2 + c_grad_dbeta d3 + c_eps d4 + c_mu d5) <= L_prev + tol.
struct EntropyWeights {
  double c_dbeta = 0.0;
  double c_capillary = 2.0 / 3.0;
  double c_grad_dbeta = 0.25;
  double c_eps = 0.0;
  double c_mu = 0.0;
};

/// c_dbeta = 1/sup tau; c_mu = D0/2; c_eps = min(D0/2, eps) / (4 n^2 eps (1 + 1/lambda_h))
/// with lambda_h the discrete Poincare constant. For eps = 0 the eps term is
/// identically zero and c_eps is reported as 0.
EntropyWeights entropy_weights(const Constitutive& model, const DiffusionMatrixSpec& spec, const Mesh& mesh);

struct EntropyCheck {
  bool pass = false;
  double margin = 0.0;  // (l_prev + tol) - (l_new + kappa * weighted budget)
};

EntropyCheck check_entropy_step(double l_prev, double l_new, const DissipationBudget& budget, double kappa,
                                double tol, const EntropyWeights& weights);

/// sum_q w_q [F~(S_q) + 1/2 (tau(S_q) grad S_q)^2] over the Gauss points.
double lyapunov_functional(const DiscreteState& state, const Constitutive& model, const Mesh& mesh);
double lyapunov_functional(const DiscreteState& state, const Constitutive& model, const Mesh& mesh,
                           const BoundaryState& boundary);
/// Nodal field version: point data by linear interpolation.
double lyapunov_functional(const NodalField& state, const Constitutive& model, const Mesh& mesh);

DissipationBudget dissipation_budget(const DiscreteState& next, const DiscreteState& prev,
                                     const Constitutive& model, const DiffusionMatrixSpec& spec,
                                     const Mesh& mesh);
/// Nodal version: both levels interpolated, w recovered node by node.
DissipationBudget dissipation_budget(const NodalField& next, const NodalField& prev, const Constitutive& model,
                                     const DiffusionMatrixSpec& spec, const Mesh& mesh);

struct Trajectory;

struct AprioriReport {
  std::map<std::string, double> values;
  bool degeneracy_flag = false;
};

/// Named bound quantities over a completed trajectory. The degeneracy flag
/// is raised when the space-time integral of a^-p exceeds 100 times its value
/// at the boundary state.
AprioriReport apriori_report(const Trajectory& trajectory, const Constitutive& model, const Mesh& mesh);

/// Maximum absolute residual of the weak form against bubble-in-space,
/// hat-in-time test functions, evaluated on the stored discrete fields.
double weak_residual(const Trajectory& trajectory, const Constitutive& model, const DiffusionMatrixSpec& spec,
                     const Mesh& mesh, int num_test_functions);

/// L2 norm of the cellwise residual sum_i S_i grad mu_i - grad P(S), with
/// P the pressure potential and cell averages of S_i.
double gibbs_duhem_check(const NodalField& state, const Constitutive& model, const Mesh& mesh);

}  // namespace dyncap
