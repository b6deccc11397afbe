#pragma once

// Closed-form coefficient functions of the dynamic-capillary-pressure model:
//
//   a(S)    = (1-S)^lambda S^gamma / ((1-S)^lambda + S^gamma)      mobility
//   p_c'(S) = S^-beta1 + (1-S)^-beta2                               capillary slope
//   tau(S)  = S^gamma/(S^gamma+(1-S)^lambda) [1 + (1-S)^lambda S^-gamma1]
//   tau/a   = (1-S)^-lambda + S^-gamma1
//
// and the derived scalar functions beta (antiderivative of tau), f0
// (antiderivative of tau/a) and the free-energy part E (second
// antiderivative of tau/a). All antiderivatives are based at S = 1/2.

#include <cstddef>
#include <string>
#include <vector>

namespace dyncap {

struct ModelParams {
  int n_species = 3;
  double lambda = 7.0;
  double gamma = 6.2;
  double gamma1 = 6.0;
  double beta1 = 6.0;
  double beta2 = 6.0;
  std::vector<double> s_gamma{0.15, 0.15, 0.15};  // boundary densities
  double kappa = 1e-3;                             // time step
  double eps = 1e-3;                               // regularization
  double quadrature_tol = 1e-12;
  double rootfind_tol = 1e-13;

  double boundary_total() const;

  bool operator==(const ModelParams&) const = default;
};

struct CoefficientValues {
  double a;
  double pc_prime;
  double tau;
  double tau_over_a;
};

// Clause identifiers used in AssumptionReport::violated_clauses.
namespace clause {
inline constexpr const char* kBeta1Lower = "5 < beta1";
inline constexpr const char* kBeta1Gamma1 = "beta1 <= gamma1";
inline constexpr const char* kGamma1Gamma = "gamma1 < gamma";
inline constexpr const char* kGammaUpper = "gamma < beta1/2 + (5/6)(gamma1 - 2)";
inline constexpr const char* kBeta2Lower = "5 < beta2";
inline constexpr const char* kBeta2Lambda = "beta2 <= lambda";
inline constexpr const char* kLambdaUpper = "lambda < 3 beta2 - 10";
inline constexpr const char* kCoefficientBound = "p_c' <= tau/a on sample grid";
}  // namespace clause

struct AssumptionReport {
  bool accepted = false;
  std::vector<std::string> violated_clauses;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double p_gamma = 0.0;
  double p_lambda = 0.0;
  double p = 0.0;
  double q = 0.0;
  double gamma_bound = 0.0;   // beta1/2 + (5/6)(gamma1 - 2)
  double lambda_bound = 0.0;  // 3 beta2 - 10
  std::size_t coefficient_bound_violations = 0;
};

/// Evaluates a, p_c', tau and tau/a at one saturation. tau/a is computed both
/// by division and in closed form; the closed form is returned after a
/// consistency check. Throws DomainError unless 0 < s < 1.
CoefficientValues eval_coeffs(double s, const ModelParams& params);

/// beta(S) = int_{1/2}^{S} tau, by adaptive Gauss-Kronrod quadrature.
/// Throws QuadratureError if quadrature_tol cannot be met.
double beta_value(double s, const ModelParams& params);

/// Inverse of beta_value by monotone bracketing. Throws RangeError when b is
/// outside (beta(0+), beta(1-)).
double beta_inverse(double b, const ModelParams& params);

/// f0(S) = int_{1/2}^{S} tau/a, closed form.
double f0_integral(double s, const ModelParams& params);

/// E(S) = int_{1/2}^{S} f0, closed form. E(1/2) = E'(1/2) = 0, E'' = tau/a.
double entropy_E(double s, const ModelParams& params);

/// P(S) = int_{1/2}^{S} sigma tau(sigma)/a(sigma) dsigma, closed form. Its
/// gradient is the thermodynamic-pressure gradient sum_i S_i grad mu_i.
double pressure_potential(double s, const ModelParams& params);

/// Checks every parameter-region clause, computes the integrability
/// exponents and samples p_c' <= tau/a on a 10^4-point grid.
AssumptionReport validate_assumptions(const ModelParams& params);

/// Cached evaluator for one parameter set. beta is tabulated once on a graded
/// grid (adaptive Gauss-Kronrod between nodes) and evaluated by fixed-order
/// Gauss-Legendre from the nearest node. Immutable after construction, so
/// concurrent reads are safe.
class Constitutive {
 public:
  explicit Constitutive(ModelParams params);

  const ModelParams& params() const { return params_; }

  CoefficientValues coeffs(double s) const { return eval_coeffs(s, params_); }
  double tau(double s) const;
  double beta(double s) const;
  double beta_inverse(double b) const;
  double f0(double s) const { return f0_integral(s, params_); }
  double tau_over_a(double s) const;
  double entropy(double s) const { return entropy_E(s, params_); }
  double pressure(double s) const { return pressure_potential(s, params_); }

  double beta_lower() const { return beta_lower_; }  // beta(0+)
  double beta_upper() const { return beta_upper_; }  // beta(1-)
  double tau_max() const { return tau_max_; }        // sup of tau on (0,1)

 private:
  double integrate_tau(double from, double to) const;

  ModelParams params_;
  std::vector<double> nodes_;
  std::vector<double> beta_at_nodes_;
  double beta_lower_ = 0.0;
  double beta_upper_ = 0.0;
  double tau_max_ = 0.0;
};

}  // namespace dyncap
