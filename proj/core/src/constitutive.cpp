#include "dyncap/constitutive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dyncap/errors.hpp"

namespace dyncap {

namespace {

void require_open_unit(double s, const char* who) {
  if (!(s > 0.0 && s < 1.0)) {
    std::ostringstream msg;
    msg << who << ": saturation " << s << " outside (0,1)";
    throw DomainError(msg.str());
  }
}

// x^-k evaluated as exp(-k log x), finite for every x in (0,1) representable
// without overflow of the result.
inline double inv_pow(double x, double k) { return std::pow(x, -k); }

// Antiderivative of x^-k.
double anti1(double x, double k) {
  if (k == 1.0) return std::log(x);
  return inv_pow(x, k - 1.0) / (1.0 - k);
}

// Antiderivative of anti1(., k).
double anti2(double x, double k) {
  if (k == 1.0) return x * std::log(x) - x;
  if (k == 2.0) return -std::log(x);
  return inv_pow(x, k - 2.0) / ((1.0 - k) * (2.0 - k));
}

double tau_direct(double s, const ModelParams& p) {
  const double u = 1.0 - s;
  // S^g/(S^g + U^l) = 1/(1 + U^l S^-g)
  const double ratio = std::exp(p.lambda * std::log(u) - p.gamma * std::log(s));
  const double front = 1.0 / (1.0 + ratio);
  const double bracket = 1.0 + std::exp(p.lambda * std::log(u) - p.gamma1 * std::log(s));
  return front * bracket;
}

double tau_over_a_closed(double s, const ModelParams& p) {
  return inv_pow(1.0 - s, p.lambda) + inv_pow(s, p.gamma1);
}

double adaptive_tau_integral(double from, double to, const ModelParams& p) {
  if (from == to) return 0.0;
  const double sign = from < to ? 1.0 : -1.0;
  const double lo = std::min(from, to);
  const double hi = std::max(from, to);
  // The integrator's tolerance is relative to the L1 norm; on very short
  // intervals it is relaxed so that the implied absolute target stays above
  // roundoff, otherwise bisection only accumulates rounding noise.
  const double rel_tol = std::max(p.quadrature_tol, 64.0 * std::numeric_limits<double>::epsilon() / (hi - lo));
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(
      [&p](double x) { return tau_direct(x, p); }, lo, hi, 12, rel_tol, &error);
  if (!std::isfinite(value) || error > p.quadrature_tol * std::max(1.0, std::abs(value))) {
    std::ostringstream msg;
    msg << "beta quadrature on [" << lo << ", " << hi << "] reached error estimate " << error
        << " > tolerance " << p.quadrature_tol;
    throw QuadratureError(msg.str());
  }
  return sign * value;
}

}  // namespace

double ModelParams::boundary_total() const {
  return std::accumulate(s_gamma.begin(), s_gamma.end(), 0.0);
}

CoefficientValues eval_coeffs(double s, const ModelParams& p) {
  require_open_unit(s, "eval_coeffs");
  const double u = 1.0 - s;
  CoefficientValues c{};
  c.a = 1.0 / (inv_pow(s, p.gamma) + inv_pow(u, p.lambda));
  c.pc_prime = inv_pow(s, p.beta1) + inv_pow(u, p.beta2);
  c.tau = tau_direct(s, p);
  const double divided = c.tau / c.a;
  c.tau_over_a = tau_over_a_closed(s, p);
  if (!std::isfinite(c.a) || !std::isfinite(c.pc_prime) || !std::isfinite(c.tau) ||
      !std::isfinite(c.tau_over_a) || c.a <= 0.0) {
    std::ostringstream msg;
    msg << "eval_coeffs: coefficients not representable at S = " << s;
    throw DomainError(msg.str());
  }
  if (std::abs(divided - c.tau_over_a) > 1e-10 * c.tau_over_a) {
    std::ostringstream msg;
    msg << "eval_coeffs: tau/a mismatch at S = " << s << " (" << divided << " vs " << c.tau_over_a
        << ")";
    throw std::logic_error(msg.str());
  }
  return c;
}

double beta_value(double s, const ModelParams& p) {
  require_open_unit(s, "beta_value");
  return adaptive_tau_integral(0.5, s, p);
}

double beta_inverse(double b, const ModelParams& p) { return Constitutive(p).beta_inverse(b); }

double f0_integral(double s, const ModelParams& p) {
  require_open_unit(s, "f0_integral");
  const double half = 0.5;
  return -(anti1(1.0 - s, p.lambda) - anti1(half, p.lambda)) +
         (anti1(s, p.gamma1) - anti1(half, p.gamma1));
}

double entropy_E(double s, const ModelParams& p) {
  require_open_unit(s, "entropy_E");
  const double half = 0.5;
  const double ds = s - half;
  const double upper_branch = anti2(1.0 - s, p.lambda) - anti2(half, p.lambda) + anti1(half, p.lambda) * ds;
  const double lower_branch = anti2(s, p.gamma1) - anti2(half, p.gamma1) - anti1(half, p.gamma1) * ds;
  return upper_branch + lower_branch;
}

double pressure_potential(double s, const ModelParams& p) {
  require_open_unit(s, "pressure_potential");
  auto upper = [&p](double x) { return -anti1(1.0 - x, p.lambda) + anti1(1.0 - x, p.lambda - 1.0); };
  return (upper(s) - upper(0.5)) + (anti1(s, p.gamma1 - 1.0) - anti1(0.5, p.gamma1 - 1.0));
}

AssumptionReport validate_assumptions(const ModelParams& p) {
  AssumptionReport r;
  auto check = [&r](bool ok, const char* id) {
    if (!ok) r.violated_clauses.emplace_back(id);
  };
  r.gamma_bound = 0.5 * p.beta1 + (5.0 / 6.0) * (p.gamma1 - 2.0);
  r.lambda_bound = 3.0 * p.beta2 - 10.0;
  check(5.0 < p.beta1, clause::kBeta1Lower);
  check(p.beta1 <= p.gamma1, clause::kBeta1Gamma1);
  check(p.gamma1 < p.gamma, clause::kGamma1Gamma);
  check(p.gamma < r.gamma_bound, clause::kGammaUpper);
  check(5.0 < p.beta2, clause::kBeta2Lower);
  check(p.beta2 <= p.lambda, clause::kBeta2Lambda);
  check(p.lambda < r.lambda_bound, clause::kLambdaUpper);

  r.alpha1 = 1.0 + (p.gamma - p.gamma1 - p.beta1) / 2.0;
  r.alpha2 = 1.0 - p.beta2 / 2.0;
  r.p_gamma = -(1.0 / p.gamma) * (10.0 / 3.0 + p.gamma - (5.0 / 3.0) * p.gamma1 - p.beta1);
  r.p_lambda = -(1.0 / p.lambda) * (4.0 / 3.0 - (2.0 / 3.0) * p.lambda + 2.0 - p.beta2);
  r.p = std::min(r.p_gamma, r.p_lambda);
  r.q = 2.0 * r.p / (1.0 + r.p);

  constexpr int kGrid = 10000;
  for (int k = 1; k <= kGrid; ++k) {
    const double s = static_cast<double>(k) / (kGrid + 1);
    const double pc = inv_pow(s, p.beta1) + inv_pow(1.0 - s, p.beta2);
    if (!(pc <= tau_over_a_closed(s, p))) ++r.coefficient_bound_violations;
  }
  check(r.coefficient_bound_violations == 0, clause::kCoefficientBound);

  r.accepted = r.violated_clauses.empty();
  return r;
}

// ---------------------------------------------------------------------------

Constitutive::Constitutive(ModelParams params) : params_(std::move(params)) {
  // Graded table: uniform spacing 1/512 on [1/512, 1 - 1/512] with 1/2 as a
  // node, geometric refinement toward both endpoints where tau is singular
  // (S^(gamma - gamma1) near 0) or steep.
  constexpr double kStep = 1.0 / 512.0;
  constexpr double kRatio = 1.2;
  constexpr double kInnermost = 1e-15;
  std::vector<double> low;
  for (double x = kStep / kRatio; x > kInnermost; x /= kRatio) low.push_back(x);
  std::reverse(low.begin(), low.end());
  nodes_ = low;
  for (int k = 1; k < 512; ++k) nodes_.push_back(k * kStep);
  for (auto it = low.rbegin(); it != low.rend(); ++it) nodes_.push_back(1.0 - *it);

  const auto half_it = std::find(nodes_.begin(), nodes_.end(), 0.5);
  const auto half = static_cast<std::size_t>(half_it - nodes_.begin());
  beta_at_nodes_.assign(nodes_.size(), 0.0);
  for (std::size_t k = half + 1; k < nodes_.size(); ++k) {
    beta_at_nodes_[k] = beta_at_nodes_[k - 1] + adaptive_tau_integral(nodes_[k - 1], nodes_[k], params_);
  }
  for (std::size_t k = half; k-- > 0;) {
    beta_at_nodes_[k] = beta_at_nodes_[k + 1] - adaptive_tau_integral(nodes_[k], nodes_[k + 1], params_);
  }
  beta_lower_ = beta_at_nodes_.front() - integrate_tau(0.0, nodes_.front());
  beta_upper_ = beta_at_nodes_.back() + integrate_tau(nodes_.back(), 1.0);

  // sup tau: dense scan, then golden-section refinement around the best sample.
  constexpr int kScan = 20000;
  double best_s = 0.5;
  double best = tau_direct(0.5, params_);
  for (int k = 1; k < kScan; ++k) {
    const double s = static_cast<double>(k) / kScan;
    const double t = tau_direct(s, params_);
    if (t > best) {
      best = t;
      best_s = s;
    }
  }
  double lo = std::max(best_s - 1.0 / kScan, 1e-12);
  double hi = std::min(best_s + 1.0 / kScan, 1.0 - 1e-12);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 100; ++it) {
    const double x1 = hi - phi * (hi - lo);
    const double x2 = lo + phi * (hi - lo);
    if (tau_direct(x1, params_) > tau_direct(x2, params_)) {
      hi = x2;
    } else {
      lo = x1;
    }
  }
  best = std::max(best, tau_direct(0.5 * (lo + hi), params_));
  // tau -> 1 as S -> 1; the supremum is at least that limit.
  tau_max_ = std::max(best, 1.0) * (1.0 + 1e-12);
}

double Constitutive::tau(double s) const {
  require_open_unit(s, "tau");
  return tau_direct(s, params_);
}

double Constitutive::tau_over_a(double s) const {
  require_open_unit(s, "tau_over_a");
  return tau_over_a_closed(s, params_);
}

double Constitutive::integrate_tau(double from, double to) const {
  return boost::math::quadrature::gauss<double, 10>::integrate([this](double x) { return tau_direct(x, params_); }, from, to);
}

double Constitutive::beta(double s) const {
  require_open_unit(s, "beta");
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), s);
  if (it == nodes_.begin()) return beta_at_nodes_.front() - integrate_tau(s, nodes_.front());
  if (it == nodes_.end()) return beta_at_nodes_.back() + integrate_tau(nodes_.back(), s);
  auto k = static_cast<std::size_t>(it - nodes_.begin()) - 1;
  if (s - nodes_[k] > nodes_[k + 1] - s) ++k;
  return beta_at_nodes_[k] + integrate_tau(nodes_[k], s);
}

double Constitutive::beta_inverse(double b) const {
  if (!(b > beta_lower_ && b < beta_upper_)) {
    std::ostringstream msg;
    msg << "beta_inverse: " << b << " outside attainable range (" << beta_lower_ << ", "
        << beta_upper_ << ")";
    throw RangeError(msg.str());
  }
  const auto it = std::upper_bound(beta_at_nodes_.begin(), beta_at_nodes_.end(), b);
  const auto k = static_cast<std::size_t>(it - beta_at_nodes_.begin());
  double lo = k == 0 ? 0.0 : nodes_[k - 1];
  double hi = k == nodes_.size() ? 1.0 : nodes_[k];
  double s = 0.5 * (lo + hi);
  for (int it_count = 0; it_count < 200; ++it_count) {
    const double g = beta(s) - b;
    if (g == 0.0) return s;
    if (g > 0.0) {
      hi = s;
    } else {
      lo = s;
    }
    const double step = g / tau_direct(s, params_);
    const double newton = s - step;
    // Newton converges quadratically, so polish until the step is at roundoff.
    if (std::abs(g) <= params_.rootfind_tol && std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * s) {
      return newton > lo && newton < hi ? newton : s;
    }
    s = (newton > lo && newton < hi) ? newton : 0.5 * (lo + hi);
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(hi, 1e-300)) break;
  }
  const double g = beta(s) - b;
  if (std::abs(g) <= params_.rootfind_tol) return s;
  std::ostringstream msg;
  msg << "beta_inverse: bracketing stalled at S = " << s << " with residual " << g;
  throw RootFindError(msg.str());
}

}  // namespace dyncap
