#include "dyncap/entropy.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "dyncap/errors.hpp"

namespace dyncap {

namespace {

double log_sum_exp(const Vector& v) {
  const double m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

Vector softmax(const Vector& v) {
  Vector e = (v.array() - v.maxCoeff()).exp();
  return e / e.sum();
}

}  // namespace

SpeciesState::SpeciesState(Vector species) : s(std::move(species)), total(s.sum()) {}

bool SpeciesState::in_domain() const {
  return s.size() > 0 && (s.array() > 0.0).all() && total < 1.0 && std::isfinite(total);
}

void require_in_domain(const SpeciesState& state, const char* who) {
  if (!state.in_domain()) {
    std::ostringstream msg;
    msg << who << ": state (" << state.s.transpose() << ") with total " << state.total
        << " outside the admissible set";
    throw DomainError(msg.str());
  }
}

BoundaryState boundary_state(const Constitutive& model) {
  const auto& p = model.params();
  BoundaryState b;
  b.state = SpeciesState(Eigen::Map<const Vector>(p.s_gamma.data(), static_cast<Eigen::Index>(p.s_gamma.size())));
  require_in_domain(b.state, "boundary_state");
  b.fractions = b.state.s / b.state.total;
  b.f0 = model.f0(b.state.total);
  b.mu = b.fractions.array().log() + b.f0;
  b.free_energy = free_energy(b.state, model);
  return b;
}

double free_energy(const SpeciesState& state, const Constitutive& model) {
  require_in_domain(state, "free_energy");
  const double mixing = (state.s.array() * (state.s.array() / state.total).log()).sum();
  return mixing + model.entropy(state.total);
}

Vector chem_potentials(const SpeciesState& state, const Constitutive& model) {
  require_in_domain(state, "chem_potentials");
  return (state.s.array() / state.total).log() + model.f0(state.total);
}

double relative_free_energy(const SpeciesState& state, const Constitutive& model) {
  return relative_free_energy(state, model, boundary_state(model));
}

double relative_free_energy(const SpeciesState& state, const Constitutive& model,
                            const BoundaryState& boundary) {
  const double f = free_energy(state, model);
  return f - boundary.free_energy - boundary.mu.dot(state.s - boundary.state.s);
}

Vector project_orthogonal(const Vector& v) {
  if (v.size() == 0) return v;
  return v.array() - v.mean();
}

SpeciesState species_from_relative(double total, const Vector& mu_star) {
  if (!(total > 0.0 && total < 1.0)) {
    std::ostringstream msg;
    msg << "species_from_relative: total " << total << " outside (0,1)";
    throw DomainError(msg.str());
  }
  SpeciesState out;
  out.s = total * softmax(mu_star);
  out.total = total;
  return out;
}

EntropyVars w_from_state(const SpeciesState& state, double s_prev_total, const Constitutive& model) {
  require_in_domain(state, "w_from_state");
  if (!(s_prev_total > 0.0 && s_prev_total < 1.0)) {
    throw DomainError("w_from_state: previous total outside (0,1)");
  }
  const auto boundary = boundary_state(model);
  const double kappa = model.params().kappa;
  const double relax = (model.beta(state.total) - model.beta(s_prev_total)) / kappa;
  EntropyVars v;
  v.w = chem_potentials(state, model) - boundary.mu;
  v.w.array() += relax;
  v.f_value = model.f0(state.total) - boundary.f0 + relax;
  const double tau = model.tau(state.total);
  const double f_prime = model.tau_over_a(state.total) + tau / kappa;
  v.ds_dw = (state.s / state.total) / f_prime;
  return v;
}

TransformResult state_from_w(const Vector& w, double s_prev_total, const Constitutive& model) {
  return state_from_w(w, s_prev_total, model, boundary_state(model));
}

TransformResult state_from_w(const Vector& w, double s_prev_total, const Constitutive& model,
                             const BoundaryState& boundary) {
  if (!(s_prev_total > 0.0 && s_prev_total < 1.0)) {
    throw DomainError("state_from_w: previous total outside (0,1)");
  }
  if (!w.allFinite()) throw RootFindError("state_from_w: non-finite entropy variables");
  const auto& p = model.params();
  const double kappa = p.kappa;
  const Vector shifted = boundary.fractions.array().log() + w.array();
  const double target = log_sum_exp(shifted);
  const double beta_prev = model.beta(s_prev_total);

  auto residual = [&](double s) {
    return model.f0(s) - boundary.f0 + (model.beta(s) - beta_prev) / kappa - target;
  };
  auto slope = [&](double s) { return model.tau_over_a(s) + model.tau(s) / kappa; };

  // Equilibrium: w = 0 with the boundary total as history is solved exactly by
  // the boundary state; rounding in log(sum of fractions) would otherwise
  // perturb it at the last bit.
  if (s_prev_total == boundary.state.total && (w.array() == 0.0).all()) {
    TransformResult out;
    out.state = boundary.state;
    out.f_prime = slope(s_prev_total);
    out.vars.w = w;
    out.vars.f_value = 0.0;
    out.vars.ds_dw = boundary.fractions / out.f_prime;
    return out;
  }

  // Bracket the root starting from the previous total; f is increasing with
  // limits -inf at 0 and +inf at 1.
  double lo = s_prev_total;
  double hi = s_prev_total;
  double s = s_prev_total;
  double g = residual(s);
  if (g < 0.0) {
    for (int k = 1; g < 0.0; ++k) {
      lo = s;
      s = 1.0 - (1.0 - s_prev_total) * std::ldexp(1.0, -k);
      if (s >= 1.0 || k > 1000) throw RootFindError("state_from_w: cannot bracket total from above");
      g = residual(s);
    }
    hi = s;
  } else if (g > 0.0) {
    for (int k = 1; g > 0.0; ++k) {
      hi = s;
      s = s_prev_total * std::ldexp(1.0, -k);
      if (s <= 0.0 || k > 1000) throw RootFindError("state_from_w: cannot bracket total from below");
      g = residual(s);
    }
    lo = s;
  }

  bool converged = g == 0.0;
  for (int it = 0; it < 200 && !converged; ++it) {
    const double step = g / slope(s);
    double next = s - step;
    if (!(next > lo && next < hi)) {
      // Bisect in the variable that resolves the bracket best.
      if (hi < 0.5 && hi > 4.0 * lo) {
        next = std::sqrt(lo * hi);
      } else if (lo > 0.5 && (1.0 - lo) > 4.0 * (1.0 - hi)) {
        next = 1.0 - std::sqrt((1.0 - lo) * (1.0 - hi));
      } else {
        next = 0.5 * (lo + hi);
      }
    } else if (std::abs(step) <= p.rootfind_tol * std::min(s, 1.0 - s)) {
      converged = true;
    }
    s = next;
    g = residual(s);
    if (g == 0.0) {
      converged = true;
    } else if (g < 0.0) {
      lo = s;
    } else {
      hi = s;
    }
    if (hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() * hi) converged = true;
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "state_from_w: total density did not converge (S = " << s << ", residual " << g << ")";
    throw RootFindError(msg.str());
  }

  TransformResult out;
  const Vector fractions = softmax(shifted);
  out.state.s = s * fractions;
  out.state.total = s;
  out.f_prime = slope(s);
  out.vars.w = w;
  out.vars.f_value = target;
  out.vars.ds_dw = fractions / out.f_prime;
  return out;
}

Matrix mobility_matrix(const TransformResult& t) { return t.state.s * t.vars.ds_dw.transpose(); }

Matrix species_jacobian(const TransformResult& t) {
  const Vector x = t.state.s / t.state.total;
  Matrix j = x * x.transpose() * (1.0 / t.f_prime - t.state.total);
  j.diagonal() += t.state.total * x;
  return j;
}

Matrix diffusion_matrix(const SpeciesState& state, const DiffusionMatrixSpec& spec) {
  const auto n = state.s.size();
  const Matrix proj = Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
  if (spec.kind == DiffusionKind::ScaledProjection) return spec.d0 * proj;
  const Vector weights = spec.d0 + (spec.d1 - spec.d0) * state.s.array();
  const Matrix m = proj * weights.asDiagonal() * proj;
  return 0.5 * (m + m.transpose());
}

HypocoercivityConstants hypocoercivity_constants(const Matrix& matrix) {
  if (matrix.rows() != matrix.cols()) throw ArgumentError("hypocoercivity_constants: matrix not square");
  const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
  if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ArgumentError("hypocoercivity_constants: matrix not symmetric");
  }
  const auto n = matrix.rows();
  if (n < 2) return {0.0, 0.0};
  // Orthonormal basis of the complement of span{1}: eigenvectors of Pi with
  // eigenvalue 1 (the last n - 1 in ascending order).
  const Matrix proj = Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
  Eigen::SelfAdjointEigenSolver<Matrix> basis(proj);
  const Matrix q = basis.eigenvectors().rightCols(n - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> restricted(q.transpose() * matrix * q, Eigen::EigenvaluesOnly);
  return {restricted.eigenvalues().minCoeff(), restricted.eigenvalues().maxCoeff()};
}

bool jmz_inequality_check(const Vector& alpha, const Vector& beta, const Vector& v) {
  if (std::abs(alpha.norm() - 1.0) > 1e-12 || std::abs(beta.norm() - 1.0) > 1e-12) {
    throw ArgumentError("jmz_inequality_check: alpha and beta must be unit vectors");
  }
  const double ab = alpha.dot(beta);
  const double lhs = std::pow(alpha.dot(v), 2) + (v - beta.dot(v) * beta).squaredNorm();
  const double rhs = 0.25 * ab * ab * v.squaredNorm();
  return lhs >= rhs;
}

}  // namespace dyncap
