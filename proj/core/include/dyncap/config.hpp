#pragma once

// Line-based run configuration:
//
//   [model]      n_species, lambda, gamma, gamma1, beta1, beta2, s_gamma, kappa, eps,
//                quadrature_tol, rootfind_tol
//   [solver]     fp_tol, fp_max_iters, damping, homotopy_steps, linear_tol, t_end,
//                record_every, strict_entropy
//   [mesh]       num_cells, x_left, x_right
//   [diffusion]  kind (scaled_projection | state_weighted), d0, d1
//   [initial]    profile (equilibrium | sine_perturbation | step_profile), amplitude,
//                species_index (1-based), left_state, right_state
//   [output]     directory, record_every
//
// `key = value` per line, `#` starts a comment, lists are comma separated.

#include <string>
#include <string_view>
#include <vector>

#include "dyncap/discretization.hpp"
#include "dyncap/solver.hpp"

namespace dyncap {

enum class InitialProfile { Equilibrium, SinePerturbation, StepProfile };

struct InitialCondition {
  InitialProfile profile = InitialProfile::SinePerturbation;
  double amplitude = 0.1;
  int species_index = 1;
  std::vector<double> left_state;
  std::vector<double> right_state;

  bool operator==(const InitialCondition&) const = default;
};

struct MeshConfig {
  int num_cells = 64;
  double x_left = 0.0;
  double x_right = 1.0;

  bool operator==(const MeshConfig&) const = default;
};

struct OutputConfig {
  std::string directory = "dyncap_out";

  bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
  ModelParams model;
  SolverConfig solver;
  MeshConfig mesh;
  DiffusionMatrixSpec diffusion;
  InitialCondition initial;
  OutputConfig output;

  bool operator==(const RunConfig&) const = default;
};

/// Parses and, unless `validate` is false, validates. Throws ParseError (with
/// line number) for malformed input, unknown or duplicate keys, and
/// ValidationError when the parsed configuration is not admissible.
RunConfig parse_config(std::string_view text, bool validate = true);
RunConfig load_config(const std::string& path, bool validate = true);

/// Throws ValidationError listing every problem found, including violated
/// parameter-region clauses by name.
void validate_config(const RunConfig& cfg);

/// Canonical text form; parse_config(render_config(c)) == c.
std::string render_config(const RunConfig& cfg);

/// Shortest decimal string that reads back to the same double.
std::string format_double(double v);

const char* to_string(DiffusionKind kind);
const char* to_string(InitialProfile profile);

Mesh build_mesh(const MeshConfig& cfg);
NodalField initial_field(const RunConfig& cfg, const Mesh& mesh);

}  // namespace dyncap
