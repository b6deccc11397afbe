#pragma once

#include <string>

#include "dyncap/config.hpp"

namespace dyncap {

inline constexpr const char* kDiagnosticsHeader =
    "step,time,lyapunov,diss_dbeta_sq,diss_capillary,diss_grad_dbeta,diss_eps_w,diss_proj_mu,min_species,"
    "max_total,fp_iters";

std::string diagnostics_csv(const Trajectory& trajectory);

/// time,node_index,x,S_1..S_n for the initial level and every recorded step.
std::string snapshots_csv(const Trajectory& trajectory, const Mesh& mesh);

/// Writes diagnostics.csv, snapshots.csv and finally manifest.json into
/// `directory` (created if missing). Every file goes through a temporary
/// name and a rename, so an error never leaves a partial manifest behind.
/// Returns the manifest text. Filesystem failures throw IoError carrying the
/// system message.
std::string write_outputs(const Trajectory& trajectory, const RunConfig& config, const Mesh& mesh,
                          const Constitutive& model, const std::string& directory);

/// Writes study.json for a refinement study and returns its text.
std::string write_study(const StudyReport& report, const RunConfig& config, const std::string& directory);

std::string library_version();

}  // namespace dyncap
