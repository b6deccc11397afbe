#include "dyncap/output.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <json.hpp>

#include "dyncap/errors.hpp"

namespace dyncap {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string library_version() { return DYNCAP_VERSION; }

std::string diagnostics_csv(const Trajectory& traj) {
  std::ostringstream o;
  o << kDiagnosticsHeader << '\n';
  for (const auto& r : traj.diagnostics) {
    o << r.step << ',' << format_double(r.time) << ',' << format_double(r.lyapunov) << ','
      << format_double(r.budget.diss_dbeta_sq) << ',' << format_double(r.budget.diss_capillary) << ','
      << format_double(r.budget.diss_grad_dbeta) << ',' << format_double(r.budget.diss_eps_w) << ','
      << format_double(r.budget.diss_proj_mu) << ',' << format_double(r.min_species) << ','
      << format_double(r.max_total) << ',' << r.fp_iters << '\n';
  }
  return o.str();
}

std::string snapshots_csv(const Trajectory& traj, const Mesh& mesh) {
  std::ostringstream o;
  const int n = traj.states.empty() ? 0 : traj.states.front().nodal.num_species();
  o << "time,node_index,x";
  for (int i = 1; i <= n; ++i) o << ",S_" << i;
  o << '\n';
  auto emit = [&](std::size_t level) {
    const auto& v = traj.states[level].nodal.values;
    for (int k = 0; k < mesh.num_nodes(); ++k) {
      o << format_double(traj.times[level]) << ',' << k << ',' << format_double(mesh.nodes[k]);
      for (int i = 0; i < n; ++i) o << ',' << format_double(v(k, i));
      o << '\n';
    }
  };
  if (!traj.states.empty()) emit(0);
  for (const auto& r : traj.diagnostics) emit(static_cast<std::size_t>(r.step));
  return o.str();
}

namespace {

void write_atomic(const fs::path& target, const std::string& text) {
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot open '" + tmp.string() + "' for writing: " +
                    std::error_code(errno, std::generic_category()).message());
    }
    out << text;
    out.flush();
    if (!out) throw IoError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename '" + tmp.string() + "' to '" + target.string() + "': " + ec.message());
  }
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

ordered_json config_json(const RunConfig& c) {
  ordered_json j;
  j["model"] = {{"n_species", c.model.n_species},   {"lambda", c.model.lambda},
                {"gamma", c.model.gamma},           {"gamma1", c.model.gamma1},
                {"beta1", c.model.beta1},           {"beta2", c.model.beta2},
                {"s_gamma", c.model.s_gamma},       {"kappa", c.model.kappa},
                {"eps", c.model.eps},               {"quadrature_tol", c.model.quadrature_tol},
                {"rootfind_tol", c.model.rootfind_tol}};
  j["solver"] = {{"fp_tol", c.solver.fp_tol},           {"fp_max_iters", c.solver.fp_max_iters},
                 {"damping", c.solver.damping},         {"homotopy_steps", c.solver.homotopy_steps},
                 {"linear_tol", c.solver.linear_tol},   {"t_end", c.solver.t_end},
                 {"record_every", c.solver.record_every}, {"strict_entropy", c.solver.strict_entropy}};
  j["mesh"] = {{"num_cells", c.mesh.num_cells}, {"x_left", c.mesh.x_left}, {"x_right", c.mesh.x_right}};
  j["diffusion"] = {{"kind", to_string(c.diffusion.kind)}, {"d0", c.diffusion.d0}, {"d1", c.diffusion.d1}};
  j["initial"] = {{"profile", to_string(c.initial.profile)},
                  {"amplitude", c.initial.amplitude},
                  {"species_index", c.initial.species_index},
                  {"left_state", c.initial.left_state},
                  {"right_state", c.initial.right_state}};
  j["output"] = {{"directory", c.output.directory}};
  return j;
}

ordered_json versions_json() {
  return {{"dyncap", library_version()},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", BOOST_LIB_VERSION},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

}  // namespace

std::string write_outputs(const Trajectory& traj, const RunConfig& config, const Mesh& mesh,
                          const Constitutive& model, const std::string& directory) {
  const fs::path dir(directory);
  ensure_directory(dir);

  const auto assumptions = validate_assumptions(model.params());
  const auto apriori = apriori_report(traj, model, mesh);
  const auto weights = entropy_weights(model, config.diffusion, mesh);

  ordered_json m;
  m["format"] = "dyncap-run";
  m["versions"] = versions_json();
  m["config"] = config_json(config);
  m["config_text"] = render_config(config);
  m["assumptions"] = {{"accepted", assumptions.accepted},
                      {"violated_clauses", assumptions.violated_clauses},
                      {"alpha1", assumptions.alpha1},
                      {"alpha2", assumptions.alpha2},
                      {"p_gamma", assumptions.p_gamma},
                      {"p_lambda", assumptions.p_lambda},
                      {"p", assumptions.p},
                      {"q", assumptions.q}};
  ordered_json ap;
  for (const auto& [k, v] : apriori.values) ap[k] = v;
  m["apriori"] = ap;
  m["degeneracy_flag"] = apriori.degeneracy_flag;

  int violations = 0;
  double min_margin = traj.entropy_margins.empty() ? 0.0 : traj.entropy_margins.front();
  for (double v : traj.entropy_margins) {
    if (v < 0.0) ++violations;
    min_margin = std::min(min_margin, v);
  }
  m["entropy_check"] = {{"tolerance", 10.0 * config.solver.fp_tol},
                        {"weights",
                         {{"c_dbeta", weights.c_dbeta},
                          {"c_capillary", weights.c_capillary},
                          {"c_grad_dbeta", weights.c_grad_dbeta},
                          {"c_eps", weights.c_eps},
                          {"c_mu", weights.c_mu}}},
                        {"violations", violations},
                        {"min_margin", min_margin},
                        {"margins", traj.entropy_margins}};
  int total_iters = 0;
  int max_iters = 0;
  for (int it : traj.fp_iters) {
    total_iters += it;
    max_iters = std::max(max_iters, it);
  }
  m["steps"] = traj.fp_iters.size();
  m["fp_iterations"] = {{"total", total_iters}, {"max", max_iters}};
  m["files"] = {"diagnostics.csv", "snapshots.csv"};
  const std::string manifest = m.dump(2) + "\n";

  write_atomic(dir / "diagnostics.csv", diagnostics_csv(traj));
  write_atomic(dir / "snapshots.csv", snapshots_csv(traj, mesh));
  write_atomic(dir / "manifest.json", manifest);
  return manifest;
}

namespace {

ordered_json sweep_json(const SweepReport& s) {
  ordered_json runs = ordered_json::array();
  for (const auto& r : s.runs) {
    ordered_json ap;
    for (const auto& [k, v] : r.apriori.values) ap[k] = v;
    runs.push_back({{"kappa", r.kappa},
                    {"eps", r.eps},
                    {"min_entropy_margin", r.min_entropy_margin},
                    {"degeneracy_flag", r.apriori.degeneracy_flag},
                    {"apriori", ap}});
  }
  return {{"runs", runs},
          {"differences", s.differences},
          {"orders", s.orders},
          {"growing_quantities", s.growing_quantities}};
}

}  // namespace

std::string write_study(const StudyReport& report, const RunConfig& config, const std::string& directory) {
  const fs::path dir(directory);
  ensure_directory(dir);
  ordered_json j;
  j["format"] = "dyncap-study";
  j["versions"] = versions_json();
  j["config"] = config_json(config);
  j["kappa_sweep"] = sweep_json(report.kappa_sweep);
  j["eps_sweep"] = sweep_json(report.eps_sweep);
  const std::string text = j.dump(2) + "\n";
  write_atomic(dir / "study.json", text);
  return text;
}

}  // namespace dyncap
