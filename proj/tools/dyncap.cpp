#include <cmath>
#include <cstdint>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dyncap/config.hpp"
#include "dyncap/errors.hpp"
#include "dyncap/output.hpp"
#include "dyncap/selftest.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;
constexpr int kExitEntropy = 4;

void print_assumptions(const dyncap::AssumptionReport& r) {
  std::cout << "accepted: " << (r.accepted ? "yes" : "no") << '\n'
            << "alpha1: " << dyncap::format_double(r.alpha1) << '\n'
            << "alpha2: " << dyncap::format_double(r.alpha2) << '\n'
            << "p_gamma: " << dyncap::format_double(r.p_gamma) << '\n'
            << "p_lambda: " << dyncap::format_double(r.p_lambda) << '\n'
            << "p: " << dyncap::format_double(r.p) << '\n'
            << "q: " << dyncap::format_double(r.q) << '\n';
  for (const auto& c : r.violated_clauses) std::cout << "violated: " << c << '\n';
}

int cmd_validate(const std::string& path) {
  const auto cfg = dyncap::load_config(path, false);
  const auto report = dyncap::validate_assumptions(cfg.model);
  print_assumptions(report);
  // Remaining checks (solver knobs, mesh, initial data) also gate a run.
  dyncap::validate_config(cfg);
  return kExitOk;
}

dyncap::RunConfig load_for_run(const std::string& path, bool strict) {
  auto cfg = dyncap::load_config(path);
  if (strict) cfg.solver.strict_entropy = true;
  return cfg;
}

int cmd_run(const std::string& path, const std::string& output_override, bool strict) {
  auto cfg = load_for_run(path, strict);
  if (!output_override.empty()) cfg.output.directory = output_override;
  const dyncap::Constitutive model(cfg.model);
  const auto mesh = dyncap::build_mesh(cfg.mesh);
  const auto traj =
      dyncap::run_simulation(dyncap::initial_field(cfg, mesh), mesh, model, cfg.diffusion, cfg.solver);
  dyncap::write_outputs(traj, cfg, mesh, model, cfg.output.directory);

  int violations = 0;
  double min_margin = traj.entropy_margins.empty() ? 0.0 : traj.entropy_margins.front();
  for (double m : traj.entropy_margins) {
    if (m < 0.0) ++violations;
    min_margin = std::min(min_margin, m);
  }
  std::cout << "steps: " << traj.fp_iters.size() << '\n'
            << "min entropy margin: " << dyncap::format_double(min_margin) << '\n'
            << "entropy violations: " << violations << '\n'
            << "output: " << cfg.output.directory << '\n';
  if (violations > 0) std::cerr << "warning: discrete entropy inequality failed at " << violations << " step(s)\n";
  return kExitOk;
}

void print_sweep(const char* label, const dyncap::SweepReport& s) {
  std::cout << label << '\n';
  for (const auto& r : s.runs) {
    std::cout << "  kappa=" << dyncap::format_double(r.kappa) << " eps=" << dyncap::format_double(r.eps)
              << " min_margin=" << dyncap::format_double(r.min_entropy_margin) << '\n';
  }
  for (std::size_t k = 0; k < s.differences.size(); ++k) {
    std::cout << "  difference[" << k << "]=" << dyncap::format_double(s.differences[k]) << '\n';
  }
  for (std::size_t k = 0; k < s.orders.size(); ++k) {
    std::cout << "  order[" << k << "]=" << dyncap::format_double(s.orders[k]) << '\n';
  }
  for (const auto& q : s.growing_quantities) std::cout << "  growing: " << q << '\n';
}

int cmd_study(const std::string& path, const std::string& output_override, std::vector<double> kappas,
              std::vector<double> epsilons, int threads, bool strict) {
  auto cfg = load_for_run(path, strict);
  if (!output_override.empty()) cfg.output.directory = output_override;
  if (kappas.empty()) kappas = {cfg.model.kappa, cfg.model.kappa / 2, cfg.model.kappa / 4};
  if (epsilons.empty()) epsilons = {cfg.model.eps};
  const auto mesh = dyncap::build_mesh(cfg.mesh);
  const auto report = dyncap::refinement_study(dyncap::initial_field(cfg, mesh), mesh, cfg.model, cfg.diffusion,
                                               cfg.solver, kappas, epsilons, threads);
  dyncap::write_study(report, cfg, cfg.output.directory);
  print_sweep("kappa sweep", report.kappa_sweep);
  print_sweep("eps sweep", report.eps_sweep);
  std::cout << "output: " << cfg.output.directory << '\n';
  return kExitOk;
}

int cmd_selftest(std::uint64_t seed) {
  const auto report = dyncap::run_selftest(seed);
  for (const auto& item : report.items) {
    std::cout << (item.passed ? "PASS " : "FAIL ") << std::left << std::setw(24) << item.name << item.detail
              << '\n';
  }
  return report.all_passed() ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Degenerate capillary multicomponent flow solver", "dyncap"};
  app.set_version_flag("--version", dyncap::library_version());
  app.require_subcommand(1);

  bool strict = false;
  int threads = 1;
  std::uint64_t seed = 20240601;
  app.add_flag("--strict-entropy", strict, "Abort with exit code 4 on the first entropy violation");
  app.add_option("--threads", threads, "Worker threads for the refinement study")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Seed for randomized self-tests");
  app.fallthrough();

  std::string config_path;
  std::string output_dir;
  std::vector<double> kappas;
  std::vector<double> epsilons;

  auto* validate = app.add_subcommand("validate", "Print the assumption report for a configuration");
  validate->add_option("config", config_path, "Configuration file")->required();

  auto* run = app.add_subcommand("run", "Run a simulation and write outputs");
  run->add_option("config", config_path, "Configuration file")->required();
  run->add_option("-o,--output", output_dir, "Override the output directory");

  auto* study = app.add_subcommand("study", "Refinement study in kappa and eps");
  study->add_option("config", config_path, "Configuration file")->required();
  study->add_option("--kappas", kappas, "Non-increasing time steps")->delimiter(',');
  study->add_option("--epsilons", epsilons, "Non-increasing regularizations")->delimiter(',');
  study->add_option("-o,--output", output_dir, "Override the output directory");

  auto* selftest = app.add_subcommand("selftest", "Run the invariant suite on the default parameters");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(config_path);
    if (run->parsed()) return cmd_run(config_path, output_dir, strict);
    if (study->parsed()) return cmd_study(config_path, output_dir, kappas, epsilons, threads, strict);
    if (selftest->parsed()) return cmd_selftest(seed);
  } catch (const dyncap::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const dyncap::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const dyncap::PreconditionError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const dyncap::EntropyViolation& e) {
    std::cerr << "entropy violation at step " << e.step() << " (margin " << dyncap::format_double(e.margin())
              << "): " << e.what() << '\n';
    return kExitEntropy;
  } catch (const dyncap::FixedPointError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const dyncap::LinearSolveError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const dyncap::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSolver;
  }
  return kExitFailure;
}
