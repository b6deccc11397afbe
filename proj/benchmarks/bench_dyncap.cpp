#include <benchmark/benchmark.h>

#include "dyncap/config.hpp"
#include "dyncap/solver.hpp"

namespace {

const dyncap::Constitutive& model() {
  static const dyncap::Constitutive m{dyncap::ModelParams{}};
  return m;
}

void BM_StateFromW(benchmark::State& st) {
  const auto boundary = dyncap::boundary_state(model());
  dyncap::Vector s(3);
  s << 0.2, 0.15, 0.1;
  const auto w = dyncap::w_from_state(dyncap::SpeciesState(s), 0.4, model()).w;
  for (auto _ : st) benchmark::DoNotOptimize(dyncap::state_from_w(w, 0.4, model(), boundary));
}
BENCHMARK(BM_StateFromW);

void BM_AssembleSystem(benchmark::State& st) {
  dyncap::RunConfig cfg;
  cfg.mesh.num_cells = static_cast<int>(st.range(0));
  const auto mesh = dyncap::build_mesh(cfg.mesh);
  const auto prev = dyncap::interpolate_state(dyncap::initial_field(cfg, mesh), mesh);
  const dyncap::Matrix w = dyncap::Matrix::Zero(mesh.num_nodes(), 3);
  for (auto _ : st) benchmark::DoNotOptimize(dyncap::assemble_system(mesh, w, prev, model(), cfg.diffusion, 1.0));
}
BENCHMARK(BM_AssembleSystem)->Arg(64)->Arg(256)->Arg(1024);

void BM_SolveTimeStep(benchmark::State& st) {
  dyncap::RunConfig cfg;
  cfg.mesh.num_cells = static_cast<int>(st.range(0));
  const auto mesh = dyncap::build_mesh(cfg.mesh);
  const auto prev = dyncap::interpolate_state(dyncap::initial_field(cfg, mesh), mesh);
  for (auto _ : st) {
    benchmark::DoNotOptimize(dyncap::solve_time_step(prev, mesh, model(), cfg.diffusion, cfg.solver));
  }
}
BENCHMARK(BM_SolveTimeStep)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
