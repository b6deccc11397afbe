#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "dyncap/config.hpp"
#include "dyncap/errors.hpp"
#include "dyncap/output.hpp"

using namespace dyncap;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("dyncap_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(ParseConfig, MinimalModelSectionUsesDefaults) {
  const auto cfg = parse_config("[model]\nlambda = 7\ngamma = 6.2\ngamma1 = 6\nbeta1 = 6\nbeta2 = 6\n");
  EXPECT_EQ(cfg, RunConfig{});
  EXPECT_EQ(cfg.model.kappa, 1e-3);
  EXPECT_EQ(cfg.model.eps, 1e-3);
  EXPECT_EQ(cfg.solver.fp_tol, 1e-9);
  EXPECT_EQ(cfg.mesh.num_cells, 64);
  EXPECT_EQ(cfg.model.n_species, 3);
  EXPECT_EQ(cfg.model.s_gamma, (std::vector<double>{0.15, 0.15, 0.15}));
}

TEST(ParseConfig, GammaSevenNamesClause) {
  try {
    parse_config("[model]\ngamma = 7\n");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find(clause::kGammaUpper), std::string::npos) << e.what();
  }
  EXPECT_NO_THROW(parse_config("[model]\ngamma = 7\n", false));
}

TEST(ParseConfig, DuplicateKeyCitesLine) {
  try {
    parse_config("# comment\n[model]\nkappa = 1e-3\n\nkappa = 2e-3\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 5);
    EXPECT_NE(std::string(e.what()).find("line 5"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(ParseConfig, MalformedInputs) {
  EXPECT_THROW(parse_config("[nope]\n"), ParseError);
  EXPECT_THROW(parse_config("[model]\nfoo = 1\n"), ParseError);
  EXPECT_THROW(parse_config("kappa = 1\n"), ParseError);
  EXPECT_THROW(parse_config("[model]\nkappa 1\n"), ParseError);
  EXPECT_THROW(parse_config("[model]\nkappa = abc\n"), ParseError);
  EXPECT_THROW(parse_config("[mesh]\nnum_cells = 1.5\n"), ParseError);
  EXPECT_THROW(parse_config("[solver]\nrecord_every = 2\n[output]\nrecord_every = 3\n"), ParseError);
  EXPECT_THROW(parse_config("[diffusion]\nkind = magic\n"), ParseError);
  EXPECT_THROW(parse_config("[model\n"), ParseError);
}

TEST(ParseConfig, ValidationProblems) {
  EXPECT_THROW(parse_config("[model]\nlambda = 9\n"), ValidationError);
  EXPECT_THROW(parse_config("[model]\ns_gamma = 0.5, 0.4, 0.3\n"), ValidationError);
  EXPECT_THROW(parse_config("[model]\nkappa = -1\n"), ValidationError);
  EXPECT_THROW(parse_config("[mesh]\nnum_cells = 1\n"), ValidationError);
  EXPECT_THROW(parse_config("[solver]\ndamping = 2\n"), ValidationError);
  EXPECT_THROW(parse_config("[initial]\nprofile = step_profile\nleft_state = 0.1, 0.1\n"), ValidationError);
}

TEST(ParseConfig, RecordEveryInEitherSection) {
  EXPECT_EQ(parse_config("[output]\nrecord_every = 4\n").solver.record_every, 4);
  EXPECT_EQ(parse_config("[solver]\nrecord_every = 5\n").solver.record_every, 5);
}

TEST(RenderConfig, RoundTrip) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    RunConfig c;
    c.model.kappa = 1e-4 + 1e-3 * u(rng);
    c.model.eps = 1e-3 * u(rng);
    c.model.s_gamma = {0.1 + 0.1 * u(rng), 0.1 * u(rng) + 0.05, 0.2 * u(rng) + 0.01};
    c.solver.fp_tol = 1e-10 * (1 + u(rng));
    c.solver.damping = 0.5 + 0.5 * u(rng);
    c.solver.record_every = 1 + k % 4;
    c.solver.strict_entropy = k % 2;
    c.mesh.num_cells = 8 + k;
    c.mesh.x_right = 1.0 + u(rng);
    c.diffusion = {k % 3 ? DiffusionKind::StateWeighted : DiffusionKind::ScaledProjection, 0.5 + u(rng), 2.0 + u(rng)};
    c.initial.profile = static_cast<InitialProfile>(k % 3);
    c.initial.amplitude = 0.2 * u(rng);
    c.initial.species_index = 1 + k % 3;
    if (c.initial.profile == InitialProfile::StepProfile) {
      c.initial.left_state = {0.1, 0.2, 0.3};
      c.initial.right_state = {0.05, 0.05, 0.05 + 0.1 * u(rng)};
    }
    c.output.directory = "out dir/" + std::to_string(k);
    const auto text = render_config(c);
    EXPECT_EQ(parse_config(text), c) << text;
  }
}

TEST(InitialField, ProfilesAreAdmissible) {
  for (auto profile : {InitialProfile::Equilibrium, InitialProfile::SinePerturbation, InitialProfile::StepProfile}) {
    RunConfig c;
    c.mesh.num_cells = 20;
    c.initial.profile = profile;
    c.initial.left_state = {0.3, 0.2, 0.1};
    c.initial.right_state = {0.1, 0.1, 0.1};
    const auto mesh = build_mesh(c.mesh);
    const auto f = initial_field(c, mesh);
    for (int k = 0; k < mesh.num_nodes(); ++k) EXPECT_TRUE(f.state(k).in_domain());
    EXPECT_EQ(f.values.row(0), f.values.row(mesh.num_nodes() - 1));
  }
}

TEST(WriteOutputs, EquilibriumRowsAndSchema) {
  RunConfig c;
  c.mesh.num_cells = 16;
  c.initial.profile = InitialProfile::Equilibrium;
  c.solver.t_end = 10e-3;
  const auto mesh = build_mesh(c.mesh);
  const Constitutive model(c.model);
  const auto traj = run_simulation(initial_field(c, mesh), mesh, model, c.diffusion, c.solver);
  const auto dir = scratch("eq");
  const auto manifest = write_outputs(traj, c, mesh, model, dir.string());
  const auto rows = lines_of(slurp(dir / "diagnostics.csv"));
  ASSERT_EQ(rows.size(), 11u);
  EXPECT_EQ(rows[0], kDiagnosticsHeader);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    std::vector<std::string> cols;
    std::istringstream in(rows[k]);
    for (std::string f; std::getline(in, f, ',');) cols.push_back(f);
    ASSERT_EQ(cols.size(), 11u);
    for (int j = 3; j <= 7; ++j) EXPECT_EQ(std::stod(cols[j]), 0.0) << rows[k];
  }
  const auto snaps = lines_of(slurp(dir / "snapshots.csv"));
  EXPECT_EQ(snaps[0], "time,node_index,x,S_1,S_2,S_3");
  EXPECT_EQ(snaps.size(), 1u + 11u * 17u);
  const auto j = nlohmann::ordered_json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(j.dump(2) + "\n", manifest);
  EXPECT_TRUE(j.contains("apriori"));
  EXPECT_TRUE(j.contains("versions"));
  EXPECT_EQ(j["entropy_check"]["margins"].size(), 10u);
  EXPECT_EQ(parse_config(j["config_text"].get<std::string>()), c);
}

TEST(WriteOutputs, LyapunovColumnNonIncreasingAndDeterministic) {
  RunConfig c;
  c.mesh.num_cells = 32;
  c.solver.t_end = 10e-3;
  const auto mesh = build_mesh(c.mesh);
  const Constitutive model(c.model);
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  for (const auto& dir : {a, b}) {
    const auto traj = run_simulation(initial_field(c, mesh), mesh, model, c.diffusion, c.solver);
    write_outputs(traj, c, mesh, model, dir.string());
  }
  for (const char* f : {"diagnostics.csv", "snapshots.csv", "manifest.json"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  const auto rows = lines_of(slurp(a / "diagnostics.csv"));
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto first = rows[k].find(',');
    const auto second = rows[k].find(',', first + 1);
    const auto third = rows[k].find(',', second + 1);
    const double l = std::stod(rows[k].substr(second + 1, third - second - 1));
    EXPECT_LE(l, prev);
    prev = l;
  }
}

TEST(WriteOutputs, UnwritableTargetLeavesNoManifest) {
  RunConfig c;
  c.mesh.num_cells = 8;
  c.solver.t_end = 2e-3;
  const auto mesh = build_mesh(c.mesh);
  const Constitutive model(c.model);
  const auto traj = run_simulation(initial_field(c, mesh), mesh, model, c.diffusion, c.solver);

  const auto base = scratch("unwritable");
  fs::create_directories(base);
  { std::ofstream(base / "plain_file") << "x"; }
  EXPECT_THROW(write_outputs(traj, c, mesh, model, (base / "plain_file" / "sub").string()), IoError);

  // A directory squatting on a temporary name makes the second file fail.
  const auto dir = base / "partial";
  fs::create_directories(dir / "snapshots.csv.tmp");
  try {
    write_outputs(traj, c, mesh, model, dir.string());
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("snapshots.csv"), std::string::npos) << e.what();
  }
  EXPECT_FALSE(fs::exists(dir / "manifest.json"));
}

TEST(LoadConfig, MissingFile) {
  EXPECT_THROW(load_config("/nonexistent/dir/file.cfg"), IoError);
}
