#include "dyncap/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "dyncap/errors.hpp"

namespace dyncap {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

const char* to_string(DiffusionKind kind) {
  return kind == DiffusionKind::ScaledProjection ? "scaled_projection" : "state_weighted";
}

const char* to_string(InitialProfile profile) {
  switch (profile) {
    case InitialProfile::Equilibrium: return "equilibrium";
    case InitialProfile::SinePerturbation: return "sine_perturbation";
    case InitialProfile::StepProfile: return "step_profile";
  }
  return "unknown";
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view v, int line) {
  v = trim(v);
  if (!v.empty() && v.front() == '+') v.remove_prefix(1);
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size() || v.empty()) {
    throw ParseError("expected a number, got '" + std::string(v) + "'", line);
  }
  return out;
}

int parse_int(std::string_view v, int line) {
  v = trim(v);
  int out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size() || v.empty()) {
    throw ParseError("expected an integer, got '" + std::string(v) + "'", line);
  }
  return out;
}

bool parse_bool(std::string_view v, int line) {
  v = trim(v);
  if (v == "true") return true;
  if (v == "false") return false;
  throw ParseError("expected true or false, got '" + std::string(v) + "'", line);
}

std::vector<double> parse_list(std::string_view v, int line) {
  std::vector<double> out;
  v = trim(v);
  if (v.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = v.find(',', start);
    out.push_back(parse_double(v.substr(start, comma == std::string_view::npos ? v.npos : comma - start), line));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string render_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ", ";
    out += format_double(v[k]);
  }
  return out;
}

}  // namespace

RunConfig parse_config(std::string_view text, bool validate) {
  RunConfig cfg;
  const std::set<std::string> sections{"model", "solver", "mesh", "diffusion", "initial", "output"};
  std::map<std::string, int> seen;  // "section.key" -> line
  int record_every_line = 0;
  bool s_gamma_given = false;
  std::string section;

  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view sv(raw);
    if (const auto hash = sv.find('#'); hash != sv.npos) sv = sv.substr(0, hash);
    sv = trim(sv);
    if (sv.empty()) continue;
    if (sv.front() == '[') {
      if (sv.back() != ']') throw ParseError("malformed section header", line);
      section = std::string(trim(sv.substr(1, sv.size() - 2)));
      if (!sections.count(section)) throw ParseError("unknown section [" + section + "]", line);
      continue;
    }
    const auto eq = sv.find('=');
    if (eq == sv.npos) throw ParseError("expected 'key = value'", line);
    const std::string key(trim(sv.substr(0, eq)));
    const std::string_view value = trim(sv.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", line);
    if (section.empty()) throw ParseError("key '" + key + "' outside of any section", line);
    const std::string full = section + "." + key;
    if (const auto it = seen.find(full); it != seen.end()) {
      throw ParseError("duplicate key '" + key + "' in [" + section + "] (first set on line " +
                           std::to_string(it->second) + ")",
                       line);
    }
    seen[full] = line;

    auto& m = cfg.model;
    auto& s = cfg.solver;
    bool known = true;
    if (section == "model") {
      if (key == "n_species") m.n_species = parse_int(value, line);
      else if (key == "lambda") m.lambda = parse_double(value, line);
      else if (key == "gamma") m.gamma = parse_double(value, line);
      else if (key == "gamma1") m.gamma1 = parse_double(value, line);
      else if (key == "beta1") m.beta1 = parse_double(value, line);
      else if (key == "beta2") m.beta2 = parse_double(value, line);
      else if (key == "s_gamma") { m.s_gamma = parse_list(value, line); s_gamma_given = true; }
      else if (key == "kappa") m.kappa = parse_double(value, line);
      else if (key == "eps") m.eps = parse_double(value, line);
      else if (key == "quadrature_tol") m.quadrature_tol = parse_double(value, line);
      else if (key == "rootfind_tol") m.rootfind_tol = parse_double(value, line);
      else known = false;
    } else if (section == "solver" || (section == "output" && key == "record_every")) {
      if (key == "record_every") {
        if (record_every_line) {
          throw ParseError("record_every already set on line " + std::to_string(record_every_line), line);
        }
        record_every_line = line;
        s.record_every = parse_int(value, line);
      }
      else if (key == "fp_tol") s.fp_tol = parse_double(value, line);
      else if (key == "fp_max_iters") s.fp_max_iters = parse_int(value, line);
      else if (key == "damping") s.damping = parse_double(value, line);
      else if (key == "homotopy_steps") s.homotopy_steps = parse_int(value, line);
      else if (key == "linear_tol") s.linear_tol = parse_double(value, line);
      else if (key == "t_end") s.t_end = parse_double(value, line);
      else if (key == "strict_entropy") s.strict_entropy = parse_bool(value, line);
      else known = false;
    } else if (section == "mesh") {
      if (key == "num_cells") cfg.mesh.num_cells = parse_int(value, line);
      else if (key == "x_left") cfg.mesh.x_left = parse_double(value, line);
      else if (key == "x_right") cfg.mesh.x_right = parse_double(value, line);
      else known = false;
    } else if (section == "diffusion") {
      if (key == "kind") {
        if (value == "scaled_projection") cfg.diffusion.kind = DiffusionKind::ScaledProjection;
        else if (value == "state_weighted") cfg.diffusion.kind = DiffusionKind::StateWeighted;
        else throw ParseError("unknown diffusion kind '" + std::string(value) + "'", line);
      }
      else if (key == "d0") cfg.diffusion.d0 = parse_double(value, line);
      else if (key == "d1") cfg.diffusion.d1 = parse_double(value, line);
      else known = false;
    } else if (section == "initial") {
      if (key == "profile") {
        if (value == "equilibrium") cfg.initial.profile = InitialProfile::Equilibrium;
        else if (value == "sine_perturbation") cfg.initial.profile = InitialProfile::SinePerturbation;
        else if (value == "step_profile") cfg.initial.profile = InitialProfile::StepProfile;
        else throw ParseError("unknown initial profile '" + std::string(value) + "'", line);
      }
      else if (key == "amplitude") cfg.initial.amplitude = parse_double(value, line);
      else if (key == "species_index") cfg.initial.species_index = parse_int(value, line);
      else if (key == "left_state") cfg.initial.left_state = parse_list(value, line);
      else if (key == "right_state") cfg.initial.right_state = parse_list(value, line);
      else known = false;
    } else if (section == "output") {
      if (key == "directory") cfg.output.directory = std::string(value);
      else known = false;
    }
    if (!known) throw ParseError("unknown key '" + key + "' in [" + section + "]", line);
  }

  if (!s_gamma_given && cfg.model.n_species != 3 && cfg.model.n_species >= 1) {
    cfg.model.s_gamma.assign(static_cast<std::size_t>(cfg.model.n_species), 0.45 / cfg.model.n_species);
  }
  if (validate) validate_config(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path, bool validate) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open configuration file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), validate);
}

void validate_config(const RunConfig& cfg) {
  std::vector<std::string> problems;
  const auto& m = cfg.model;
  const int n = m.n_species;
  if (n < 1) problems.emplace_back("n_species must be at least 1");
  if (static_cast<int>(m.s_gamma.size()) != n) problems.emplace_back("s_gamma must have n_species entries");
  double total = 0.0;
  for (double v : m.s_gamma) {
    if (!(v > 0.0)) problems.emplace_back("s_gamma entries must be positive");
    total += v;
  }
  if (!(total < 1.0)) problems.emplace_back("s_gamma must sum to less than 1");
  if (!(m.kappa > 0.0)) problems.emplace_back("kappa must be positive");
  if (!(m.eps >= 0.0)) problems.emplace_back("eps must be non-negative");
  if (!(m.quadrature_tol > 0.0) || !(m.rootfind_tol > 0.0)) problems.emplace_back("tolerances must be positive");
  const auto report = validate_assumptions(m);
  for (const auto& c : report.violated_clauses) problems.push_back("parameter clause violated: " + c);

  try {
    validate_solver_config(cfg.solver);
  } catch (const ValidationError& e) {
    problems.emplace_back(e.what());
  }
  if (cfg.mesh.num_cells < 2) problems.emplace_back("num_cells must be at least 2");
  if (!(cfg.mesh.x_left < cfg.mesh.x_right)) problems.emplace_back("x_left must be smaller than x_right");
  if (!(cfg.diffusion.d0 > 0.0) || !(cfg.diffusion.d1 >= cfg.diffusion.d0)) {
    problems.emplace_back("diffusion requires 0 < d0 <= d1");
  }
  const auto& ic = cfg.initial;
  if (ic.profile == InitialProfile::SinePerturbation) {
    if (ic.species_index < 1 || ic.species_index > n) problems.emplace_back("species_index out of range");
    if (!std::isfinite(ic.amplitude)) problems.emplace_back("amplitude must be finite");
  }
  if (ic.profile == InitialProfile::StepProfile) {
    for (const auto* st : {&ic.left_state, &ic.right_state}) {
      if (static_cast<int>(st->size()) != n) {
        problems.emplace_back("step profile states must have n_species entries");
        continue;
      }
      Vector v = Eigen::Map<const Vector>(st->data(), n);
      if (!SpeciesState(v).in_domain()) problems.emplace_back("step profile state outside the admissible set");
    }
  }
  if (!problems.empty()) {
    std::ostringstream msg;
    msg << "invalid configuration:";
    for (const auto& p : problems) msg << "\n  - " << p;
    throw ValidationError(msg.str());
  }
}

std::string render_config(const RunConfig& cfg) {
  std::ostringstream o;
  const auto& m = cfg.model;
  const auto& s = cfg.solver;
  o << "[model]\n"
    << "n_species = " << m.n_species << "\n"
    << "lambda = " << format_double(m.lambda) << "\n"
    << "gamma = " << format_double(m.gamma) << "\n"
    << "gamma1 = " << format_double(m.gamma1) << "\n"
    << "beta1 = " << format_double(m.beta1) << "\n"
    << "beta2 = " << format_double(m.beta2) << "\n"
    << "s_gamma = " << render_list(m.s_gamma) << "\n"
    << "kappa = " << format_double(m.kappa) << "\n"
    << "eps = " << format_double(m.eps) << "\n"
    << "quadrature_tol = " << format_double(m.quadrature_tol) << "\n"
    << "rootfind_tol = " << format_double(m.rootfind_tol) << "\n\n"
    << "[solver]\n"
    << "fp_tol = " << format_double(s.fp_tol) << "\n"
    << "fp_max_iters = " << s.fp_max_iters << "\n"
    << "damping = " << format_double(s.damping) << "\n"
    << "homotopy_steps = " << s.homotopy_steps << "\n"
    << "linear_tol = " << format_double(s.linear_tol) << "\n"
    << "t_end = " << format_double(s.t_end) << "\n"
    << "record_every = " << s.record_every << "\n"
    << "strict_entropy = " << (s.strict_entropy ? "true" : "false") << "\n\n"
    << "[mesh]\n"
    << "num_cells = " << cfg.mesh.num_cells << "\n"
    << "x_left = " << format_double(cfg.mesh.x_left) << "\n"
    << "x_right = " << format_double(cfg.mesh.x_right) << "\n\n"
    << "[diffusion]\n"
    << "kind = " << to_string(cfg.diffusion.kind) << "\n"
    << "d0 = " << format_double(cfg.diffusion.d0) << "\n"
    << "d1 = " << format_double(cfg.diffusion.d1) << "\n\n"
    << "[initial]\n"
    << "profile = " << to_string(cfg.initial.profile) << "\n"
    << "amplitude = " << format_double(cfg.initial.amplitude) << "\n"
    << "species_index = " << cfg.initial.species_index << "\n";
  if (!cfg.initial.left_state.empty()) o << "left_state = " << render_list(cfg.initial.left_state) << "\n";
  if (!cfg.initial.right_state.empty()) o << "right_state = " << render_list(cfg.initial.right_state) << "\n";
  o << "\n[output]\n"
    << "directory = " << cfg.output.directory << "\n";
  return o.str();
}

Mesh build_mesh(const MeshConfig& cfg) { return build_mesh(cfg.num_cells, cfg.x_left, cfg.x_right); }

NodalField initial_field(const RunConfig& cfg, const Mesh& mesh) {
  const int n = cfg.model.n_species;
  const Vector boundary = Eigen::Map<const Vector>(cfg.model.s_gamma.data(), n);
  NodalField f = constant_field(mesh, boundary);
  const auto& ic = cfg.initial;
  for (int k = 1; k + 1 < mesh.num_nodes(); ++k) {
    const double x = mesh.nodes[k];
    Vector st = boundary;
    if (ic.profile == InitialProfile::SinePerturbation) {
      const double xi = (x - mesh.x_left()) / mesh.length();
      st[ic.species_index - 1] += ic.amplitude * std::sin(std::numbers::pi * xi);
      // Clip into the admissible set.
      constexpr double kFloor = 1e-8;
      st = st.cwiseMax(kFloor);
      const double total = st.sum();
      if (total > 1.0 - kFloor) st *= (1.0 - kFloor) / total;
    } else if (ic.profile == InitialProfile::StepProfile) {
      const auto& src = x < 0.5 * (mesh.x_left() + mesh.x_right()) ? ic.left_state : ic.right_state;
      st = Eigen::Map<const Vector>(src.data(), n);
    }
    f.values.row(k) = st.transpose();
  }
  return f;
}

}  // namespace dyncap
