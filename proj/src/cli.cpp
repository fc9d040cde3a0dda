#include "vdns/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <istream>
#include <ostream>
#include <sstream>

#include "vdns/assembly.hpp"
#include "vdns/io.hpp"
#include "vdns/timestepper.hpp"
#include "vdns/verify.hpp"

namespace vdns {

namespace {

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "case.name",         "case.mu",         "mesh.family",       "mesh.file",
      "mesh.levels",       "mesh.level",      "time.dt0",          "time.t_final",
      "time.picard_iterations", "time.diagnostics_every", "output.directory", "output.vtk",
      "output.vtk_every",  "output.matrix",   "run.serial",        "check.seed",
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

long long parse_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

int to_int(const std::string& key, const std::string& v) {
  const long long x = parse_int(key, v);
  if (x < -1000000000LL || x > 1000000000LL) throw ConfigError(key + ": out of range");
  return static_cast<int>(x);
}

void apply(RunConfig& c, const std::string& key, const std::string& v) {
  if (key == "case.name") c.case_name = v;
  else if (key == "case.mu") c.mu = parse_double(key, v);
  else if (key == "mesh.family") c.family = v;
  else if (key == "mesh.file") c.mesh_file = v;
  else if (key == "mesh.levels") c.levels = to_int(key, v);
  else if (key == "mesh.level") c.level = to_int(key, v);
  else if (key == "time.dt0") c.dt0 = parse_double(key, v);
  else if (key == "time.t_final") c.t_final = parse_double(key, v);
  else if (key == "time.picard_iterations") c.picard_iterations = to_int(key, v);
  else if (key == "time.diagnostics_every") c.diagnostics_every = to_int(key, v);
  else if (key == "output.directory") c.output_dir = v;
  else if (key == "output.vtk") c.emit_vtk = parse_bool(key, v);
  else if (key == "output.vtk_every") c.vtk_every = to_int(key, v);
  else if (key == "output.matrix") c.emit_matrix = parse_bool(key, v);
  else if (key == "run.serial") c.serial = parse_bool(key, v);
  else if (key == "check.seed") {
    const long long s = parse_int(key, v);
    if (s < 0) throw ConfigError(key + ": must be nonnegative");
    c.seed = static_cast<std::uint64_t>(s);
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
}

bool is_manufactured(const std::string& name) { return name == "guermond"; }

ProblemData problem_for(const RunConfig& c) {
  if (is_manufactured(c.case_name)) return guermond_case(c.mu).problem_data();
  return demo_problem(c.case_name, c.mu);
}

TimeConfig time_config(const RunConfig& c, int level) {
  TimeConfig t;
  t.dt = c.dt0 / std::ldexp(1.0, level);
  t.t_final = c.t_final;
  t.picard_iterations = c.picard_iterations;
  t.diagnostics_every = c.diagnostics_every;
  return t;
}

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

std::string rate(const std::optional<double>& r) {
  if (!r) return {};
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", *r);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string ledger_csv(const EnergyLedger& ledger) {
  std::string s = diagnostics_csv_header() + "\n";
  for (const StepRecord& r : ledger.records) s += diagnostics_csv_row(r) + "\n";
  return s;
}

std::string failure_text(const std::string& where, const std::exception& e) {
  std::string s = where + ": " + e.what() + "\n";
  if (const auto* v = dynamic_cast<const InvariantViolation*>(&e)) {
    s += "step " + std::to_string(v->step()) + "\n";
    if (v->cell() != no_cell) s += "cell " + std::to_string(v->cell()) + "\n";
    s += "value " + number(v->value()) + "\n";
  }
  return s;
}

struct LevelResult {
  StudyRow row;
  std::string diagnostics;
};

LevelResult simulate_level(const RunConfig& c, int level) {
  const Mesh mesh = make_mesh(c, level);
  const ManufacturedCase mc = guermond_case(c.mu);
  const TimeConfig tc = time_config(c, level);
  TimeStepper stepper(mesh, mc.problem_data(), tc);
  ErrorTracker tracker(mesh, stepper.operators(), mc, tc.dt, stepper.rho_lower());
  const auto result =
      stepper.run([&](std::size_t step, const SimulationState& s) { tracker.sample(step, s); });
  LevelResult out;
  out.row.family = c.family;
  out.row.level = level;
  out.row.h = mesh.h();
  out.row.dt = tc.dt;
  out.row.err_density = tracker.density_error();
  out.row.err_velocity = tracker.velocity_error();
  out.diagnostics = ledger_csv(result.ledger);
  return out;
}

/// Log-log script with reference slopes anchored at the coarsest level.
std::string plot_script(const std::vector<StudyRow>& rows) {
  std::ostringstream s;
  s << "# gnuplot plot.gp  ->  convergence.png\n"
    << "set datafile separator ','\n"
    << "set terminal pngcairo size 1000,420\n"
    << "set output 'convergence.png'\n"
    << "set logscale xy\n"
    << "set key bottom right\n"
    << "set xlabel 'h'\n"
    << "set multiplot layout 1,2\n";
  const std::string family = rows.empty() ? "" : rows.front().family;
  const double h0 = rows.empty() ? 1.0 : rows.front().h;
  const double ed = rows.empty() ? 1.0 : rows.front().err_density;
  const double ev = rows.empty() ? 1.0 : rows.front().err_velocity;
  s << "set title 'density error'\n"
    << "plot 'report.csv' skip 1 using 3:5 with linespoints pt 7 title '" << family << "', \\\n"
    << "     " << number(ed / std::sqrt(h0)) << " * x**0.5 dashtype 2 title 'h^{1/2}'\n";
  s << "set title 'velocity error'\n"
    << "plot 'report.csv' skip 1 using 3:6 with linespoints pt 7 title '" << family << "', \\\n"
    << "     " << number(ev / h0) << " * x dashtype 2 title 'h'\n";
  s << "unset multiplot\n";
  return s.str();
}

}  // namespace

void RunConfig::validate() const {
  if (case_name != "guermond" && case_name != "zero" && case_name != "bump" &&
      case_name != "stratified") {
    throw ConfigError("case.name: unknown case '" + case_name +
                      "' (guermond, zero, bump, stratified)");
  }
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("case.mu must be positive");
  if (family != "triangular" && family != "cartesian" && family != "hexagonal" &&
      family != "file") {
    throw ConfigError("mesh.family: unknown family '" + family +
                      "' (triangular, cartesian, hexagonal, file)");
  }
  if (family == "file" && mesh_file.empty()) throw ConfigError("mesh.file is required for family file");
  if (levels < 1) throw ConfigError("mesh.levels must be >= 1");
  if (level < 0) throw ConfigError("mesh.level must be >= 0");
  if (family == "hexagonal" && (levels > 4 || level > 3)) {
    throw ConfigError("hexagonal family has bundled levels 0 to 3 only");
  }
  if (!(dt0 > 0.0) || !std::isfinite(dt0)) throw ConfigError("time.dt0 must be positive");
  if (!(t_final > 0.0) || !std::isfinite(t_final)) throw ConfigError("time.t_final must be positive");
  if (picard_iterations < 0) throw ConfigError("time.picard_iterations must be >= 0");
  if (diagnostics_every < 1) throw ConfigError("time.diagnostics_every must be >= 1");
  if (vtk_every < 1) throw ConfigError("output.vtk_every must be >= 1");
  if (output_dir.empty()) throw ConfigError("output.directory must not be empty");
}

std::vector<std::string> config_keys() { return known_keys(); }

std::map<std::string, std::string> parse_config_text(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string section;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;
    const std::string at = "line " + std::to_string(number) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(at + "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(at + "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(at + "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(at + "missing key");
    const std::string full = section.empty() ? key : section + "." + key;
    try {
      out[canonical_key(full)] = value;
    } catch (const ConfigError& e) {
      throw ConfigError(at + e.what());
    }
  }
  return out;
}

std::string canonical_key(const std::string& key) {
  const auto& keys = known_keys();
  if (key.find('.') != std::string::npos) {
    for (const std::string& k : keys) {
      if (k == key) return k;
    }
    throw ConfigError("unknown key '" + key + "'");
  }
  std::string match;
  for (const std::string& k : keys) {
    if (k.substr(k.find('.') + 1) == key) {
      if (!match.empty()) throw ConfigError("ambiguous key '" + key + "'");
      match = k;
    }
  }
  if (match.empty()) throw ConfigError("unknown key '" + key + "'");
  return match;
}

RunConfig make_config(const std::vector<std::pair<std::string, std::string>>& values) {
  RunConfig c;
  for (const auto& [key, value] : values) apply(c, canonical_key(key), value);
  c.validate();
  return c;
}

RunConfig load_config(const std::optional<std::filesystem::path>& file,
                      const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::vector<std::pair<std::string, std::string>> values;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw ConfigError("cannot read config file " + file->string());
    try {
      for (auto& kv : parse_config_text(in)) values.emplace_back(kv.first, kv.second);
    } catch (const ConfigError& e) {
      throw ConfigError(file->string() + ": " + e.what());
    }
  }
  values.insert(values.end(), overrides.begin(), overrides.end());
  return make_config(values);
}

std::filesystem::path resolve_output_dir(const RunConfig& config) {
  const char* root = std::getenv("VDNS_OUTPUT_ROOT");
  if (root && *root && config.output_dir.is_relative()) {
    return std::filesystem::path(root) / config.output_dir;
  }
  return config.output_dir;
}

void ensure_writable(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw ConfigError("output directory " + dir.string() + " cannot be created");
  }
  const std::filesystem::path probe = dir / ".vdns_write_probe";
  {
    std::ofstream out(probe);
    if (!out || !(out << "probe")) {
      throw ConfigError("output directory " + dir.string() + " is not writable");
    }
  }
  std::filesystem::remove(probe, ec);
}

Mesh make_mesh(const RunConfig& config, int level) {
  const std::size_t scale = std::size_t{1} << level;
  if (config.family == "triangular") return build_triangular(4 * scale);
  if (config.family == "cartesian") return build_cartesian(5 * scale, 5 * scale);
  if (config.family == "hexagonal") return bundled_mesh("hexa_" + std::to_string(level));
  if (config.family == "file") {
    std::string path = config.mesh_file;
    const auto at = path.find("{level}");
    if (at != std::string::npos) path.replace(at, 7, std::to_string(level));
    return load_mesh(path);
  }
  throw ConfigError("unknown mesh family '" + config.family + "'");
}

std::string format_report_csv(const std::vector<StudyRow>& rows) {
  std::string s = "family,level,h,dt,err_density,err_velocity,eoc_density,eoc_velocity\n";
  for (const StudyRow& r : rows) {
    s += r.family + "," + std::to_string(r.level) + "," + number(r.h) + "," + number(r.dt) + "," +
         number(r.err_density) + "," + number(r.err_velocity) + "," + rate(r.eoc_density) + "," +
         rate(r.eoc_velocity) + "\n";
  }
  return s;
}

StudyOutcome run_convergence_study(const RunConfig& config, std::ostream& log) {
  StudyOutcome outcome;
  std::filesystem::path dir;
  try {
    config.validate();
    if (!is_manufactured(config.case_name)) {
      throw ConfigError("study needs a case with an exact solution (guermond)");
    }
    for (int level = 0; level < config.levels; ++level) {
      try {
        time_config(config, level).validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError("level " + std::to_string(level) + ": " + e.what());
      }
    }
    dir = resolve_output_dir(config);
    ensure_writable(dir);
  } catch (const std::exception& e) {
    outcome.status = 2;
    outcome.failure = e.what();
    log << "error: " << e.what() << '\n';
    return outcome;
  }

  const auto sample = sample_pde_residual(guermond_case(config.mu), 200, config.seed);
  if (sample.momentum > 1e-5 || sample.divergence > 1e-6 || sample.transport > 1e-6) {
    outcome.status = 1;
    outcome.failure = "manufactured forcing fails the PDE residual check";
    write_text(dir / "failure.txt", outcome.failure + "\n");
    log << "error: " << outcome.failure << '\n';
    return outcome;
  }

  std::vector<std::future<LevelResult>> pending;
  if (!config.serial) {
    for (int level = 0; level < config.levels; ++level) {
      pending.push_back(std::async(std::launch::async, simulate_level, std::cref(config), level));
    }
  }
  for (int level = 0; level < config.levels; ++level) {
    LevelResult r;
    try {
      r = config.serial ? simulate_level(config, level) : pending[level].get();
    } catch (const std::exception& e) {
      outcome.status = 1;
      outcome.failure = failure_text("level " + std::to_string(level), e);
      log << "error: level " << level << ": " << e.what() << '\n';
      for (int rest = level + 1; rest < static_cast<int>(pending.size()); ++rest) {
        try {
          pending[rest].get();
        } catch (const std::exception&) {
        }
      }
      break;
    }
    write_text(dir / ("diagnostics_" + config.family + "_level" + std::to_string(level) + ".csv"),
               r.diagnostics);
    if (!outcome.rows.empty()) {
      const StudyRow& prev = outcome.rows.back();
      const double hs[2] = {prev.h, r.row.h};
      const double ed[2] = {prev.err_density, r.row.err_density};
      const double ev[2] = {prev.err_velocity, r.row.err_velocity};
      r.row.eoc_density = eoc(ed, hs).front();
      r.row.eoc_velocity = eoc(ev, hs).front();
    }
    log << "level " << level << ": h = " << number(r.row.h) << ", dt = " << number(r.row.dt)
        << ", err_density = " << number(r.row.err_density)
        << ", err_velocity = " << number(r.row.err_velocity);
    if (r.row.eoc_density) {
      log << ", eoc " << rate(r.row.eoc_density) << " / " << rate(r.row.eoc_velocity);
    }
    log << '\n';
    outcome.rows.push_back(r.row);
  }

  write_text(dir / "report.csv", format_report_csv(outcome.rows));
  write_text(dir / "plot.gp", plot_script(outcome.rows));
  if (outcome.status != 0) write_text(dir / "failure.txt", outcome.failure);
  return outcome;
}

int run_single(const RunConfig& config, std::ostream& log) {
  std::filesystem::path dir;
  std::optional<Mesh> mesh;
  TimeConfig tc;
  try {
    config.validate();
    tc = time_config(config, config.level);
    try {
      tc.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    dir = resolve_output_dir(config);
    ensure_writable(dir);
    mesh.emplace(make_mesh(config, config.level));
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    TimeStepper stepper(*mesh, problem_for(config), tc);
    stepper.keep_last_system(config.emit_matrix);
    const std::size_t n_steps = tc.n_steps();
    std::optional<ManufacturedCase> exact;
    std::optional<ErrorTracker> tracker;
    if (is_manufactured(config.case_name)) {
      exact = guermond_case(config.mu);
      tracker.emplace(*mesh, stepper.operators(), *exact, tc.dt, stepper.rho_lower());
    }
    const auto observer = [&](std::size_t step, const SimulationState& s) {
      if (tracker) tracker->sample(step, s);
      if (config.emit_vtk &&
          (step % static_cast<std::size_t>(config.vtk_every) == 0 || step == n_steps)) {
        char name[40];
        std::snprintf(name, sizeof name, "snapshot_%06zu.vtk", step);
        write_vtk(dir / name, *mesh, s.rho, s.u, s.p,
                  config.case_name + " t=" + number(s.t));
      }
    };
    const auto result = stepper.run(observer);
    write_text(dir / "diagnostics.csv", ledger_csv(result.ledger));
    if (config.emit_matrix) {
      if (const SparseSystem* sys = stepper.last_momentum_system()) {
        write_matrix_market(dir / "matrix.mtx", sys->matrix);
      }
    }
    log << "steps " << n_steps << ", cells " << mesh->n_cells() << ", density range ["
        << number(result.state.rho.min()) << ", " << number(result.state.rho.max()) << "]\n";
    if (tracker) {
      log << "err_density = " << number(tracker->density_error())
          << ", err_velocity = " << number(tracker->velocity_error()) << '\n';
    }
    return 0;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    try {
      write_text(dir / "failure.txt", failure_text("run", e));
    } catch (const std::exception&) {
    }
    return 1;
  }
}

}  // namespace vdns
