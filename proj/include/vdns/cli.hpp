#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vdns/mesh.hpp"

namespace vdns {

/// Invalid configuration or unusable output location; reported before any compute.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Settings of a single run or a convergence study.
///
/// Config files are flat `key = value` lines grouped under `[section]`
/// headers; every key is listed in config_keys() as `section.key`.
struct RunConfig {
  /// guermond | zero | bump | stratified
  std::string case_name = "guermond";
  double mu = 1.0;

  /// triangular | cartesian | hexagonal | file
  std::string family = "triangular";
  /// Mesh path for family = file; `{level}` is replaced by the level number.
  std::string mesh_file;
  int levels = 4;
  /// Level used by `run`.
  int level = 0;

  double dt0 = 1e-3;
  double t_final = 1.0;
  int picard_iterations = 0;
  int diagnostics_every = 1;

  std::filesystem::path output_dir = "output";
  bool emit_vtk = false;
  /// Steps between VTK snapshots; the initial and final states are always written.
  int vtk_every = 100;
  bool emit_matrix = false;
  /// Levels of a study run one after another; otherwise they run concurrently.
  bool serial = true;

  std::uint64_t seed = 20240917;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

/// All recognised keys as `section.key`.
std::vector<std::string> config_keys();

/// Parses config text into `section.key -> value`; throws ConfigError with the line number.
std::map<std::string, std::string> parse_config_text(std::istream& in);

/// Accepts `section.key` or a bare key that names exactly one section's key.
std::string canonical_key(const std::string& key);

/// Builds a validated config from key/value pairs (later pairs win).
RunConfig make_config(const std::vector<std::pair<std::string, std::string>>& values);

/// Reads an optional config file, then applies command-line overrides.
RunConfig load_config(const std::optional<std::filesystem::path>& file,
                      const std::vector<std::pair<std::string, std::string>>& overrides);

/// output_dir, prefixed by $VDNS_OUTPUT_ROOT when that is set and the path is relative.
std::filesystem::path resolve_output_dir(const RunConfig& config);

/// Creates the directory and probes it with a temporary file; throws ConfigError.
void ensure_writable(const std::filesystem::path& dir);

/// Mesh of the configured family at a refinement level.
Mesh make_mesh(const RunConfig& config, int level);

struct StudyRow {
  std::string family;
  int level = 0;
  double h = 0.0;
  double dt = 0.0;
  double err_density = 0.0;
  double err_velocity = 0.0;
  std::optional<double> eoc_density;
  std::optional<double> eoc_velocity;
};

struct StudyOutcome {
  /// 0 on success, 1 when a level failed, 2 on configuration errors.
  int status = 0;
  std::vector<StudyRow> rows;
  std::string failure;
};

/// family,level,h,dt,err_density,err_velocity,eoc_density,eoc_velocity
std::string format_report_csv(const std::vector<StudyRow>& rows);

/// Runs every level of the study, writing report.csv, per-level diagnostics,
/// plot.gp and, on failure, failure.txt into the output directory.
StudyOutcome run_convergence_study(const RunConfig& config, std::ostream& log);

/// One simulation at config.level: diagnostics.csv, optional VTK snapshots and
/// matrix.mtx. Returns the process exit status.
int run_single(const RunConfig& config, std::ostream& log);

}  // namespace vdns
