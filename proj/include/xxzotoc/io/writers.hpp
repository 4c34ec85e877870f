#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "xxzotoc/io/config.hpp"
#include "xxzotoc/xxzotoc.h"

namespace xxz::io {

class WriteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 17 significant digits; nan, inf and -inf for non-finite values.
std::string format_real(double value);

/// Writes to a temporary file in the target directory and renames it into
/// place, so a failed run never leaves a partial file.
void write_atomic(const std::string& path, const std::string& content);

/// Creates the directory (and parents) if needed.
void ensure_directory(const std::string& path);

std::string spectrum_csv(const std::vector<xxz_level>& levels);
std::string time_series_csv(const std::vector<double>& times, const std::vector<xxz_complex>& values);

/// f_*_re/im, the four resonance terms, time-average block, metadata and config echo.
nlohmann::json report_json(const xxz_otoc_summary& summary, const ConfigMap& config);

/// `window` is the averaging window T of the tolerance, or empty.
std::string phase_diagram_csv(const std::vector<xxz_sweep_record>& records, const std::string& window);

struct PhaseDiagramRow {
  double jz = 0.0;
  double h = 0.0;
  int n = 0;
  std::string boundary;
  std::string op;
  std::string window;
  double f_sat_re = 0.0;
  double f_gs_re = 0.0;
  double f_ex_re = 0.0;
  std::string status;
};

/// Reads a phase-diagram CSV, checking the header column by column.
std::vector<PhaseDiagramRow> read_phase_diagram_csv(const std::string& path);

struct ScalingInput {
  double n = 0.0;
  double jz_c = 0.0;
};

nlohmann::json scaling_json(const std::vector<ScalingInput>& points, const xxz_fit& fit);

struct DiagnosticsLine {
  double jz = 0.0;
  double h = 0.0;
  int n = 0;
  xxz_diagnostics values{};
};

std::string diagnostics_csv(const std::vector<DiagnosticsLine>& rows);

/// Tool name and version, subcommand, resolved config and written files.
nlohmann::json manifest_json(const std::string& command, const ConfigMap& config,
                             const std::vector<std::string>& outputs);

/// JSON text with a trailing newline; non-finite numbers become null.
std::string dump_json(const nlohmann::json& document);

const char* pauli_name(int kind);
const char* boundary_name(int boundary);

}  // namespace xxz::io
