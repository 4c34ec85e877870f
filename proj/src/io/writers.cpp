#include "xxzotoc/io/writers.hpp"

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace xxz::io {

namespace fs = std::filesystem;

namespace {

nlohmann::json number(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

void put_complex(nlohmann::json& doc, const std::string& stem, xxz_complex z) {
  doc[stem + "_re"] = number(z.re);
  doc[stem + "_im"] = number(z.im);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream in(line);
  std::string cell;
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

const std::vector<std::string> kPhaseColumns{"jz", "h", "n", "boundary", "op", "window",
                                             "f_sat_re", "f_gs_re", "f_ex_re", "status"};

}  // namespace

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void ensure_directory(const std::string& path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec) throw WriteError(path + ": cannot create directory: " + ec.message());
}

void write_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw WriteError(tmp.string() + ": cannot open for writing");
    out << content;
    out.flush();
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw WriteError(tmp.string() + ": write failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw WriteError(path + ": cannot move into place: " + ec.message());
  }
}

const char* pauli_name(int kind) {
  switch (kind) {
    case XXZ_SIGMA_X: return "sx";
    case XXZ_SIGMA_Y: return "sy";
    default: return "sz";
  }
}

const char* boundary_name(int boundary) {
  switch (boundary) {
    case XXZ_OPEN: return "open";
    case XXZ_PERIODIC: return "periodic";
    default: return "default";
  }
}

std::string spectrum_csv(const std::vector<xxz_level>& levels) {
  std::string out = "index,energy,sector,theta\n";
  for (const auto& l : levels) {
    out += std::to_string(l.index) + ',' + format_real(l.energy) + ',' + std::to_string(l.magnetization) + ',' +
           std::to_string(l.theta) + '\n';
  }
  return out;
}

std::string time_series_csv(const std::vector<double>& times, const std::vector<xxz_complex>& values) {
  std::string out = "t,re_F,im_F\n";
  for (std::size_t k = 0; k < times.size() && k < values.size(); ++k) {
    out += format_real(times[k]) + ',' + format_real(values[k].re) + ',' + format_real(values[k].im) + '\n';
  }
  return out;
}

nlohmann::json report_json(const xxz_otoc_summary& s, const ConfigMap& config) {
  nlohmann::json doc;
  put_complex(doc, "f_saturation", s.f_saturation);
  put_complex(doc, "f_gs", s.f_gs);
  put_complex(doc, "f_ex", s.f_ex);
  nlohmann::json terms;
  put_complex(terms, "i_pair_ab", s.term_pair_ab);
  put_complex(terms, "ii_pair_ag", s.term_pair_ag);
  put_complex(terms, "iii_all_equal", s.term_all_equal);
  put_complex(terms, "iv_accidental", s.term_accidental);
  doc["terms"] = terms;
  if (s.has_average) {
    nlohmann::json avg;
    put_complex(avg, "f_mean", s.f_time_average);
    avg["re_min"] = number(s.re_min);
    avg["re_max"] = number(s.re_max);
    doc["time_average"] = avg;
  }
  doc["metadata"] = {
      {"tolerance", number(s.tolerance)},
      {"ground_set_size", s.ground_set_size},
      {"initial_eigenindex", s.initial_eigenindex < 0 ? nlohmann::json(nullptr) : nlohmann::json(s.initial_eigenindex)},
      {"initial_magnetization", s.initial_magnetization},
      {"w_site", s.w_site},
      {"v_site", s.v_site},
      {"quadruples", s.quadruples},
  };
  doc["config"] = config;
  return doc;
}

std::string phase_diagram_csv(const std::vector<xxz_sweep_record>& records, const std::string& window) {
  std::string out;
  for (const auto& c : kPhaseColumns) out += (out.empty() ? "" : ",") + c;
  out += '\n';
  for (const auto& r : records) {
    out += format_real(r.jz_over_j) + ',' + format_real(r.h_over_j) + ',' + std::to_string(r.n_sites) + ',' +
           boundary_name(r.boundary) + ',' + pauli_name(r.op) + ':' + std::to_string(r.site) + ',' + window + ',' +
           format_real(r.f_saturation.re) + ',' + format_real(r.f_gs.re) + ',' + format_real(r.f_ex.re) + ',' +
           (r.ok ? "ok" : "failed") + '\n';
  }
  return out;
}

std::vector<PhaseDiagramRow> read_phase_diagram_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw WriteError(path + ": cannot open");
  std::string line;
  if (!std::getline(in, line)) throw WriteError(path + ": empty file");
  const auto header = split_csv_line(line);
  for (std::size_t c = 0; c < kPhaseColumns.size(); ++c) {
    if (c >= header.size() || header[c] != kPhaseColumns[c]) {
      throw WriteError(path + ": column " + std::to_string(c + 1) + " must be '" + kPhaseColumns[c] + "'");
    }
  }
  std::vector<PhaseDiagramRow> rows;
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != kPhaseColumns.size()) {
      throw WriteError(path + ":" + std::to_string(number) + ": expected " + std::to_string(kPhaseColumns.size()) +
                       " columns");
    }
    try {
      PhaseDiagramRow r;
      r.jz = parse_real(cells[0]);
      r.h = parse_real(cells[1]);
      r.n = static_cast<int>(parse_integer(cells[2]));
      r.boundary = cells[3];
      r.op = cells[4];
      r.window = cells[5];
      r.f_sat_re = parse_real(cells[6]);
      r.f_gs_re = parse_real(cells[7]);
      r.f_ex_re = parse_real(cells[8]);
      r.status = cells[9];
      rows.push_back(std::move(r));
    } catch (const ConfigError& e) {
      throw WriteError(path + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return rows;
}

nlohmann::json scaling_json(const std::vector<ScalingInput>& points, const xxz_fit& fit) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points) pts.push_back({{"n", p.n}, {"jz_c", number(p.jz_c)}});
  return {{"points", pts},
          {"a", number(fit.a)},
          {"xi", number(fit.xi)},
          {"jz_inf", number(fit.jz_inf)},
          {"residual", number(fit.residual)}};
}

std::string diagnostics_csv(const std::vector<DiagnosticsLine>& rows) {
  std::string out = "Jz,h,N,intra_ground_max,cross_set_max,pr_ground,fluct,tau\n";
  for (const auto& r : rows) {
    const auto& v = r.values;
    out += format_real(r.jz) + ',' + format_real(r.h) + ',' + std::to_string(r.n) + ',' +
           format_real(v.intra_ground_max) + ',' + format_real(v.cross_set_max) + ',' + format_real(v.pr_ground) +
           ',' + format_real(v.fluct) + ',' + format_real(v.tau) + '\n';
  }
  return out;
}

nlohmann::json manifest_json(const std::string& command, const ConfigMap& config,
                             const std::vector<std::string>& outputs) {
  return {{"tool", "xxzotoc"}, {"version", xxz_version()}, {"command", command},
          {"config", config}, {"outputs", outputs}};
}

std::string dump_json(const nlohmann::json& document) { return document.dump(2) + "\n"; }

}  // namespace xxz::io
