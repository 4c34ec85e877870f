#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xxzotoc/io/config.hpp"
#include "xxzotoc/io/writers.hpp"
#include "xxzotoc/xxzotoc.h"

namespace io = xxz::io;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

// Failure reported by the library or while writing outputs.
struct RunError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(xxz_status status) {
  if (status != XXZ_OK) throw RunError(std::string(xxz_status_string(status)) + ": " + xxz_last_error());
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using ChainPtr = std::unique_ptr<xxz_chain, Deleter<xxz_chain, xxz_chain_free>>;
using ResultPtr = std::unique_ptr<xxz_otoc_result, Deleter<xxz_otoc_result, xxz_otoc_result_free>>;
using SweepPtr = std::unique_ptr<xxz_sweep, Deleter<xxz_sweep, xxz_sweep_free>>;

// OpenBLAS reads its kernel choice at load time, so a broken default kernel
// can only be replaced by restarting the process with OPENBLAS_CORETYPE set.
void ensure_backend(char** argv) {
  if (xxz_backend_check() == XXZ_OK) return;
  if (std::getenv("OPENBLAS_CORETYPE") == nullptr) {
    const char* core = __builtin_cpu_supports("avx512f") ? "SkylakeX" : "Haswell";
    ::setenv("OPENBLAS_CORETYPE", core, 1);
    ::execv("/proc/self/exe", argv);
  }
  throw RunError(std::string("numeric: ") + xxz_last_error());
}

class Run {
 public:
  Run(std::string command, io::Settings settings) : command_(std::move(command)), s_(std::move(settings)) {
    out_dir_ = s_.text("out");
    verbose_ = s_.integer("verbose") != 0;
  }

  void execute() {
    if (command_ == "spectrum") spectrum();
    else if (command_ == "saturation") saturation(false);
    else if (command_ == "otoc") saturation(true);
    else if (command_ == "phase-diagram") phase_diagram();
    else if (command_ == "scaling") scaling();
    else if (command_ == "diagnostics") diagnostics();
    write("manifest.json", io::dump_json(io::manifest_json(command_, s_.values(), outputs_)));
  }

 private:
  void note(const std::string& message) const {
    if (verbose_) std::cerr << command_ << ": " << message << '\n';
  }

  void write(const std::string& name, const std::string& content) {
    io::ensure_directory(out_dir_);
    io::write_atomic(out_dir_ + "/" + name, content);
    if (name != "manifest.json") outputs_.push_back(name);
  }

  int boundary() const {
    const auto& b = s_.choice("boundary", {"default", "open", "periodic"});
    return b == "open" ? XXZ_OPEN : b == "periodic" ? XXZ_PERIODIC : XXZ_BOUNDARY_DEFAULT;
  }

  int op() const {
    const auto& o = s_.choice("op", {"sx", "sy", "sz"});
    return o == "sx" ? XXZ_SIGMA_X : o == "sy" ? XXZ_SIGMA_Y : XXZ_SIGMA_Z;
  }

  int site() const { return s_.text("site") == "bulk" ? -1 : static_cast<int>(s_.count("site")); }

  xxz_tolerance tolerance() const {
    const auto& text = s_.text("tolerance");
    const auto colon = text.find(':');
    const std::string mode = text.substr(0, colon);
    xxz_tolerance t{};
    if (mode == "relative") t.mode = XXZ_TOL_RELATIVE;
    else if (mode == "absolute") t.mode = XXZ_TOL_ABSOLUTE;
    else if (mode == "window") t.mode = XXZ_TOL_WINDOW;
    else throw io::ConfigError("tolerance: mode must be relative, absolute or window, got '" + text + "'");
    if (colon != std::string::npos) {
      try {
        t.value = io::parse_real(text.substr(colon + 1));
      } catch (const io::ConfigError&) {
        throw io::ConfigError("tolerance: bad value in '" + text + "'");
      }
    } else if (mode == "window" && s_.has("window")) {
      t.value = s_.real("window");
    } else {
      throw io::ConfigError("tolerance: expected mode:value, got '" + text + "'");
    }
    return t;
  }

  std::string window_label() const {
    const auto t = tolerance();
    return t.mode == XXZ_TOL_WINDOW ? io::format_real(t.value) : std::string();
  }

  xxz_chain_params chain(int n, double jz, double h) const {
    xxz_chain_params p;
    xxz_chain_params_default(&p);
    p.n_sites = n;
    p.jz_over_j = jz;
    p.h_over_j = h;
    p.boundary = boundary();
    p.max_sites = static_cast<int>(s_.integer("max-sites"));
    return p;
  }

  xxz_chain_params single_chain() const {
    return chain(static_cast<int>(s_.integer("n")), s_.real("jz"), s_.real("h"));
  }

  ChainPtr solve(const xxz_chain_params& p) const {
    const auto tol = tolerance();
    xxz_chain* raw = nullptr;
    note("diagonalizing N=" + std::to_string(p.n_sites) + " Jz=" + io::format_real(p.jz_over_j) +
         " h=" + io::format_real(p.h_over_j));
    check(xxz_chain_solve(&p, &tol, &raw));
    return ChainPtr(raw);
  }

  xxz_otoc_params otoc_params(bool with_series) const {
    xxz_otoc_params p;
    xxz_otoc_params_default(&p);
    p.w_kind = p.v_kind = op();
    p.w_site = p.v_site = site();
    const auto& init = s_.text("initial");
    if (init == "ground") {
      p.initial_kind = XXZ_INIT_GROUND;
    } else if (init == "haar") {
      p.initial_kind = XXZ_INIT_HAAR;
    } else if (init.rfind("member:", 0) == 0) {
      p.initial_kind = XXZ_INIT_GROUND_MEMBER;
      try {
        const long long k = io::parse_integer(init.substr(7));
        if (k < 0) throw io::ConfigError("negative");
        p.member = static_cast<size_t>(k);
      } catch (const io::ConfigError&) {
        throw io::ConfigError("initial: expected member:K with K >= 0, got '" + init + "'");
      }
    } else {
      throw io::ConfigError("initial: expected ground, member:K or haar, got '" + init + "'");
    }
    p.seed = s_.count("seed");
    p.term_iv_scan = s_.choice("term-iv", {"absent", "scan"}) == "scan";
    p.quadruple_budget = s_.count("budget");
    if (with_series) {
      p.t_max = s_.real("t-max");
      p.n_samples = s_.count("samples");
      p.window = s_.real("window");
    }
    return p;
  }

  void spectrum() {
    const auto p = single_chain();
    const auto es = solve(p);
    size_t dim = 0, sets = 0, ground = 0;
    check(xxz_chain_info(es.get(), nullptr, &dim, &sets, &ground, nullptr));
    std::vector<xxz_level> levels(dim);
    check(xxz_chain_levels(es.get(), levels.data(), levels.size()));
    write("spectrum.csv", io::spectrum_csv(levels));
    std::printf("dimension %zu, %zu degenerate sets, ground set size %zu, E0 = %s\n", dim, sets, ground,
                io::format_real(levels.front().energy).c_str());
  }

  void saturation(bool with_series) {
    const auto chain_p = single_chain();
    const auto params = otoc_params(with_series);
    const size_t haar_samples = with_series ? s_.count("haar-samples") : 0;
    const auto es = solve(chain_p);

    xxz_otoc_result* raw = nullptr;
    note("evaluating the OTOC");
    check(xxz_otoc_run(es.get(), &params, with_series ? 1 : 0, &raw));
    const ResultPtr result(raw);
    xxz_otoc_summary summary;
    check(xxz_otoc_result_summary(result.get(), &summary));
    auto report = io::report_json(summary, s_.values());

    if (with_series) {
      const size_t n = xxz_otoc_result_series_length(result.get());
      std::vector<double> times(n);
      std::vector<xxz_complex> values(n);
      check(xxz_otoc_result_series(result.get(), times.data(), values.data(), n));
      write("timeseries.csv", io::time_series_csv(times, values));
      if (params.initial_kind == XXZ_INIT_HAAR && haar_samples > 1) {
        note("sampling " + std::to_string(haar_samples) + " Haar states");
        xxz_haar_estimate est;
        check(xxz_haar_infinite_temperature(es.get(), &params, haar_samples, &est));
        report["haar"] = {{"mean_re", est.mean.re}, {"mean_im", est.mean.im},
                          {"standard_error", est.standard_error}, {"samples", est.n_samples}};
      }
    }
    write("report.json", io::dump_json(report));
    std::printf("f_saturation = %s + %si, f_gs = %s, f_ex = %s", io::format_real(summary.f_saturation.re).c_str(),
                io::format_real(summary.f_saturation.im).c_str(), io::format_real(summary.f_gs.re).c_str(),
                io::format_real(summary.f_ex.re).c_str());
    if (summary.has_average) std::printf(", time average = %s", io::format_real(summary.f_time_average.re).c_str());
    std::printf("\n");
  }

  void phase_diagram() {
    const auto jz = s_.reals("jz");
    const auto h = s_.reals("h");
    const auto n = s_.integers("n");
    xxz_sweep_params p;
    xxz_sweep_params_default(&p);
    p.jz_values = jz.data();
    p.n_jz = jz.size();
    p.h_values = h.data();
    p.n_h = h.size();
    p.n_sites = n.data();
    p.n_n = n.size();
    p.boundary = boundary();
    p.op = op();
    p.site = site();
    p.tolerance = tolerance();
    p.term_iv_scan = s_.choice("term-iv", {"absent", "scan"}) == "scan";
    p.quadruple_budget = s_.count("budget");
    p.max_sites = static_cast<int>(s_.integer("max-sites"));
    p.workers = static_cast<unsigned>(s_.count("workers"));
    const std::string window = window_label();

    note("sweeping " + std::to_string(jz.size() * h.size() * n.size()) + " points");
    xxz_sweep* raw = nullptr;
    check(xxz_sweep_run(&p, &raw));
    const SweepPtr sweep(raw);
    std::vector<xxz_sweep_record> records(xxz_sweep_size(sweep.get()));
    for (size_t k = 0; k < records.size(); ++k) {
      check(xxz_sweep_record_at(sweep.get(), k, &records[k]));
      if (!records[k].ok) std::cerr << "point " << k << " failed: " << xxz_sweep_record_error(sweep.get(), k) << '\n';
    }
    write("phase_diagram.csv", io::phase_diagram_csv(records, window));
    std::printf("%zu points, %zu failed\n", records.size(), xxz_sweep_failures(sweep.get()));
  }

  void scaling() {
    const double h = s_.real("h");
    const bool use_gs = s_.choice("series", {"f_sat", "f_gs"}) == "f_gs";
    const double threshold = s_.real("threshold");
    const auto& dir = s_.choice("direction", {"any", "rising", "falling"});
    const int direction = dir == "rising" ? XXZ_CROSS_RISING : dir == "falling" ? XXZ_CROSS_FALLING : XXZ_CROSS_ANY;

    std::map<int, std::map<double, double>> curves;
    for (const auto& path : s_.strings("input")) {
      try {
        for (const auto& row : io::read_phase_diagram_csv(path)) {
          if (row.status != "ok" || std::abs(row.h - h) > 1e-9) continue;
          curves[row.n][row.jz] = use_gs ? row.f_gs_re : row.f_sat_re;
        }
      } catch (const io::WriteError& e) {
        throw io::ConfigError(std::string("input: ") + e.what());
      }
    }
    std::vector<io::ScalingInput> points;
    for (const auto& [n, curve] : curves) {
      std::vector<double> x, y;
      for (const auto& [jz, f] : curve) {
        x.push_back(jz);
        y.push_back(f);
      }
      double jz_c = 0.0;
      const auto status = xxz_critical_point(x.data(), y.data(), x.size(), threshold, direction, &jz_c);
      if (status == XXZ_ERR_NOT_FOUND) {
        std::cerr << "N=" << n << ": no crossing, skipped\n";
        continue;
      }
      check(status);
      points.push_back({static_cast<double>(n), jz_c});
      note("N=" + std::to_string(n) + ": Jz_c = " + io::format_real(jz_c));
    }
    std::vector<double> ns, jcs;
    for (const auto& p : points) {
      ns.push_back(p.n);
      jcs.push_back(p.jz_c);
    }
    xxz_fit fit;
    check(xxz_fit_power_law(ns.data(), jcs.data(), ns.size(), &fit));
    write("scaling.json", io::dump_json(io::scaling_json(points, fit)));
    std::printf("a = %s, xi = %s, jz_inf = %s, residual = %s\n", io::format_real(fit.a).c_str(),
                io::format_real(fit.xi).c_str(), io::format_real(fit.jz_inf).c_str(),
                io::format_real(fit.residual).c_str());
  }

  void diagnostics() {
    const auto jz = s_.reals("jz");
    const auto h = s_.reals("h");
    const auto n = s_.integers("n");
    const int kind = op();
    const int where = site();
    std::vector<io::DiagnosticsLine> rows;
    for (int sites : n) {
      for (double j : jz) {
        for (double f : h) {
          const auto es = solve(chain(sites, j, f));
          io::DiagnosticsLine line{j, f, sites, {}};
          check(xxz_diagnose(es.get(), kind, where, &line.values));
          rows.push_back(line);
        }
      }
    }
    write("diagnostics.csv", io::diagnostics_csv(rows));
    std::printf("%zu rows\n", rows.size());
  }

  std::string command_;
  io::Settings s_;
  std::string out_dir_;
  bool verbose_ = false;
  std::vector<std::string> outputs_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Out-of-time-order correlators of the XXZ spin chain"};
  app.set_version_flag("--version", std::string("xxzotoc ") + xxz_version());
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);

  struct Bound {
    CLI::App* sub;
    std::string config_path;
    std::map<std::string, std::string> flags;
  };
  std::vector<std::unique_ptr<Bound>> subs;
  for (const auto& schema : io::command_schemas()) {
    auto bound = std::make_unique<Bound>();
    bound->sub = app.add_subcommand(schema.name, schema.summary);
    // The field option is --h, so help has no short form.
    bound->sub->set_help_flag("--help", "Print this help message and exit");
    bound->sub->add_option("--config", bound->config_path, "key = value or JSON config file (a manifest works too)");
    for (const auto& key : schema.keys) {
      std::string help = key.help;
      if (!key.default_value.empty()) help += " [" + key.default_value + "]";
      if (key.required) help += " (required unless set in --config)";
      bound->sub->add_option("--" + key.key, bound->flags[key.key], help)->allow_extra_args(false);
    }
    subs.push_back(std::move(bound));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const Bound* chosen = nullptr;
  for (const auto& b : subs) {
    if (b->sub->parsed()) chosen = b.get();
  }
  const auto& schema = io::schema_for(chosen->sub->get_name());

  io::ConfigMap resolved;
  try {
    io::ConfigMap flags;
    for (const auto& [key, value] : chosen->flags) {
      if (chosen->sub->count("--" + key) > 0) flags[key] = value;
    }
    const io::ConfigMap file = chosen->config_path.empty() ? io::ConfigMap{} : io::load_config(chosen->config_path);
    resolved = io::resolve_config(schema, file, flags);
  } catch (const io::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << chosen->sub->help();
    return kExitUsage;
  }

  try {
    ensure_backend(argv);
    Run(schema.name, io::Settings(resolved)).execute();
  } catch (const io::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDomain;
  }
  return kExitOk;
}
