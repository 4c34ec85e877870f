#include "xxzotoc/xxzotoc.h"

#include <cmath>
#include <exception>
#include <limits>
#include <new>
#include <optional>
#include <string>

#include "eigensolver.hpp"
#include "xxzotoc/diagnostics.hpp"
#include "xxzotoc/error.hpp"
#include "xxzotoc/otoc.hpp"
#include "xxzotoc/sweep.hpp"

struct xxz_chain {
  xxz::EigenSystem es;
};

struct xxz_otoc_result {
  xxz::OtocReport report;
};

struct xxz_sweep {
  xxz::SweepGrid grid;
};

namespace {

thread_local std::string last_error;

xxz_status status_of(xxz::ErrorKind kind) {
  switch (kind) {
    case xxz::ErrorKind::domain: return XXZ_ERR_DOMAIN;
    case xxz::ErrorKind::capacity: return XXZ_ERR_CAPACITY;
    case xxz::ErrorKind::numeric: return XXZ_ERR_NUMERIC;
    case xxz::ErrorKind::resource: return XXZ_ERR_RESOURCE;
    case xxz::ErrorKind::not_found: return XXZ_ERR_NOT_FOUND;
    case xxz::ErrorKind::fit: return XXZ_ERR_FIT;
    case xxz::ErrorKind::io: return XXZ_ERR_IO;
    case xxz::ErrorKind::usage: return XXZ_ERR_DOMAIN;
  }
  return XXZ_ERR_INTERNAL;
}

xxz_status fail_with(xxz_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

// Runs body and maps exceptions to status codes with a thread-local message.
template <class F>
xxz_status guarded(F&& body) {
  try {
    last_error.clear();
    body();
    return XXZ_OK;
  } catch (const xxz::Error& e) {
    return fail_with(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail_with(XXZ_ERR_CAPACITY, "out of memory");
  } catch (const std::exception& e) {
    return fail_with(XXZ_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail_with(XXZ_ERR_INTERNAL, "unknown failure");
  }
}

#define XXZ_REQUIRE_PTR(p) \
  if ((p) == nullptr) return fail_with(XXZ_ERR_NULL, std::string(#p) + " is null")

xxz_complex to_c(std::complex<double> z) { return {z.real(), z.imag()}; }

xxz::PauliKind pauli(int kind) {
  switch (kind) {
    case XXZ_SIGMA_X: return xxz::PauliKind::sigma_x;
    case XXZ_SIGMA_Y: return xxz::PauliKind::sigma_y;
    case XXZ_SIGMA_Z: return xxz::PauliKind::sigma_z;
  }
  xxz::fail(xxz::ErrorKind::domain, "op: unknown Pauli kind " + std::to_string(kind));
}

int pauli_code(xxz::PauliKind kind) {
  switch (kind) {
    case xxz::PauliKind::sigma_x: return XXZ_SIGMA_X;
    case xxz::PauliKind::sigma_y: return XXZ_SIGMA_Y;
    case xxz::PauliKind::sigma_z: break;
  }
  return XXZ_SIGMA_Z;
}

std::optional<xxz::Boundary> boundary(int code) {
  switch (code) {
    case XXZ_BOUNDARY_DEFAULT: return std::nullopt;
    case XXZ_OPEN: return xxz::Boundary::open;
    case XXZ_PERIODIC: return xxz::Boundary::periodic;
  }
  xxz::fail(xxz::ErrorKind::domain, "boundary: unknown code " + std::to_string(code));
}

xxz::DegeneracyTolerance tolerance(const xxz_tolerance* t) {
  if (t == nullptr) return {};
  switch (t->mode) {
    case XXZ_TOL_RELATIVE: return xxz::DegeneracyTolerance::relative(t->value);
    case XXZ_TOL_ABSOLUTE: return xxz::DegeneracyTolerance::absolute(t->value);
    case XXZ_TOL_WINDOW: return xxz::DegeneracyTolerance::window(t->value);
  }
  xxz::fail(xxz::ErrorKind::domain, "tolerance: unknown mode " + std::to_string(t->mode));
}

xxz::ChainSpec chain_spec(const xxz_chain_params& p) {
  xxz::ChainSpec s;
  s.n_sites = p.n_sites;
  s.jz_over_j = p.jz_over_j;
  s.h_over_j = p.h_over_j;
  s.boundary = boundary(p.boundary).value_or(xxz::ChainSpec::default_boundary(p.n_sites));
  if (p.max_sites > 0) s.max_sites = p.max_sites;
  return s;
}

xxz::OtocConfig otoc_config(const xxz::ChainSpec& chain, const xxz_otoc_params& p) {
  xxz::OtocConfig c;
  c.w_op = {pauli(p.w_kind), p.w_site < 0 ? chain.bulk_site() : p.w_site};
  c.v_op = {pauli(p.v_kind), p.v_site < 0 ? chain.bulk_site() : p.v_site};
  switch (p.initial_kind) {
    case XXZ_INIT_GROUND: c.initial = xxz::InitialState::ground(); break;
    case XXZ_INIT_GROUND_MEMBER: c.initial = xxz::InitialState::ground_member(p.member); break;
    case XXZ_INIT_HAAR: c.initial = xxz::InitialState::haar(p.seed); break;
    default: xxz::fail(xxz::ErrorKind::domain, "initial_kind: unknown code " + std::to_string(p.initial_kind));
  }
  c.time_grid = {p.t_max, p.n_samples};
  c.average_window = p.window;
  c.term_iv_mode = p.term_iv_scan ? xxz::TermIvMode::scan : xxz::TermIvMode::assume_absent;
  c.quadruple_budget = p.quadruple_budget;
  return c;
}

}  // namespace

extern "C" {

const char* xxz_version(void) { return XXZOTOC_VERSION_STRING; }

const char* xxz_status_string(xxz_status status) {
  switch (status) {
    case XXZ_OK: return "ok";
    case XXZ_ERR_DOMAIN: return "domain";
    case XXZ_ERR_CAPACITY: return "capacity";
    case XXZ_ERR_NUMERIC: return "numeric";
    case XXZ_ERR_RESOURCE: return "resource";
    case XXZ_ERR_NOT_FOUND: return "not_found";
    case XXZ_ERR_FIT: return "fit";
    case XXZ_ERR_IO: return "io";
    case XXZ_ERR_NULL: return "null";
    case XXZ_ERR_BUFFER: return "buffer";
    case XXZ_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* xxz_last_error(void) { return last_error.c_str(); }

xxz_status xxz_backend_check(void) {
  return guarded([] { xxz::detail::verify_blas(); });
}

void xxz_chain_params_default(xxz_chain_params* params) {
  if (params == nullptr) return;
  *params = {2, 1.0, 0.0, XXZ_BOUNDARY_DEFAULT, xxz::kDefaultMaxSites};
}

void xxz_tolerance_default(xxz_tolerance* t) {
  if (t == nullptr) return;
  const xxz::DegeneracyTolerance d;
  *t = {XXZ_TOL_RELATIVE, d.value};
}

void xxz_otoc_params_default(xxz_otoc_params* params) {
  if (params == nullptr) return;
  const xxz::OtocConfig d;
  *params = xxz_otoc_params{};
  params->w_kind = params->v_kind = XXZ_SIGMA_Z;
  params->w_site = params->v_site = -1;
  params->initial_kind = XXZ_INIT_GROUND;
  params->t_max = d.time_grid.t_max;
  params->n_samples = d.time_grid.n_samples;
  params->window = d.average_window;
  params->quadruple_budget = d.quadruple_budget;
}

void xxz_sweep_params_default(xxz_sweep_params* params) {
  if (params == nullptr) return;
  *params = xxz_sweep_params{};
  params->boundary = XXZ_BOUNDARY_DEFAULT;
  params->op = XXZ_SIGMA_Z;
  params->site = -1;
  xxz_tolerance_default(&params->tolerance);
  params->quadruple_budget = xxz::SweepSpec{}.quadruple_budget;
  params->max_sites = xxz::kDefaultMaxSites;
}

xxz_status xxz_chain_solve(const xxz_chain_params* params, const xxz_tolerance* tol, xxz_chain** out) {
  XXZ_REQUIRE_PTR(params);
  XXZ_REQUIRE_PTR(out);
  *out = nullptr;
  return guarded([&] { *out = new xxz_chain{xxz::solve_chain(chain_spec(*params), tolerance(tol))}; });
}

void xxz_chain_free(xxz_chain* chain) { delete chain; }

xxz_status xxz_chain_info(const xxz_chain* chain, xxz_chain_params* params, size_t* dimension,
                          size_t* set_count, size_t* ground_set_size, double* tol) {
  XXZ_REQUIRE_PTR(chain);
  const auto& es = chain->es;
  if (params != nullptr) {
    const auto& s = es.spec();
    *params = {s.n_sites, s.jz_over_j, s.h_over_j,
               s.boundary == xxz::Boundary::open ? XXZ_OPEN : XXZ_PERIODIC, s.max_sites};
  }
  if (dimension != nullptr) *dimension = es.dimension();
  if (set_count != nullptr) *set_count = es.degenerate_sets().size();
  if (ground_set_size != nullptr) *ground_set_size = es.ground_set().size();
  if (tol != nullptr) *tol = es.tolerance();
  return XXZ_OK;
}

xxz_status xxz_chain_levels(const xxz_chain* chain, xxz_level* levels, size_t capacity) {
  XXZ_REQUIRE_PTR(chain);
  XXZ_REQUIRE_PTR(levels);
  const auto& es = chain->es;
  const size_t n = std::min(capacity, es.dimension());
  for (size_t a = 0; a < n; ++a) {
    levels[a] = {a, es.energy(a), es.magnetization_of(a), es.set_of(a) + 1};
  }
  if (capacity < es.dimension()) {
    return fail_with(XXZ_ERR_BUFFER, "levels: capacity " + std::to_string(capacity) + " below dimension " +
                                         std::to_string(es.dimension()));
  }
  return XXZ_OK;
}

xxz_status xxz_otoc_run(const xxz_chain* chain, const xxz_otoc_params* params, int with_series,
                        xxz_otoc_result** out) {
  XXZ_REQUIRE_PTR(chain);
  XXZ_REQUIRE_PTR(params);
  XXZ_REQUIRE_PTR(out);
  *out = nullptr;
  return guarded([&] {
    const auto config = otoc_config(chain->es.spec(), *params);
    *out = new xxz_otoc_result{xxz::full_report(chain->es, config, with_series != 0)};
  });
}

void xxz_otoc_result_free(xxz_otoc_result* result) { delete result; }

xxz_status xxz_otoc_result_summary(const xxz_otoc_result* result, xxz_otoc_summary* s) {
  XXZ_REQUIRE_PTR(result);
  XXZ_REQUIRE_PTR(s);
  const auto& r = result->report;
  *s = xxz_otoc_summary{};
  s->f_saturation = to_c(r.f_saturation);
  s->f_gs = to_c(r.f_gs);
  s->f_ex = to_c(r.f_ex);
  s->term_pair_ab = to_c(r.terms.pair_ab);
  s->term_pair_ag = to_c(r.terms.pair_ag);
  s->term_all_equal = to_c(r.terms.all_equal);
  s->term_accidental = to_c(r.terms.accidental);
  if (r.f_time_average) {
    s->has_average = 1;
    s->f_time_average = to_c(r.f_time_average->mean);
    s->re_min = r.f_time_average->re_min;
    s->re_max = r.f_time_average->re_max;
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s->f_time_average = {nan, nan};
    s->re_min = s->re_max = nan;
  }
  const auto& m = r.metadata;
  s->tolerance = m.tolerance;
  s->ground_set_size = m.ground_set_size;
  s->initial_eigenindex = m.initial_eigenindex ? static_cast<long long>(*m.initial_eigenindex) : -1;
  s->initial_magnetization = m.initial_magnetization;
  s->w_site = m.w_op.site;
  s->v_site = m.v_op.site;
  s->quadruples = m.quadruples;
  return XXZ_OK;
}

size_t xxz_otoc_result_series_length(const xxz_otoc_result* result) {
  return result != nullptr && result->report.time_series ? result->report.time_series->times.size() : 0;
}

xxz_status xxz_otoc_result_series(const xxz_otoc_result* result, double* times, xxz_complex* values,
                                  size_t capacity) {
  XXZ_REQUIRE_PTR(result);
  if (!result->report.time_series) return fail_with(XXZ_ERR_DOMAIN, "series: result was run without a series");
  const auto& ts = *result->report.time_series;
  if (capacity < ts.times.size()) {
    return fail_with(XXZ_ERR_BUFFER, "series: capacity " + std::to_string(capacity) + " below length " +
                                         std::to_string(ts.times.size()));
  }
  for (size_t k = 0; k < ts.times.size(); ++k) {
    if (times != nullptr) times[k] = ts.times[k];
    if (values != nullptr) values[k] = to_c(ts.values[k]);
  }
  return XXZ_OK;
}

xxz_status xxz_time_average(const double* times, const xxz_complex* values, size_t n, double window,
                            xxz_complex* mean, double* re_min, double* re_max) {
  XXZ_REQUIRE_PTR(times);
  XXZ_REQUIRE_PTR(values);
  XXZ_REQUIRE_PTR(mean);
  return guarded([&] {
    xxz::TimeSeries ts;
    ts.times.assign(times, times + n);
    for (size_t k = 0; k < n; ++k) ts.values.emplace_back(values[k].re, values[k].im);
    const auto avg = xxz::time_average(ts, window);
    *mean = to_c(avg.mean);
    if (re_min != nullptr) *re_min = avg.re_min;
    if (re_max != nullptr) *re_max = avg.re_max;
  });
}

xxz_status xxz_diagnose(const xxz_chain* chain, int op, int site, xxz_diagnostics* out) {
  XXZ_REQUIRE_PTR(chain);
  XXZ_REQUIRE_PTR(out);
  return guarded([&] {
    const auto& es = chain->es;
    const auto row = xxz::diagnostics_row(es, {pauli(op), site < 0 ? es.spec().bulk_site() : site});
    out->intra_ground_max = row.intra_ground_max;
    out->cross_set_max = row.cross_set_max;
    out->pr_ground = row.pr_ground;
    out->fluct = row.fluct;
    out->tau = row.tau;
    switch (row.verdict) {
      case xxz::AnsatzVerdict::ordered_like: out->verdict = XXZ_ORDERED_LIKE; break;
      case xxz::AnsatzVerdict::disordered_like: out->verdict = XXZ_DISORDERED_LIKE; break;
      case xxz::AnsatzVerdict::inconclusive: out->verdict = XXZ_INCONCLUSIVE; break;
    }
  });
}

xxz_status xxz_haar_infinite_temperature(const xxz_chain* chain, const xxz_otoc_params* params,
                                         size_t n_samples, xxz_haar_estimate* out) {
  XXZ_REQUIRE_PTR(chain);
  XXZ_REQUIRE_PTR(params);
  XXZ_REQUIRE_PTR(out);
  return guarded([&] {
    auto config = otoc_config(chain->es.spec(), *params);
    config.initial = xxz::InitialState::haar(params->seed);
    const auto est = xxz::haar_infinite_temperature(chain->es, config, n_samples);
    *out = {to_c(est.mean), est.standard_error, est.samples.size()};
  });
}

xxz_status xxz_sweep_run(const xxz_sweep_params* params, xxz_sweep** out) {
  XXZ_REQUIRE_PTR(params);
  XXZ_REQUIRE_PTR(out);
  *out = nullptr;
  if ((params->n_jz && !params->jz_values) || (params->n_h && !params->h_values) ||
      (params->n_n && !params->n_sites)) {
    return fail_with(XXZ_ERR_NULL, "sweep: axis pointer is null");
  }
  return guarded([&] {
    xxz::SweepSpec s;
    s.jz_values.assign(params->jz_values, params->jz_values + params->n_jz);
    s.h_values.assign(params->h_values, params->h_values + params->n_h);
    s.n_sites.assign(params->n_sites, params->n_sites + params->n_n);
    s.boundary = boundary(params->boundary);
    s.op = pauli(params->op);
    s.site = params->site;
    s.tolerance = tolerance(&params->tolerance);
    s.term_iv_mode = params->term_iv_scan ? xxz::TermIvMode::scan : xxz::TermIvMode::assume_absent;
    s.quadruple_budget = params->quadruple_budget;
    if (params->max_sites > 0) s.max_sites = params->max_sites;
    s.workers = params->workers;
    *out = new xxz_sweep{xxz::run_sweep(s)};
  });
}

void xxz_sweep_free(xxz_sweep* sweep) { delete sweep; }

size_t xxz_sweep_size(const xxz_sweep* sweep) { return sweep ? sweep->grid.records.size() : 0; }

size_t xxz_sweep_failures(const xxz_sweep* sweep) { return sweep ? sweep->grid.failures() : 0; }

xxz_status xxz_sweep_record_at(const xxz_sweep* sweep, size_t index, xxz_sweep_record* record) {
  XXZ_REQUIRE_PTR(sweep);
  XXZ_REQUIRE_PTR(record);
  if (index >= sweep->grid.records.size()) {
    return fail_with(XXZ_ERR_DOMAIN, "sweep: record " + std::to_string(index) + " out of range");
  }
  const auto& r = sweep->grid.records[index];
  record->jz_over_j = r.jz_over_j;
  record->h_over_j = r.h_over_j;
  record->n_sites = r.n_sites;
  record->boundary = r.boundary == xxz::Boundary::open ? XXZ_OPEN : XXZ_PERIODIC;
  record->op = pauli_code(r.op.kind);
  record->site = r.op.site;
  record->ok = r.ok ? 1 : 0;
  record->f_saturation = to_c(r.f_saturation);
  record->f_gs = to_c(r.f_gs);
  record->f_ex = to_c(r.f_ex);
  record->tolerance = r.tolerance;
  record->ground_set_size = r.ground_set_size;
  return XXZ_OK;
}

const char* xxz_sweep_record_error(const xxz_sweep* sweep, size_t index) {
  if (sweep == nullptr || index >= sweep->grid.records.size()) return "";
  return sweep->grid.records[index].error.c_str();
}

xxz_status xxz_critical_point(const double* x, const double* y, size_t n, double threshold, int direction,
                              double* out) {
  XXZ_REQUIRE_PTR(x);
  XXZ_REQUIRE_PTR(y);
  XXZ_REQUIRE_PTR(out);
  return guarded([&] {
    xxz::CrossingDirection dir = xxz::CrossingDirection::any;
    if (direction == XXZ_CROSS_RISING) dir = xxz::CrossingDirection::rising;
    else if (direction == XXZ_CROSS_FALLING) dir = xxz::CrossingDirection::falling;
    else if (direction != XXZ_CROSS_ANY) xxz::fail(xxz::ErrorKind::domain, "direction: unknown code");
    *out = xxz::extract_critical_point({x, x + n}, {y, y + n}, threshold, dir);
  });
}

xxz_status xxz_fit_power_law(const double* n_values, const double* jz_c, size_t count, xxz_fit* out) {
  XXZ_REQUIRE_PTR(n_values);
  XXZ_REQUIRE_PTR(jz_c);
  XXZ_REQUIRE_PTR(out);
  return guarded([&] {
    std::vector<xxz::ScalingPoint> points;
    for (size_t k = 0; k < count; ++k) points.push_back({n_values[k], jz_c[k]});
    const auto fit = xxz::fit_power_law(points);
    *out = {fit.a, fit.xi, fit.jz_inf, fit.residual, fit.iterations};
  });
}

}  // extern "C"
