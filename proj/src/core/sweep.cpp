#include "xxzotoc/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <memory>
#include <set>
#include <string>
#include <thread>

#include <unsupported/Eigen/LevenbergMarquardt>

#include "xxzotoc/error.hpp"

namespace xxz {

namespace {

void require_increasing(const std::vector<double>& values, const char* name) {
  require(!values.empty(), ErrorKind::domain, std::string(name) + ": grid is empty");
  for (std::size_t k = 0; k < values.size(); ++k) {
    require(std::isfinite(values[k]), ErrorKind::domain, std::string(name) + ": non-finite value");
    if (k > 0) {
      require(values[k] > values[k - 1], ErrorKind::domain,
              std::string(name) + ": grid must be strictly increasing");
    }
  }
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct CachedOperators {
  std::vector<bool> window;
  std::shared_ptr<const OperatorMatrix> w;
  std::shared_ptr<const OperatorMatrix> v;
};

// All fields for one (N, Jz) pair: one diagonalization, operators reused
// whenever the initial-state sector stays inside an already built window.
void run_column(const SweepSpec& spec, int n, double jz, SweepRecord* out) {
  ChainSpec chain;
  chain.n_sites = n;
  chain.jz_over_j = jz;
  chain.boundary = spec.boundary.value_or(ChainSpec::default_boundary(n));
  chain.max_sites = spec.max_sites;

  OtocConfig config = OtocConfig::bulk(chain, spec.op);
  if (spec.site >= 0) config.w_op.site = config.v_op.site = spec.site;
  config.term_iv_mode = spec.term_iv_mode;
  config.quadruple_budget = spec.quadruple_budget;

  for (std::size_t k = 0; k < spec.h_values.size(); ++k) {
    auto& r = out[k];
    r.jz_over_j = jz;
    r.h_over_j = spec.h_values[k];
    r.n_sites = n;
    r.boundary = chain.boundary;
    r.op = config.w_op;
    r.f_saturation = r.f_gs = r.f_ex = {kNaN, kNaN};
  }

  std::optional<EigenSystem> base;
  try {
    base.emplace(solve_chain(chain, spec.tolerance));
  } catch (const std::exception& e) {
    for (std::size_t k = 0; k < spec.h_values.size(); ++k) out[k].error = e.what();
    return;
  }

  std::vector<CachedOperators> cache;
  for (std::size_t k = 0; k < spec.h_values.size(); ++k) {
    auto& r = out[k];
    try {
      const EigenSystem es = base->with_field(spec.h_values[k]);
      const auto window = OtocEngine::window_for(es, config);
      auto hit = std::find_if(cache.begin(), cache.end(), [&](const CachedOperators& c) {
        return c.w->covers(window) && c.v->covers(window);
      });
      std::optional<OtocEngine> engine;
      if (hit != cache.end()) {
        engine.emplace(es, config, hit->w, hit->v);
      } else {
        engine.emplace(es, config);
        cache.push_back({window, engine->shared_w(), engine->shared_v()});
      }
      const OtocReport report = saturation_report(*engine);
      r.f_saturation = report.f_saturation;
      r.f_gs = report.f_gs;
      r.f_ex = report.f_ex;
      r.tolerance = report.metadata.tolerance;
      r.ground_set_size = report.metadata.ground_set_size;
      r.ok = true;
    } catch (const std::exception& e) {
      r.error = e.what();
    }
  }
}

}  // namespace

void SweepSpec::validate() const {
  require_increasing(jz_values, "jz");
  require_increasing(h_values, "h");
  require(!n_sites.empty(), ErrorKind::domain, "n: no system sizes given");
  for (std::size_t k = 0; k < n_sites.size(); ++k) {
    require(n_sites[k] >= 2, ErrorKind::domain, "n: chain needs at least 2 sites");
    require(n_sites[k] <= max_sites, ErrorKind::capacity,
            "n: " + std::to_string(n_sites[k]) + " exceeds the dense diagonalization cap of " +
                std::to_string(max_sites));
    if (k > 0) require(n_sites[k] > n_sites[k - 1], ErrorKind::domain, "n: sizes must be strictly increasing");
    if (site >= 0) {
      require(site < n_sites[k], ErrorKind::domain,
              "site: " + std::to_string(site) + " outside chain of " + std::to_string(n_sites[k]) + " sites");
    }
  }
  require(quadruple_budget > 0, ErrorKind::domain, "quadruple_budget: must be positive");
  (void)tolerance.resolve(1.0);
}

std::size_t SweepGrid::failures() const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const SweepRecord& r) { return !r.ok; }));
}

std::vector<SweepRecord> SweepGrid::cross_section(int n_sites, double h_over_j) const {
  std::vector<SweepRecord> out;
  for (const auto& r : records) {
    if (r.n_sites == n_sites && std::abs(r.h_over_j - h_over_j) <= 1e-12 * std::max(1.0, std::abs(h_over_j))) {
      out.push_back(r);
    }
  }
  return out;
}

unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("XXZOTOC_WORKERS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && value > 0) return static_cast<unsigned>(value);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

SweepGrid run_sweep(const SweepSpec& spec) {
  spec.validate();
  SweepGrid grid;
  grid.spec = spec;
  grid.records.resize(spec.size());

  const std::size_t n_h = spec.h_values.size();
  const std::size_t n_jz = spec.jz_values.size();
  const std::size_t columns = spec.n_sites.size() * n_jz;
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t task = next++; task < columns; task = next++) {
      const std::size_t ni = task / n_jz;
      const std::size_t ji = task % n_jz;
      run_column(spec, spec.n_sites[ni], spec.jz_values[ji], &grid.records[task * n_h]);
    }
  };

  const unsigned workers = std::min<std::size_t>(resolve_workers(spec.workers), columns);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < workers; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  if (grid.failures() == grid.records.size()) {
    fail(ErrorKind::numeric, "sweep: all " + std::to_string(grid.records.size()) +
                                 " grid points failed; first error: " + grid.records.front().error);
  }
  return grid;
}

double extract_critical_point(const std::vector<double>& x, const std::vector<double>& y,
                              double threshold, CrossingDirection direction) {
  require(x.size() == y.size(), ErrorKind::domain, "critical point: x and y differ in length");
  require(x.size() >= 2, ErrorKind::domain, "critical point: need at least two samples");
  for (std::size_t k = 1; k < x.size(); ++k) {
    require(x[k] > x[k - 1], ErrorKind::domain, "critical point: x must be strictly increasing");
  }
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    const bool above_a = y[k] >= threshold;
    const bool above_b = y[k + 1] >= threshold;
    if (above_a == above_b) continue;
    if (direction == CrossingDirection::rising && above_a) continue;
    if (direction == CrossingDirection::falling && !above_a) continue;
    const double dy = y[k + 1] - y[k];
    return x[k] + (threshold - y[k]) * (x[k + 1] - x[k]) / dy;
  }
  fail(ErrorKind::not_found, "critical point: curve never crosses threshold " + std::to_string(threshold));
}

double ScalingFit::operator()(double n) const { return a * std::pow(n, xi) + jz_inf; }

namespace {

struct PowerLawResidual : Eigen::DenseFunctor<double> {
  const std::vector<ScalingPoint>* points;

  explicit PowerLawResidual(const std::vector<ScalingPoint>& p)
      : DenseFunctor(3, static_cast<int>(p.size())), points(&p) {}

  // p = (a, xi, jz_inf)
  int operator()(const InputType& p, ValueType& r) const {
    for (std::size_t k = 0; k < points->size(); ++k) {
      const auto& q = (*points)[k];
      r[static_cast<Eigen::Index>(k)] = p[0] * std::pow(q.n, p[1]) + p[2] - q.jz_c;
    }
    return 0;
  }

  int df(const InputType& p, JacobianType& j) const {
    for (std::size_t k = 0; k < points->size(); ++k) {
      const auto row = static_cast<Eigen::Index>(k);
      const double n = (*points)[k].n;
      const double power = std::pow(n, p[1]);
      j(row, 0) = power;
      j(row, 1) = p[0] * power * std::log(n);
      j(row, 2) = 1.0;
    }
    return 0;
  }
};

}  // namespace

ScalingFit fit_power_law(const std::vector<ScalingPoint>& input) {
  require(input.size() >= 3, ErrorKind::fit,
          "scaling fit: need at least 3 points, got " + std::to_string(input.size()));
  std::vector<ScalingPoint> points = input;
  std::sort(points.begin(), points.end(), [](const ScalingPoint& a, const ScalingPoint& b) { return a.n < b.n; });
  std::set<double> seen;
  for (const auto& p : points) {
    require(std::isfinite(p.n) && std::isfinite(p.jz_c), ErrorKind::fit, "scaling fit: non-finite point");
    require(p.n > 0.0, ErrorKind::fit, "scaling fit: system sizes must be positive");
    require(seen.insert(p.n).second, ErrorKind::fit,
            "scaling fit: system size " + std::to_string(p.n) + " appears twice");
  }
  const auto [lo, hi] = std::minmax_element(points.begin(), points.end(),
                                            [](const ScalingPoint& a, const ScalingPoint& b) { return a.jz_c < b.jz_c; });
  require(hi->jz_c - lo->jz_c > 1e-12 * std::max(1.0, std::abs(hi->jz_c)), ErrorKind::fit,
          "scaling fit: all critical points are equal, amplitude and exponent are undetermined");

  // Initial guess: xi = -1, asymptote at the largest system, amplitude through the smallest.
  Eigen::VectorXd p(3);
  p[1] = -1.0;
  p[2] = points.back().jz_c;
  p[0] = (points.front().jz_c - p[2]) / std::pow(points.front().n, p[1]);
  if (p[0] == 0.0) p[0] = points.front().jz_c - points[1].jz_c;

  PowerLawResidual functor(points);
  Eigen::LevenbergMarquardt<PowerLawResidual> lm(functor);
  lm.setFtol(1e-15);
  lm.setXtol(1e-15);
  lm.setGtol(0.0);
  lm.setMaxfev(5000);
  const auto status = lm.minimize(p);

  const bool converged = status != Eigen::LevenbergMarquardtSpace::ImproperInputParameters &&
                         status != Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation &&
                         status != Eigen::LevenbergMarquardtSpace::UserAsked;
  require(converged && p.allFinite(), ErrorKind::fit,
          "scaling fit: damped least squares did not converge (status " + std::to_string(static_cast<int>(status)) +
              ", parameters a=" + std::to_string(p[0]) + " xi=" + std::to_string(p[1]) +
              " jz_inf=" + std::to_string(p[2]) + ")");

  // The exponent is undetermined when the amplitude collapses to zero.
  PowerLawResidual::JacobianType jac(static_cast<Eigen::Index>(points.size()), 3);
  functor.df(p, jac);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
  const auto sv = svd.singularValues();
  require(sv[2] > 1e-12 * sv[0], ErrorKind::fit,
          "scaling fit: data does not determine all three parameters (Jacobian condition " +
              std::to_string(sv[0] / std::max(sv[2], 1e-300)) + ", a=" + std::to_string(p[0]) + ")");

  ScalingFit fit;
  fit.a = p[0];
  fit.xi = p[1];
  fit.jz_inf = p[2];
  fit.iterations = static_cast<int>(lm.iterations());
  fit.points = points;
  PowerLawResidual::ValueType r(static_cast<Eigen::Index>(points.size()));
  functor(p, r);
  fit.residual = r.norm();
  return fit;
}

}  // namespace xxz
