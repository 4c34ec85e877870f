#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <thread>
#include <vector>

#include "xxzotoc/xxzotoc.h"

namespace {

xxz_chain* solve(int n, double jz, double h, int boundary = XXZ_BOUNDARY_DEFAULT) {
  xxz_chain_params p;
  xxz_chain_params_default(&p);
  p.n_sites = n;
  p.jz_over_j = jz;
  p.h_over_j = h;
  p.boundary = boundary;
  xxz_chain* chain = nullptr;
  REQUIRE(xxz_chain_solve(&p, nullptr, &chain) == XXZ_OK);
  REQUIRE(chain != nullptr);
  return chain;
}

}  // namespace

TEST_CASE("version, status strings and backend") {
  CHECK(std::strlen(xxz_version()) > 0);
  CHECK(std::string(xxz_status_string(XXZ_ERR_CAPACITY)) == "capacity");
  CHECK(xxz_backend_check() == XXZ_OK);
}

TEST_CASE("two-site Heisenberg levels") {
  xxz_chain* chain = solve(2, 1.0, 0.0, XXZ_OPEN);
  size_t dim = 0, sets = 0, ground = 0;
  double tol = 0.0;
  xxz_chain_params echo;
  REQUIRE(xxz_chain_info(chain, &echo, &dim, &sets, &ground, &tol) == XXZ_OK);
  CHECK(dim == 4);
  CHECK(sets == 2);
  CHECK(ground == 1);
  CHECK(tol > 0.0);
  CHECK(echo.boundary == XXZ_OPEN);

  std::vector<xxz_level> levels(4);
  REQUIRE(xxz_chain_levels(chain, levels.data(), levels.size()) == XXZ_OK);
  CHECK(levels[0].energy == doctest::Approx(-3.0));
  CHECK(levels[0].magnetization == 0);
  CHECK(levels[0].theta == 1);
  for (int k = 1; k < 4; ++k) {
    CHECK(levels[k].energy == doctest::Approx(1.0));
    CHECK(levels[k].theta == 2);
  }
  CHECK(xxz_chain_levels(chain, levels.data(), 2) == XXZ_ERR_BUFFER);
  xxz_chain_free(chain);
}

TEST_CASE("errors map to status codes with a message") {
  xxz_chain_params p;
  xxz_chain_params_default(&p);
  xxz_chain* chain = nullptr;
  CHECK(xxz_chain_solve(nullptr, nullptr, &chain) == XXZ_ERR_NULL);
  CHECK(std::string(xxz_last_error()).find("params") != std::string::npos);

  p.n_sites = 20;
  CHECK(xxz_chain_solve(&p, nullptr, &chain) == XXZ_ERR_CAPACITY);
  CHECK(chain == nullptr);
  CHECK(std::string(xxz_last_error()).find("cap") != std::string::npos);

  p.n_sites = 4;
  p.boundary = 7;
  CHECK(xxz_chain_solve(&p, nullptr, &chain) == XXZ_ERR_DOMAIN);

  p.boundary = XXZ_BOUNDARY_DEFAULT;
  const xxz_tolerance bad{XXZ_TOL_ABSOLUTE, -1.0};
  CHECK(xxz_chain_solve(&p, &bad, &chain) == XXZ_ERR_DOMAIN);

  // The message is per thread.
  std::string other;
  std::thread([&] { other = xxz_last_error(); }).join();
  CHECK(other.empty());
  CHECK(std::strlen(xxz_last_error()) > 0);

  REQUIRE(xxz_chain_solve(&p, nullptr, &chain) == XXZ_OK);
  CHECK(std::strlen(xxz_last_error()) == 0);
  xxz_chain_free(chain);
  xxz_chain_free(nullptr);
}

TEST_CASE("ferromagnet report and series") {
  xxz_chain* chain = solve(8, -2.0, 0.0);
  xxz_otoc_params params;
  xxz_otoc_params_default(&params);
  params.t_max = 5.0;
  params.n_samples = 101;
  params.window = 5.0;
  xxz_otoc_result* result = nullptr;
  REQUIRE(xxz_otoc_run(chain, &params, 1, &result) == XXZ_OK);

  xxz_otoc_summary s;
  REQUIRE(xxz_otoc_result_summary(result, &s) == XXZ_OK);
  CHECK(s.f_saturation.re == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.f_gs.re == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(s.f_ex.re) < 1e-12);
  CHECK(s.ground_set_size == 2);
  CHECK(s.w_site == 4);
  CHECK(s.has_average == 1);
  CHECK(s.f_time_average.re == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.initial_eigenindex >= 0);
  CHECK(s.initial_magnetization == -8);

  REQUIRE(xxz_otoc_result_series_length(result) == 101);
  std::vector<double> t(101);
  std::vector<xxz_complex> f(101);
  CHECK(xxz_otoc_result_series(result, t.data(), f.data(), 50) == XXZ_ERR_BUFFER);
  REQUIRE(xxz_otoc_result_series(result, t.data(), f.data(), f.size()) == XXZ_OK);
  CHECK(t.back() == doctest::Approx(5.0));
  for (const auto& z : f) CHECK(std::abs(z.re - 1.0) < 1e-12);
  xxz_otoc_result_free(result);

  REQUIRE(xxz_otoc_run(chain, &params, 0, &result) == XXZ_OK);
  CHECK(xxz_otoc_result_series_length(result) == 0);
  CHECK(xxz_otoc_result_series(result, t.data(), f.data(), f.size()) == XXZ_ERR_DOMAIN);
  REQUIRE(xxz_otoc_result_summary(result, &s) == XXZ_OK);
  CHECK(s.has_average == 0);
  xxz_otoc_result_free(result);

  params.window = 6.0;
  CHECK(xxz_otoc_run(chain, &params, 1, &result) == XXZ_ERR_DOMAIN);
  params.w_site = 8;
  CHECK(xxz_otoc_run(chain, &params, 0, &result) == XXZ_ERR_DOMAIN);

  xxz_diagnostics d;
  REQUIRE(xxz_diagnose(chain, XXZ_SIGMA_Z, -1, &d) == XXZ_OK);
  CHECK(d.verdict == XXZ_ORDERED_LIKE);
  CHECK(d.pr_ground == doctest::Approx(1.0));
  CHECK(std::isinf(d.tau));
  xxz_chain_free(chain);
}

TEST_CASE("time average of a sampled signal") {
  const std::vector<double> t{0.0, 1.0, 2.0};
  const std::vector<xxz_complex> f{{0.0, 0.0}, {1.0, 2.0}, {2.0, 0.0}};
  xxz_complex mean;
  double lo = 0.0, hi = 0.0;
  REQUIRE(xxz_time_average(t.data(), f.data(), t.size(), 2.0, &mean, &lo, &hi) == XXZ_OK);
  CHECK(mean.re == doctest::Approx(1.0));
  CHECK(mean.im == doctest::Approx(1.0));
  CHECK(lo == 0.0);
  CHECK(hi == 2.0);
  CHECK(xxz_time_average(t.data(), f.data(), t.size(), 3.0, &mean, nullptr, nullptr) == XXZ_ERR_DOMAIN);
}

TEST_CASE("sweep through the C interface") {
  const double jz[] = {-2.0, 2.0};
  const double h[] = {0.0};
  const int n[] = {6};
  xxz_sweep_params p;
  xxz_sweep_params_default(&p);
  p.jz_values = jz;
  p.n_jz = 2;
  p.h_values = h;
  p.n_h = 1;
  p.n_sites = n;
  p.n_n = 1;
  p.workers = 2;
  xxz_sweep* sweep = nullptr;
  REQUIRE(xxz_sweep_run(&p, &sweep) == XXZ_OK);
  REQUIRE(xxz_sweep_size(sweep) == 2);
  CHECK(xxz_sweep_failures(sweep) == 0);
  xxz_sweep_record r;
  REQUIRE(xxz_sweep_record_at(sweep, 0, &r) == XXZ_OK);
  CHECK(r.jz_over_j == -2.0);
  CHECK(r.boundary == XXZ_PERIODIC);
  CHECK(r.site == 3);
  CHECK(r.ok == 1);
  CHECK(r.f_saturation.re == doctest::Approx(1.0));
  CHECK(std::string(xxz_sweep_record_error(sweep, 0)).empty());
  CHECK(xxz_sweep_record_at(sweep, 2, &r) == XXZ_ERR_DOMAIN);
  xxz_sweep_free(sweep);

  p.n_jz = 0;
  CHECK(xxz_sweep_run(&p, &sweep) == XXZ_ERR_DOMAIN);
  p.n_jz = 2;
  p.jz_values = nullptr;
  CHECK(xxz_sweep_run(&p, &sweep) == XXZ_ERR_NULL);
}

TEST_CASE("critical point and power-law fit") {
  const double x[] = {0.8, 1.0, 1.2, 1.4};
  const double y[] = {0.0, 0.0, 1.0, 1.0};
  double c = 0.0;
  REQUIRE(xxz_critical_point(x, y, 4, 0.5, XXZ_CROSS_ANY, &c) == XXZ_OK);
  CHECK(c == doctest::Approx(1.1));
  CHECK(xxz_critical_point(x, y, 4, 0.5, XXZ_CROSS_FALLING, &c) == XXZ_ERR_NOT_FOUND);

  std::vector<double> ns, jc;
  for (int k = 8; k <= 40; k += 4) {
    ns.push_back(k);
    jc.push_back(2.0 / k + 1.0);
  }
  xxz_fit fit;
  REQUIRE(xxz_fit_power_law(ns.data(), jc.data(), ns.size(), &fit) == XXZ_OK);
  CHECK(fit.xi == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(fit.jz_inf == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(xxz_fit_power_law(ns.data(), jc.data(), 2, &fit) == XXZ_ERR_FIT);
}

TEST_CASE("Haar estimate") {
  xxz_chain* chain = solve(6, 0.5, 0.0);
  xxz_otoc_params params;
  xxz_otoc_params_default(&params);
  params.t_max = 10.0;
  params.n_samples = 201;
  params.window = 5.0;
  params.seed = 3;
  xxz_haar_estimate est;
  REQUIRE(xxz_haar_infinite_temperature(chain, &params, 8, &est) == XXZ_OK);
  CHECK(est.n_samples == 8);
  CHECK(std::isfinite(est.mean.re));
  CHECK(est.standard_error >= 0.0);
  CHECK(xxz_haar_infinite_temperature(chain, &params, 1, &est) == XXZ_ERR_DOMAIN);
  xxz_chain_free(chain);
}
