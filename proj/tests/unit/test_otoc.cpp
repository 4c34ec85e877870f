#include <doctest.h>

#include <cmath>
#include <random>

#include "../oracles.hpp"
#include "xxzotoc/error.hpp"
#include "xxzotoc/otoc.hpp"

using namespace xxz;
using cplx = std::complex<double>;

namespace {

ChainSpec chain(int n, double jz, double h, Boundary b) {
  ChainSpec s;
  s.n_sites = n;
  s.jz_over_j = jz;
  s.h_over_j = h;
  s.boundary = b;
  return s;
}

char letter(PauliKind k) {
  return k == PauliKind::sigma_x ? 'x' : k == PauliKind::sigma_y ? 'y' : 'z';
}

Eigen::MatrixXcd eigenvectors(const EigenSystem& es) {
  const auto dim = static_cast<Eigen::Index>(es.dimension());
  Eigen::MatrixXcd U(dim, dim);
  for (std::size_t a = 0; a < es.dimension(); ++a) U.col(static_cast<Eigen::Index>(a)) = es.eigenvector(a).cast<cplx>();
  return U;
}

OtocConfig config_for(PauliKind w, int w_site, PauliKind v, int v_site) {
  OtocConfig c;
  c.w_op = {w, w_site};
  c.v_op = {v, v_site};
  return c;
}

StateVector random_state(const EigenSystem& es, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return haar_state(es, rng);
}

// Eigenbasis W, V, c and b = V c built from configuration-space Kronecker operators.
struct DenseProblem {
  Eigen::MatrixXcd W, V;
  Eigen::VectorXcd c, b;
  std::vector<int> set;
  std::vector<double> level;
};

DenseProblem dense_problem(const EigenSystem& es, const OtocConfig& cfg, const Eigen::VectorXcd& c) {
  const int n = es.spec().n_sites;
  const auto U = eigenvectors(es);
  DenseProblem p;
  p.W = U.adjoint() * oracle::site_operator(n, cfg.w_op.site, letter(cfg.w_op.kind)) * U;
  p.V = U.adjoint() * oracle::site_operator(n, cfg.v_op.site, letter(cfg.v_op.kind)) * U;
  p.c = c;
  p.b = p.V * c;
  for (std::size_t a = 0; a < es.dimension(); ++a) p.set.push_back(static_cast<int>(es.set_of(a)));
  for (const auto& s : es.degenerate_sets()) p.level.push_back(s.energy);
  return p;
}

void check_terms(const SaturationTerms& got, const oracle::Terms& ref, double tol) {
  CHECK(std::abs(got.pair_ab - ref.i) < tol);
  CHECK(std::abs(got.pair_ag - ref.ii) < tol);
  CHECK(std::abs(got.all_equal - ref.iii) < tol);
  CHECK(std::abs(got.accidental - ref.iv) < tol);
  CHECK(std::abs(got.total() - ref.total()) < tol);
}

}  // namespace

TEST_CASE("configuration validation") {
  const auto spec = chain(4, 1, 0, Boundary::periodic);
  auto cfg = OtocConfig::bulk(spec);
  CHECK(cfg.w_op.site == 2);
  CHECK(cfg.v_op.kind == PauliKind::sigma_z);
  CHECK_NOTHROW(cfg.validate(spec));
  auto bad = cfg;
  bad.time_grid.n_samples = 1;
  CHECK_THROWS_AS(bad.validate(spec), Error);
  bad = cfg;
  bad.average_window = 30.0;
  CHECK_THROWS_AS(bad.validate(spec), Error);
  bad = cfg;
  bad.time_grid.t_max = 0.0;
  CHECK_THROWS_AS(bad.validate(spec), Error);
  bad = cfg;
  bad.w_op.site = 4;
  CHECK_THROWS_AS(bad.validate(spec), Error);

  const auto es = solve_chain(spec);
  StateVector unnormalized{Eigen::VectorXcd::Ones(16)};
  try {
    OtocEngine engine(es, cfg, unnormalized);
    FAIL("expected a domain error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::domain);
  }
  bad = cfg;
  bad.initial = InitialState::ground_member(5);
  CHECK_THROWS_AS(OtocEngine(es, bad), Error);
}

TEST_CASE("time grid") {
  TimeGrid g{2.0, 5};
  CHECK(g.times() == std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0});
}

TEST_CASE("F(0) = 1 for sigma_z on any state") {
  const auto es = solve_chain(chain(5, 0.7, 0.2, Boundary::open));
  const auto cfg = config_for(PauliKind::sigma_z, 2, PauliKind::sigma_z, 2);
  for (std::uint64_t seed : {1, 2, 3}) {
    OtocEngine engine(es, cfg, random_state(es, seed));
    const auto f = engine.dynamics({0.0});
    CHECK(std::abs(f[0] - cplx(1.0)) < 1e-12);
  }
  OtocEngine ground(es, cfg);
  CHECK(std::abs(ground.dynamics({0.0})[0] - cplx(1.0)) < 1e-12);
}

TEST_CASE("ferromagnet does not scramble") {
  const auto es = solve_chain(chain(8, -2, 0, Boundary::periodic));
  auto cfg = OtocConfig::bulk(es.spec());
  cfg.time_grid = {20.0, 200};
  const auto series = otoc_dynamics(es, cfg);
  for (const auto& f : series.values) CHECK(std::abs(f - cplx(1.0)) < 1e-12);

  const auto report = saturation_degenerate(es, cfg);
  CHECK(report.f_saturation.real() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(std::abs(report.f_saturation.imag()) < 1e-13);
  CHECK(std::abs(report.f_ex) < 1e-13);
  CHECK(report.f_gs.real() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(report.metadata.ground_set_size == 2);
  REQUIRE(report.metadata.initial_eigenindex.has_value());
  CHECK(report.metadata.initial_magnetization == -8);

  // W_1 = diag(+1, -1) on the polarized pair, so F_gs = 1 for both members.
  for (std::size_t k : {0u, 1u}) {
    auto member = cfg;
    member.initial = InitialState::ground_member(k);
    OtocEngine engine(es, member);
    CHECK(std::abs(engine.ground_subspace_term() - cplx(1.0)) < 1e-13);
  }
}

TEST_CASE("deterministic ground member") {
  const auto es = solve_chain(chain(8, -2, 0, Boundary::periodic));
  const auto a = select_ground_member(es);
  CHECK(a == select_ground_member(es));
  CHECK(es.magnetization_of(a) == -8);
}

TEST_CASE("dynamics match the dense operator-product oracle") {
  const std::vector<double> times = oracle::grid(15.0, 61);
  struct Case {
    int n;
    double jz, h;
    Boundary b;
  };
  for (const Case k : {Case{4, 0.5, 0.0, Boundary::periodic}, Case{4, 0.5, 0.3, Boundary::open},
                       Case{5, 1.7, 0.1, Boundary::periodic}}) {
    const auto es = solve_chain(chain(k.n, k.jz, k.h, k.b));
    const auto H = oracle::hamiltonian(k.n, k.jz, k.h, k.b == Boundary::periodic);
    const auto U = eigenvectors(es);
    for (const auto& [w, ws, v, vs] :
         std::vector<std::tuple<PauliKind, int, PauliKind, int>>{{PauliKind::sigma_z, 2, PauliKind::sigma_z, 2},
                                                               {PauliKind::sigma_x, 1, PauliKind::sigma_x, 1},
                                                               {PauliKind::sigma_y, 0, PauliKind::sigma_z, 3},
                                                               {PauliKind::sigma_x, 2, PauliKind::sigma_y, 1}}) {
      const auto cfg = config_for(w, ws, v, vs);
      const auto Wc = oracle::site_operator(k.n, ws, letter(w));
      const auto Vc = oracle::site_operator(k.n, vs, letter(v));

      OtocEngine ground(es, cfg);
      const Eigen::VectorXcd psi = U.col(static_cast<Eigen::Index>(*ground.metadata().initial_eigenindex));
      const auto ref = oracle::otoc(H, Wc, Vc, psi, times);
      const auto got = ground.dynamics(times);
      double worst = 0.0;
      for (std::size_t i = 0; i < times.size(); ++i) worst = std::max(worst, std::abs(got[i] - ref[i]));
      CHECK(worst < 1e-11);

      const auto state = random_state(es, 11);
      OtocEngine mixed(es, cfg, state);
      const auto ref_mixed = oracle::otoc(H, Wc, Vc, U * state.coefficients, times);
      const auto got_mixed = mixed.dynamics(times);
      worst = 0.0;
      for (std::size_t i = 0; i < times.size(); ++i) {
        worst = std::max(worst, std::abs(got_mixed[i] - ref_mixed[i]));
        CHECK(std::abs(got_mixed[i]) <= 1.0 + 1e-9);
      }
      CHECK(worst < 1e-11);
    }
  }
}

TEST_CASE("F(-t) is the conjugate of F(t) for W = V on an eigenstate") {
  const auto es = solve_chain(chain(6, 0.8, 0.0, Boundary::periodic));
  OtocEngine engine(es, OtocConfig::bulk(es.spec()));
  const std::vector<double> forward{0.3, 1.7, 4.2};
  const std::vector<double> backward{-0.3, -1.7, -4.2};
  const auto f = engine.dynamics(forward);
  const auto g = engine.dynamics(backward);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(g[i] - std::conj(f[i])) < 1e-12);
}

TEST_CASE("single eigenstate with a diagonal operator gives |W_11|^4") {
  const auto es = solve_chain(chain(6, -2, 0, Boundary::periodic));
  auto cfg = OtocConfig::bulk(es.spec());
  const auto nd = saturation_nondegenerate(es, cfg);
  CHECK(nd.terms.pair_ab.real() == doctest::Approx(1.0));
  CHECK(nd.terms.pair_ag.real() == doctest::Approx(1.0));
  CHECK(nd.terms.all_equal.real() == doctest::Approx(1.0));
  CHECK(nd.f_saturation.real() == doctest::Approx(1.0));
  CHECK(nd.metadata.singleton_sets);
}

TEST_CASE("saturation terms match the literal grouped quadruple sum") {
  struct Case {
    int n;
    double jz, h;
    Boundary b;
    DegeneracyTolerance tol;
  };
  const std::vector<Case> cases{
      {4, 1.0, 0.0, Boundary::periodic, DegeneracyTolerance::relative()},
      {4, 0.5, 0.2, Boundary::open, DegeneracyTolerance::absolute(0.3)},
      {5, 0.5, 0.3, Boundary::open, DegeneracyTolerance::relative()},
      {5, -1.5, 0.1, Boundary::periodic, DegeneracyTolerance::absolute(0.15)},
      {5, 2.3, 0.0, Boundary::periodic, DegeneracyTolerance::window(8.0)},
  };
  const std::vector<std::tuple<PauliKind, int, PauliKind, int>> ops{
      {PauliKind::sigma_z, 2, PauliKind::sigma_z, 2},
      {PauliKind::sigma_x, 1, PauliKind::sigma_x, 1},
      {PauliKind::sigma_y, 0, PauliKind::sigma_x, 3}};
  bool saw_accidental = false;
  for (const auto& k : cases) {
    const auto es = solve_chain(chain(k.n, k.jz, k.h, k.b), k.tol);
    for (const auto& [w, ws, v, vs] : ops) {
      auto cfg = config_for(w, ws, v, vs);
      cfg.term_iv_mode = TermIvMode::scan;

      const auto state = random_state(es, 5);
      OtocEngine mixed(es, cfg, state);
      const auto p = dense_problem(es, cfg, state.coefficients);
      const auto ref = oracle::grouped_sum(p.W, p.V, p.c, p.b, p.set, p.level, es.tolerance(), true);
      check_terms(mixed.saturation_terms(), ref, 1e-12);
      saw_accidental = saw_accidental || std::abs(ref.iv) > 1e-6;

      OtocEngine ground(es, cfg);
      const auto pg = dense_problem(es, cfg, es.to_global(ground.initial_state()));
      const auto ref_g = oracle::grouped_sum(pg.W, pg.V, pg.c, pg.b, pg.set, pg.level, es.tolerance(), true);
      check_terms(ground.saturation_terms(), ref_g, 1e-12);

      // Nondegenerate formulas against the literal sum with every state its own set.
      std::vector<int> singles(es.dimension());
      std::vector<double> energies(es.energies().begin(), es.energies().end());
      for (std::size_t a = 0; a < es.dimension(); ++a) singles[a] = static_cast<int>(a);
      const auto ref_nd = oracle::grouped_sum(p.W, p.V, p.c, p.b, singles, energies, es.tolerance(), true);
      check_terms(mixed.nondegenerate_terms(), ref_nd, 1e-12);
    }
  }
  CHECK(saw_accidental);
}

TEST_CASE("singleton sets reduce the grouped terms to the nondegenerate ones") {
  const auto es = solve_chain(chain(6, 0.6, 0.25, Boundary::open));
  const auto single = es.with_singleton_sets();
  for (const auto mode : {TermIvMode::assume_absent, TermIvMode::scan}) {
    auto cfg = config_for(PauliKind::sigma_x, 3, PauliKind::sigma_z, 2);
    cfg.term_iv_mode = mode;
    const auto state = random_state(es, 9);
    OtocEngine a(es, cfg, state);
    OtocEngine b(single, cfg, state);
    const auto nd = a.nondegenerate_terms();
    const auto grouped = b.saturation_terms();
    CHECK(std::abs(nd.pair_ab - grouped.pair_ab) < 1e-13);
    CHECK(std::abs(nd.pair_ag - grouped.pair_ag) < 1e-13);
    CHECK(std::abs(nd.all_equal - grouped.all_equal) < 1e-13);
    CHECK(std::abs(nd.accidental - grouped.accidental) < 1e-13);
  }
}

TEST_CASE("decomposition closes exactly") {
  const auto es = solve_chain(chain(8, 0.5, 0.0, Boundary::periodic));
  for (const auto kind : {PauliKind::sigma_z, PauliKind::sigma_x}) {
    const auto report = saturation_degenerate(es, OtocConfig::bulk(es.spec(), kind));
    CHECK(std::abs(report.f_gs + report.f_ex - report.f_saturation) < 1e-12);
    CHECK(std::abs(report.terms.total() - report.f_saturation) < 1e-12);
  }
}

TEST_CASE("ground-subspace term") {
  SUBCASE("vanishes when W has no diagonal element on a nondegenerate ground state") {
    const auto es = solve_chain(chain(6, 0.5, 0.0, Boundary::periodic));
    REQUIRE(es.ground_set().size() == 1);
    const auto cfg = OtocConfig::bulk(es.spec(), PauliKind::sigma_x);
    CHECK(std::abs(ground_subspace_term(es, cfg)) < 1e-15);
  }
  SUBCASE("matches the dense projected product") {
    const auto es = solve_chain(chain(5, 1.0, 0.0, Boundary::periodic));
    const auto cfg = config_for(PauliKind::sigma_z, 1, PauliKind::sigma_x, 3);
    OtocEngine engine(es, cfg);
    const auto p = dense_problem(es, cfg, es.to_global(engine.initial_state()));
    const auto& g = es.ground_set();
    const auto n = static_cast<Eigen::Index>(g.size());
    const auto b = static_cast<Eigen::Index>(g.begin);
    const Eigen::MatrixXcd W1 = p.W.block(b, b, n, n);
    const Eigen::MatrixXcd V1 = p.V.block(b, b, n, n);
    const Eigen::VectorXcd c1 = p.c.segment(b, n);
    const cplx ref = c1.dot(W1.adjoint() * V1.adjoint() * W1 * V1 * c1);
    CHECK(std::abs(engine.ground_subspace_term() - ref) < 1e-13);
  }
  SUBCASE("rejects states outside the ground set") {
    const auto es = solve_chain(chain(4, 1.0, 0.0, Boundary::periodic));
    const auto cfg = OtocConfig::bulk(es.spec());
    OtocEngine engine(es, cfg, random_state(es, 3));
    CHECK_FALSE(engine.initial_in_ground_set());
    try {
      (void)engine.ground_subspace_term();
      FAIL("expected a domain error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::domain);
    }
    const auto report = saturation_report(engine);
    CHECK(std::isnan(report.f_gs.real()));
  }
}

TEST_CASE("term (iv) scan respects its budget") {
  const auto es = solve_chain(chain(6, 0.9, 0.1, Boundary::open), DegeneracyTolerance::absolute(0.5));
  auto cfg = OtocConfig::bulk(es.spec());
  cfg.term_iv_mode = TermIvMode::scan;
  cfg.quadruple_budget = 1;
  OtocEngine engine(es, cfg, random_state(es, 1));
  try {
    (void)engine.saturation_terms();
    FAIL("expected a resource error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::resource);
    CHECK(std::string(e.what()).find("quadruples") != std::string::npos);
  }
}

TEST_CASE("time average") {
  TimeSeries constant;
  constant.times = oracle::grid(5.0, 11);
  constant.values.assign(11, cplx(1.0));
  const auto one = time_average(constant, 5.0);
  CHECK(std::abs(one.mean - cplx(1.0)) < 1e-15);
  CHECK(one.re_min == 1.0);
  CHECK(one.re_max == 1.0);

  const double omega = 2.7;
  TimeSeries phase;
  phase.times = oracle::grid(2.0 * M_PI / omega, 1000);
  for (const double t : phase.times) phase.values.push_back(std::polar(1.0, -omega * t));
  const auto avg = time_average(phase, 2.0 * M_PI / omega);
  CHECK(std::abs(avg.mean) < 1e-3);
  CHECK(avg.re_min == doctest::Approx(-1.0).epsilon(1e-4));
  CHECK(avg.re_max == doctest::Approx(1.0));

  // Linear F(t) = t over a partial window: the average is T/2.
  TimeSeries ramp;
  ramp.times = oracle::grid(4.0, 9);
  for (const double t : ramp.times) ramp.values.push_back(t);
  CHECK(time_average(ramp, 3.3).mean.real() == doctest::Approx(1.65));

  CHECK_THROWS_AS(time_average(constant, 6.0), Error);
  CHECK_THROWS_AS(time_average(constant, 0.0), Error);
}

TEST_CASE("long-time average converges to the saturation value") {
  const double T = 1000.0;
  const auto es = solve_chain(chain(6, 0.73, 0.137, Boundary::open), DegeneracyTolerance::window(T));
  auto cfg = OtocConfig::bulk(es.spec());
  cfg.time_grid = {T, 40001};
  cfg.average_window = T;
  const auto report = full_report(es, cfg, true);
  REQUIRE(report.f_time_average.has_value());
  CHECK(std::abs(report.f_time_average->mean - report.f_saturation) < 0.05);
  CHECK(report.time_series->values.size() == 40001);
}

TEST_CASE("Haar states") {
  SUBCASE("participation ratio near (D + 1) / 2 at D = 1024") {
    const auto es = solve_chain(chain(10, 0.9, 0.0, Boundary::periodic));
    std::mt19937_64 rng(42);
    double mean = 0.0;
    const int samples = 20;
    for (int s = 0; s < samples; ++s) {
      const auto state = haar_state(es, rng);
      CHECK(state.norm() == doctest::Approx(1.0).epsilon(1e-12));
      const Eigen::VectorXcd psi = to_configuration(es, es.to_sectors(state.coefficients));
      mean += 1.0 / psi.cwiseAbs2().cwiseAbs2().sum();
    }
    mean /= samples;
    CHECK(std::abs(mean - 1025.0 / 2.0) < 0.1 * 1025.0 / 2.0);
  }
  SUBCASE("traceless expectation shrinks with dimension") {
    const auto small = solve_chain(chain(4, 0.9, 0.0, Boundary::periodic));
    const auto large = solve_chain(chain(10, 0.9, 0.0, Boundary::periodic));
    const auto a = haar_expectation(small, {PauliKind::sigma_z, 2}, 200, 7);
    const auto b = haar_expectation(large, {PauliKind::sigma_z, 5}, 200, 7);
    CHECK(std::abs(a.mean) < 4.0 * a.standard_error);
    CHECK(std::abs(b.mean) < 4.0 * b.standard_error);
    CHECK(b.standard_error < 0.25 * a.standard_error);
    CHECK(a.samples.size() == 200);
  }
  SUBCASE("two seeds agree within three standard errors") {
    const auto es = solve_chain(chain(6, 0.9, 0.0, Boundary::periodic));
    auto cfg = OtocConfig::bulk(es.spec());
    cfg.time_grid = {20.0, 400};
    cfg.average_window = 10.0;
    cfg.initial = InitialState::haar(1);
    const auto a = haar_infinite_temperature(es, cfg, 12);
    cfg.initial = InitialState::haar(2);
    const auto b = haar_infinite_temperature(es, cfg, 12);
    const double combined = std::hypot(a.standard_error, b.standard_error);
    CHECK(std::abs(a.mean - b.mean) <= 3.0 * combined);
    CHECK_THROWS_AS(haar_infinite_temperature(es, cfg, 1), Error);
  }
}
