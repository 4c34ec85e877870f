#include <doctest.h>

#include <algorithm>
#include <random>

#include "../oracles.hpp"
#include "xxzotoc/error.hpp"
#include "xxzotoc/spectral.hpp"

using namespace xxz;

namespace {

ChainSpec chain(int n, double jz, double h, Boundary b) {
  ChainSpec s;
  s.n_sites = n;
  s.jz_over_j = jz;
  s.h_over_j = h;
  s.boundary = b;
  return s;
}

// Eigenvectors of the eigensystem as columns of a configuration-space matrix.
Eigen::MatrixXcd eigenvector_matrix(const EigenSystem& es) {
  const auto dim = static_cast<Eigen::Index>(es.dimension());
  Eigen::MatrixXcd U(dim, dim);
  for (std::size_t a = 0; a < es.dimension(); ++a) U.col(static_cast<Eigen::Index>(a)) = es.eigenvector(a).cast<std::complex<double>>();
  return U;
}

}  // namespace

TEST_CASE("group_degenerate uses the gap rule") {
  const std::vector<double> e{0.0, 1e-14, 1e-14, 2.0};
  const auto sets = group_degenerate(e, 1e-10);
  REQUIRE(sets.size() == 2);
  CHECK(sets[0].begin == 0);
  CHECK(sets[0].end == 3);
  CHECK(sets[1].begin == 3);
  CHECK(sets[1].size() == 1);
  CHECK_THROWS_AS(group_degenerate(e, 0.0), Error);
  CHECK_THROWS_AS(group_degenerate(e, -1.0), Error);
  const std::vector<double> unsorted{1.0, 0.0};
  CHECK_THROWS_AS(group_degenerate(unsorted, 1e-3), Error);
  const std::vector<double> distinct{0.0, 1.0, 2.5};
  CHECK(group_degenerate(distinct, 1e-6).size() == 3);
}

TEST_CASE("tolerance modes") {
  CHECK(DegeneracyTolerance::relative(1e-9).resolve(10.0) == doctest::Approx(1e-8));
  CHECK(DegeneracyTolerance::relative(1e-9).resolve(0.0) == doctest::Approx(1e-12));
  CHECK(DegeneracyTolerance::absolute(0.2).resolve(10.0) == 0.2);
  CHECK(DegeneracyTolerance::window(20.0).resolve(10.0) == doctest::Approx(M_PI / 40.0));
  CHECK_THROWS_AS(DegeneracyTolerance::window(0.0).resolve(1.0), Error);
}

TEST_CASE("two-site spectrum and grouping") {
  const auto es = solve_chain(chain(2, 1, 0, Boundary::open));
  REQUIRE(es.dimension() == 4);
  CHECK(es.energy(0) == doctest::Approx(-3.0));
  CHECK(es.ground_set().size() == 1);
  REQUIRE(es.degenerate_sets().size() == 2);
  CHECK(es.degenerate_sets()[1].size() == 3);
  CHECK(es.degenerate_sets()[1].energy == doctest::Approx(1.0));
}

TEST_CASE("spectrum matches the dense oracle") {
  const auto es = solve_chain(chain(6, 2, 0, Boundary::periodic));
  const auto ref = oracle::spectrum(oracle::hamiltonian(6, 2, 0, true));
  double worst = 0.0;
  for (std::size_t a = 0; a < es.dimension(); ++a) worst = std::max(worst, std::abs(es.energy(a) - ref[static_cast<Eigen::Index>(a)]));
  CHECK(worst < 1e-11);
}

TEST_CASE("eigenpairs, orthonormality and sorting") {
  for (bool mirror : {true, false}) {
    DiagonalizeOptions opts;
    opts.use_spin_flip = mirror;
    const auto spec = chain(7, 0.8, 0.35, Boundary::open);
    const auto es = solve_chain(spec, {}, opts);
    const auto H = oracle::hamiltonian(7, 0.8, 0.35, false);
    const auto U = eigenvector_matrix(es);
    CHECK((U.adjoint() * U - Eigen::MatrixXcd::Identity(U.rows(), U.cols())).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::VectorXd e(static_cast<Eigen::Index>(es.dimension()));
    for (std::size_t a = 0; a < es.dimension(); ++a) e[static_cast<Eigen::Index>(a)] = es.energy(a);
    CHECK((H * U - U * e.asDiagonal()).cwiseAbs().maxCoeff() < 1e-11);
    CHECK(std::is_sorted(es.energies().begin(), es.energies().end()));
  }
}

TEST_CASE("spin-flip mirror agrees with direct diagonalization") {
  DiagonalizeOptions direct;
  direct.use_spin_flip = false;
  const auto spec = chain(8, 1.3, 0.0, Boundary::periodic);
  const auto a = solve_chain(spec);
  const auto b = solve_chain(spec, {}, direct);
  for (std::size_t k = 0; k < a.dimension(); ++k) CHECK(a.energy(k) == doctest::Approx(b.energy(k)).epsilon(1e-12));
  // Mirrored sectors span the same eigenspaces as the direct ones.
  for (std::size_t s = 0; s < a.sector_count(); ++s) {
    const Eigen::MatrixXd overlap = a.sector_vectors(s).transpose() * b.sector_vectors(s);
    double leak = 0.0;
    for (Eigen::Index i = 0; i < overlap.rows(); ++i)
      for (Eigen::Index j = 0; j < overlap.cols(); ++j)
        if (std::abs(a.energy(a.global_index(s, i)) - b.energy(b.global_index(s, j))) > 1e-8)
          leak = std::max(leak, std::abs(overlap(i, j)));
    CHECK(leak < 1e-8);
  }
  const auto full = diagonalize(build_hamiltonian(spec));
  for (std::size_t k = 0; k < a.dimension(); ++k) CHECK(a.energy(k) == doctest::Approx(full.energy(k)).epsilon(1e-12));
}

TEST_CASE("field shift reuses eigenvectors") {
  const auto spec = chain(6, 0.6, 0.0, Boundary::periodic);
  const auto base = solve_chain(spec);
  const auto shifted = base.with_field(0.9);
  auto direct_spec = spec;
  direct_spec.h_over_j = 0.9;
  const auto ref = oracle::spectrum(oracle::hamiltonian(6, 0.6, 0.9, true));
  for (std::size_t a = 0; a < shifted.dimension(); ++a) CHECK(shifted.energy(a) == doctest::Approx(ref[static_cast<Eigen::Index>(a)]).epsilon(1e-12));
  CHECK(shifted.spec().h_over_j == 0.9);
}

TEST_CASE("ferromagnet ground set holds the two polarized states") {
  const auto es = solve_chain(chain(8, -2, 0, Boundary::periodic));
  const auto& g = es.ground_set();
  REQUIRE(g.size() == 2);
  std::vector<int> m{es.magnetization_of(g.begin), es.magnetization_of(g.begin + 1)};
  std::sort(m.begin(), m.end());
  CHECK(m == std::vector<int>{-8, 8});
}

TEST_CASE("grouping is independent of the order of equal energies") {
  std::vector<double> e{-1.0, -1.0 + 1e-15, -1.0, 0.5, 0.5, 2.0};
  std::sort(e.begin(), e.end());
  const auto a = group_degenerate(e, 1e-9);
  std::vector<double> f{-1.0, -1.0, -1.0 + 1e-15, 0.5, 0.5, 2.0};
  std::sort(f.begin(), f.end());
  const auto b = group_degenerate(f, 1e-9);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].begin == b[k].begin);
    CHECK(a[k].end == b[k].end);
  }
}

TEST_CASE("set invariants") {
  const auto es = solve_chain(chain(8, 0.5, 0.2, Boundary::periodic));
  const auto sets = es.degenerate_sets();
  std::size_t covered = 0;
  for (std::size_t t = 0; t < sets.size(); ++t) {
    covered += sets[t].size();
    CHECK(es.energy(sets[t].end - 1) - es.energy(sets[t].begin) <= es.tolerance() * static_cast<double>(sets[t].size()));
    if (t > 0) CHECK(es.energy(sets[t].begin) - es.energy(sets[t - 1].end - 1) > es.tolerance());
  }
  CHECK(covered == es.dimension());
}

TEST_CASE("operators in the eigenbasis match the dense transform") {
  const auto spec = chain(4, 0.5, 0.3, Boundary::periodic);
  const auto es = solve_chain(spec);
  const auto U = eigenvector_matrix(es);
  for (char k : {'x', 'y', 'z'}) {
    const PauliKind kind = k == 'x' ? PauliKind::sigma_x : k == 'y' ? PauliKind::sigma_y : PauliKind::sigma_z;
    for (int site : {0, 2}) {
      const auto local = build_local_operator(spec, es.shared_basis(), {kind, site});
      const auto op = to_eigenbasis(local, es);
      const Eigen::MatrixXcd ref = U.adjoint() * oracle::site_operator(4, site, k) * U;
      const Eigen::MatrixXcd got = op.dense(es);
      CHECK((got - ref).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((got - got.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
      // Completeness: sum_g W_ag (W^dag)_gb equals the identity for a Pauli.
      CHECK((got * got.adjoint() - Eigen::MatrixXcd::Identity(got.rows(), got.cols())).cwiseAbs().maxCoeff() < 1e-11);
      for (const auto& b : op.blocks()) {
        const int dm = es.basis().sector(b.target_sector).magnetization - es.basis().sector(b.source_sector).magnetization;
        CHECK(std::abs(dm) == (kind == PauliKind::sigma_z ? 0 : 2));
      }
    }
  }
}

TEST_CASE("field-dominated chain makes sigma_z nearly diagonal") {
  const auto spec = chain(6, 0.5, 8.0, Boundary::open);
  const auto es = solve_chain(spec);
  const auto op = to_eigenbasis(build_local_operator(spec, es.shared_basis(), {PauliKind::sigma_z, 3}), es);
  const auto m = op.dense(es);
  // The lowest state is the fully down state.
  CHECK(m(0, 0).real() == doctest::Approx(-1.0));
  CHECK(std::abs(m(0, 1)) < 1e-12);
}

TEST_CASE("operator application and dephasing") {
  const auto spec = chain(5, 0.7, 0.1, Boundary::open);
  const auto es = solve_chain(spec);
  const auto op = to_eigenbasis(build_local_operator(spec, es.shared_basis(), {PauliKind::sigma_y, 2}), es);
  const auto W = op.dense(es);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  Eigen::VectorXcd x(static_cast<Eigen::Index>(es.dimension()));
  for (auto& v : x) v = {nd(rng), nd(rng)};
  const auto xs = es.to_sectors(x);
  CHECK((es.to_global(apply_operator(op, xs)) - W * x).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((es.to_global(apply_adjoint(op, xs)) - W.adjoint() * x).cwiseAbs().maxCoeff() < 1e-12);

  Eigen::MatrixXcd Wt = Eigen::MatrixXcd::Zero(W.rows(), W.cols());
  for (Eigen::Index r = 0; r < W.rows(); ++r)
    for (Eigen::Index c = 0; c < W.cols(); ++c)
      if (es.set_of(static_cast<std::size_t>(r)) == es.set_of(static_cast<std::size_t>(c))) Wt(r, c) = W(r, c);
  CHECK((es.to_global(apply_dephased(op, es, xs)) - Wt * x).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((es.to_global(apply_dephased_adjoint(op, es, xs)) - Wt.adjoint() * x).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(inner(xs, apply_operator(op, xs)) - x.dot(W * x)) < 1e-12);
}

TEST_CASE("projection onto degenerate sets") {
  const auto es = solve_chain(chain(4, 1.0, 0.0, Boundary::periodic));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  StateVector psi{Eigen::VectorXcd(static_cast<Eigen::Index>(es.dimension()))};
  for (auto& v : psi.coefficients) v = {nd(rng), nd(rng)};
  psi.coefficients.normalize();

  Eigen::VectorXcd sum = Eigen::VectorXcd::Zero(psi.coefficients.size());
  for (std::size_t t = 0; t < es.degenerate_sets().size(); ++t) {
    const auto p = project_state(es, psi, t);
    sum += p.coefficients;
    const auto pp = project_state(es, p, t);
    CHECK((pp.coefficients - p.coefficients).norm() == 0.0);
    const std::size_t other = (t + 1) % es.degenerate_sets().size();
    if (other != t) CHECK(project_state(es, p, other).norm() == 0.0);
    const double rest = (psi.coefficients - p.coefficients).squaredNorm();
    CHECK(p.norm() * p.norm() + rest == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK((sum - psi.coefficients).norm() < 1e-15);
  CHECK_THROWS_AS(project_state(es, psi, es.degenerate_sets().size()), Error);

  const auto xs = es.to_sectors(psi.coefficients);
  CHECK((es.to_global(project_sectors(es, xs, 0)) - project_state(es, psi, 0).coefficients).norm() == 0.0);

  // A nondegenerate ground state projects to a single coefficient.
  const auto nd_es = solve_chain(chain(4, 0.5, 0.0, Boundary::periodic));
  REQUIRE(nd_es.ground_set().size() == 1);
  StateVector basis_vec{Eigen::VectorXcd::Ones(static_cast<Eigen::Index>(nd_es.dimension()))};
  const auto g = project_state(nd_es, basis_vec, 0);
  CHECK((g.coefficients.array() != std::complex<double>(0.0)).count() == 1);
}

TEST_CASE("configuration round trip") {
  const auto es = solve_chain(chain(5, 0.4, 0.2, Boundary::open));
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  Eigen::VectorXcd psi(32);
  for (auto& v : psi) v = {nd(rng), nd(rng)};
  const auto back = to_configuration(es, es.to_sectors(from_configuration(es, psi).coefficients));
  CHECK((back - psi).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("sector windows") {
  const auto es = solve_chain(chain(6, 1.0, 0.0, Boundary::periodic));
  std::vector<bool> seed(7, false);
  seed[3] = true;
  CHECK(sector_window(es, seed, 0) == std::vector<bool>{false, false, false, true, false, false, false});
  CHECK(sector_window(es, seed, 2) == std::vector<bool>{false, true, true, true, true, true, false});
  const auto local = build_local_operator(es.spec(), es.shared_basis(), {PauliKind::sigma_x, 1});
  const auto op = to_eigenbasis(local, es, sector_window(es, seed, 1));
  CHECK(op.covers(seed));
  CHECK_FALSE(op.covers({}));
  for (const auto& b : op.blocks()) {
    CHECK(b.source_sector >= 2);
    CHECK(b.source_sector <= 4);
    CHECK(b.target_sector >= 2);
    CHECK(b.target_sector <= 4);
  }
}
