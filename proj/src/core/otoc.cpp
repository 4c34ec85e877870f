#include "xxzotoc/otoc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "xxzotoc/error.hpp"

namespace xxz {

namespace {

// Components below this are treated as absent when enumerating resonances.
constexpr double kScanCutoff = 1e-13;
constexpr double kNormTolerance = 1e-10;

int hops(PauliKind kind) { return kind == PauliKind::sigma_z ? 0 : 1; }

bool same_operator(const LocalOperatorSpec& a, const LocalOperatorSpec& b) {
  return a.kind == b.kind && a.site == b.site;
}

std::vector<Eigen::VectorXd> sector_energies(const EigenSystem& es) {
  std::vector<Eigen::VectorXd> out(es.sector_count());
  for (std::size_t s = 0; s < es.sector_count(); ++s) {
    out[s].resize(es.sector_dimension(s));
    for (Eigen::Index k = 0; k < out[s].size(); ++k) out[s][k] = es.energy(es.global_index(s, k));
  }
  return out;
}

// x_alpha <- x_alpha exp(-i E_alpha t)
void evolve(SectorVector& x, const std::vector<Eigen::VectorXd>& energies, double t) {
  for (std::size_t s = 0; s < x.size(); ++s) {
    if (x[s].size() == 0) continue;
    for (Eigen::Index k = 0; k < x[s].size(); ++k) {
      x[s][k] *= std::polar(1.0, -energies[s][k] * t);
    }
  }
}

std::vector<std::size_t> intersect(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::vector<std::size_t> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

struct Member {
  EigenSystem::Location where;
  std::complex<double> value;
};

// Nonzero components of x that belong to degenerate set `set`.
std::vector<Member> members_of(const EigenSystem& es, const SectorVector& x, std::size_t set,
                               double cutoff) {
  std::vector<Member> out;
  const auto& theta = es.degenerate_sets()[set];
  for (std::size_t a = theta.begin; a < theta.end; ++a) {
    const auto loc = es.location(a);
    const auto& part = x[loc.sector];
    if (part.size() == 0) continue;
    const auto v = part[loc.local];
    if (std::abs(v) > cutoff) out.push_back({loc, v});
  }
  return out;
}

std::complex<double> nan_complex() {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return {nan, nan};
}

}  // namespace

const char* to_string(InitialStateKind kind) noexcept {
  switch (kind) {
    case InitialStateKind::ground_state: return "ground_state";
    case InitialStateKind::ground_set_member: return "ground_set_member";
    case InitialStateKind::haar_random: return "haar_random";
  }
  return "?";
}

const char* to_string(TermIvMode mode) noexcept {
  return mode == TermIvMode::scan ? "scan" : "assume_absent";
}

std::vector<double> TimeGrid::times() const {
  std::vector<double> out(n_samples);
  const double step = n_samples > 1 ? t_max / static_cast<double>(n_samples - 1) : 0.0;
  for (std::size_t k = 0; k < n_samples; ++k) out[k] = step * static_cast<double>(k);
  if (n_samples > 1) out.back() = t_max;
  return out;
}

OtocConfig OtocConfig::bulk(const ChainSpec& chain, PauliKind kind) {
  OtocConfig config;
  config.w_op = {kind, chain.bulk_site()};
  config.v_op = config.w_op;
  return config;
}

void OtocConfig::validate(const ChainSpec& chain) const {
  const auto check_site = [&](const LocalOperatorSpec& op, const char* name) {
    require(op.site >= 0 && op.site < chain.n_sites, ErrorKind::domain,
            std::string(name) + ": site " + std::to_string(op.site) + " outside chain of " +
                std::to_string(chain.n_sites) + " sites");
  };
  check_site(w_op, "w_op");
  check_site(v_op, "v_op");
  require(std::isfinite(time_grid.t_max) && time_grid.t_max > 0.0, ErrorKind::domain,
          "t_max: must be positive");
  require(time_grid.n_samples >= 2, ErrorKind::domain, "n_samples: need at least 2 samples");
  require(std::isfinite(average_window) && average_window > 0.0, ErrorKind::domain,
          "average_window: must be positive");
  require(average_window <= time_grid.t_max * (1.0 + 1e-12), ErrorKind::domain,
          "average_window: T = " + std::to_string(average_window) + " exceeds t_max = " +
              std::to_string(time_grid.t_max));
  require(quadruple_budget > 0, ErrorKind::domain, "quadruple_budget: must be positive");
}

std::size_t select_ground_member(const EigenSystem& es) {
  const auto& ground = es.ground_set();
  constexpr double kVisible = 1e-8;
  Configuration best_config = std::numeric_limits<Configuration>::max();
  std::size_t best = ground.begin;
  double best_abs = -1.0;
  for (std::size_t a = ground.begin; a < ground.end; ++a) {
    const auto loc = es.location(a);
    const auto& states = es.basis().sector(loc.sector).states;
    const auto col = es.sector_vectors(loc.sector).col(loc.local);
    for (Eigen::Index r = 0; r < col.size(); ++r) {
      const double amp = std::abs(col[r]);
      if (amp <= kVisible) continue;
      const Configuration config = states[static_cast<std::size_t>(r)];
      if (config < best_config || (config == best_config && amp > best_abs * (1.0 + 1e-12))) {
        best_config = config;
        best_abs = amp;
        best = a;
      }
      break;  // states are ascending, so later rows only hold larger configurations
    }
  }
  return best;
}

StateVector haar_state(const EigenSystem& es, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  StateVector out{Eigen::VectorXcd(static_cast<Eigen::Index>(es.dimension()))};
  for (Eigen::Index k = 0; k < out.coefficients.size(); ++k) {
    const double re = normal(rng);
    const double im = normal(rng);
    out.coefficients[k] = {re, im};
  }
  out.coefficients /= out.coefficients.norm();
  return out;
}

OtocEngine::OtocEngine(const EigenSystem& es, const OtocConfig& config) : es_(&es), config_(config) {
  config_.validate(es.spec());
  prepare_state();
  build_operators(needed_window());
}

OtocEngine::OtocEngine(const EigenSystem& es, const OtocConfig& config, const StateVector& initial,
                       std::shared_ptr<const OperatorMatrix> w, std::shared_ptr<const OperatorMatrix> v)
    : es_(&es), config_(config) {
  config_.validate(es.spec());
  require(static_cast<std::size_t>(initial.coefficients.size()) == es.dimension(), ErrorKind::domain,
          "initial state: dimension " + std::to_string(initial.coefficients.size()) +
              " does not match the eigensystem (" + std::to_string(es.dimension()) + ")");
  require(std::abs(initial.norm() - 1.0) <= kNormTolerance, ErrorKind::domain,
          "initial state: not normalized (norm " + std::to_string(initial.norm()) + ")");
  c_ = es.to_sectors(initial.coefficients);
  if (w && v) {
    require(same_operator(w->spec(), config_.w_op) && same_operator(v->spec(), config_.v_op),
            ErrorKind::domain, "OtocEngine: shared operators do not match the configuration");
    require(w->covers({}) && v->covers({}), ErrorKind::domain,
            "OtocEngine: a custom initial state needs operators on every sector");
    w_ = std::move(w);
    v_ = std::move(v);
    b_ = apply_operator(*v_, c_);
  } else {
    build_operators({});
  }
}

OtocEngine::OtocEngine(const EigenSystem& es, const OtocConfig& config,
                       std::shared_ptr<const OperatorMatrix> w, std::shared_ptr<const OperatorMatrix> v)
    : es_(&es), config_(config), w_(std::move(w)), v_(std::move(v)) {
  config_.validate(es.spec());
  require(w_ && v_, ErrorKind::domain, "OtocEngine: missing operator");
  require(same_operator(w_->spec(), config_.w_op) && same_operator(v_->spec(), config_.v_op),
          ErrorKind::domain, "OtocEngine: shared operators do not match the configuration");
  prepare_state();
  const auto needed = needed_window();
  require(w_->covers(needed) && v_->covers(needed), ErrorKind::domain,
          "OtocEngine: shared operators do not cover the sectors reached from the initial state");
  b_ = apply_operator(*v_, c_);
}

void OtocEngine::prepare_state() {
  const auto& es = *es_;
  c_ = es.zero_vector();
  switch (config_.initial.kind) {
    case InitialStateKind::ground_state:
      initial_eigenindex_ = select_ground_member(es);
      break;
    case InitialStateKind::ground_set_member: {
      const auto& ground = es.ground_set();
      require(config_.initial.member < ground.size(), ErrorKind::domain,
              "initial state: ground set has " + std::to_string(ground.size()) +
                  " members, requested member " + std::to_string(config_.initial.member));
      initial_eigenindex_ = ground.begin + config_.initial.member;
      break;
    }
    case InitialStateKind::haar_random: {
      std::mt19937_64 rng(config_.initial.seed);
      c_ = es.to_sectors(haar_state(es, rng).coefficients);
      return;
    }
  }
  const auto loc = es.location(*initial_eigenindex_);
  c_[loc.sector] = Eigen::VectorXcd::Zero(es.sector_dimension(loc.sector));
  c_[loc.sector][loc.local] = 1.0;
}

std::vector<bool> OtocEngine::needed_window() const {
  if (config_.initial.kind == InitialStateKind::haar_random) return {};
  std::vector<bool> seed(es_->sector_count(), false);
  for (std::size_t s = 0; s < c_.size(); ++s) seed[s] = c_[s].size() > 0;
  return sector_window(*es_, seed, hops(config_.w_op.kind) + hops(config_.v_op.kind));
}

std::vector<bool> OtocEngine::window_for(const EigenSystem& es, const OtocConfig& config) {
  std::size_t alpha = 0;
  switch (config.initial.kind) {
    case InitialStateKind::haar_random: return {};
    case InitialStateKind::ground_state: alpha = select_ground_member(es); break;
    case InitialStateKind::ground_set_member:
      require(config.initial.member < es.ground_set().size(), ErrorKind::domain,
              "initial state: ground set has " + std::to_string(es.ground_set().size()) +
                  " members, requested member " + std::to_string(config.initial.member));
      alpha = es.ground_set().begin + config.initial.member;
      break;
  }
  std::vector<bool> seed(es.sector_count(), false);
  seed[es.location(alpha).sector] = true;
  return sector_window(es, seed, hops(config.w_op.kind) + hops(config.v_op.kind));
}

void OtocEngine::build_operators(const std::vector<bool>& window) {
  const auto& es = *es_;
  const auto make = [&](const LocalOperatorSpec& spec) {
    const auto op = build_local_operator(es.spec(), es.shared_basis(), spec);
    return std::make_shared<const OperatorMatrix>(to_eigenbasis(op, es, window));
  };
  w_ = make(config_.w_op);
  v_ = same_operator(config_.w_op, config_.v_op) ? w_ : make(config_.v_op);
  b_ = apply_operator(*v_, c_);
}

OtocMetadata OtocEngine::metadata() const {
  OtocMetadata m;
  m.chain = es_->spec();
  m.w_op = config_.w_op;
  m.v_op = config_.v_op;
  m.initial = config_.initial;
  m.tolerance_rule = es_->tolerance_rule();
  m.tolerance = es_->tolerance();
  m.ground_set_size = es_->ground_set().size();
  m.initial_eigenindex = initial_eigenindex_;
  if (initial_eigenindex_) m.initial_magnetization = es_->magnetization_of(*initial_eigenindex_);
  m.term_iv_mode = config_.term_iv_mode;
  m.quadruples = quadruples_;
  return m;
}

std::vector<std::complex<double>> OtocEngine::dynamics(const std::vector<double>& times) const {
  const auto energies = sector_energies(*es_);
  std::vector<std::complex<double>> out;
  out.reserve(times.size());

  // A single eigenstate only picks up a phase: <W psi(t)| = e^{+iEt} <W psi|.
  std::optional<double> single_energy;
  if (initial_eigenindex_) single_energy = es_->energy(*initial_eigenindex_);
  const SectorVector wc = apply_operator(*w_, c_);

  for (const double t : times) {
    SectorVector bt = b_;
    evolve(bt, energies, t);
    SectorVector x = apply_operator(*w_, bt);
    evolve(x, energies, -t);
    SectorVector y = apply_adjoint(*v_, x);
    evolve(y, energies, t);
    if (single_energy) {
      out.push_back(std::polar(1.0, *single_energy * t) * inner(wc, y));
    } else {
      SectorVector ct = c_;
      evolve(ct, energies, t);
      out.push_back(inner(apply_operator(*w_, ct), y));
    }
  }
  return out;
}

SaturationTerms OtocEngine::saturation_terms() const {
  const auto& es = *es_;
  SaturationTerms terms;
  const auto shared = intersect(support_sets(es, c_), support_sets(es, b_));

  const SectorVector wt_b = apply_dephased(*w_, es, b_);
  const SectorVector wt_c = apply_dephased(*w_, es, c_);
  terms.pair_ag = inner(wt_c, apply_adjoint(*v_, wt_b));

  for (const std::size_t theta : shared) {
    const SectorVector pc = project_sectors(es, c_, theta);
    const SectorVector pb = project_sectors(es, b_, theta);
    terms.pair_ab += inner(apply_operator(*w_, pc), apply_dephased_adjoint(*v_, es, apply_operator(*w_, pb)));
    // W~ P_theta x stays inside theta, so the dephased products are already projected.
    const SectorVector lhs = apply_dephased(*w_, es, pc);
    const SectorVector rhs = apply_dephased_adjoint(*v_, es, apply_dephased(*w_, es, pb));
    terms.all_equal += inner(lhs, project_sectors(es, rhs, theta));
  }

  if (config_.term_iv_mode == TermIvMode::scan) terms.accidental = accidental_term(es, &quadruples_);
  return terms;
}

SaturationTerms OtocEngine::nondegenerate_terms() const {
  const auto& es = *es_;
  const auto& w = *w_;
  const auto& v = *v_;
  SaturationTerms terms;

  // Diagonals of W and V in sector layout.
  const auto diagonal = [&](const OperatorMatrix& op) {
    SectorVector d(es.sector_count());
    for (std::size_t s = 0; s < es.sector_count(); ++s) {
      if (const auto* block = op.find(s, s)) d[s] = op.phase() * block->values.diagonal().cast<std::complex<double>>();
    }
    return d;
  };
  const SectorVector dw = diagonal(w);
  const SectorVector dv = diagonal(v);

  // (i): sum_a conj(c_a) b_a sum_g |W_ga|^2 conj(V_gg)
  SectorVector column(es.sector_count());
  for (const auto& block : w.blocks()) {
    const auto& vd = dv[block.target_sector];
    if (vd.size() == 0 || c_[block.source_sector].size() == 0) continue;
    auto& out = column[block.source_sector];
    if (out.size() == 0) out = Eigen::VectorXcd::Zero(block.values.cols());
    out += block.values.cwiseAbs2().transpose().cast<std::complex<double>>() * vd.conjugate();
  }
  for (std::size_t s = 0; s < es.sector_count(); ++s) {
    if (c_[s].size() == 0 || b_[s].size() == 0) continue;
    const Eigen::VectorXcd cb = c_[s].conjugate().cwiseProduct(b_[s]);
    if (column[s].size() > 0) terms.pair_ab += (cb.array() * column[s].array()).sum();
    if (dw[s].size() > 0 && dv[s].size() > 0) {
      terms.all_equal += (cb.array() * dw[s].array().abs2() * dv[s].array().conjugate()).sum();
    }
  }

  // (ii): < d_W o c, V^dag (d_W o b) >
  SectorVector dc(es.sector_count());
  SectorVector db(es.sector_count());
  for (std::size_t s = 0; s < es.sector_count(); ++s) {
    if (dw[s].size() == 0) continue;
    if (c_[s].size() > 0) dc[s] = dw[s].cwiseProduct(c_[s]);
    if (b_[s].size() > 0) db[s] = dw[s].cwiseProduct(b_[s]);
  }
  terms.pair_ag = inner(dc, apply_adjoint(v, db));

  if (config_.term_iv_mode == TermIvMode::scan) {
    terms.accidental = accidental_term(es.with_singleton_sets(), &quadruples_);
  }
  return terms;
}

std::complex<double> OtocEngine::accidental_term(const EigenSystem& es, std::size_t* quadruples) const {
  const auto sets = es.degenerate_sets();
  std::vector<double> level(sets.size());
  for (std::size_t t = 0; t < sets.size(); ++t) level[t] = sets[t].energy;
  const double tol = es.tolerance();
  const auto& w = *w_;
  const auto& v = *v_;

  const auto supp_c = support_sets(es, c_, kScanCutoff);
  const auto supp_b = support_sets(es, b_, kScanCutoff);

  // Resonant partners phi' of (theta, theta', phi): |E_phi' - E_phi - (E_theta' - E_theta)| <= tol,
  // excluding the index patterns already counted in (i) and (ii).
  const auto partners = [&](std::size_t theta, std::size_t theta_p, std::size_t phi, auto&& fn) {
    const double target = level[phi] + level[theta_p] - level[theta];
    auto it = std::lower_bound(level.begin(), level.end(), target - tol);
    for (; it != level.end() && *it <= target + tol; ++it) {
      const auto phi_p = static_cast<std::size_t>(it - level.begin());
      if (phi_p == phi || phi_p == theta_p) continue;
      fn(phi_p);
    }
  };

  std::vector<std::vector<std::size_t>> phis(supp_c.size());
  std::size_t count = 0;
  for (std::size_t i = 0; i < supp_c.size(); ++i) {
    const std::size_t theta = supp_c[i];
    phis[i] = support_sets(es, apply_operator(w, project_sectors(es, c_, theta)), kScanCutoff);
    for (const std::size_t theta_p : supp_b) {
      if (theta_p == theta) continue;
      for (const std::size_t phi : phis[i]) {
        if (phi == theta) continue;
        partners(theta, theta_p, phi, [&](std::size_t) { ++count; });
      }
    }
  }
  if (quadruples) *quadruples = count;
  require(count <= config_.quadruple_budget, ErrorKind::resource,
          "term (iv) scan: " + std::to_string(count) + " candidate quadruples exceed the budget of " +
              std::to_string(config_.quadruple_budget));
  if (count == 0) return {0.0, 0.0};

  std::vector<std::vector<Member>> b_members(sets.size());
  for (const std::size_t theta_p : supp_b) b_members[theta_p] = members_of(es, b_, theta_p, 0.0);

  std::complex<double> sum{0.0, 0.0};
  for (std::size_t i = 0; i < supp_c.size(); ++i) {
    const std::size_t theta = supp_c[i];
    const SectorVector y = apply_operator(w, project_sectors(es, c_, theta));
    for (const std::size_t phi : phis[i]) {
      if (phi == theta) continue;
      const auto y_members = members_of(es, y, phi, 0.0);
      for (const std::size_t theta_p : supp_b) {
        if (theta_p == theta) continue;
        partners(theta, theta_p, phi, [&](std::size_t phi_p) {
          const auto& target = sets[phi_p];
          for (std::size_t g = target.begin; g < target.end; ++g) {
            const auto gp = es.location(g);
            std::complex<double> z{0.0, 0.0};
            for (const auto& beta : b_members[theta_p]) z += w.element(gp, beta.where) * beta.value;
            if (z == std::complex<double>(0.0, 0.0)) continue;
            std::complex<double> left{0.0, 0.0};
            for (const auto& gamma : y_members) {
              left += std::conj(gamma.value) * std::conj(v.element(gp, gamma.where));
            }
            sum += left * z;
          }
        });
      }
    }
  }
  return sum;
}

bool OtocEngine::initial_in_ground_set(double tol) const {
  double outside = 0.0;
  for (std::size_t s = 0; s < c_.size(); ++s) {
    if (c_[s].size() == 0) continue;
    for (const auto& seg : es_->segments(s)) {
      if (seg.set == 0) continue;
      outside += c_[s].segment(seg.begin, seg.end - seg.begin).squaredNorm();
    }
  }
  return std::sqrt(outside) <= tol;
}

std::complex<double> OtocEngine::ground_subspace_term() const {
  require(initial_in_ground_set(kNormTolerance), ErrorKind::domain,
          "ground-subspace term: initial state is not a ground-set member");
  const auto& es = *es_;
  const auto& ground = es.ground_set();
  const auto g = static_cast<Eigen::Index>(ground.size());
  const Eigen::VectorXcd global = es.to_global(c_);
  const Eigen::VectorXcd c1 = global.segment(static_cast<Eigen::Index>(ground.begin), g);
  Eigen::MatrixXcd w1(g, g);
  Eigen::MatrixXcd v1(g, g);
  for (Eigen::Index i = 0; i < g; ++i) {
    for (Eigen::Index j = 0; j < g; ++j) {
      const auto a = ground.begin + static_cast<std::size_t>(i);
      const auto b = ground.begin + static_cast<std::size_t>(j);
      w1(i, j) = w_->element(es, a, b);
      v1(i, j) = v_->element(es, a, b);
    }
  }
  const Eigen::VectorXcd rhs = v1.adjoint() * (w1 * (v1 * c1));
  return (w1 * c1).dot(rhs);
}

TimeSeries otoc_dynamics(const EigenSystem& es, const OtocConfig& config) {
  OtocEngine engine(es, config);
  TimeSeries series;
  series.times = config.time_grid.times();
  series.values = engine.dynamics(series.times);
  return series;
}

namespace {

OtocReport finish_report(const OtocEngine& engine, const SaturationTerms& terms) {
  OtocReport report;
  report.terms = terms;
  report.f_saturation = terms.total();
  report.f_gs = engine.initial_in_ground_set(kNormTolerance) ? engine.ground_subspace_term() : nan_complex();
  report.f_ex = report.f_saturation - report.f_gs;
  report.metadata = engine.metadata();
  return report;
}

}  // namespace

OtocReport saturation_report(const OtocEngine& engine) {
  const auto terms = engine.saturation_terms();
  return finish_report(engine, terms);
}

OtocReport saturation_nondegenerate(const EigenSystem& es, const OtocConfig& config) {
  OtocEngine engine(es, config);
  const auto terms = engine.nondegenerate_terms();
  OtocReport report = finish_report(engine, terms);
  report.metadata.singleton_sets = true;
  return report;
}

OtocReport saturation_degenerate(const EigenSystem& es, const OtocConfig& config) {
  OtocEngine engine(es, config);
  const auto terms = engine.saturation_terms();
  return finish_report(engine, terms);
}

std::complex<double> ground_subspace_term(const EigenSystem& es, const OtocConfig& config) {
  return OtocEngine(es, config).ground_subspace_term();
}

OtocReport full_report(const EigenSystem& es, const OtocConfig& config, bool with_series) {
  OtocEngine engine(es, config);
  const auto terms = engine.saturation_terms();
  OtocReport report = finish_report(engine, terms);
  if (with_series) {
    TimeSeries series;
    series.times = config.time_grid.times();
    series.values = engine.dynamics(series.times);
    report.f_time_average = time_average(series, config.average_window);
    report.time_series = std::move(series);
  }
  return report;
}

namespace {

// Trapezoid average of F over [start, start + window], linearly interpolating
// at the window edges.
TimeAverage average_between(const TimeSeries& series, double start, double window) {
  const auto& t = series.times;
  const auto& f = series.values;
  require(t.size() == f.size() && t.size() >= 2, ErrorKind::domain,
          "time average: need at least two samples");
  require(std::isfinite(window) && window > 0.0, ErrorKind::domain,
          "time average: window must be positive");
  const double end = start + window;
  const double slack = 1e-9 * std::max(1.0, std::abs(end));
  require(t.front() <= start + slack && t.back() >= end - slack, ErrorKind::domain,
          "time average: window [" + std::to_string(start) + ", " + std::to_string(end) +
              "] exceeds the sampled interval [" + std::to_string(t.front()) + ", " +
              std::to_string(t.back()) + "]");

  const auto at = [&](std::size_t k, double time) {
    const double span = t[k + 1] - t[k];
    const double u = span > 0.0 ? (time - t[k]) / span : 0.0;
    return f[k] + u * (f[k + 1] - f[k]);
  };

  TimeAverage out;
  std::complex<double> integral{0.0, 0.0};
  out.re_min = std::numeric_limits<double>::infinity();
  out.re_max = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    const double lo = std::max(t[k], start);
    const double hi = std::min(t[k + 1], end);
    if (hi <= lo) continue;
    const auto fa = at(k, lo);
    const auto fb = at(k, hi);
    integral += 0.5 * (hi - lo) * (fa + fb);
    out.re_min = std::min({out.re_min, fa.real(), fb.real()});
    out.re_max = std::max({out.re_max, fa.real(), fb.real()});
  }
  out.mean = integral / window;
  return out;
}

}  // namespace

TimeAverage time_average(const TimeSeries& series, double window) {
  require(!series.times.empty(), ErrorKind::domain, "time average: empty series");
  return average_between(series, series.times.front(), window);
}

namespace {

HaarEstimate summarize(std::vector<std::complex<double>> samples) {
  HaarEstimate out;
  const auto n = static_cast<double>(samples.size());
  for (const auto& s : samples) out.mean += s;
  out.mean /= n;
  double var = 0.0;
  for (const auto& s : samples) var += std::norm(s - out.mean);
  var /= (n - 1.0);
  out.standard_error = std::sqrt(var / n);
  out.samples = std::move(samples);
  return out;
}

}  // namespace

HaarEstimate haar_infinite_temperature(const EigenSystem& es, const OtocConfig& config,
                                       std::size_t n_samples) {
  require(n_samples >= 2, ErrorKind::domain,
          "haar: need at least 2 samples, got " + std::to_string(n_samples));
  config.validate(es.spec());
  std::mt19937_64 rng(config.initial.seed);
  const auto times = config.time_grid.times();
  const double start = config.time_grid.t_max - config.average_window;

  std::shared_ptr<const OperatorMatrix> w;
  std::shared_ptr<const OperatorMatrix> v;
  std::vector<std::complex<double>> samples;
  samples.reserve(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) {
    const StateVector psi = haar_state(es, rng);
    const OtocEngine engine(es, config, psi, w, v);
    w = engine.shared_w();
    v = engine.shared_v();
    TimeSeries series{times, engine.dynamics(times)};
    samples.push_back(average_between(series, std::max(start, times.front()), config.average_window).mean);
  }
  return summarize(std::move(samples));
}

HaarEstimate haar_expectation(const EigenSystem& es, const LocalOperatorSpec& op,
                              std::size_t n_samples, std::uint64_t seed) {
  require(n_samples >= 2, ErrorKind::domain,
          "haar: need at least 2 samples, got " + std::to_string(n_samples));
  const auto local = build_local_operator(es.spec(), es.shared_basis(), op);
  const auto& basis = es.basis();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto dim = static_cast<Eigen::Index>(basis.dimension());

  std::vector<std::complex<double>> samples;
  samples.reserve(n_samples);
  Eigen::VectorXcd psi(dim);
  for (std::size_t k = 0; k < n_samples; ++k) {
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      psi[i] = {re, im};
    }
    psi /= psi.norm();
    std::complex<double> value{0.0, 0.0};
    for (const auto& block : local.blocks()) {
      const auto& src = basis.sector(block.source_sector).states;
      const auto& dst = basis.sector(block.target_sector).states;
      for (const auto& e : block.entries) {
        value += std::conj(psi[dst[e.target]]) * e.sign * psi[src[e.source]];
      }
    }
    samples.push_back(local.phase() * value);
  }
  return summarize(std::move(samples));
}

}  // namespace xxz
