#include "xxzotoc/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <tuple>

#include "eigensolver.hpp"
#include "xxzotoc/error.hpp"

namespace xxz {

namespace {

constexpr double kResidualTolerance = 1e-10;

// Largest-magnitude component real positive; ties resolved toward the lower row.
void fix_gauge(Eigen::MatrixXd& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    auto col = vectors.col(c);
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index r = 0; r < col.size(); ++r) {
      const double a = std::abs(col[r]);
      if (a > best_abs * (1.0 + 1e-12)) {
        best_abs = a;
        best = r;
      }
    }
    if (col.size() > 0 && col[best] < 0.0) col = -col;
  }
}

SectorEigen solve_block(Eigen::MatrixXd block, std::size_t sector, int magnetization,
                        bool verify) {
  const Eigen::MatrixXd original = verify ? block : Eigen::MatrixXd();
  SectorEigen out;
  const int info = detail::symmetric_eigen(block, out.values);
  if (info != 0) {
    fail(ErrorKind::numeric, "diagonalization failed in sector " + std::to_string(sector) +
                                 " (magnetization " + std::to_string(magnetization) +
                                 "), LAPACK info " + std::to_string(info));
  }
  out.vectors = std::move(block);
  fix_gauge(out.vectors);
  if (verify && original.size() > 0) {
    const double norm = original.cwiseAbs().colwise().sum().maxCoeff();
    Eigen::MatrixXd residual = original * out.vectors;
    residual -= out.vectors * out.values.asDiagonal();
    const double worst = residual.colwise().norm().maxCoeff();
    if (worst > kResidualTolerance * std::max(norm, 1.0)) {
      fail(ErrorKind::numeric, "eigenpair residual " + std::to_string(worst) + " in sector " +
                                   std::to_string(sector) + " exceeds tolerance");
    }
  }
  return out;
}

// y += scale * B x (or B^T x) for real B and complex x, as one real product.
void accumulate(const Eigen::MatrixXd& b, bool transpose, std::complex<double> scale,
                const Eigen::Ref<const Eigen::VectorXcd>& x, Eigen::Ref<Eigen::VectorXcd> y) {
  using Pair = Eigen::Matrix<double, 2, Eigen::Dynamic>;
  Eigen::Map<const Pair> xr(reinterpret_cast<const double*>(x.data()), 2, x.size());
  Pair tmp(2, y.size());
  if (transpose) {
    tmp.noalias() = xr * b;
  } else {
    tmp.noalias() = xr * b.transpose();
  }
  Eigen::Map<const Eigen::VectorXcd> t(reinterpret_cast<const std::complex<double>*>(tmp.data()),
                                       y.size());
  if (scale == std::complex<double>(1.0, 0.0)) {
    y += t;
  } else {
    y += scale * t;
  }
}

Eigen::VectorXcd& ensure(SectorVector& v, std::size_t sector, Eigen::Index dim) {
  if (v[sector].size() == 0) v[sector] = Eigen::VectorXcd::Zero(dim);
  return v[sector];
}

template <typename Fn>
void for_common_sets(std::span<const EigenSystem::Segment> a, std::span<const EigenSystem::Segment> b,
                     Fn&& fn) {
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].set < b[j].set) {
      ++i;
    } else if (b[j].set < a[i].set) {
      ++j;
    } else {
      fn(a[i], b[j]);
      ++i;
      ++j;
    }
  }
}

SectorVector dephased(const OperatorMatrix& op, const EigenSystem& es, const SectorVector& x,
                      bool adjoint) {
  SectorVector y = es.zero_vector();
  for (const auto& block : op.blocks()) {
    const std::size_t from = adjoint ? block.target_sector : block.source_sector;
    const std::size_t to = adjoint ? block.source_sector : block.target_sector;
    if (x[from].size() == 0) continue;
    const auto scale = adjoint ? std::conj(op.phase()) : op.phase();
    for_common_sets(es.segments(to), es.segments(from),
                    [&](const EigenSystem::Segment& rows, const EigenSystem::Segment& cols) {
                      auto& out = ensure(y, to, es.sector_dimension(to));
                      const auto nr = rows.end - rows.begin;
                      const auto nc = cols.end - cols.begin;
                      if (adjoint) {
                        // rows index the source sector of the block here
                        const Eigen::MatrixXd sub = block.values.block(cols.begin, rows.begin, nc, nr);
                        accumulate(sub, true, scale, x[from].segment(cols.begin, nc),
                                   out.segment(rows.begin, nr));
                      } else {
                        const Eigen::MatrixXd sub = block.values.block(rows.begin, cols.begin, nr, nc);
                        accumulate(sub, false, scale, x[from].segment(cols.begin, nc),
                                   out.segment(rows.begin, nr));
                      }
                    });
  }
  return y;
}

}  // namespace

double DegeneracyTolerance::resolve(double spectral_width) const {
  switch (mode) {
    case Mode::relative:
      require(value > 0.0 && std::isfinite(value), ErrorKind::domain,
              "degeneracy tolerance: relative fraction must be positive");
      return std::max(value * spectral_width, 1e-12);
    case Mode::absolute:
      require(value > 0.0 && std::isfinite(value), ErrorKind::domain,
              "degeneracy tolerance: must be positive");
      return value;
    case Mode::window:
      require(value > 0.0 && std::isfinite(value), ErrorKind::domain,
              "degeneracy tolerance: averaging window must be positive");
      return std::numbers::pi / (2.0 * value);
  }
  return value;
}

const char* to_string(DegeneracyTolerance::Mode mode) noexcept {
  switch (mode) {
    case DegeneracyTolerance::Mode::relative: return "relative";
    case DegeneracyTolerance::Mode::absolute: return "absolute";
    case DegeneracyTolerance::Mode::window: return "window";
  }
  return "?";
}

std::vector<DegenerateSet> group_degenerate(std::span<const double> energies, double tol) {
  require(tol > 0.0 && std::isfinite(tol), ErrorKind::domain,
          "group_degenerate: tolerance must be positive");
  std::vector<DegenerateSet> sets;
  if (energies.empty()) return sets;
  DegenerateSet current{0, 1, 0.0};
  double sum = energies[0];
  for (std::size_t k = 1; k < energies.size(); ++k) {
    const double gap = energies[k] - energies[k - 1];
    require(gap >= 0.0, ErrorKind::domain, "group_degenerate: energies must be sorted ascending");
    if (gap > tol) {
      current.energy = sum / static_cast<double>(current.size());
      sets.push_back(current);
      current = {k, k + 1, 0.0};
      sum = energies[k];
    } else {
      current.end = k + 1;
      sum += energies[k];
    }
  }
  current.energy = sum / static_cast<double>(current.size());
  sets.push_back(current);
  return sets;
}

EigenSystem::EigenSystem(ChainSpec spec, std::shared_ptr<const SpinBasis> basis,
                         std::shared_ptr<const std::vector<SectorEigen>> sectors,
                         double field_in_values, DegeneracyTolerance tolerance)
    : spec_(spec),
      basis_(std::move(basis)),
      sectors_(std::move(sectors)),
      field_in_values_(field_in_values),
      tolerance_rule_(tolerance) {
  require(basis_ && sectors_ && sectors_->size() == basis_->sector_count(), ErrorKind::domain,
          "EigenSystem: sector decomposition does not match basis");
  assemble(false);
}

void EigenSystem::assemble(bool singletons) {
  const std::size_t n_sectors = sectors_->size();
  const double shift = spec_.field() - field_in_values_;

  struct Level {
    double energy;
    std::uint32_t sector;
    std::uint32_t local;
  };
  std::vector<Level> levels;
  levels.reserve(basis_->dimension());
  for (std::uint32_t s = 0; s < n_sectors; ++s) {
    const double offset = shift * basis_->sector(s).magnetization;
    const auto& values = (*sectors_)[s].values;
    for (Eigen::Index k = 0; k < values.size(); ++k) {
      levels.push_back({values[k] + offset, s, static_cast<std::uint32_t>(k)});
    }
  }
  std::sort(levels.begin(), levels.end(), [](const Level& a, const Level& b) {
    return std::tie(a.energy, a.sector, a.local) < std::tie(b.energy, b.sector, b.local);
  });

  energies_.resize(levels.size());
  locations_.resize(levels.size());
  global_of_.assign(n_sectors, {});
  for (std::size_t s = 0; s < n_sectors; ++s) {
    global_of_[s].resize(static_cast<std::size_t>((*sectors_)[s].values.size()));
  }
  for (std::size_t a = 0; a < levels.size(); ++a) {
    energies_[a] = levels[a].energy;
    locations_[a] = {levels[a].sector, levels[a].local};
    global_of_[levels[a].sector][levels[a].local] = a;
  }

  const double width = energies_.empty() ? 0.0 : energies_.back() - energies_.front();
  tolerance_ = tolerance_rule_.resolve(width);
  if (singletons) {
    sets_.clear();
    for (std::size_t a = 0; a < energies_.size(); ++a) sets_.push_back({a, a + 1, energies_[a]});
  } else {
    sets_ = group_degenerate(energies_, tolerance_);
  }
  set_of_.resize(energies_.size());
  for (std::size_t t = 0; t < sets_.size(); ++t)
    for (std::size_t a = sets_[t].begin; a < sets_[t].end; ++a) set_of_[a] = t;

  segments_.assign(n_sectors, {});
  for (std::size_t s = 0; s < n_sectors; ++s) {
    const auto& globals = global_of_[s];
    for (std::size_t k = 0; k < globals.size(); ++k) {
      const std::size_t set = set_of_[globals[k]];
      auto& segs = segments_[s];
      if (!segs.empty() && segs.back().set == set) {
        segs.back().end = static_cast<Eigen::Index>(k) + 1;
      } else {
        segs.push_back({set, static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k) + 1});
      }
    }
  }
}

int EigenSystem::magnetization_of(std::size_t alpha) const {
  return basis_->sector(location(alpha).sector).magnetization;
}

Eigen::VectorXd EigenSystem::eigenvector(std::size_t alpha) const {
  const auto loc = location(alpha);
  Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis_->dimension()));
  const auto& states = basis_->sector(loc.sector).states;
  const auto& vecs = sector_vectors(loc.sector);
  for (std::size_t i = 0; i < states.size(); ++i) {
    full[states[i]] = vecs(static_cast<Eigen::Index>(i), loc.local);
  }
  return full;
}

EigenSystem EigenSystem::with_field(double h_over_j) const {
  ChainSpec spec = spec_;
  spec.h_over_j = h_over_j;
  spec.validate();
  return EigenSystem(spec, basis_, sectors_, field_in_values_, tolerance_rule_);
}

EigenSystem EigenSystem::with_tolerance(DegeneracyTolerance tolerance) const {
  return EigenSystem(spec_, basis_, sectors_, field_in_values_, tolerance);
}

EigenSystem EigenSystem::with_singleton_sets() const {
  EigenSystem copy = *this;
  copy.assemble(true);
  return copy;
}

SectorVector EigenSystem::to_sectors(const Eigen::VectorXcd& global) const {
  require(static_cast<std::size_t>(global.size()) == dimension(), ErrorKind::domain,
          "state dimension does not match the eigensystem");
  SectorVector parts = zero_vector();
  for (std::size_t s = 0; s < sector_count(); ++s) {
    const auto& globals = global_of_[s];
    Eigen::VectorXcd part(static_cast<Eigen::Index>(globals.size()));
    bool any = false;
    for (std::size_t k = 0; k < globals.size(); ++k) {
      part[static_cast<Eigen::Index>(k)] = global[static_cast<Eigen::Index>(globals[k])];
      any = any || part[static_cast<Eigen::Index>(k)] != std::complex<double>(0.0, 0.0);
    }
    if (any) parts[s] = std::move(part);
  }
  return parts;
}

Eigen::VectorXcd EigenSystem::to_global(const SectorVector& parts) const {
  Eigen::VectorXcd global = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dimension()));
  for (std::size_t s = 0; s < parts.size() && s < sector_count(); ++s) {
    if (parts[s].size() == 0) continue;
    const auto& globals = global_of_[s];
    for (std::size_t k = 0; k < globals.size(); ++k) {
      global[static_cast<Eigen::Index>(globals[k])] = parts[s][static_cast<Eigen::Index>(k)];
    }
  }
  return global;
}

EigenSystem diagonalize(const SectorHamiltonian& hamiltonian, DegeneracyTolerance tolerance,
                        DiagonalizeOptions options) {
  hamiltonian.spec.validate();
  detail::verify_blas();
  const auto& basis = *hamiltonian.basis;
  auto sectors = std::make_shared<std::vector<SectorEigen>>();
  sectors->reserve(hamiltonian.blocks.size());
  for (std::size_t s = 0; s < hamiltonian.blocks.size(); ++s) {
    const auto& block = hamiltonian.blocks[s];
    require(block.rows() == block.cols() &&
                static_cast<std::size_t>(block.rows()) == basis.sector(s).dimension(),
            ErrorKind::domain, "diagonalize: block " + std::to_string(s) + " has wrong shape");
    sectors->push_back(solve_block(block, s, basis.sector(s).magnetization, options.verify_residuals));
  }
  return EigenSystem(hamiltonian.spec, hamiltonian.basis, std::move(sectors),
                     hamiltonian.spec.field(), tolerance);
}

EigenSystem solve_chain(const ChainSpec& spec, DegeneracyTolerance tolerance,
                        DiagonalizeOptions options) {
  spec.validate();
  detail::verify_blas();
  auto basis = std::make_shared<const SpinBasis>(spec);
  const std::size_t n_sectors = basis->sector_count();
  const std::size_t n = static_cast<std::size_t>(spec.n_sites);

  ChainSpec zero_field = spec;
  zero_field.h_over_j = 0.0;
  auto sectors = std::make_shared<std::vector<SectorEigen>>(n_sectors);
  for (std::size_t s = n_sectors; s-- > 0;) {
    const std::size_t mirror = n - s;
    if (options.use_spin_flip && mirror > s) {
      // Sector s holds the bit complements of sector `mirror`, in reverse order.
      auto& out = (*sectors)[s];
      const auto& src = (*sectors)[mirror];
      out.values = src.values;
      out.vectors = src.vectors.colwise().reverse();
      fix_gauge(out.vectors);
      continue;
    }
    (*sectors)[s] = solve_block(build_sector_block(zero_field, *basis, s), s,
                                basis->sector(s).magnetization, options.verify_residuals);
  }
  return EigenSystem(spec, std::move(basis), std::move(sectors), 0.0, tolerance);
}

OperatorMatrix::OperatorMatrix(LocalOperatorSpec spec, std::complex<double> phase, bool hermitian,
                               std::size_t sector_count, std::vector<Block> blocks,
                               std::vector<bool> window)
    : spec_(spec),
      phase_(phase),
      hermitian_(hermitian),
      sector_count_(sector_count),
      blocks_(std::move(blocks)),
      window_(std::move(window)),
      index_(sector_count * sector_count, -1) {
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    index_[blocks_[b].target_sector * sector_count_ + blocks_[b].source_sector] = static_cast<int>(b);
  }
}

const OperatorMatrix::Block* OperatorMatrix::find(std::size_t target_sector,
                                                  std::size_t source_sector) const {
  if (target_sector >= sector_count_ || source_sector >= sector_count_) return nullptr;
  const int b = index_[target_sector * sector_count_ + source_sector];
  return b < 0 ? nullptr : &blocks_[static_cast<std::size_t>(b)];
}

bool OperatorMatrix::covers(const std::vector<bool>& needed) const {
  if (window_.empty()) return true;
  if (needed.empty()) return std::all_of(window_.begin(), window_.end(), [](bool b) { return b; });
  for (std::size_t s = 0; s < needed.size(); ++s) {
    if (needed[s] && (s >= window_.size() || !window_[s])) return false;
  }
  return true;
}

std::complex<double> OperatorMatrix::element(EigenSystem::Location row,
                                             EigenSystem::Location col) const {
  const Block* block = find(row.sector, col.sector);
  if (block == nullptr) return {0.0, 0.0};
  return phase_ * block->values(row.local, col.local);
}

Eigen::MatrixXcd OperatorMatrix::dense(const EigenSystem& es) const {
  const auto dim = static_cast<Eigen::Index>(es.dimension());
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& block : blocks_) {
    for (Eigen::Index c = 0; c < block.values.cols(); ++c) {
      const auto gc = static_cast<Eigen::Index>(es.global_index(block.source_sector, c));
      for (Eigen::Index r = 0; r < block.values.rows(); ++r) {
        out(static_cast<Eigen::Index>(es.global_index(block.target_sector, r)), gc) =
            phase_ * block.values(r, c);
      }
    }
  }
  return out;
}

OperatorMatrix to_eigenbasis(const LocalOperator& op, const EigenSystem& es,
                             const std::vector<bool>& window) {
  require(op.basis().n_sites() == es.basis().n_sites(), ErrorKind::domain,
          "to_eigenbasis: operator and eigensystem describe different chains");
  require(window.empty() || window.size() == es.sector_count(), ErrorKind::domain,
          "to_eigenbasis: sector window has wrong length");
  const auto inside = [&](std::size_t s) { return window.empty() || window[s]; };

  std::vector<OperatorMatrix::Block> blocks;
  for (const auto& b : op.blocks()) {
    if (!inside(b.source_sector) || !inside(b.target_sector)) continue;
    const auto& u_src = es.sector_vectors(b.source_sector);
    const auto& u_dst = es.sector_vectors(b.target_sector);
    // Rows of (M U_src): each entry moves one row of U_src to its target row.
    Eigen::MatrixXd moved = Eigen::MatrixXd::Zero(u_dst.rows(), u_src.cols());
    for (const auto& e : b.entries) moved.row(e.target) = e.sign * u_src.row(e.source);
    OperatorMatrix::Block out{b.source_sector, b.target_sector, {}};
    out.values.noalias() = u_dst.transpose() * moved;
    blocks.push_back(std::move(out));
  }
  return OperatorMatrix(op.spec(), op.phase(), true, es.sector_count(), std::move(blocks), window);
}

std::vector<bool> sector_window(const EigenSystem& es, const std::vector<bool>& seed, int hops) {
  const auto n = static_cast<long>(es.sector_count());
  std::vector<bool> out(es.sector_count(), false);
  for (long s = 0; s < n && s < static_cast<long>(seed.size()); ++s) {
    if (!seed[static_cast<std::size_t>(s)]) continue;
    for (long t = std::max(0L, s - hops); t <= std::min(n - 1, s + hops); ++t) {
      out[static_cast<std::size_t>(t)] = true;
    }
  }
  return out;
}

SectorVector apply_operator(const OperatorMatrix& op, const SectorVector& x) {
  SectorVector y(x.size());
  for (const auto& block : op.blocks()) {
    if (x[block.source_sector].size() == 0) continue;
    auto& out = ensure(y, block.target_sector, block.values.rows());
    accumulate(block.values, false, op.phase(), x[block.source_sector], out);
  }
  return y;
}

SectorVector apply_adjoint(const OperatorMatrix& op, const SectorVector& x) {
  SectorVector y(x.size());
  for (const auto& block : op.blocks()) {
    if (x[block.target_sector].size() == 0) continue;
    auto& out = ensure(y, block.source_sector, block.values.cols());
    accumulate(block.values, true, std::conj(op.phase()), x[block.target_sector], out);
  }
  return y;
}

SectorVector apply_dephased(const OperatorMatrix& op, const EigenSystem& es, const SectorVector& x) {
  return dephased(op, es, x, false);
}

SectorVector apply_dephased_adjoint(const OperatorMatrix& op, const EigenSystem& es,
                                    const SectorVector& x) {
  return dephased(op, es, x, true);
}

std::complex<double> inner(const SectorVector& x, const SectorVector& y) {
  std::complex<double> sum{0.0, 0.0};
  for (std::size_t s = 0; s < std::min(x.size(), y.size()); ++s) {
    if (x[s].size() == 0 || y[s].size() == 0) continue;
    sum += x[s].dot(y[s]);
  }
  return sum;
}

SectorVector project_sectors(const EigenSystem& es, const SectorVector& x, std::size_t set) {
  SectorVector out = es.zero_vector();
  for (std::size_t s = 0; s < x.size(); ++s) {
    if (x[s].size() == 0) continue;
    for (const auto& seg : es.segments(s)) {
      if (seg.set != set) continue;
      auto& part = ensure(out, s, x[s].size());
      part.segment(seg.begin, seg.end - seg.begin) = x[s].segment(seg.begin, seg.end - seg.begin);
    }
  }
  return out;
}

StateVector project_state(const EigenSystem& es, const StateVector& state, std::size_t set) {
  require(set < es.degenerate_sets().size(), ErrorKind::domain,
          "project_state: unknown degenerate set " + std::to_string(set));
  require(static_cast<std::size_t>(state.coefficients.size()) == es.dimension(), ErrorKind::domain,
          "project_state: state dimension does not match the eigensystem");
  const auto& theta = es.degenerate_sets()[set];
  StateVector out{Eigen::VectorXcd::Zero(state.coefficients.size())};
  const auto n = static_cast<Eigen::Index>(theta.size());
  out.coefficients.segment(static_cast<Eigen::Index>(theta.begin), n) =
      state.coefficients.segment(static_cast<Eigen::Index>(theta.begin), n);
  return out;
}

Eigen::VectorXcd to_configuration(const EigenSystem& es, const SectorVector& coefficients) {
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(es.basis().dimension()));
  for (std::size_t s = 0; s < coefficients.size() && s < es.sector_count(); ++s) {
    if (coefficients[s].size() == 0) continue;
    const Eigen::VectorXcd part = es.sector_vectors(s).cast<std::complex<double>>() * coefficients[s];
    const auto& states = es.basis().sector(s).states;
    for (std::size_t i = 0; i < states.size(); ++i) psi[states[i]] = part[static_cast<Eigen::Index>(i)];
  }
  return psi;
}

StateVector from_configuration(const EigenSystem& es, const Eigen::VectorXcd& configuration_state) {
  require(static_cast<std::size_t>(configuration_state.size()) == es.basis().dimension(),
          ErrorKind::domain, "from_configuration: state has wrong dimension");
  SectorVector parts = es.zero_vector();
  for (std::size_t s = 0; s < es.sector_count(); ++s) {
    const auto& states = es.basis().sector(s).states;
    Eigen::VectorXcd local(static_cast<Eigen::Index>(states.size()));
    for (std::size_t i = 0; i < states.size(); ++i) local[static_cast<Eigen::Index>(i)] = configuration_state[states[i]];
    if (local.cwiseAbs().maxCoeff() == 0.0) continue;
    parts[s] = es.sector_vectors(s).transpose().cast<std::complex<double>>() * local;
  }
  return StateVector{es.to_global(parts)};
}

std::vector<std::size_t> support_sets(const EigenSystem& es, const SectorVector& x, double cutoff) {
  std::vector<bool> hit(es.degenerate_sets().size(), false);
  for (std::size_t s = 0; s < x.size(); ++s) {
    if (x[s].size() == 0) continue;
    for (const auto& seg : es.segments(s)) {
      if (hit[seg.set]) continue;
      if (x[s].segment(seg.begin, seg.end - seg.begin).cwiseAbs().maxCoeff() > cutoff) {
        hit[seg.set] = true;
      }
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < hit.size(); ++t)
    if (hit[t]) out.push_back(t);
  return out;
}

}  // namespace xxz
