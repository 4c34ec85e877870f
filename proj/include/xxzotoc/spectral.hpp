#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "xxzotoc/lattice.hpp"

namespace xxz {

/// How the degeneracy tolerance tol_deg is chosen.
///   relative: value * (E_max - E_min)            (default 1e-9)
///   absolute: value
///   window:   pi / (2 T) for an averaging window T = value
struct DegeneracyTolerance {
  enum class Mode { relative, absolute, window };

  Mode mode = Mode::relative;
  double value = 1e-9;

  static DegeneracyTolerance relative(double fraction = 1e-9) { return {Mode::relative, fraction}; }
  static DegeneracyTolerance absolute(double tol) { return {Mode::absolute, tol}; }
  static DegeneracyTolerance window(double averaging_time) { return {Mode::window, averaging_time}; }

  double resolve(double spectral_width) const;
};

const char* to_string(DegeneracyTolerance::Mode mode) noexcept;

/// Contiguous run [begin, end) of globally sorted eigenindices sharing one energy.
struct DegenerateSet {
  std::size_t begin = 0;
  std::size_t end = 0;
  double energy = 0.0;  // mean of the members

  std::size_t size() const noexcept { return end - begin; }
  bool contains(std::size_t alpha) const noexcept { return alpha >= begin && alpha < end; }
};

/// Greedy gap partition of ascending energies: a new set starts whenever
/// E[k+1] - E[k] > tol. Throws Error(domain) for tol <= 0 or unsorted input.
std::vector<DegenerateSet> group_degenerate(std::span<const double> energies, double tol);

/// Eigenpairs of one magnetization sector, ascending, gauge-fixed so the
/// largest-magnitude component of every eigenvector is positive.
struct SectorEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

struct DiagonalizeOptions {
  bool verify_residuals = true;
  /// Diagonalize only magnetization >= 0 and mirror the rest through the
  /// global spin flip (exact for XXZ, whose field term is a per-sector constant).
  bool use_spin_flip = true;
};

/// Eigenbasis coefficients stored sector by sector; an empty part means zero.
using SectorVector = std::vector<Eigen::VectorXcd>;

/// Coefficients c_alpha in global (energy-sorted) eigenindex order.
struct StateVector {
  Eigen::VectorXcd coefficients;

  double norm() const { return coefficients.norm(); }
};

/// Sector-resolved spectrum of one chain, with a degenerate-set partition.
///
/// Eigenvectors are shared between copies, so with_field / with_tolerance are
/// cheap: only the energy bookkeeping is rebuilt.
class EigenSystem {
 public:
  struct Location {
    std::uint32_t sector;
    std::uint32_t local;
  };
  /// Members of one degenerate set inside one sector, as a local index range.
  struct Segment {
    std::size_t set;
    Eigen::Index begin;
    Eigen::Index end;
  };

  EigenSystem(ChainSpec spec, std::shared_ptr<const SpinBasis> basis,
              std::shared_ptr<const std::vector<SectorEigen>> sectors, double field_in_values,
              DegeneracyTolerance tolerance);

  const ChainSpec& spec() const noexcept { return spec_; }
  const SpinBasis& basis() const noexcept { return *basis_; }
  std::shared_ptr<const SpinBasis> shared_basis() const noexcept { return basis_; }
  std::size_t dimension() const noexcept { return energies_.size(); }
  std::size_t sector_count() const noexcept { return sectors_->size(); }

  std::span<const double> energies() const noexcept { return energies_; }
  double energy(std::size_t alpha) const { return energies_.at(alpha); }
  Location location(std::size_t alpha) const { return locations_.at(alpha); }
  std::size_t global_index(std::size_t sector, Eigen::Index local) const {
    return global_of_[sector][static_cast<std::size_t>(local)];
  }
  int magnetization_of(std::size_t alpha) const;

  const Eigen::MatrixXd& sector_vectors(std::size_t sector) const { return (*sectors_)[sector].vectors; }
  Eigen::Index sector_dimension(std::size_t sector) const { return sector_vectors(sector).cols(); }
  /// Eigenvector alpha expanded in the full 2^N configuration basis.
  Eigen::VectorXd eigenvector(std::size_t alpha) const;

  double tolerance() const noexcept { return tolerance_; }
  const DegeneracyTolerance& tolerance_rule() const noexcept { return tolerance_rule_; }
  std::span<const DegenerateSet> degenerate_sets() const noexcept { return sets_; }
  const DegenerateSet& ground_set() const { return sets_.front(); }
  std::size_t set_of(std::size_t alpha) const { return set_of_.at(alpha); }
  std::span<const Segment> segments(std::size_t sector) const { return segments_[sector]; }

  /// Same eigenvectors with the field h/J replaced; energies shift by h*m per sector.
  EigenSystem with_field(double h_over_j) const;
  EigenSystem with_tolerance(DegeneracyTolerance tolerance) const;
  /// Every eigenstate in its own set, regardless of energies.
  EigenSystem with_singleton_sets() const;

  SectorVector to_sectors(const Eigen::VectorXcd& global) const;
  Eigen::VectorXcd to_global(const SectorVector& parts) const;
  SectorVector zero_vector() const { return SectorVector(sector_count()); }

 private:
  void assemble(bool singletons);

  ChainSpec spec_;
  std::shared_ptr<const SpinBasis> basis_;
  std::shared_ptr<const std::vector<SectorEigen>> sectors_;
  double field_in_values_;
  DegeneracyTolerance tolerance_rule_;
  double tolerance_ = 0.0;

  std::vector<double> energies_;
  std::vector<Location> locations_;
  std::vector<std::vector<std::size_t>> global_of_;
  std::vector<DegenerateSet> sets_;
  std::vector<std::size_t> set_of_;
  std::vector<std::vector<Segment>> segments_;
};

/// Dense per-sector diagonalization of the given blocks.
/// Throws Error(numeric) naming the sector when LAPACK fails or a residual
/// ||H v - E v|| exceeds 1e-10 ||H||.
EigenSystem diagonalize(const SectorHamiltonian& hamiltonian, DegeneracyTolerance tolerance = {},
                        DiagonalizeOptions options = {});

/// Builds and diagonalizes the chain sector by sector without holding the
/// whole Hamiltonian; uses the spin-flip mirror when enabled.
EigenSystem solve_chain(const ChainSpec& spec, DegeneracyTolerance tolerance = {},
                        DiagonalizeOptions options = {});

/// A local operator in the eigenbasis, W_{alpha gamma} = <psi_alpha|W|psi_gamma>.
///
/// Stored as phase * (real block) for every connected (source, target) sector
/// pair. The representation is independent of the field and of the
/// degenerate-set partition, so it can be reused across with_field copies.
/// When built for a sector window, the matrix is P_R W P_R for that window R.
class OperatorMatrix {
 public:
  struct Block {
    std::size_t source_sector;
    std::size_t target_sector;
    Eigen::MatrixXd values;  // rows: target locals, cols: source locals
  };

  OperatorMatrix(LocalOperatorSpec spec, std::complex<double> phase, bool hermitian,
                 std::size_t sector_count, std::vector<Block> blocks,
                 std::vector<bool> window = {});

  const LocalOperatorSpec& spec() const noexcept { return spec_; }
  std::complex<double> phase() const noexcept { return phase_; }
  bool hermitian() const noexcept { return hermitian_; }
  std::span<const Block> blocks() const noexcept { return blocks_; }
  const Block* find(std::size_t target_sector, std::size_t source_sector) const;
  /// Sectors the blocks were restricted to (empty: every sector).
  const std::vector<bool>& window() const noexcept { return window_; }
  bool covers(const std::vector<bool>& needed) const;

  std::complex<double> element(EigenSystem::Location row, EigenSystem::Location col) const;
  std::complex<double> element(const EigenSystem& es, std::size_t alpha, std::size_t gamma) const {
    return element(es.location(alpha), es.location(gamma));
  }

  /// Dense D x D matrix in global eigenindex order (small chains only).
  Eigen::MatrixXcd dense(const EigenSystem& es) const;

 private:
  LocalOperatorSpec spec_;
  std::complex<double> phase_;
  bool hermitian_;
  std::size_t sector_count_;
  std::vector<Block> blocks_;
  std::vector<bool> window_;
  std::vector<int> index_;  // target * sector_count + source -> block, or -1
};

/// Transforms a configuration-space operator into the eigenbasis. Only
/// blocks whose source and target sectors are both inside `window` are
/// materialized (all sectors when the window is empty).
OperatorMatrix to_eigenbasis(const LocalOperator& op, const EigenSystem& es,
                             const std::vector<bool>& window = {});

/// Sectors within `hops` single-spin flips of any sector in `seed`.
std::vector<bool> sector_window(const EigenSystem& es, const std::vector<bool>& seed, int hops);

/// y = W x, y = W^dagger x, and the set-dephased variants
/// sum_theta P_theta W P_theta x (and the same for W^dagger).
SectorVector apply_operator(const OperatorMatrix& op, const SectorVector& x);
SectorVector apply_adjoint(const OperatorMatrix& op, const SectorVector& x);
SectorVector apply_dephased(const OperatorMatrix& op, const EigenSystem& es, const SectorVector& x);
SectorVector apply_dephased_adjoint(const OperatorMatrix& op, const EigenSystem& es,
                                    const SectorVector& x);

/// <x, y> = sum conj(x) y over all sectors.
std::complex<double> inner(const SectorVector& x, const SectorVector& y);

/// P_theta x in sector layout.
SectorVector project_sectors(const EigenSystem& es, const SectorVector& x, std::size_t set);

/// Coefficients outside degenerate set theta (0-based) set to zero, no renormalization.
/// Throws Error(domain) for an unknown set.
StateVector project_state(const EigenSystem& es, const StateVector& state, std::size_t set);

/// psi = sum_alpha c_alpha |psi_alpha> in the 2^N configuration basis, and back.
Eigen::VectorXcd to_configuration(const EigenSystem& es, const SectorVector& coefficients);
StateVector from_configuration(const EigenSystem& es, const Eigen::VectorXcd& configuration_state);

/// Degenerate sets on which the vector has a component above `cutoff`.
std::vector<std::size_t> support_sets(const EigenSystem& es, const SectorVector& x,
                                      double cutoff = 0.0);

}  // namespace xxz
