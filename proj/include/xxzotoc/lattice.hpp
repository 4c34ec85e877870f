#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace xxz {

enum class Boundary { open, periodic };

Boundary parse_boundary(std::string_view text);
const char* to_string(Boundary boundary) noexcept;

inline constexpr int kDefaultMaxSites = 14;
// Bit patterns are stored in 32 bits; the dense cap is far below this anyway.
inline constexpr int kHardMaxSites = 24;

/// Physical description of an XXZ chain.
///
///   H = J sum_i (sx_i sx_{i+1} + sy_i sy_{i+1} + (Jz/J) sz_i sz_{i+1}) + h sum_i sz_i
///
/// with Pauli matrices, h = h_over_j * J, and times measured in 1/J.
struct ChainSpec {
  int n_sites = 2;
  double jz_over_j = 1.0;
  double h_over_j = 0.0;
  Boundary boundary = Boundary::periodic;
  double energy_scale = 1.0;  // J
  int max_sites = kDefaultMaxSites;

  /// Throws Error(domain) for malformed values, Error(capacity) above max_sites.
  void validate() const;

  /// Site farthest from the open ends, floor(N/2).
  int bulk_site() const noexcept { return n_sites / 2; }
  std::size_t dimension() const noexcept { return std::size_t{1} << n_sites; }
  double field() const noexcept { return h_over_j * energy_scale; }

  /// Nearest-neighbour bonds; periodic chains include (N-1, 0).
  std::vector<std::pair<int, int>> bonds() const;

  /// Periodic for even N, open for odd N.
  static Boundary default_boundary(int n_sites) noexcept {
    return n_sites % 2 == 0 ? Boundary::periodic : Boundary::open;
  }
};

/// Configuration bit pattern: bit i is site i, 1 means spin up.
using Configuration = std::uint32_t;

/// One total-magnetization block of the configuration space.
struct SectorBasis {
  int magnetization = 0;  // n_up - n_down
  std::vector<Configuration> states;  // strictly increasing

  std::size_t dimension() const noexcept { return states.size(); }
};

/// Partition of all 2^N configurations by magnetization, ordered from
/// magnetization -N up to +N. Sector k holds the configurations with k up spins.
std::vector<SectorBasis> build_sector_basis(const ChainSpec& spec);

/// Sector partition plus the reverse map configuration -> (sector, position).
class SpinBasis {
 public:
  struct Position {
    std::uint32_t sector;
    std::uint32_t index;
  };

  explicit SpinBasis(const ChainSpec& spec);

  int n_sites() const noexcept { return n_sites_; }
  std::size_t dimension() const noexcept { return positions_.size(); }
  std::size_t sector_count() const noexcept { return sectors_.size(); }
  const SectorBasis& sector(std::size_t s) const { return sectors_.at(s); }
  std::span<const SectorBasis> sectors() const noexcept { return sectors_; }

  /// Sector holding the given magnetization; throws Error(domain) if impossible.
  std::size_t sector_index(int magnetization) const;
  Position locate(Configuration config) const { return positions_.at(config); }

 private:
  int n_sites_;
  std::vector<SectorBasis> sectors_;
  std::vector<Position> positions_;
};

/// One dense real-symmetric block per magnetization sector.
struct SectorHamiltonian {
  ChainSpec spec;
  std::shared_ptr<const SpinBasis> basis;
  std::vector<Eigen::MatrixXd> blocks;

  /// Full 2^N matrix in configuration order, for cross-checks at small N.
  Eigen::MatrixXd dense() const;
};

/// Dense block of H restricted to one sector (field term included).
Eigen::MatrixXd build_sector_block(const ChainSpec& spec, const SpinBasis& basis,
                                   std::size_t sector);

SectorHamiltonian build_hamiltonian(const ChainSpec& spec);
SectorHamiltonian build_hamiltonian(const ChainSpec& spec, std::shared_ptr<const SpinBasis> basis);

enum class PauliKind { sigma_x, sigma_y, sigma_z };

PauliKind parse_pauli(std::string_view text);
const char* to_string(PauliKind kind) noexcept;

struct LocalOperatorSpec {
  PauliKind kind = PauliKind::sigma_z;
  int site = 0;
};

/// Single Pauli matrix on one site, stored as a global phase times a signed
/// permutation split into (source sector -> target sector) blocks.
///
/// sigma_z keeps the sector; sigma_x and sigma_y move one spin and therefore
/// connect magnetization m with m +/- 2.
class LocalOperator {
 public:
  struct Entry {
    std::uint32_t source;
    std::uint32_t target;
    double sign;
  };
  struct Block {
    std::size_t source_sector;
    std::size_t target_sector;
    std::vector<Entry> entries;
  };

  LocalOperator(LocalOperatorSpec spec, std::shared_ptr<const SpinBasis> basis);

  const LocalOperatorSpec& spec() const noexcept { return spec_; }
  const SpinBasis& basis() const noexcept { return *basis_; }
  std::complex<double> phase() const noexcept { return phase_; }
  std::span<const Block> blocks() const noexcept { return blocks_; }

  bool preserves_sectors() const noexcept { return spec_.kind == PauliKind::sigma_z; }

  /// Full 2^N matrix in configuration order.
  Eigen::MatrixXcd dense() const;

 private:
  LocalOperatorSpec spec_;
  std::shared_ptr<const SpinBasis> basis_;
  std::complex<double> phase_;
  std::vector<Block> blocks_;
};

/// Throws Error(domain) on an invalid site.
LocalOperator build_local_operator(const ChainSpec& spec, std::shared_ptr<const SpinBasis> basis,
                                   const LocalOperatorSpec& op);

}  // namespace xxz
