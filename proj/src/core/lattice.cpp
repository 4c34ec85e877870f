#include "xxzotoc/lattice.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "xxzotoc/error.hpp"

namespace xxz {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::domain: return "domain error";
    case ErrorKind::capacity: return "capacity error";
    case ErrorKind::numeric: return "numeric error";
    case ErrorKind::resource: return "resource error";
    case ErrorKind::not_found: return "not found";
    case ErrorKind::fit: return "fit error";
    case ErrorKind::io: return "i/o error";
    case ErrorKind::usage: return "usage error";
  }
  return "error";
}

Boundary parse_boundary(std::string_view text) {
  if (text == "open") return Boundary::open;
  if (text == "periodic") return Boundary::periodic;
  fail(ErrorKind::domain, "boundary: expected 'open' or 'periodic', got '" + std::string(text) + "'");
}

const char* to_string(Boundary boundary) noexcept {
  return boundary == Boundary::open ? "open" : "periodic";
}

PauliKind parse_pauli(std::string_view text) {
  if (text == "sx" || text == "sigma_x" || text == "x") return PauliKind::sigma_x;
  if (text == "sy" || text == "sigma_y" || text == "y") return PauliKind::sigma_y;
  if (text == "sz" || text == "sigma_z" || text == "z") return PauliKind::sigma_z;
  fail(ErrorKind::domain, "operator: expected one of sx, sy, sz, got '" + std::string(text) + "'");
}

const char* to_string(PauliKind kind) noexcept {
  switch (kind) {
    case PauliKind::sigma_x: return "sx";
    case PauliKind::sigma_y: return "sy";
    case PauliKind::sigma_z: return "sz";
  }
  return "?";
}

void ChainSpec::validate() const {
  require(n_sites >= 2, ErrorKind::domain,
          "n_sites: chain needs at least 2 sites, got " + std::to_string(n_sites));
  require(max_sites >= 2 && max_sites <= kHardMaxSites, ErrorKind::domain,
          "max_sites: must lie in [2, " + std::to_string(kHardMaxSites) + "]");
  require(n_sites <= max_sites, ErrorKind::capacity,
          "n_sites: " + std::to_string(n_sites) + " exceeds the dense diagonalization cap of " +
              std::to_string(max_sites));
  require(std::isfinite(jz_over_j), ErrorKind::domain, "jz_over_j: must be finite");
  require(std::isfinite(h_over_j), ErrorKind::domain, "h_over_j: must be finite");
  require(std::isfinite(energy_scale) && energy_scale > 0.0, ErrorKind::domain,
          "energy_scale: must be positive");
}

std::vector<std::pair<int, int>> ChainSpec::bonds() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i + 1 < n_sites; ++i) out.emplace_back(i, i + 1);
  if (boundary == Boundary::periodic) out.emplace_back(n_sites - 1, 0);
  return out;
}

std::vector<SectorBasis> build_sector_basis(const ChainSpec& spec) {
  spec.validate();
  const int n = spec.n_sites;
  std::vector<SectorBasis> sectors(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) sectors[k].magnetization = 2 * k - n;
  const Configuration count = Configuration{1} << n;
  for (Configuration c = 0; c < count; ++c) {
    sectors[std::popcount(c)].states.push_back(c);
  }
  return sectors;
}

SpinBasis::SpinBasis(const ChainSpec& spec)
    : n_sites_(spec.n_sites), sectors_(build_sector_basis(spec)), positions_(spec.dimension()) {
  for (std::uint32_t s = 0; s < sectors_.size(); ++s) {
    const auto& states = sectors_[s].states;
    for (std::uint32_t i = 0; i < states.size(); ++i) positions_[states[i]] = {s, i};
  }
}

std::size_t SpinBasis::sector_index(int magnetization) const {
  const int shifted = magnetization + n_sites_;
  require(shifted >= 0 && shifted <= 2 * n_sites_ && shifted % 2 == 0, ErrorKind::domain,
          "magnetization " + std::to_string(magnetization) + " impossible for " +
              std::to_string(n_sites_) + " sites");
  return static_cast<std::size_t>(shifted / 2);
}

Eigen::MatrixXd build_sector_block(const ChainSpec& spec, const SpinBasis& basis,
                                   std::size_t sector) {
  const auto& states = basis.sector(sector).states;
  const auto dim = static_cast<Eigen::Index>(states.size());
  const double j = spec.energy_scale;
  const double jz = spec.jz_over_j * j;
  const double h = spec.field();
  const auto bonds = spec.bonds();

  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    const Configuration c = states[col];
    double diagonal = h * basis.sector(sector).magnetization;
    for (auto [a, b] : bonds) {
      const bool up_a = (c >> a) & 1U;
      const bool up_b = (c >> b) & 1U;
      if (up_a == up_b) {
        diagonal += jz;
      } else {
        diagonal -= jz;
        // sx sx + sy sy = 2 (s+ s- + s- s+) exchanges an antiparallel pair.
        const Configuration flipped = c ^ ((Configuration{1} << a) | (Configuration{1} << b));
        block(basis.locate(flipped).index, col) += 2.0 * j;
      }
    }
    block(col, col) += diagonal;
  }
  return block;
}

SectorHamiltonian build_hamiltonian(const ChainSpec& spec) {
  spec.validate();
  return build_hamiltonian(spec, std::make_shared<const SpinBasis>(spec));
}

SectorHamiltonian build_hamiltonian(const ChainSpec& spec, std::shared_ptr<const SpinBasis> basis) {
  spec.validate();
  require(basis && basis->n_sites() == spec.n_sites, ErrorKind::domain,
          "build_hamiltonian: basis does not match chain size");
  SectorHamiltonian out{spec, basis, {}};
  out.blocks.reserve(basis->sector_count());
  for (std::size_t s = 0; s < basis->sector_count(); ++s) {
    out.blocks.push_back(build_sector_block(spec, *basis, s));
  }
  return out;
}

Eigen::MatrixXd SectorHamiltonian::dense() const {
  const auto dim = static_cast<Eigen::Index>(basis->dimension());
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t s = 0; s < blocks.size(); ++s) {
    const auto& states = basis->sector(s).states;
    for (std::size_t c = 0; c < states.size(); ++c)
      for (std::size_t r = 0; r < states.size(); ++r)
        full(states[r], states[c]) = blocks[s](static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }
  return full;
}

LocalOperator::LocalOperator(LocalOperatorSpec spec, std::shared_ptr<const SpinBasis> basis)
    : spec_(spec), basis_(std::move(basis)), phase_(1.0, 0.0) {
  require(basis_ != nullptr, ErrorKind::domain, "local operator: missing basis");
  const int n = basis_->n_sites();
  require(spec_.site >= 0 && spec_.site < n, ErrorKind::domain,
          "site " + std::to_string(spec_.site) + " outside chain of " + std::to_string(n) + " sites");
  const Configuration mask = Configuration{1} << spec_.site;

  if (spec_.kind == PauliKind::sigma_z) {
    for (std::size_t s = 0; s < basis_->sector_count(); ++s) {
      Block block{s, s, {}};
      const auto& states = basis_->sector(s).states;
      block.entries.reserve(states.size());
      for (std::uint32_t i = 0; i < states.size(); ++i) {
        block.entries.push_back({i, i, (states[i] & mask) ? 1.0 : -1.0});
      }
      blocks_.push_back(std::move(block));
    }
    return;
  }

  // sigma_y = i * (|dn><up| - |up><dn|) in the (down, up) local basis.
  if (spec_.kind == PauliKind::sigma_y) phase_ = {0.0, 1.0};
  const double raise_sign = spec_.kind == PauliKind::sigma_y ? -1.0 : 1.0;
  for (std::size_t s = 0; s < basis_->sector_count(); ++s) {
    const auto& states = basis_->sector(s).states;
    Block lower{s, s - 1, {}};
    Block raise{s, s + 1, {}};
    for (std::uint32_t i = 0; i < states.size(); ++i) {
      const Configuration flipped = states[i] ^ mask;
      const auto target = basis_->locate(flipped);
      if (states[i] & mask) {
        lower.entries.push_back({i, target.index, 1.0});
      } else {
        raise.entries.push_back({i, target.index, raise_sign});
      }
    }
    if (!lower.entries.empty()) blocks_.push_back(std::move(lower));
    if (!raise.entries.empty()) blocks_.push_back(std::move(raise));
  }
}

Eigen::MatrixXcd LocalOperator::dense() const {
  const auto dim = static_cast<Eigen::Index>(basis_->dimension());
  Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& block : blocks_) {
    const auto& src = basis_->sector(block.source_sector).states;
    const auto& dst = basis_->sector(block.target_sector).states;
    for (const auto& e : block.entries) full(dst[e.target], src[e.source]) = phase_ * e.sign;
  }
  return full;
}

LocalOperator build_local_operator(const ChainSpec& spec, std::shared_ptr<const SpinBasis> basis,
                                   const LocalOperatorSpec& op) {
  spec.validate();
  require(basis && basis->n_sites() == spec.n_sites, ErrorKind::domain,
          "build_local_operator: basis does not match chain size");
  return LocalOperator(op, std::move(basis));
}

}  // namespace xxz
