#include "xxzotoc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "xxzotoc/error.hpp"
#include "xxzotoc/otoc.hpp"

namespace xxz {

const char* to_string(AnsatzVerdict verdict) noexcept {
  switch (verdict) {
    case AnsatzVerdict::ordered_like: return "ordered_like";
    case AnsatzVerdict::disordered_like: return "disordered_like";
    case AnsatzVerdict::inconclusive: return "inconclusive";
  }
  return "?";
}

AnsatzVerdict classify(double intra, double cross, AnsatzThresholds t) {
  if (intra >= t.absolute && intra >= t.ratio * cross) return AnsatzVerdict::ordered_like;
  if (intra <= t.absolute) return AnsatzVerdict::disordered_like;
  return AnsatzVerdict::inconclusive;
}

AnsatzReport ansatz_report(const OperatorMatrix& op, const EigenSystem& es, AnsatzThresholds thresholds) {
  const auto& ground = es.ground_set();
  const std::size_t n_sets = es.degenerate_sets().size();
  AnsatzReport report;
  report.diag_profile.assign(ground.size(), std::vector<double>(n_sets, 0.0));

  for (std::size_t k = 0; k < ground.size(); ++k) {
    const auto row = es.location(ground.begin + k);
    auto& profile = report.diag_profile[k];
    for (const auto& block : op.blocks()) {
      if (block.target_sector != row.sector) continue;
      const auto values = block.values.row(row.local);
      for (Eigen::Index c = 0; c < values.size(); ++c) {
        const double weight = values[c] * values[c];
        const std::size_t set = es.set_of(es.global_index(block.source_sector, c));
        profile[set] += weight;
        if (set == 0) {
          report.intra_ground_max = std::max(report.intra_ground_max, weight);
        } else {
          report.cross_set_max = std::max(report.cross_set_max, weight);
        }
      }
    }
  }
  report.verdict = classify(report.intra_ground_max, report.cross_set_max, thresholds);
  return report;
}

AnsatzReport ansatz_report(const LocalOperatorSpec& spec, const EigenSystem& es,
                           AnsatzThresholds thresholds) {
  std::vector<bool> seed(es.sector_count(), false);
  const auto& ground = es.ground_set();
  for (std::size_t a = ground.begin; a < ground.end; ++a) seed[es.location(a).sector] = true;
  const int hops = spec.kind == PauliKind::sigma_z ? 0 : 1;
  const auto op = build_local_operator(es.spec(), es.shared_basis(), spec);
  return ansatz_report(to_eigenbasis(op, es, sector_window(es, seed, hops)), es, thresholds);
}

double participation_ratio(const Eigen::VectorXcd& psi) {
  const double n2 = psi.squaredNorm();
  require(n2 > 0.0 && std::isfinite(n2), ErrorKind::domain, "participation ratio: zero-norm state");
  const double n4 = psi.cwiseAbs2().cwiseAbs2().sum();
  return n2 * n2 / n4;
}

double participation_ratio(const Eigen::VectorXd& psi) {
  return participation_ratio(Eigen::VectorXcd(psi.cast<std::complex<double>>()));
}

double ground_fluctuation(const EigenSystem& es, int site) {
  require(site >= 0 && site < es.spec().n_sites, ErrorKind::domain,
          "ground fluctuation: site " + std::to_string(site) + " outside chain");
  const auto alpha = select_ground_member(es);
  const auto loc = es.location(alpha);
  const auto& states = es.basis().sector(loc.sector).states;
  const auto col = es.sector_vectors(loc.sector).col(loc.local);
  double mean = 0.0;
  for (Eigen::Index r = 0; r < col.size(); ++r) {
    const bool up = (states[static_cast<std::size_t>(r)] >> site) & 1U;
    mean += (up ? 1.0 : -1.0) * col[r] * col[r];
  }
  return std::max(0.0, 1.0 - mean * mean);
}

double degeneracy_lifting_period(const EigenSystem& es) {
  require(es.dimension() >= 2, ErrorKind::domain, "degeneracy lifting period: need two levels");
  const double gap = es.energy(1) - es.energy(0);
  if (gap < es.tolerance()) return kInfinitePeriod;
  return std::numbers::pi / gap;
}

DiagnosticsRow diagnostics_row(const EigenSystem& es, const LocalOperatorSpec& op,
                               AnsatzThresholds thresholds) {
  DiagnosticsRow row;
  row.jz_over_j = es.spec().jz_over_j;
  row.h_over_j = es.spec().h_over_j;
  row.n_sites = es.spec().n_sites;
  const auto report = ansatz_report(op, es, thresholds);
  row.intra_ground_max = report.intra_ground_max;
  row.cross_set_max = report.cross_set_max;
  row.verdict = report.verdict;
  row.pr_ground = participation_ratio(es.eigenvector(select_ground_member(es)));
  row.fluct = ground_fluctuation(es, op.site);
  row.tau = degeneracy_lifting_period(es);
  return row;
}

}  // namespace xxz
