#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "xxzotoc/spectral.hpp"

namespace xxz {

enum class AnsatzVerdict { ordered_like, disordered_like, inconclusive };

const char* to_string(AnsatzVerdict verdict) noexcept;

struct AnsatzThresholds {
  double ratio = 100.0;  // intra_ground_max / cross_set_max for "ordered"
  double absolute = 0.1;  // intra_ground_max floor for "ordered", ceiling for "disordered"
};

/// Matrix-element structure of an operator around the ground set.
struct AnsatzReport {
  double intra_ground_max = 0.0;  // max |W_[1a][1b]|^2
  double cross_set_max = 0.0;     // max over theta != 1 of |W_[1a][theta b]|^2
  /// diag_profile[k][theta] = sum_b |W_[1,k][theta,b]|^2 for ground member k.
  std::vector<std::vector<double>> diag_profile;
  AnsatzVerdict verdict = AnsatzVerdict::inconclusive;
};

AnsatzVerdict classify(double intra_ground_max, double cross_set_max, AnsatzThresholds thresholds = {});

/// `op` must include every sector reachable from the ground set in one step.
AnsatzReport ansatz_report(const OperatorMatrix& op, const EigenSystem& es,
                           AnsatzThresholds thresholds = {});
/// Builds the operator on the sectors around the ground set first.
AnsatzReport ansatz_report(const LocalOperatorSpec& op, const EigenSystem& es,
                           AnsatzThresholds thresholds = {});

/// (sum |psi_n|^2)^2 / sum |psi_n|^4; equals the usual inverse participation
/// for normalized states. Throws Error(domain) for a zero vector.
double participation_ratio(const Eigen::VectorXcd& configuration_state);
double participation_ratio(const Eigen::VectorXd& configuration_state);

/// 1 - <sz_site>^2 over the deterministically selected ground-set member.
double ground_fluctuation(const EigenSystem& es, int site);

/// pi / (E_1 - E_0) from the two lowest levels; +infinity when the gap is
/// below the degeneracy tolerance. Throws Error(domain) for a one-state spectrum.
double degeneracy_lifting_period(const EigenSystem& es);

inline constexpr double kInfinitePeriod = std::numeric_limits<double>::infinity();

/// One row of the diagnostics table for a chain and operator.
struct DiagnosticsRow {
  double jz_over_j = 0.0;
  double h_over_j = 0.0;
  int n_sites = 0;
  double intra_ground_max = 0.0;
  double cross_set_max = 0.0;
  double pr_ground = 0.0;
  double fluct = 0.0;
  double tau = 0.0;
  AnsatzVerdict verdict = AnsatzVerdict::inconclusive;
};

DiagnosticsRow diagnostics_row(const EigenSystem& es, const LocalOperatorSpec& op,
                               AnsatzThresholds thresholds = {});

}  // namespace xxz
