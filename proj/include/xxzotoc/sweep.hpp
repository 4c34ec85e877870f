#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "xxzotoc/otoc.hpp"

namespace xxz {

/// Grid of (N, Jz/J, h/J) points evaluated with the grouped saturation formula.
struct SweepSpec {
  std::vector<double> jz_values;
  std::vector<double> h_values;
  std::vector<int> n_sites;
  std::optional<Boundary> boundary;  // unset: ChainSpec::default_boundary(N)
  PauliKind op = PauliKind::sigma_z;
  int site = -1;                      // < 0: bulk site of each chain
  DegeneracyTolerance tolerance;
  TermIvMode term_iv_mode = TermIvMode::assume_absent;
  std::size_t quadruple_budget = 20'000'000;
  int max_sites = kDefaultMaxSites;
  unsigned workers = 0;               // 0: XXZOTOC_WORKERS or hardware concurrency

  /// Throws Error(domain) for empty or non-increasing axes.
  void validate() const;
  std::size_t size() const { return jz_values.size() * h_values.size() * n_sites.size(); }
};

struct SweepRecord {
  double jz_over_j = 0.0;
  double h_over_j = 0.0;
  int n_sites = 0;
  Boundary boundary = Boundary::periodic;
  LocalOperatorSpec op;
  bool ok = false;
  std::string error;  // empty when ok
  std::complex<double> f_saturation;
  std::complex<double> f_gs;
  std::complex<double> f_ex;
  double tolerance = 0.0;
  std::size_t ground_set_size = 0;
};

struct SweepGrid {
  SweepSpec spec;
  /// Ordered by N, then Jz, then h, independent of execution order.
  std::vector<SweepRecord> records;

  std::size_t failures() const;
  /// Records with the given N and h, ascending in Jz.
  std::vector<SweepRecord> cross_section(int n_sites, double h_over_j) const;
};

/// Evaluates every grid point; one diagonalization per (N, Jz) is reused
/// across all fields. Failed points are recorded; Error(numeric) is thrown
/// only if every point fails.
SweepGrid run_sweep(const SweepSpec& spec);

/// Worker count: `requested` if nonzero, else XXZOTOC_WORKERS, else the
/// hardware concurrency (at least 1).
unsigned resolve_workers(unsigned requested);

enum class CrossingDirection { any, rising, falling };

/// First threshold crossing of y(x), located by linear interpolation between
/// the bracketing samples. x must be strictly increasing.
/// Throws Error(not_found) when no crossing in the requested direction exists.
double extract_critical_point(const std::vector<double>& x, const std::vector<double>& y,
                              double threshold = 0.5,
                              CrossingDirection direction = CrossingDirection::any);

struct ScalingPoint {
  double n = 0.0;
  double jz_c = 0.0;
};

/// Jz_c(N) = a N^xi + jz_inf.
struct ScalingFit {
  double a = 0.0;
  double xi = 0.0;
  double jz_inf = 0.0;
  double residual = 0.0;  // Euclidean norm of the residual vector
  int iterations = 0;
  std::vector<ScalingPoint> points;

  double operator()(double n) const;
};

/// Damped least squares from xi = -1, jz_inf = last point, a from the first point.
/// Throws Error(fit) for fewer than 3 points, repeated or non-positive N, or
/// data that does not determine the three parameters.
ScalingFit fit_power_law(const std::vector<ScalingPoint>& points);

}  // namespace xxz
