#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "xxzotoc/spectral.hpp"

namespace xxz {

enum class InitialStateKind { ground_state, ground_set_member, haar_random };

struct InitialState {
  InitialStateKind kind = InitialStateKind::ground_state;
  std::size_t member = 0;   // ground_set_member: 0-based position inside the ground set
  std::uint64_t seed = 0;   // haar_random

  static InitialState ground() { return {}; }
  static InitialState ground_member(std::size_t k) { return {InitialStateKind::ground_set_member, k, 0}; }
  static InitialState haar(std::uint64_t seed) { return {InitialStateKind::haar_random, 0, seed}; }
};

const char* to_string(InitialStateKind kind) noexcept;

enum class TermIvMode { assume_absent, scan };

const char* to_string(TermIvMode mode) noexcept;

struct TimeGrid {
  double t_max = 20.0;          // units of 1/J
  std::size_t n_samples = 2000;

  /// Uniform samples t_k = t_max * k / (n_samples - 1).
  std::vector<double> times() const;
};

struct OtocConfig {
  LocalOperatorSpec w_op;
  LocalOperatorSpec v_op;
  InitialState initial;
  TimeGrid time_grid;
  double average_window = 20.0;  // T, must not exceed t_max
  TermIvMode term_iv_mode = TermIvMode::assume_absent;
  std::size_t quadruple_budget = 20'000'000;

  /// W = V = the given Pauli on the bulk site.
  static OtocConfig bulk(const ChainSpec& chain, PauliKind kind = PauliKind::sigma_z);

  /// Throws Error(domain) naming the offending field.
  void validate(const ChainSpec& chain) const;
};

/// The four resonance contributions of the infinite-time average:
/// (i) E_a = E_b and E_g = E_g', (ii) E_a = E_g and E_b = E_g',
/// (iii) all four equal (counted in both), (iv) accidental resonances.
struct SaturationTerms {
  std::complex<double> pair_ab;       // (i)
  std::complex<double> pair_ag;       // (ii)
  std::complex<double> all_equal;     // (iii), subtracted
  std::complex<double> accidental;    // (iv)

  std::complex<double> total() const { return pair_ab + pair_ag - all_equal + accidental; }
};

struct TimeSeries {
  std::vector<double> times;
  std::vector<std::complex<double>> values;
};

struct TimeAverage {
  std::complex<double> mean;
  double re_min = 0.0;
  double re_max = 0.0;
};

struct OtocMetadata {
  ChainSpec chain;
  LocalOperatorSpec w_op;
  LocalOperatorSpec v_op;
  InitialState initial;
  DegeneracyTolerance tolerance_rule;
  double tolerance = 0.0;
  std::size_t ground_set_size = 0;
  /// Eigenindex of the chosen initial eigenstate (ground-state kinds only).
  std::optional<std::size_t> initial_eigenindex;
  int initial_magnetization = 0;
  TermIvMode term_iv_mode = TermIvMode::assume_absent;
  std::size_t quadruples = 0;
  bool singleton_sets = false;
};

struct OtocReport {
  std::complex<double> f_saturation;
  std::complex<double> f_gs;
  std::complex<double> f_ex;
  SaturationTerms terms;
  std::optional<TimeSeries> time_series;
  std::optional<TimeAverage> f_time_average;
  OtocMetadata metadata;
};

/// Operators and initial state of one OTOC evaluation, prepared once and
/// reused for dynamics, saturation and the ground-subspace term.
///
/// Holds a reference to the eigensystem, which must outlive the engine.
/// Operators are transformed only on the sectors reachable from the initial
/// state, which is exact for every quantity computed here.
class OtocEngine {
 public:
  OtocEngine(const EigenSystem& es, const OtocConfig& config);
  /// Custom normalized initial state; operators act on every sector and are
  /// built unless full-window operators are passed in.
  OtocEngine(const EigenSystem& es, const OtocConfig& config, const StateVector& initial,
             std::shared_ptr<const OperatorMatrix> w = nullptr,
             std::shared_ptr<const OperatorMatrix> v = nullptr);
  /// Reuse operators built elsewhere (they must cover the needed sectors).
  OtocEngine(const EigenSystem& es, const OtocConfig& config,
             std::shared_ptr<const OperatorMatrix> w, std::shared_ptr<const OperatorMatrix> v);

  const EigenSystem& eigensystem() const noexcept { return *es_; }
  const OtocConfig& config() const noexcept { return config_; }
  const OperatorMatrix& w() const noexcept { return *w_; }
  const OperatorMatrix& v() const noexcept { return *v_; }
  std::shared_ptr<const OperatorMatrix> shared_w() const noexcept { return w_; }
  std::shared_ptr<const OperatorMatrix> shared_v() const noexcept { return v_; }
  const SectorVector& initial_state() const noexcept { return c_; }
  OtocMetadata metadata() const;

  /// F(t) = <psi(t)| W^dag U(t) V^dag U^dag(t) W |psi'(t)> with |psi'(0)> = V|psi(0)>.
  std::vector<std::complex<double>> dynamics(const std::vector<double>& times) const;

  /// Infinite-time value grouped by the eigensystem's degenerate sets.
  SaturationTerms saturation_terms() const;
  /// Same quantity for a spectrum read as nondegenerate (every state its own set).
  SaturationTerms nondegenerate_terms() const;
  /// c_1^dag W_1^dag V_1^dag W_1 V_1 c_1 with X_1 = P_1 X P_1 on the ground set.
  std::complex<double> ground_subspace_term() const;
  bool initial_in_ground_set(double tol = 1e-10) const;

  /// Sectors the operators must cover for this configuration (empty: all).
  static std::vector<bool> window_for(const EigenSystem& es, const OtocConfig& config);

 private:
  void prepare_state();
  void build_operators(const std::vector<bool>& window);
  std::vector<bool> needed_window() const;
  std::complex<double> accidental_term(const EigenSystem& es, std::size_t* quadruples) const;

  const EigenSystem* es_;
  OtocConfig config_;
  SectorVector c_;
  SectorVector b_;
  std::shared_ptr<const OperatorMatrix> w_;
  std::shared_ptr<const OperatorMatrix> v_;
  std::optional<std::size_t> initial_eigenindex_;
  mutable std::size_t quadruples_ = 0;
};

/// Deterministic choice among the ground set: the member with the largest
/// amplitude on the lowest configuration supported by the ground set.
std::size_t select_ground_member(const EigenSystem& es);

/// State with independent complex-normal eigenbasis coefficients, normalized.
StateVector haar_state(const EigenSystem& es, std::mt19937_64& rng);

TimeSeries otoc_dynamics(const EigenSystem& es, const OtocConfig& config);
OtocReport saturation_nondegenerate(const EigenSystem& es, const OtocConfig& config);
OtocReport saturation_degenerate(const EigenSystem& es, const OtocConfig& config);
/// Throws Error(domain) when the initial state is not a ground-set member.
std::complex<double> ground_subspace_term(const EigenSystem& es, const OtocConfig& config);

/// Grouped saturation terms plus the ground-subspace split for a prepared engine.
/// f_gs is NaN when the initial state is not inside the ground set.
OtocReport saturation_report(const OtocEngine& engine);

/// Saturation report plus the sampled series and its average over the window.
OtocReport full_report(const EigenSystem& es, const OtocConfig& config, bool with_series);

/// Trapezoidal (1/T) int_0^T F dt with the real-part envelope on [0, T].
/// Throws Error(domain) when the samples do not cover [0, T].
TimeAverage time_average(const TimeSeries& series, double window);

struct HaarEstimate {
  std::complex<double> mean;
  double standard_error = 0.0;
  std::vector<std::complex<double>> samples;
};

/// Infinite-temperature OTOC from Haar-random initial states: each sample is
/// the average of F(t) over the last window T of the time grid.
HaarEstimate haar_infinite_temperature(const EigenSystem& es, const OtocConfig& config,
                                       std::size_t n_samples);

/// <psi|V|psi> over Haar-random states, the typicality estimate of Tr(V)/D.
HaarEstimate haar_expectation(const EigenSystem& es, const LocalOperatorSpec& op,
                              std::size_t n_samples, std::uint64_t seed);

}  // namespace xxz
