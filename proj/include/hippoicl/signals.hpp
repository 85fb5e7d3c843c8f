#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hippoicl/rng.hpp"
#include "hippoicl/types.hpp"

namespace hippoicl {

/// Uniformly sampled scalar signal u_0 .. u_T with generator metadata.
struct Trajectory {
  std::vector<double> samples;
  double dt = 1e-3;
  std::uint64_t seed = 0;
  std::string generator;
  std::map<std::string, double> params;
  // Analytic du/dt at the sample times, when the generator knows it.
  std::vector<double> derivative;

  /// T, the number of prediction steps.
  std::size_t steps() const { return samples.empty() ? 0 : samples.size() - 1; }
  double time(std::size_t k) const { return static_cast<double>(k) * dt; }
  /// Throws Error unless length >= 2, dt > 0 and all samples are finite.
  void validate() const;
};

/// round(duration / dt) + 1 samples covering [0, duration].
std::size_t sample_count(double duration, double dt);

/// a sin(2 pi f t + phase)
struct Sinusoid {
  double amplitude = 0.0;
  double freq_hz = 0.0;
  double phase = 0.0;
};

/// Continuous signal sum_i scale * a_i sin(2 pi f_i t + phase_i).
struct SinusoidSum {
  std::vector<Sinusoid> terms;
  double scale = 1.0;

  double value(double t) const;
  double derivative(double t) const;
  /// Samples (and analytic derivative) on [0, duration].
  Trajectory sample(double duration, double dt, const std::string& generator) const;
};

struct WhiteSignalParams {
  double duration = 10.0;
  double dt = 1e-3;
  double cutoff_hz = 1.0;
  double rms = 0.5;
  // Synthesis period; the frequency grid is k / period. 0 means duration.
  double period = 0.0;
  // The periodic signal is rolled to start at the sample closest to this
  // value, so the zero history before t = 0 joins it without a jump.
  // nullopt keeps the raw phases.
  std::optional<double> start_value = 0.0;
};

/**
 * Band-limited white signal by spectral synthesis: every frequency bin
 * k / period with 0 < k / period <= cutoff gets an independent standard
 * normal amplitude and a uniform phase; bins above the cutoff are zero. The
 * result is rescaled so the sampled RMS equals params.rms.
 */
SinusoidSum white_signal_function(const WhiteSignalParams& params, std::uint64_t seed);
Trajectory white_signal(const WhiteSignalParams& params, std::uint64_t seed);

/**
 * Critically damped second-order low-pass 1 / (alpha s + 1)^2 realized as two
 * cascaded first-order smoothers, each discretized exactly (pole e^{-dt/alpha}).
 */
class AlphaFilter {
 public:
  AlphaFilter(double alpha, double dt);
  double step(double input);
  double pole() const { return pole_; }

 private:
  double pole_;
  double stage1_ = 0.0;
  double stage2_ = 0.0;
};

/// White Gaussian noise through AlphaFilter, standardized to zero mean and
/// unit sample variance.
Trajectory filtered_noise(double duration, double dt, double alpha, std::uint64_t seed);

/// RK4 solution of u' = mu (1 - u^2) sin(t). Throws DivergenceError on NaN.
Trajectory van_der_pol(double duration, double dt, double mu, double u0);

/// RK4 solution of u' + cos(5t) u = sin(t) sqrt(u); u is clamped at zero and
/// the number of clamps is stored in params["clamp_events"].
Trajectory bernoulli_ode(double duration, double dt, double u0);

/// Random Legendre series on P_0..P_max_degree over time rescaled to [-1, 1],
/// normalized to unit max amplitude.
Trajectory legendre_signal(std::size_t max_degree, double duration, double dt,
                           std::uint64_t seed);

/// Random sinusoid terms with f uniform in [f_lo, f_hi], a ~ N(0,1),
/// phase ~ U[0, 2 pi), scaled by 1 / sum |a_i| so that |u| <= 1.
SinusoidSum sum_of_sines_function(std::size_t n_terms, double f_lo, double f_hi,
                                  std::uint64_t seed);
Trajectory sum_of_sines(std::size_t n_terms, double f_lo, double f_hi, double duration,
                        double dt, std::uint64_t seed);

/// slope must lie in [-10, 10].
Trajectory linear_signal(double slope, double intercept, double duration, double dt);

/**
 * 1-periodic signal u(t) = sum_{m=1}^{n_modes} sqrt2 (2 pi m)^{-k} sin(2 pi m t)
 * whose Fourier sine coefficients sit exactly on the decay bound L/(2 pi m)^k
 * with L = 1. The analytic derivative is returned alongside.
 */
SinusoidSum ck_fourier_function(int k, std::size_t n_modes);
Trajectory ck_fourier_signal(int k, std::size_t n_modes, double duration, double dt);

/// sum_{m > n_pairs}^{n_modes} 2 pi m * sqrt2 (2 pi m)^{-k}: the sup-norm tail
/// of the derivative series of ck_fourier_function beyond n_pairs.
double ck_derivative_tail(int k, std::size_t n_pairs, std::size_t n_modes);


enum class SignalFamily {
  White,
  FilteredNoise,
  VanDerPol,
  Bernoulli,
  Legendre,
  SumOfSines,
  Linear,
  CkFourier,
};

std::string to_string(SignalFamily family);
SignalFamily parse_signal_family(std::string_view name);

/// Everything needed to regenerate one input signal given a seed.
struct SignalSpec {
  SignalFamily family = SignalFamily::White;
  double duration = 10.0;
  double dt = 1e-3;
  // White
  double gamma = 1.0;
  double rms = 0.5;
  double period = 0.0;
  // FilteredNoise
  double alpha = 0.1;
  // VanDerPol / Bernoulli; unset means -tanh(mu) and 1 respectively
  double mu = 7.0;
  std::optional<double> u0;
  // Legendre
  std::size_t max_degree = 15;
  // SumOfSines
  std::size_t n_terms = 5;
  double f_lo = 0.0;
  double f_hi = 50.0;
  // Linear
  double slope = 1.0;
  double intercept = 0.0;
  // CkFourier
  int k = 4;
  std::size_t n_modes = 1024;

  /// Value of the family's distinguishing parameter (gamma, alpha, mu, ...).
  double key_parameter() const;
};

/// Deterministic in (spec, seed); seed is ignored by seedless families.
Trajectory make_signal(const SignalSpec& spec, std::uint64_t seed);

}  // namespace hippoicl
