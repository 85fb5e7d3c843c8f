#include "hippoicl/signals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <utility>

#include "hippoicl/bases.hpp"
#include "hippoicl/integrate.hpp"

namespace hippoicl {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_grid(double duration, double dt) {
  if (!(dt > 0.0)) throw Error("signal step dt must be positive");
  if (!(duration >= dt)) throw Error("signal duration must cover at least one step");
}

Trajectory make_trajectory(std::vector<double> samples, double dt, std::uint64_t seed,
                           std::string generator) {
  Trajectory traj;
  traj.samples = std::move(samples);
  traj.dt = dt;
  traj.seed = seed;
  traj.generator = std::move(generator);
  return traj;
}

void normalize_max_abs(std::vector<double>& samples) {
  double peak = 0.0;
  for (double v : samples) peak = std::max(peak, std::abs(v));
  if (peak > 0.0) {
    for (double& v : samples) v /= peak;
  }
}

}  // namespace

void Trajectory::validate() const {
  if (samples.size() < 2) throw Error("trajectory needs at least two samples");
  if (!(dt > 0.0)) throw Error("trajectory dt must be positive");
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (!std::isfinite(samples[k])) {
      std::ostringstream msg;
      msg << "trajectory sample " << k << " is not finite";
      throw Error(msg.str());
    }
  }
}

std::size_t sample_count(double duration, double dt) {
  check_grid(duration, dt);
  return static_cast<std::size_t>(std::llround(duration / dt)) + 1;
}

double SinusoidSum::value(double t) const {
  double acc = 0.0;
  for (const auto& s : terms) acc += s.amplitude * std::sin(kTwoPi * s.freq_hz * t + s.phase);
  return scale * acc;
}

double SinusoidSum::derivative(double t) const {
  double acc = 0.0;
  for (const auto& s : terms) {
    acc += s.amplitude * kTwoPi * s.freq_hz * std::cos(kTwoPi * s.freq_hz * t + s.phase);
  }
  return scale * acc;
}

Trajectory SinusoidSum::sample(double duration, double dt, const std::string& generator) const {
  const std::size_t n = sample_count(duration, dt);
  std::vector<double> u(n);
  std::vector<double> du(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    u[k] = value(t);
    du[k] = derivative(t);
  }
  Trajectory traj = make_trajectory(std::move(u), dt, 0, generator);
  traj.derivative = std::move(du);
  return traj;
}

SinusoidSum white_signal_function(const WhiteSignalParams& p, std::uint64_t seed) {
  if (!(p.cutoff_hz > 0.0)) throw Error("white_signal: cutoff must be positive");
  if (!(p.rms > 0.0)) throw Error("white_signal: rms must be positive");
  const double period = p.period > 0.0 ? p.period : p.duration;
  const double resolution = 1.0 / period;
  // Small relative slack so that e.g. cutoff 0.3 with period 10 keeps bin 3.
  const auto n_bins = static_cast<std::size_t>(std::floor(p.cutoff_hz * period * (1.0 + 1e-12)));
  if (n_bins == 0) {
    std::ostringstream msg;
    msg << "white_signal: cutoff " << p.cutoff_hz << " Hz is below the frequency resolution "
        << resolution << " Hz";
    throw Error(msg.str());
  }
  Rng rng(seed);
  SinusoidSum sum;
  sum.terms.reserve(n_bins);
  for (std::size_t bin = 1; bin <= n_bins; ++bin) {
    Sinusoid s;
    s.amplitude = rng.normal();
    s.phase = rng.uniform(0.0, kTwoPi);
    s.freq_hz = static_cast<double>(bin) * resolution;
    sum.terms.push_back(s);
  }
  if (p.start_value) {
    // Roll the periodic signal so that it starts at the grid point closest
    // to the requested value (measured at the target RMS).
    const auto grid = static_cast<std::size_t>(std::llround(period / p.dt));
    double power = 0.0;
    for (std::size_t j = 0; j < grid; ++j) {
      const double v = sum.value(static_cast<double>(j) * p.dt);
      power += v * v;
    }
    const double scale = power > 0.0 ? p.rms / std::sqrt(power / static_cast<double>(grid)) : 1.0;
    std::size_t best = 0;
    double best_gap = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < grid; ++j) {
      const double gap = std::abs(scale * sum.value(static_cast<double>(j) * p.dt) - *p.start_value);
      if (gap < best_gap) {
        best_gap = gap;
        best = j;
      }
    }
    const double shift = static_cast<double>(best) * p.dt;
    for (auto& term : sum.terms) term.phase = std::fmod(term.phase + kTwoPi * term.freq_hz * shift, kTwoPi);
  }
  const std::size_t n = sample_count(p.duration, p.dt);
  double power = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double v = sum.value(static_cast<double>(k) * p.dt);
    power += v * v;
  }
  const double rms = std::sqrt(power / static_cast<double>(n));
  if (!(rms > 0.0)) throw Error("white_signal: synthesized signal is identically zero");
  sum.scale = p.rms / rms;
  return sum;
}

Trajectory white_signal(const WhiteSignalParams& p, std::uint64_t seed) {
  SinusoidSum sum = white_signal_function(p, seed);
  Trajectory traj = sum.sample(p.duration, p.dt, "white_signal");
  traj.seed = seed;
  traj.params = {{"cutoff_hz", p.cutoff_hz},
                 {"rms", p.rms},
                 {"period", p.period > 0.0 ? p.period : p.duration},
                 {"duration", p.duration}};
  return traj;
}

AlphaFilter::AlphaFilter(double alpha, double dt) {
  if (!(alpha > dt)) {
    std::ostringstream msg;
    msg << "alpha filter under-resolved: alpha=" << alpha << " must exceed dt=" << dt;
    throw Error(msg.str());
  }
  pole_ = std::exp(-dt / alpha);
}

double AlphaFilter::step(double input) {
  stage1_ = pole_ * stage1_ + (1.0 - pole_) * input;
  stage2_ = pole_ * stage2_ + (1.0 - pole_) * stage1_;
  return stage2_;
}

Trajectory filtered_noise(double duration, double dt, double alpha, std::uint64_t seed) {
  const std::size_t n = sample_count(duration, dt);
  AlphaFilter filter(alpha, dt);
  Rng rng(seed);
  std::vector<double> u(n);
  for (auto& v : u) v = filter.step(rng.normal());

  double mean = 0.0;
  for (double v : u) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : u) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  const double sd = std::sqrt(var);
  for (auto& v : u) v = (v - mean) / sd;

  Trajectory traj = make_trajectory(std::move(u), dt, seed, "filtered_noise");
  traj.params = {{"alpha", alpha}, {"duration", duration}};
  return traj;
}

Trajectory van_der_pol(double duration, double dt, double mu, double u0) {
  if (dt > 1e-2) throw Error("van_der_pol: dt must be <= 1e-2");
  const std::size_t n = sample_count(duration, dt);
  const auto rhs = [mu](double t, double u) { return mu * (1.0 - u * u) * std::sin(t); };
  std::vector<double> u(n);
  u[0] = u0;
  for (std::size_t k = 1; k < n; ++k) {
    u[k] = rk4_step(rhs, static_cast<double>(k - 1) * dt, u[k - 1], dt);
    if (!std::isfinite(u[k])) {
      std::ostringstream msg;
      msg << "van_der_pol diverged at step " << k;
      throw DivergenceError(msg.str());
    }
  }
  Trajectory traj = make_trajectory(std::move(u), dt, 0, "van_der_pol");
  traj.params = {{"mu", mu}, {"u0", u0}, {"duration", duration}};
  return traj;
}

Trajectory bernoulli_ode(double duration, double dt, double u0) {
  if (!(u0 > 0.0)) throw Error("bernoulli_ode: u0 must be positive");
  const std::size_t n = sample_count(duration, dt);
  const auto rhs = [](double t, double u) {
    return std::sin(t) * std::sqrt(std::max(u, 0.0)) - std::cos(5.0 * t) * u;
  };
  std::vector<double> u(n);
  u[0] = u0;
  double clamps = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    double next = rk4_step(rhs, static_cast<double>(k - 1) * dt, u[k - 1], dt);
    if (next < 0.0) {
      next = 0.0;
      clamps += 1.0;
    }
    u[k] = next;
  }
  Trajectory traj = make_trajectory(std::move(u), dt, 0, "bernoulli");
  traj.params = {{"u0", u0}, {"duration", duration}, {"clamp_events", clamps}};
  return traj;
}

Trajectory legendre_signal(std::size_t max_degree, double duration, double dt,
                           std::uint64_t seed) {
  const std::size_t n = sample_count(duration, dt);
  Rng rng(seed);
  Vector coeffs(static_cast<Eigen::Index>(max_degree + 1));
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) coeffs(i) = rng.normal();
  std::vector<double> u(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double z = 2.0 * static_cast<double>(k) / static_cast<double>(n - 1) - 1.0;
    u[k] = coeffs.dot(legendre_values(max_degree, z));
  }
  normalize_max_abs(u);
  Trajectory traj = make_trajectory(std::move(u), dt, seed, "legendre");
  traj.params = {{"max_degree", static_cast<double>(max_degree)}, {"duration", duration}};
  return traj;
}

SinusoidSum sum_of_sines_function(std::size_t n_terms, double f_lo, double f_hi,
                                  std::uint64_t seed) {
  if (n_terms == 0) throw Error("sum_of_sines: need at least one term");
  if (!(f_hi >= f_lo) || f_lo < 0.0) throw Error("sum_of_sines: empty frequency range");
  Rng rng(seed);
  SinusoidSum sum;
  double total = 0.0;
  for (std::size_t i = 0; i < n_terms; ++i) {
    Sinusoid s;
    s.freq_hz = rng.uniform(f_lo, f_hi);
    s.amplitude = rng.normal();
    s.phase = rng.uniform(0.0, kTwoPi);
    total += std::abs(s.amplitude);
    sum.terms.push_back(s);
  }
  sum.scale = total > 0.0 ? 1.0 / total : 1.0;
  return sum;
}

Trajectory sum_of_sines(std::size_t n_terms, double f_lo, double f_hi, double duration,
                        double dt, std::uint64_t seed) {
  Trajectory traj = sum_of_sines_function(n_terms, f_lo, f_hi, seed).sample(duration, dt, "sum_of_sines");
  traj.seed = seed;
  traj.params = {{"n_terms", static_cast<double>(n_terms)},
                 {"f_lo", f_lo},
                 {"f_hi", f_hi},
                 {"duration", duration}};
  return traj;
}

Trajectory linear_signal(double slope, double intercept, double duration, double dt) {
  if (!(std::abs(slope) <= 10.0)) throw Error("linear_signal: slope must lie in [-10, 10]");
  const std::size_t n = sample_count(duration, dt);
  std::vector<double> u(n);
  for (std::size_t k = 0; k < n; ++k) u[k] = slope * static_cast<double>(k) * dt + intercept;
  Trajectory traj = make_trajectory(std::move(u), dt, 0, "linear");
  traj.derivative.assign(n, slope);
  traj.params = {{"slope", slope}, {"intercept", intercept}, {"duration", duration}};
  return traj;
}

SinusoidSum ck_fourier_function(int k, std::size_t n_modes) {
  if (k < 3) throw Error("ck_fourier_signal: smoothness order k must be >= 3");
  SinusoidSum sum;
  sum.terms.reserve(n_modes);
  for (std::size_t m = 1; m <= n_modes; ++m) {
    const double w = kTwoPi * static_cast<double>(m);
    sum.terms.push_back({std::numbers::sqrt2 * std::pow(w, -k), static_cast<double>(m), 0.0});
  }
  return sum;
}

Trajectory ck_fourier_signal(int k, std::size_t n_modes, double duration, double dt) {
  Trajectory traj = ck_fourier_function(k, n_modes).sample(duration, dt, "ck_fourier");
  traj.params = {{"k", static_cast<double>(k)},
                 {"n_modes", static_cast<double>(n_modes)},
                 {"duration", duration}};
  return traj;
}

double ck_derivative_tail(int k, std::size_t n_pairs, std::size_t n_modes) {
  double tail = 0.0;
  // Smallest terms first for accuracy.
  for (std::size_t m = n_modes; m > n_pairs; --m) {
    const double w = kTwoPi * static_cast<double>(m);
    tail += std::numbers::sqrt2 * std::pow(w, 1 - k);
  }
  return tail;
}

namespace {

constexpr std::pair<SignalFamily, std::string_view> kFamilyNames[] = {
    {SignalFamily::White, "white"},         {SignalFamily::FilteredNoise, "filtered"},
    {SignalFamily::VanDerPol, "vdp"},       {SignalFamily::Bernoulli, "bernoulli"},
    {SignalFamily::Legendre, "legendre"},   {SignalFamily::SumOfSines, "sines"},
    {SignalFamily::Linear, "linear"},       {SignalFamily::CkFourier, "ck"},
};

}  // namespace

std::string to_string(SignalFamily family) {
  for (const auto& [f, name] : kFamilyNames) {
    if (f == family) return std::string(name);
  }
  throw Error("unknown signal family");
}

SignalFamily parse_signal_family(std::string_view name) {
  for (const auto& [f, n] : kFamilyNames) {
    if (n == name) return f;
  }
  throw Error("unknown signal family '" + std::string(name) + "'");
}

double SignalSpec::key_parameter() const {
  switch (family) {
    case SignalFamily::White: return gamma;
    case SignalFamily::FilteredNoise: return alpha;
    case SignalFamily::VanDerPol: return mu;
    case SignalFamily::Bernoulli: return u0.value_or(1.0);
    case SignalFamily::Legendre: return static_cast<double>(max_degree);
    case SignalFamily::SumOfSines: return f_hi;
    case SignalFamily::Linear: return slope;
    case SignalFamily::CkFourier: return static_cast<double>(k);
  }
  return 0.0;
}

Trajectory make_signal(const SignalSpec& spec, std::uint64_t seed) {
  switch (spec.family) {
    case SignalFamily::White:
      return white_signal({spec.duration, spec.dt, spec.gamma, spec.rms, spec.period}, seed);
    case SignalFamily::FilteredNoise:
      return filtered_noise(spec.duration, spec.dt, spec.alpha, seed);
    case SignalFamily::VanDerPol:
      return van_der_pol(spec.duration, spec.dt, spec.mu, spec.u0.value_or(-std::tanh(spec.mu)));
    case SignalFamily::Bernoulli:
      return bernoulli_ode(spec.duration, spec.dt, spec.u0.value_or(1.0));
    case SignalFamily::Legendre:
      return legendre_signal(spec.max_degree, spec.duration, spec.dt, seed);
    case SignalFamily::SumOfSines:
      return sum_of_sines(spec.n_terms, spec.f_lo, spec.f_hi, spec.duration, spec.dt, seed);
    case SignalFamily::Linear:
      return linear_signal(spec.slope, spec.intercept, spec.duration, spec.dt);
    case SignalFamily::CkFourier:
      return ck_fourier_signal(spec.k, spec.n_modes, spec.duration, spec.dt);
  }
  throw Error("unknown signal family");
}

}  // namespace hippoicl
