#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "hippoicl/bases.hpp"
#include "hippoicl/signals.hpp"

namespace hippoicl {

using InputFunction = std::function<double(double)>;

struct ContinuousRun {
  std::vector<double> t;  // recorded times
  std::vector<double> y;  // c . x(t) + d u(t)
  Matrix states;          // column j is x(t[j]); empty unless requested
  Vector final_state;
};

struct ContinuousOptions {
  double duration = 1.0;
  double fine_dt = 1e-4;
  std::size_t record_every = 1;  // record every n-th fine step (and t = 0)
  bool keep_states = false;
  Vector x0;                     // empty means zero
};

/**
 * RK4 integration of x' = a_dyn x + b_dyn u(t) with readout y = c x + d u.
 * Throws DivergenceError on a non-finite state.
 */
ContinuousRun continuous_derivative_estimate(const ContinuousSSM& ssm, const InputFunction& u,
                                             const ContinuousOptions& options);

/**
 * Same on a sampled trajectory, with u linearly interpolated between samples.
 * Requires fine_dt <= traj.dt / 10; the fine step is shrunk so that it divides
 * traj.dt exactly and y is recorded at the sample times.
 */
ContinuousRun continuous_derivative_estimate(const ContinuousSSM& ssm, const Trajectory& traj,
                                             double fine_dt);

/**
 * Initial state of the periodic orbit of the RK4-discretized system under a
 * `period`-periodic input: with r the state after one period from zero and R
 * the one-step RK4 matrix, solves (I - R^P) x0 = r, P = period / fine_dt.
 */
Vector periodic_steady_state(const ContinuousSSM& ssm, const InputFunction& u, double period,
                             double fine_dt);

struct SlopeOptions {
  std::size_t n_modes = 1024;
  double fine_dt = 1e-4;
  double horizon = 1.0;  // integrated-error check at horizon and 2 * horizon
};

struct SlopeReport {
  int k = 0;
  std::vector<std::size_t> n_pairs;
  std::vector<double> sup_errors;   // steady-state max |y - u'| over one period
  std::vector<double> tail_bounds;  // analytic derivative-series tail
  double slope = 0.0;               // least-squares slope of log error vs log pairs
  double intercept = 0.0;
  // max over pairs of E(2 horizon) / E(horizon), E(t) = max_{s<=t} |int_0^s (y - u') |.
  double integrated_ratio = 0.0;
  // max over pairs, time and m of |x_m^s(t)| - (2 pi m)^{-k}.
  double lemma_violation = 0.0;
};

/// Convergence of the FouT-alternative derivative readout on ck_fourier_function(k).
SlopeReport bound_slope(int k, const std::vector<std::size_t>& n_pairs_list,
                        const SlopeOptions& options = {});

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least squares of log(y) on log(x). Throws on a degenerate fit.
LineFit fit_log_log(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace hippoicl
