#pragma once

#include <cstddef>

#include "hippoicl/construction.hpp"

namespace hippoicl {

/**
 * Discrete next-value predictor
 *
 *   x_{k+1}     = a_bar x_k + b_bar u_k
 *   u_hat_{k+1} = c_bar . x_{k+1} + d_bar u_k
 */
struct DiscreteSSM {
  Matrix a_bar;
  Vector b_bar;
  Vector c_bar;
  double d_bar = 0.0;
  double dt = 0.0;

  std::size_t n_state() const { return static_cast<std::size_t>(b_bar.size()); }
};

struct DiscreteAB {
  Matrix a_bar;
  Vector b_bar;
};

struct DiscreteCD {
  Vector c_bar;
  double d_bar = 0.0;
};

/// How C, D are discretized.
enum class OutputDiscretization {
  Single,  // trapezoid on the integral of y only (the default)
  Double,  // additionally apply the full bilinear C, D map; comparison only
};

/**
 * Bilinear (Tustin) discretization of x' = A x + B u:
 *   a_bar = (I - dt/2 A)^{-1} (I + dt/2 A),  b_bar = dt (I - dt/2 A)^{-1} B.
 * One LU factorization, two solves. Throws Error naming dt if the resolvent
 * is singular.
 */
DiscreteAB bilinear_ab(const Matrix& a_dyn, const Vector& b_dyn, double dt);

/**
 *   c_bar = dt (1 - D dt/2)^{-1} C,  d_bar = (1 - D dt/2)^{-1} (1 + D dt/2).
 * Throws Error when D dt / 2 == 1.
 */
DiscreteCD discretize_cd(const OutputMap& map, double dt);

/**
 * Full bilinear output map applied on top of an already discretized (c, d):
 *   c' = (I - dt/2 A)^{-T} c,  d' = d + 1/2 c . b_bar.
 */
DiscreteCD full_bilinear_cd(const DiscreteCD& once, const Matrix& a_dyn,
                            const Vector& b_bar, double dt);

DiscreteSSM discretize(const ContinuousSSM& ssm, double dt,
                       OutputDiscretization scheme = OutputDiscretization::Single);

/**
 * LegS per-step matrices at t = k dt (floored at t_min = dt): the dynamics
 * -(1/t) A_table, (1/t) B_table and the readout unit_map / t are discretized
 * afresh for each k.
 */
DiscreteSSM discretize_legs(const Matrix& a_table, const Vector& b_table,
                            const OutputMap& unit_map, double dt, std::size_t k);

/// Largest eigenvalue modulus.
double spectral_radius(const Matrix& m);

}  // namespace hippoicl
