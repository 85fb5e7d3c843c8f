#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "hippoicl/types.hpp"

namespace hippoicl {

enum class BasisKind { LegT, LegS, FouT };

std::string to_string(BasisKind kind);
BasisKind parse_basis_kind(std::string_view name);

/**
 * Which orthogonal family the hidden state projects onto.
 *
 * LegT: translated Legendre polynomials on the sliding window [t - theta, t].
 * LegS: scaled Legendre polynomials on the full history [0, t].
 * FouT: truncated Fourier basis on [t - 1, t]; the state is ordered
 *       [x_0, x_1^c, x_1^s, x_2^c, x_2^s, ...] so n_state = 2 * pairs + 1.
 */
struct HippoBasis {
  BasisKind kind = BasisKind::LegT;
  double theta = 1.0;  // LegT window length; unused otherwise
  std::size_t n_state = 1;

  static HippoBasis legt(std::size_t n_state, double theta);
  static HippoBasis legs(std::size_t n_state);
  static HippoBasis fout(std::size_t n_pairs);

  /// Number of sin/cos pairs (FouT only).
  std::size_t n_pairs() const;

  /// Throws Error if the invariants do not hold.
  void validate() const;

  /// Left end of the support window at time t.
  double window_start(double t) const;
};

struct HippoMatrices {
  Matrix a;
  Vector b;
};

/// LegT A, B exactly as tabulated (positive diagonal, before the dynamics
/// sign is applied).
HippoMatrices legt_matrices(std::size_t n_state, double theta);

/// LegS A, B as tabulated; the dynamics are x' = -(1/t) A x + (1/t) B u.
HippoMatrices legs_matrices(std::size_t n_state);

/// FouT A, B. The sin/cos couplings use the frequency index m, so the block
/// for pair m rotates at 2*pi*m.
HippoMatrices fout_matrices(std::size_t n_pairs);

HippoMatrices table_matrices(const HippoBasis& basis);

/**
 * Matrices that actually appear in x' = A_dyn x + B_dyn u.
 *
 * LegT and LegS negate the tabulated A (LegS additionally carries a 1/t
 * factor that is applied by the caller at integration time). FouT passes the
 * table through.
 */
HippoMatrices dynamics_matrices(const HippoBasis& basis);

/// [p_0(t,t), ..., p_{N-1}(t,t)]; constant in t for all three families.
Vector basis_at_diagonal(const HippoBasis& basis);

/**
 * Basis values p_n(t, s) such that u(s) ~= sum_n x_n(t) p_n(t, s) over the
 * support window.
 *
 * LegT: (-1)^n P_n(2 (s - t) / theta + 1). This is the normalization under
 *       which the tabulated LegT A, B reconstruct their input.
 * LegS: sqrt(2n+1) P_n(2 s / t - 1).
 * FouT: [1, sqrt2 cos(2 pi m (t-s+1)), sqrt2 sin(2 pi m (t-s+1)), ...].
 *
 * Throws Error if s is outside the window.
 */
Vector basis_eval(const HippoBasis& basis, double t, double s);

/// P_0(z) .. P_{n_max}(z) by the three-term recurrence.
Vector legendre_values(std::size_t n_max, double z);

/**
 * Continuous-time SSM x' = a_dyn x + b_dyn u, y = c x + d u.
 *
 * Construction checks dimensions and, for LegT and FouT, that the spectrum of
 * a_dyn lies in the closed left half-plane.
 */
class ContinuousSSM {
 public:
  ContinuousSSM(HippoBasis basis, Matrix a_dyn, Vector b_dyn, Vector c,
                double d);

  const HippoBasis& basis() const { return basis_; }
  const Matrix& a_dyn() const { return a_dyn_; }
  const Vector& b_dyn() const { return b_dyn_; }
  const Vector& c() const { return c_; }
  double d() const { return d_; }
  std::size_t n_state() const { return static_cast<std::size_t>(b_dyn_.size()); }

  /// Largest real part of the eigenvalues of a_dyn.
  double spectral_abscissa() const;

 private:
  HippoBasis basis_;
  Matrix a_dyn_;
  Vector b_dyn_;
  Vector c_;
  double d_;
};

}  // namespace hippoicl
