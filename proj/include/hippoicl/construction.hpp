#pragma once

#include <cstddef>

#include "hippoicl/bases.hpp"

namespace hippoicl {

/// Output map y = c . x + d u chosen so that y approximates du/dt.
struct OutputMap {
  Vector c;
  double d = 0.0;
  // LegS only: c and d carry an external 1/t factor.
  bool time_varying = false;
};

enum class Construction {
  General,          // C_j = sum_k A_kj p_k(t,t), D = sum_k B_k p_k(t,t)
  FouTAlternative,  // sine channels only, C_{2m} = -2 sqrt2 pi m, D = 0
};

/**
 * Derivative readout from the dynamics and the basis diagonal.
 *
 * Note the transpose: C_j sums a_dyn over the ROW index, i.e. C = a_dyn^T p.
 */
OutputMap construct_general(const Matrix& a_dyn, const Vector& b_dyn,
                            const Vector& diag_basis);

OutputMap construct_fout_alternative(std::size_t n_pairs);

/**
 * LegS readout at time t: construct_general scaled by 1/t. The caller passes
 * the sign-corrected dynamics matrices (-A_table, B_table).
 *
 * Throws Error if t < t_min.
 */
OutputMap construct_legs(const Matrix& a_dyn, const Vector& b_dyn,
                         const Vector& diag_basis, double t, double t_min);

/// Rescale a LegS unit-time map (t = 1) to time t.
OutputMap legs_map_at(const OutputMap& unit_map, double t, double t_min);

/**
 * Continuous derivative estimator for a time-invariant basis (LegT, FouT).
 * FouTAlternative requires a FouT basis.
 */
ContinuousSSM build_continuous(const HippoBasis& basis,
                               Construction construction = Construction::General);

}  // namespace hippoicl
