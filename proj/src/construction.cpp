#include "hippoicl/construction.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace hippoicl {

OutputMap construct_general(const Matrix& a_dyn, const Vector& b_dyn,
                            const Vector& diag_basis) {
  const auto n = diag_basis.size();
  if (a_dyn.rows() != n || a_dyn.cols() != n || b_dyn.size() != n) {
    throw Error("construct_general: dimension mismatch between A, B and basis diagonal");
  }
  OutputMap map;
  map.c = a_dyn.transpose() * diag_basis;
  map.d = b_dyn.dot(diag_basis);
  return map;
}

OutputMap construct_fout_alternative(std::size_t n_pairs) {
  OutputMap map;
  map.c = Vector::Zero(static_cast<Eigen::Index>(2 * n_pairs + 1));
  for (std::size_t m = 1; m <= n_pairs; ++m) {
    map.c(static_cast<Eigen::Index>(2 * m)) =
        -2.0 * std::numbers::sqrt2 * std::numbers::pi * static_cast<double>(m);
  }
  map.d = 0.0;
  return map;
}

OutputMap legs_map_at(const OutputMap& unit_map, double t, double t_min) {
  if (t < t_min) {
    std::ostringstream msg;
    msg << "LegS readout requested at t=" << t << " below t_min=" << t_min;
    throw Error(msg.str());
  }
  OutputMap map;
  map.c = unit_map.c / t;
  map.d = unit_map.d / t;
  map.time_varying = true;
  return map;
}

OutputMap construct_legs(const Matrix& a_dyn, const Vector& b_dyn,
                         const Vector& diag_basis, double t, double t_min) {
  return legs_map_at(construct_general(a_dyn, b_dyn, diag_basis), t, t_min);
}

ContinuousSSM build_continuous(const HippoBasis& basis, Construction construction) {
  if (basis.kind == BasisKind::LegS) {
    throw Error("build_continuous: LegS is time-varying; use construct_legs per time step");
  }
  HippoMatrices dyn = dynamics_matrices(basis);
  OutputMap map;
  if (construction == Construction::FouTAlternative) {
    if (basis.kind != BasisKind::FouT) {
      throw Error("build_continuous: the alternative construction needs a FouT basis");
    }
    map = construct_fout_alternative(basis.n_pairs());
  } else {
    map = construct_general(dyn.a, dyn.b, basis_at_diagonal(basis));
  }
  return ContinuousSSM(basis, std::move(dyn.a), std::move(dyn.b), std::move(map.c), map.d);
}

}  // namespace hippoicl
