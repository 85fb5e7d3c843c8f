#include "hippoicl/discretize.hpp"

#include <cmath>
#include <sstream>

namespace hippoicl {

namespace {

Eigen::PartialPivLU<Matrix> resolvent_lu(const Matrix& a_dyn, double dt) {
  if (!(dt > 0.0)) throw Error("discretization step dt must be positive");
  const auto n = a_dyn.rows();
  Matrix resolvent = Matrix::Identity(n, n) - 0.5 * dt * a_dyn;
  Eigen::PartialPivLU<Matrix> lu(resolvent);
  // PartialPivLU does not report singularity; check the pivots directly.
  const double scale = resolvent.cwiseAbs().maxCoeff();
  const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(min_pivot > 1e-14 * scale)) {
    std::ostringstream msg;
    msg << "bilinear resolvent (I - dt/2 A) is singular for dt=" << dt;
    throw Error(msg.str());
  }
  return lu;
}

}  // namespace

DiscreteAB bilinear_ab(const Matrix& a_dyn, const Vector& b_dyn, double dt) {
  if (a_dyn.rows() != a_dyn.cols() || a_dyn.rows() != b_dyn.size()) {
    throw Error("bilinear_ab: dimension mismatch");
  }
  const auto n = a_dyn.rows();
  auto lu = resolvent_lu(a_dyn, dt);
  DiscreteAB out;
  out.a_bar = lu.solve(Matrix::Identity(n, n) + 0.5 * dt * a_dyn);
  out.b_bar = dt * lu.solve(b_dyn);
  return out;
}

DiscreteCD discretize_cd(const OutputMap& map, double dt) {
  if (!(dt > 0.0)) throw Error("discretize_cd: dt must be positive");
  const double half = 0.5 * map.d * dt;
  const double denom = 1.0 - half;
  if (denom == 0.0) {
    std::ostringstream msg;
    msg << "discretize_cd: 1 - D dt/2 vanishes (D=" << map.d << ", dt=" << dt << ")";
    throw Error(msg.str());
  }
  return DiscreteCD{dt / denom * map.c, (1.0 + half) / denom};
}

DiscreteCD full_bilinear_cd(const DiscreteCD& once, const Matrix& a_dyn,
                            const Vector& b_bar, double dt) {
  auto lu = resolvent_lu(a_dyn, dt);
  DiscreteCD out;
  out.c_bar = lu.transpose().solve(once.c_bar);
  out.d_bar = once.d_bar + 0.5 * once.c_bar.dot(b_bar);
  return out;
}

DiscreteSSM discretize(const ContinuousSSM& ssm, double dt, OutputDiscretization scheme) {
  DiscreteAB ab = bilinear_ab(ssm.a_dyn(), ssm.b_dyn(), dt);
  DiscreteCD cd = discretize_cd(OutputMap{ssm.c(), ssm.d(), false}, dt);
  if (scheme == OutputDiscretization::Double) {
    cd = full_bilinear_cd(cd, ssm.a_dyn(), ab.b_bar, dt);
  }
  return DiscreteSSM{std::move(ab.a_bar), std::move(ab.b_bar), std::move(cd.c_bar),
                     cd.d_bar, dt};
}

DiscreteSSM discretize_legs(const Matrix& a_table, const Vector& b_table,
                            const OutputMap& unit_map, double dt, std::size_t k) {
  if (k == 0) throw Error("discretize_legs: step index k must be >= 1");
  const double t_min = dt;
  const double t = std::max(static_cast<double>(k) * dt, t_min);
  const double rate = 1.0 / t;
  DiscreteAB ab = bilinear_ab(-rate * a_table, rate * b_table, dt);
  DiscreteCD cd = discretize_cd(legs_map_at(unit_map, t, t_min), dt);
  return DiscreteSSM{std::move(ab.a_bar), std::move(ab.b_bar), std::move(cd.c_bar),
                     cd.d_bar, dt};
}

double spectral_radius(const Matrix& m) {
  Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace hippoicl
