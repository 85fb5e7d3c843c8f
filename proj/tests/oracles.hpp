#pragma once

// Reference computations used only by the tests. They deliberately avoid the
// library's own integrators and basis code.

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Classical RK4 on x' = a x + b u(t) from t0 for `steps` steps of h.
inline Vector rk4_lti(const Matrix& a, const Vector& b, const std::function<double(double)>& u,
                      Vector x, double t0, double h, std::size_t steps,
                      const std::function<void(double, const Vector&)>& visit = {}) {
  double t = t0;
  for (std::size_t i = 0; i < steps; ++i) {
    const Vector k1 = a * x + b * u(t);
    const Vector k2 = a * (x + 0.5 * h * k1) + b * u(t + 0.5 * h);
    const Vector k3 = a * (x + 0.5 * h * k2) + b * u(t + 0.5 * h);
    const Vector k4 = a * (x + h * k3) + b * u(t + h);
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t = t0 + static_cast<double>(i + 1) * h;
    if (visit) visit(t, x);
  }
  return x;
}

/// Legendre P_n via the C++17 special functions.
inline double legendre(unsigned n, double z) { return std::legendre(n, z); }

/// Translated-Legendre basis (-1)^n P_n(2 (s - t) / theta + 1).
inline Vector legt_basis(std::size_t n, double theta, double t, double s) {
  Vector p(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    p(static_cast<Eigen::Index>(i)) =
        (i % 2 == 0 ? 1.0 : -1.0) * legendre(static_cast<unsigned>(i), 2.0 * (s - t) / theta + 1.0);
  }
  return p;
}

/// Fourier basis on [t-1, t]: [1, sqrt2 cos(2 pi m (t-s+1)), sqrt2 sin(...)].
inline Vector fout_basis(std::size_t pairs, double t, double s) {
  Vector p(static_cast<Eigen::Index>(2 * pairs + 1));
  p(0) = 1.0;
  for (std::size_t m = 1; m <= pairs; ++m) {
    const double arg = 2.0 * std::numbers::pi * static_cast<double>(m) * (t - s + 1.0);
    p(static_cast<Eigen::Index>(2 * m - 1)) = std::numbers::sqrt2 * std::cos(arg);
    p(static_cast<Eigen::Index>(2 * m)) = std::numbers::sqrt2 * std::sin(arg);
  }
  return p;
}

/// Scaled-Legendre basis sqrt(2n+1) P_n(2 s / t - 1).
inline Vector legs_basis(std::size_t n, double t, double s) {
  Vector p(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    p(static_cast<Eigen::Index>(i)) =
        std::sqrt(2.0 * i + 1.0) * legendre(static_cast<unsigned>(i), 2.0 * s / t - 1.0);
  }
  return p;
}

inline double rmse(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc / static_cast<double>(a.size()));
}

/// Matrix exponential by scaling and squaring of a Taylor series.
inline Matrix expm(const Matrix& m) {
  const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  while (norm / std::pow(2.0, squarings) > 0.1) ++squarings;
  const Matrix scaled = m / std::pow(2.0, squarings);
  Matrix term = Matrix::Identity(m.rows(), m.cols());
  Matrix sum = term;
  for (int k = 1; k <= 20; ++k) {
    term = term * scaled / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

}  // namespace oracle
