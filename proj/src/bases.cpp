#include "hippoicl/bases.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace hippoicl {

namespace {

constexpr double kStabilityTolerance = 1e-9;
// Slack for floating-point round-off when checking window membership.
constexpr double kWindowSlack = 1e-12;

double sign_pow(std::size_t n) { return (n % 2 == 0) ? 1.0 : -1.0; }

}  // namespace

std::string to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::LegT:
      return "legt";
    case BasisKind::LegS:
      return "legs";
    case BasisKind::FouT:
      return "fout";
  }
  return "unknown";
}

BasisKind parse_basis_kind(std::string_view name) {
  if (name == "legt") return BasisKind::LegT;
  if (name == "legs") return BasisKind::LegS;
  if (name == "fout") return BasisKind::FouT;
  throw Error("unknown basis kind '" + std::string(name) + "'");
}

HippoBasis HippoBasis::legt(std::size_t n_state, double theta) {
  HippoBasis basis{BasisKind::LegT, theta, n_state};
  basis.validate();
  return basis;
}

HippoBasis HippoBasis::legs(std::size_t n_state) {
  HippoBasis basis{BasisKind::LegS, 1.0, n_state};
  basis.validate();
  return basis;
}

HippoBasis HippoBasis::fout(std::size_t n_pairs) {
  return HippoBasis{BasisKind::FouT, 1.0, 2 * n_pairs + 1};
}

std::size_t HippoBasis::n_pairs() const {
  if (kind != BasisKind::FouT) throw Error("n_pairs() is defined for FouT only");
  return (n_state - 1) / 2;
}

void HippoBasis::validate() const {
  if (n_state == 0) throw Error("basis needs n_state >= 1");
  if (kind == BasisKind::LegT && !(theta > 0.0)) {
    throw Error("LegT window theta must be positive");
  }
  if (kind == BasisKind::FouT && n_state % 2 == 0) {
    throw Error("FouT n_state must be odd (constant channel + sin/cos pairs)");
  }
}

double HippoBasis::window_start(double t) const {
  switch (kind) {
    case BasisKind::LegT:
      return t - theta;
    case BasisKind::LegS:
      return 0.0;
    case BasisKind::FouT:
      return t - 1.0;
  }
  return t;
}

HippoMatrices legt_matrices(std::size_t n_state, double theta) {
  if (n_state == 0) throw Error("legt_matrices: n_state must be >= 1");
  if (!(theta > 0.0)) throw Error("legt_matrices: theta must be positive");
  const auto n = static_cast<Eigen::Index>(n_state);
  HippoMatrices m{Matrix(n, n), Vector(n)};
  for (Eigen::Index row = 0; row < n; ++row) {
    const double scale = static_cast<double>(2 * row + 1) / theta;
    m.b(row) = scale * sign_pow(static_cast<std::size_t>(row));
    for (Eigen::Index col = 0; col < n; ++col) {
      m.a(row, col) =
          row >= col ? scale * sign_pow(static_cast<std::size_t>(row - col)) : scale;
    }
  }
  return m;
}

HippoMatrices legs_matrices(std::size_t n_state) {
  if (n_state == 0) throw Error("legs_matrices: n_state must be >= 1");
  const auto n = static_cast<Eigen::Index>(n_state);
  HippoMatrices m{Matrix::Zero(n, n), Vector(n)};
  for (Eigen::Index row = 0; row < n; ++row) {
    m.b(row) = std::sqrt(2.0 * row + 1.0);
    for (Eigen::Index col = 0; col < row; ++col) {
      m.a(row, col) = std::sqrt(2.0 * row + 1.0) * std::sqrt(2.0 * col + 1.0);
    }
    m.a(row, row) = static_cast<double>(row + 1);
  }
  return m;
}

HippoMatrices fout_matrices(std::size_t n_pairs) {
  const auto n = static_cast<Eigen::Index>(2 * n_pairs + 1);
  const double sqrt2 = std::numbers::sqrt2;
  HippoMatrices m{Matrix::Zero(n, n), Vector::Zero(n)};
  m.a(0, 0) = -2.0;
  m.b(0) = 2.0;
  for (Eigen::Index i = 1; i < n; i += 2) {  // cosine channels
    m.a(0, i) = -2.0 * sqrt2;
    m.a(i, 0) = -2.0 * sqrt2;
    m.b(i) = 2.0 * sqrt2;
    for (Eigen::Index j = 1; j < n; j += 2) m.a(i, j) = -4.0;
  }
  for (Eigen::Index m_freq = 1; m_freq <= static_cast<Eigen::Index>(n_pairs); ++m_freq) {
    const Eigen::Index cos_i = 2 * m_freq - 1;
    const Eigen::Index sin_i = 2 * m_freq;
    const double w = 2.0 * std::numbers::pi * static_cast<double>(m_freq);
    m.a(sin_i, cos_i) = w;
    m.a(cos_i, sin_i) = -w;
  }
  return m;
}

HippoMatrices table_matrices(const HippoBasis& basis) {
  basis.validate();
  switch (basis.kind) {
    case BasisKind::LegT:
      return legt_matrices(basis.n_state, basis.theta);
    case BasisKind::LegS:
      return legs_matrices(basis.n_state);
    case BasisKind::FouT:
      return fout_matrices(basis.n_pairs());
  }
  throw Error("table_matrices: unknown basis");
}

HippoMatrices dynamics_matrices(const HippoBasis& basis) {
  HippoMatrices m = table_matrices(basis);
  if (basis.kind != BasisKind::FouT) m.a = -m.a;
  return m;
}

Vector basis_at_diagonal(const HippoBasis& basis) {
  basis.validate();
  const auto n = static_cast<Eigen::Index>(basis.n_state);
  Vector diag(n);
  switch (basis.kind) {
    case BasisKind::LegT:
      for (Eigen::Index i = 0; i < n; ++i) diag(i) = sign_pow(static_cast<std::size_t>(i));
      break;
    case BasisKind::LegS:
      for (Eigen::Index i = 0; i < n; ++i) diag(i) = std::sqrt(2.0 * i + 1.0);
      break;
    case BasisKind::FouT:
      diag.setZero();
      diag(0) = 1.0;
      for (Eigen::Index i = 1; i < n; i += 2) diag(i) = std::numbers::sqrt2;
      break;
  }
  return diag;
}

Vector legendre_values(std::size_t n_max, double z) {
  Vector p(static_cast<Eigen::Index>(n_max + 1));
  p(0) = 1.0;
  if (n_max >= 1) p(1) = z;
  for (std::size_t n = 1; n < n_max; ++n) {
    const double nd = static_cast<double>(n);
    p(static_cast<Eigen::Index>(n + 1)) =
        ((2.0 * nd + 1.0) * z * p(static_cast<Eigen::Index>(n)) -
         nd * p(static_cast<Eigen::Index>(n - 1))) /
        (nd + 1.0);
  }
  return p;
}

Vector basis_eval(const HippoBasis& basis, double t, double s) {
  basis.validate();
  const double lo = basis.window_start(t);
  if (s < lo - kWindowSlack || s > t + kWindowSlack) {
    std::ostringstream msg;
    msg << "basis_eval: s=" << s << " outside window [" << lo << ", " << t << "]";
    throw Error(msg.str());
  }
  const auto n = static_cast<Eigen::Index>(basis.n_state);
  switch (basis.kind) {
    case BasisKind::LegT: {
      Vector p = legendre_values(basis.n_state - 1, 2.0 * (s - t) / basis.theta + 1.0);
      for (Eigen::Index i = 1; i < n; i += 2) p(i) = -p(i);
      return p;
    }
    case BasisKind::LegS: {
      if (!(t > 0.0)) throw Error("basis_eval: LegS needs t > 0");
      Vector p = legendre_values(basis.n_state - 1, 2.0 * s / t - 1.0);
      for (Eigen::Index i = 0; i < n; ++i) p(i) *= std::sqrt(2.0 * i + 1.0);
      return p;
    }
    case BasisKind::FouT: {
      Vector p(n);
      p(0) = 1.0;
      const double lag = t - s + 1.0;
      for (Eigen::Index m = 1; 2 * m < n; ++m) {
        const double phase = 2.0 * std::numbers::pi * static_cast<double>(m) * lag;
        p(2 * m - 1) = std::numbers::sqrt2 * std::cos(phase);
        p(2 * m) = std::numbers::sqrt2 * std::sin(phase);
      }
      return p;
    }
  }
  throw Error("basis_eval: unknown basis");
}

ContinuousSSM::ContinuousSSM(HippoBasis basis, Matrix a_dyn, Vector b_dyn, Vector c,
                             double d)
    : basis_(basis),
      a_dyn_(std::move(a_dyn)),
      b_dyn_(std::move(b_dyn)),
      c_(std::move(c)),
      d_(d) {
  basis_.validate();
  const auto n = static_cast<Eigen::Index>(basis_.n_state);
  if (a_dyn_.rows() != n || a_dyn_.cols() != n || b_dyn_.size() != n || c_.size() != n) {
    throw Error("ContinuousSSM: dimensions disagree with the basis state size");
  }
  if (basis_.kind != BasisKind::LegS) {
    const double abscissa = spectral_abscissa();
    if (abscissa > kStabilityTolerance) {
      std::ostringstream msg;
      msg << "ContinuousSSM: " << to_string(basis_.kind)
          << " dynamics are unstable (max Re(lambda) = " << abscissa << ")";
      throw Error(msg.str());
    }
  }
}

double ContinuousSSM::spectral_abscissa() const {
  Eigen::EigenSolver<Matrix> solver(a_dyn_, /*computeEigenvectors=*/false);
  return solver.eigenvalues().real().maxCoeff();
}

}  // namespace hippoicl
