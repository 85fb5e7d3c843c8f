#include "hippoicl/continuous.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "hippoicl/construction.hpp"

namespace hippoicl {

namespace {

// u at the half-step grid: table[j] = u(j * h / 2).
std::vector<double> half_step_table(const InputFunction& u, double h, std::size_t steps) {
  std::vector<double> table(2 * steps + 1);
  for (std::size_t j = 0; j < table.size(); ++j) table[j] = u(0.5 * h * static_cast<double>(j));
  return table;
}

std::size_t whole_steps(double span, double h, const char* what) {
  const double ratio = span / h;
  const auto steps = static_cast<std::size_t>(std::llround(ratio));
  if (steps == 0 || std::abs(ratio - static_cast<double>(steps)) > 1e-6 * ratio) {
    std::ostringstream msg;
    msg << what << " " << span << " is not a whole number of steps of " << h;
    throw Error(msg.str());
  }
  return steps;
}

/// Linear RK4 stepper reusing its work vectors.
class LinearRk4 {
 public:
  LinearRk4(const Matrix& a, const Vector& b, double h)
      : a_(a), b_(b), h_(h), k1_(b.size()), k2_(b.size()), k3_(b.size()), k4_(b.size()),
        probe_(b.size()) {}

  // u0, um, u1: input at t, t + h/2, t + h.
  void step(Vector& x, double u0, double um, double u1) {
    k1_.noalias() = a_ * x;
    k1_ += b_ * u0;
    probe_ = x + (0.5 * h_) * k1_;
    k2_.noalias() = a_ * probe_;
    k2_ += b_ * um;
    probe_ = x + (0.5 * h_) * k2_;
    k3_.noalias() = a_ * probe_;
    k3_ += b_ * um;
    probe_ = x + h_ * k3_;
    k4_.noalias() = a_ * probe_;
    k4_ += b_ * u1;
    x += (h_ / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
  }

 private:
  const Matrix& a_;
  const Vector& b_;
  double h_;
  Vector k1_, k2_, k3_, k4_, probe_;
};

void check_state(const Vector& x, std::size_t step) {
  if (!x.allFinite()) {
    std::ostringstream msg;
    msg << "continuous integration diverged at fine step " << step;
    throw DivergenceError(msg.str());
  }
}

/// One-step RK4 propagation matrix for x' = A x.
Matrix rk4_matrix(const Matrix& a, double h) {
  const auto n = a.rows();
  const Matrix ha = h * a;
  Matrix term = Matrix::Identity(n, n);
  Matrix r = term;
  for (int order = 1; order <= 4; ++order) {
    term = term * ha / static_cast<double>(order);
    r += term;
  }
  return r;
}

Matrix matrix_power(Matrix base, std::size_t exponent) {
  Matrix result = Matrix::Identity(base.rows(), base.cols());
  while (exponent > 0) {
    if (exponent & 1u) result = result * base;
    exponent >>= 1u;
    if (exponent > 0) base = base * base;
  }
  return result;
}

// Integrates `steps` steps from x using a periodic half-step table of
// period_steps steps.
template <typename Visit>
void integrate_periodic(const ContinuousSSM& ssm, const std::vector<double>& table,
                        std::size_t period_steps, double h, std::size_t steps, Vector& x,
                        Visit&& visit) {
  LinearRk4 rk(ssm.a_dyn(), ssm.b_dyn(), h);
  for (std::size_t i = 0; i < steps; ++i) {
    const std::size_t j = 2 * (i % period_steps);
    rk.step(x, table[j], table[j + 1], table[j + 2]);
    check_state(x, i + 1);
    visit(i + 1, x);
  }
}

Vector steady_state_from_table(const ContinuousSSM& ssm, const std::vector<double>& table,
                               std::size_t period_steps, double h) {
  Vector r = Vector::Zero(static_cast<Eigen::Index>(ssm.n_state()));
  integrate_periodic(ssm, table, period_steps, h, period_steps, r,
                     [](std::size_t, const Vector&) {});
  const Matrix monodromy = matrix_power(rk4_matrix(ssm.a_dyn(), h), period_steps);
  const auto n = monodromy.rows();
  const Matrix lhs = Matrix::Identity(n, n) - monodromy;
  Eigen::FullPivLU<Matrix> lu(lhs);
  if (!lu.isInvertible()) {
    throw Error("periodic steady state: I - R^P is singular (undamped mode)");
  }
  return lu.solve(r);
}

}  // namespace

ContinuousRun continuous_derivative_estimate(const ContinuousSSM& ssm, const InputFunction& u,
                                             const ContinuousOptions& options) {
  if (!(options.fine_dt > 0.0)) throw Error("fine_dt must be positive");
  if (options.record_every == 0) throw Error("record_every must be >= 1");
  const double h = options.fine_dt;
  const auto steps = static_cast<std::size_t>(std::llround(options.duration / h));
  const auto n = static_cast<Eigen::Index>(ssm.n_state());
  Vector x = options.x0.size() == 0 ? Vector::Zero(n) : options.x0;
  if (x.size() != n) throw Error("initial state dimension does not match the model");

  ContinuousRun run;
  const std::size_t n_records = steps / options.record_every + 1;
  run.t.reserve(n_records);
  run.y.reserve(n_records);
  if (options.keep_states) run.states.resize(n, static_cast<Eigen::Index>(n_records));
  auto record = [&](double t, double u_t, const Vector& state) {
    if (options.keep_states) run.states.col(static_cast<Eigen::Index>(run.t.size())) = state;
    run.t.push_back(t);
    run.y.push_back(ssm.c().dot(state) + ssm.d() * u_t);
  };

  LinearRk4 rk(ssm.a_dyn(), ssm.b_dyn(), h);
  double u0 = u(0.0);
  record(0.0, u0, x);
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) * h;
    const double u1 = u(t + h);
    rk.step(x, u0, u(t + 0.5 * h), u1);
    check_state(x, i + 1);
    if ((i + 1) % options.record_every == 0) record(t + h, u1, x);
    u0 = u1;
  }
  run.final_state = std::move(x);
  return run;
}

ContinuousRun continuous_derivative_estimate(const ContinuousSSM& ssm, const Trajectory& traj,
                                             double fine_dt) {
  traj.validate();
  if (!(fine_dt > 0.0) || fine_dt > traj.dt / 10.0 * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "fine_dt=" << fine_dt << " must be in (0, dt/10] with dt=" << traj.dt;
    throw Error(msg.str());
  }
  const auto substeps = static_cast<std::size_t>(std::ceil(traj.dt / fine_dt - 1e-9));
  const double last = static_cast<double>(traj.steps());
  const InputFunction u = [&traj, last](double t) {
    const double pos = std::clamp(t / traj.dt, 0.0, last);
    const auto i = std::min(static_cast<std::size_t>(pos), traj.steps() - 1);
    const double frac = pos - static_cast<double>(i);
    return (1.0 - frac) * traj.samples[i] + frac * traj.samples[i + 1];
  };
  ContinuousOptions options;
  options.fine_dt = traj.dt / static_cast<double>(substeps);
  options.duration = traj.dt * last;
  options.record_every = substeps;
  return continuous_derivative_estimate(ssm, u, options);
}

Vector periodic_steady_state(const ContinuousSSM& ssm, const InputFunction& u, double period,
                             double fine_dt) {
  const std::size_t steps = whole_steps(period, fine_dt, "period");
  return steady_state_from_table(ssm, half_step_table(u, fine_dt, steps), steps, fine_dt);
}

LineFit fit_log_log(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("log-log fit needs >= 2 paired points");
  const auto n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw Error("log-log fit needs positive values");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (!(std::abs(denom) > 1e-12 * std::max(1.0, n * sxx))) {
    throw Error("log-log fit is degenerate (all x equal)");
  }
  LineFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

SlopeReport bound_slope(int k, const std::vector<std::size_t>& n_pairs_list,
                        const SlopeOptions& options) {
  if (k < 3) throw Error("bound_slope: k must be >= 3");
  if (n_pairs_list.size() < 4) throw Error("bound_slope: need at least 4 values of N");
  const double h = options.fine_dt;
  const std::size_t period_steps = whole_steps(1.0, h, "signal period");
  const std::size_t horizon_steps = whole_steps(options.horizon, h, "horizon");

  const SinusoidSum signal = ck_fourier_function(k, options.n_modes);
  const std::vector<double> table =
      half_step_table([&](double t) { return signal.value(t); }, h, period_steps);
  std::vector<double> true_derivative(period_steps + 1);
  for (std::size_t i = 0; i <= period_steps; ++i) {
    true_derivative[i] = signal.derivative(static_cast<double>(i) * h);
  }

  SlopeReport report;
  report.k = k;
  report.n_pairs = n_pairs_list;
  report.lemma_violation = -std::numeric_limits<double>::infinity();
  std::vector<double> xs;
  for (std::size_t pairs : n_pairs_list) {
    if (pairs == 0) throw Error("bound_slope: N must be >= 1");
    const ContinuousSSM ssm = build_continuous(HippoBasis::fout(pairs), Construction::FouTAlternative);
    Vector x = steady_state_from_table(ssm, table, period_steps, h);

    std::vector<double> lemma_bound(pairs + 1);
    for (std::size_t m = 1; m <= pairs; ++m) {
      lemma_bound[m] = std::pow(2.0 * std::numbers::pi * static_cast<double>(m), -k);
    }
    auto lemma_check = [&](const Vector& state) {
      for (std::size_t m = 1; m <= pairs; ++m) {
        const double excess = std::abs(state(static_cast<Eigen::Index>(2 * m))) - lemma_bound[m];
        report.lemma_violation = std::max(report.lemma_violation, excess);
      }
    };
    lemma_check(x);

    double sup_error = 0.0;
    double integral = 0.0;
    double previous_error = ssm.c().dot(x) - true_derivative[0];
    double e_horizon = 0.0;
    double e_double = 0.0;
    integrate_periodic(ssm, table, period_steps, h, 2 * horizon_steps, x,
                       [&](std::size_t i, const Vector& state) {
                         const double error =
                             ssm.c().dot(state) + ssm.d() * table[2 * (i % period_steps)] -
                             true_derivative[i % period_steps];
                         if (i <= period_steps) {
                           sup_error = std::max(sup_error, std::abs(error));
                           lemma_check(state);
                         }
                         integral += 0.5 * h * (previous_error + error);
                         previous_error = error;
                         if (i <= horizon_steps) e_horizon = std::max(e_horizon, std::abs(integral));
                         e_double = std::max(e_double, std::abs(integral));
                       });
    report.sup_errors.push_back(sup_error);
    report.tail_bounds.push_back(ck_derivative_tail(k, pairs, options.n_modes));
    if (e_horizon > 0.0) report.integrated_ratio = std::max(report.integrated_ratio, e_double / e_horizon);
    xs.push_back(static_cast<double>(pairs));
  }
  const LineFit fit = fit_log_log(xs, report.sup_errors);
  report.slope = fit.slope;
  report.intercept = fit.intercept;
  return report;
}

}  // namespace hippoicl
