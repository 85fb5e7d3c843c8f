#include "hippoicl/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "hippoicl/parallel.hpp"

namespace hippoicl {

namespace {

void check_finite_input(double u, std::size_t k) {
  if (!std::isfinite(u)) {
    std::ostringstream msg;
    msg << "non-finite input at step " << k;
    throw Error(msg.str());
  }
}

// In-place transition; `scratch` avoids an allocation per step.
double advance(const DiscreteSSM& m, Vector& x, Vector& scratch, double u) {
  scratch.noalias() = m.a_bar * x;
  scratch += m.b_bar * u;
  x.swap(scratch);
  return m.c_bar.dot(x) + m.d_bar * u;
}

template <typename Visit>
void run_predictions(const Model& model, const Trajectory& traj, Visit&& visit) {
  traj.validate();
  const std::size_t n = model_state_size(model);
  const std::size_t steps = traj.steps();
  Vector x = Vector::Zero(static_cast<Eigen::Index>(n));
  Vector scratch(static_cast<Eigen::Index>(n));
  if (const auto* fixed = std::get_if<DiscreteSSM>(&model)) {
    for (std::size_t k = 0; k < steps; ++k) {
      visit(k, advance(*fixed, x, scratch, traj.samples[k]));
    }
  } else {
    const auto& legs = std::get<LegsModel>(model);
    for (std::size_t k = 0; k < steps; ++k) {
      visit(k, advance(legs.at_step(k), x, scratch, traj.samples[k]));
    }
  }
}

EvalReport summarize(std::vector<double> abs_errors, std::optional<std::size_t> t_start) {
  const std::size_t steps = abs_errors.size();
  EvalReport report;
  report.t_start = t_start.value_or(steps / 2);
  if (report.t_start >= steps) {
    std::ostringstream msg;
    msg << "evaluation start " << report.t_start << " must be below T=" << steps;
    throw Error(msg.str());
  }
  double sum_abs = 0.0;
  double sum_sq = 0.0;
  for (std::size_t k = report.t_start; k < steps; ++k) {
    sum_abs += abs_errors[k];
    sum_sq += abs_errors[k] * abs_errors[k];
  }
  const auto count = static_cast<double>(steps - report.t_start);
  report.mae = sum_abs / count;
  report.mse = sum_sq / count;
  report.abs_errors = std::move(abs_errors);
  return report;
}

}  // namespace

DiscreteSSM LegsModel::at_step(std::size_t k) const {
  return discretize_legs(a_table, b_table, unit_map, dt, k + 1);
}

std::size_t model_state_size(const Model& model) {
  return std::visit([](const auto& m) { return m.n_state(); }, model);
}

double model_dt(const Model& model) {
  return std::visit([](const auto& m) { return m.dt; }, model);
}

PredictorState PredictorState::zero(std::size_t n_state) {
  return PredictorState{Vector::Zero(static_cast<Eigen::Index>(n_state)), 0, 0.0};
}

StepResult step(const Model& model, const PredictorState& state, double u_k) {
  check_finite_input(u_k, state.k);
  if (static_cast<std::size_t>(state.x.size()) != model_state_size(model)) {
    throw Error("predictor state dimension does not match the model");
  }
  const DiscreteSSM* fixed = std::get_if<DiscreteSSM>(&model);
  DiscreteSSM legs_step;
  if (fixed == nullptr) {
    legs_step = std::get<LegsModel>(model).at_step(state.k);
    fixed = &legs_step;
  }
  StepResult out;
  out.state.x = fixed->a_bar * state.x + fixed->b_bar * u_k;
  out.state.k = state.k + 1;
  out.state.last_u = u_k;
  out.prediction = fixed->c_bar.dot(out.state.x) + fixed->d_bar * u_k;
  return out;
}

std::vector<double> predict(const Model& model, const Trajectory& traj) {
  std::vector<double> out(traj.steps());
  run_predictions(model, traj, [&](std::size_t k, double y) { out[k] = y; });
  return out;
}

EvalReport rollout(const Model& model, const Trajectory& traj, std::optional<std::size_t> t_start) {
  std::vector<double> errors(traj.steps());
  run_predictions(model, traj, [&](std::size_t k, double y) {
    errors[k] = std::abs(y - traj.samples[k + 1]);
  });
  return summarize(std::move(errors), t_start);
}

EvalReport copying_baseline(const Trajectory& traj, std::optional<std::size_t> t_start) {
  traj.validate();
  std::vector<double> errors(traj.steps());
  for (std::size_t k = 0; k < errors.size(); ++k) {
    errors[k] = std::abs(traj.samples[k + 1] - traj.samples[k]);
  }
  return summarize(std::move(errors), t_start);
}

std::vector<CurvePoint> error_vs_context(const Model& model,
                                         const std::vector<Trajectory>& trajectories,
                                         std::size_t window, std::size_t workers) {
  if (trajectories.empty()) throw Error("error_vs_context: need at least one trajectory");
  const std::size_t steps = trajectories.front().steps();
  for (const auto& traj : trajectories) {
    if (traj.steps() != steps) throw Error("error_vs_context: trajectories differ in length");
  }
  if (window == 0 || window > steps) {
    std::ostringstream msg;
    msg << "error_vs_context: window " << window << " must be in [1, T=" << steps << "]";
    throw Error(msg.str());
  }
  std::vector<std::vector<double>> per_traj(trajectories.size());
  parallel_for(trajectories.size(), workers, [&](std::size_t i) {
    const auto errors = rollout(model, trajectories[i], 0).abs_errors;
    std::vector<double> smoothed(steps);
    double running = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
      running += errors[k];
      if (k >= window) running -= errors[k - window];
      smoothed[k] = running / static_cast<double>(std::min(k + 1, window));
    }
    per_traj[i] = std::move(smoothed);
  });
  std::vector<CurvePoint> curve(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    double acc = 0.0;
    for (const auto& s : per_traj) acc += s[k];
    curve[k] = {k, acc / static_cast<double>(per_traj.size())};
  }
  return curve;
}

std::size_t settling_index(const std::vector<CurvePoint>& curve, double factor) {
  if (curve.empty()) throw Error("settling_index: empty curve");
  const double limit = factor * curve.back().mean_abs_error;
  std::size_t idx = curve.size() - 1;
  while (idx > 0 && curve[idx - 1].mean_abs_error <= limit) --idx;
  return curve[idx].k;
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::LegT: return "legt";
    case ModelKind::LegS: return "legs";
    case ModelKind::FouT: return "fout";
    case ModelKind::FouTAlt: return "fout-alt";
  }
  throw Error("unknown model kind");
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "legt") return ModelKind::LegT;
  if (name == "legs") return ModelKind::LegS;
  if (name == "fout") return ModelKind::FouT;
  if (name == "fout-alt") return ModelKind::FouTAlt;
  throw Error("unknown basis '" + std::string(name) + "' (expected legt, legs, fout, fout-alt)");
}

ContinuousSSM build_continuous_model(const ModelSpec& spec) {
  switch (spec.kind) {
    case ModelKind::LegT:
      return build_continuous(HippoBasis::legt(spec.n_state, spec.theta));
    case ModelKind::FouT:
      return build_continuous(HippoBasis::fout((spec.n_state - 1) / 2));
    case ModelKind::FouTAlt:
      return build_continuous(HippoBasis::fout((spec.n_state - 1) / 2),
                              Construction::FouTAlternative);
    case ModelKind::LegS:
      break;
  }
  throw Error("LegS has no time-invariant continuous model");
}

Model build_model(const ModelSpec& spec) {
  if (spec.n_state == 0) throw Error("hidden state size must be >= 1");
  if (spec.kind == ModelKind::LegS) {
    const HippoBasis basis = HippoBasis::legs(spec.n_state);
    const HippoMatrices table = table_matrices(basis);
    const HippoMatrices dyn = dynamics_matrices(basis);
    LegsModel m;
    m.unit_map = construct_general(dyn.a, dyn.b, basis_at_diagonal(basis));
    m.a_table = table.a;
    m.b_table = table.b;
    m.dt = spec.dt;
    return m;
  }
  return discretize(build_continuous_model(spec), spec.dt, spec.scheme);
}

std::vector<SweepRow> sweep_hidden_size(ModelSpec base, const std::vector<std::size_t>& n_values,
                                        const SignalSpec& signal, std::size_t n_functions,
                                        std::uint64_t seed0, std::size_t workers) {
  if (n_functions == 0) throw Error("sweep_hidden_size: need at least one function");
  std::vector<Model> models;
  models.reserve(n_values.size());
  for (std::size_t n : n_values) {
    base.n_state = n;
    models.push_back(build_model(base));
  }
  // mse[f][j]: function f, model j.
  std::vector<std::vector<double>> mse(n_functions, std::vector<double>(models.size()));
  parallel_for(n_functions, workers, [&](std::size_t f) {
    const Trajectory traj = make_signal(signal, seed0 + f);
    for (std::size_t j = 0; j < models.size(); ++j) mse[f][j] = rollout(models[j], traj).mse;
  });
  std::vector<SweepRow> rows;
  for (std::size_t j = 0; j < models.size(); ++j) {
    double mean = 0.0;
    for (const auto& row : mse) mean += row[j];
    mean /= static_cast<double>(n_functions);
    double var = 0.0;
    for (const auto& row : mse) var += (row[j] - mean) * (row[j] - mean);
    var /= static_cast<double>(n_functions);
    rows.push_back({n_values[j], mean, std::sqrt(var), n_functions});
  }
  return rows;
}

}  // namespace hippoicl
