#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hippoicl/discretize.hpp"
#include "hippoicl/signals.hpp"

namespace hippoicl {

/// LegS predictor: matrices are rediscretized at every step.
struct LegsModel {
  Matrix a_table;
  Vector b_table;
  OutputMap unit_map;
  double dt = 1e-3;

  std::size_t n_state() const { return static_cast<std::size_t>(b_table.size()); }
  /// Matrices used for the transition x_k -> x_{k+1}.
  DiscreteSSM at_step(std::size_t k) const;
};

using Model = std::variant<DiscreteSSM, LegsModel>;

std::size_t model_state_size(const Model& model);
double model_dt(const Model& model);

struct PredictorState {
  Vector x;
  std::size_t k = 0;
  double last_u = 0.0;

  static PredictorState zero(std::size_t n_state);
};

struct StepResult {
  PredictorState state;
  double prediction = 0.0;
};

/// x_{k+1} = a_bar x_k + b_bar u_k, u_hat_{k+1} = c_bar . x_{k+1} + d_bar u_k.
StepResult step(const Model& model, const PredictorState& state, double u_k);

struct EvalReport {
  // abs_errors[k] = |u_hat_{k+1} - u_{k+1}| for k = 0 .. T-1.
  std::vector<double> abs_errors;
  double mae = 0.0;
  double mse = 0.0;
  std::size_t t_start = 0;
};

/**
 * Unrolls the predictor from x_0 = 0 over the whole trajectory. mae and mse
 * average over k = t_start .. T-1 (T - t_start terms); t_start defaults to T/2.
 */
EvalReport rollout(const Model& model, const Trajectory& traj,
                   std::optional<std::size_t> t_start = std::nullopt);

/// Predictions u_hat_1 .. u_hat_T.
std::vector<double> predict(const Model& model, const Trajectory& traj);

/// Same window convention as rollout, for the predictor u_hat_{k+1} = u_k.
EvalReport copying_baseline(const Trajectory& traj, std::optional<std::size_t> t_start = std::nullopt);

struct CurvePoint {
  std::size_t k = 0;
  double mean_abs_error = 0.0;
};

/**
 * Trailing moving average (length `window`, shorter at the start) of the
 * per-step absolute error, averaged across trajectories. All trajectories
 * must have the same length.
 */
std::vector<CurvePoint> error_vs_context(const Model& model,
                                         const std::vector<Trajectory>& trajectories,
                                         std::size_t window, std::size_t workers = 1);

/// First k after which the curve stays within factor * (its final value).
std::size_t settling_index(const std::vector<CurvePoint>& curve, double factor);

enum class ModelKind { LegT, LegS, FouT, FouTAlt };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

/// Recipe for a constructed predictor. FouT kinds use (n_state - 1) / 2 pairs.
struct ModelSpec {
  ModelKind kind = ModelKind::LegT;
  std::size_t n_state = 65;
  double theta = 10.0;
  double dt = 1e-3;
  OutputDiscretization scheme = OutputDiscretization::Single;
};

/// Construction followed by discretization.
Model build_model(const ModelSpec& spec);

/// Continuous-time model behind a time-invariant spec (not LegS).
ContinuousSSM build_continuous_model(const ModelSpec& spec);

struct SweepRow {
  std::size_t n_state = 0;
  double mean_mse = 0.0;
  double std_mse = 0.0;
  std::size_t n_functions = 0;
};

/**
 * For each N in n_values, evaluates the constructed model on signals
 * make_signal(signal, seed0 + i), i < n_functions. std is the population
 * standard deviation across functions. Rows follow n_values order.
 */
std::vector<SweepRow> sweep_hidden_size(ModelSpec base, const std::vector<std::size_t>& n_values,
                                        const SignalSpec& signal, std::size_t n_functions,
                                        std::uint64_t seed0, std::size_t workers = 1);

}  // namespace hippoicl
