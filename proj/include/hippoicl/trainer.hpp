#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hippoicl/discretize.hpp"
#include "hippoicl/signals.hpp"

namespace hippoicl {

/// Initialization / trainable-subset settings.
enum class Setting {
  I,    // construction init, train c_bar and d_bar
  II,   // construction, no training
  III,  // construction a_bar, b_bar; c_bar, d_bar ~ N(0, 1); train c_bar and d_bar
  IV,   // construction init, train everything
};

std::string to_string(Setting setting);
Setting parse_setting(std::string_view name);

enum class LearningRateSchedule { Constant, Cosine };

std::string to_string(LearningRateSchedule schedule);
LearningRateSchedule parse_schedule(std::string_view name);

struct TrainConfig {
  Setting setting = Setting::I;
  std::size_t batch_size = 128;
  std::size_t epochs = 1000;
  double learning_rate = 1e-3;
  LearningRateSchedule schedule = LearningRateSchedule::Constant;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 1.0;       // global gradient norm; <= 0 disables clipping
  double burn_in = 0.1;         // fraction of each trajectory excluded from the loss
  double divergence_loss = 1e6;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

struct GradientBundle {
  Matrix d_a_bar;
  Vector d_b_bar;
  Vector d_c_bar;
  double d_d_bar = 0.0;

  static GradientBundle zeros(std::size_t n_state);
  GradientBundle& operator+=(const GradientBundle& other);
  GradientBundle& operator*=(double factor);
};

struct BpttResult {
  double loss = 0.0;
  GradientBundle grads;
};

/**
 * Mean squared next-step error over predictions k = loss_start .. T-1 and
 * its gradient with respect to every model parameter, by the adjoint of the
 * linear recurrence. Throws DivergenceError naming the step of the first
 * non-finite value.
 */
BpttResult bptt(const DiscreteSSM& model, const Trajectory& traj, std::size_t loss_start = 0);

/// Forward-only version of the bptt loss.
double prediction_loss(const DiscreteSSM& model, const Trajectory& traj, std::size_t loss_start = 0);

/// Index of the first prediction counted by the training loss.
std::size_t burn_in_start(const Trajectory& traj, double burn_in);

struct TrainResult {
  DiscreteSSM model;
  std::vector<double> loss_curve;  // mean minibatch loss per epoch
  double initial_loss = 0.0;       // full training-set loss before any update
  double final_loss = 0.0;         // full training-set loss after the last update
  std::size_t updates = 0;
};

/**
 * Minibatch Adam on the parameter subset selected by config.setting. The
 * visiting order is a per-epoch Fisher-Yates shuffle seeded from config.seed.
 * Setting III replaces c_bar and d_bar of model_init with standard normal
 * draws before training. Throws DivergenceError naming the epoch when a
 * batch loss exceeds config.divergence_loss.
 */
TrainResult train(const TrainConfig& config, const std::vector<Trajectory>& train_set,
                  const DiscreteSSM& model_init);

/// The model setting III starts from.
DiscreteSSM randomize_readout(const DiscreteSSM& model, std::uint64_t seed);

struct MixedDatasetOptions {
  double duration = 10.0;
  double dt = 1e-3;
  double white_gamma_lo = 0.3;
  double white_gamma_hi = 1.5;
  double white_period = 10.0;  // synthesis period; may exceed duration
  std::size_t legendre_degree = 15;
  std::size_t sine_terms = 5;
  double sine_f_hi = 50.0;
};

/**
 * n_functions signals split into thirds: sums of sines, white signals with a
 * random cutoff, random Legendre series. The first n mod 3 families get one
 * extra member. Every signal's seed is derived from (seed, family, index).
 */
std::vector<Trajectory> mixed_dataset(std::uint64_t seed, std::size_t n_functions,
                                      const MixedDatasetOptions& options = {});

}  // namespace hippoicl
