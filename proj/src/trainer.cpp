#include "hippoicl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "hippoicl/parallel.hpp"
#include "hippoicl/rng.hpp"

namespace hippoicl {

namespace {

void check_shapes(const DiscreteSSM& m) {
  const auto n = m.b_bar.size();
  if (m.a_bar.rows() != n || m.a_bar.cols() != n || m.c_bar.size() != n) {
    throw Error("model matrices have inconsistent shapes");
  }
}

std::size_t check_window(const Trajectory& traj, std::size_t loss_start) {
  traj.validate();
  const std::size_t steps = traj.steps();
  if (loss_start >= steps) {
    std::ostringstream msg;
    msg << "loss window start " << loss_start << " leaves no terms (T=" << steps << ")";
    throw Error(msg.str());
  }
  return steps;
}

[[noreturn]] void non_finite(const char* what, std::size_t step) {
  std::ostringstream msg;
  msg << "non-finite " << what << " at step " << step;
  throw DivergenceError(msg.str());
}

bool trains_readout(Setting s) { return s == Setting::I || s == Setting::III || s == Setting::IV; }
bool trains_dynamics(Setting s) { return s == Setting::IV; }

struct Adam {
  GradientBundle m;
  GradientBundle v;
  std::size_t t = 0;
};

/// Per-trajectory states x_1 .. x_T for fixed a_bar, b_bar (columns).
struct CachedStates {
  Matrix states;
  Vector inputs;   // u_0 .. u_{T-1}
  Vector targets;  // u_1 .. u_T
  std::size_t loss_start = 0;
};

CachedStates cache_states(const DiscreteSSM& model, const Trajectory& traj, std::size_t loss_start) {
  const std::size_t steps = check_window(traj, loss_start);
  const auto n = model.b_bar.size();
  CachedStates c;
  c.states.resize(n, static_cast<Eigen::Index>(steps));
  c.inputs.resize(static_cast<Eigen::Index>(steps));
  c.targets.resize(static_cast<Eigen::Index>(steps));
  Vector x = Vector::Zero(n);
  for (std::size_t k = 0; k < steps; ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    x = model.a_bar * x + model.b_bar * traj.samples[k];
    c.states.col(col) = x;
    c.inputs(col) = traj.samples[k];
    c.targets(col) = traj.samples[k + 1];
  }
  c.loss_start = loss_start;
  return c;
}

/// Loss and readout gradient from cached states.
BpttResult readout_gradient(const DiscreteSSM& model, const CachedStates& c) {
  const auto start = static_cast<Eigen::Index>(c.loss_start);
  const auto count = c.states.cols() - start;
  const auto states = c.states.rightCols(count);
  const Vector residual = states.transpose() * model.c_bar + model.d_bar * c.inputs.tail(count) -
                          c.targets.tail(count);
  BpttResult out;
  out.loss = residual.squaredNorm() / static_cast<double>(count);
  const Vector e = (2.0 / static_cast<double>(count)) * residual;
  out.grads.d_c_bar = states * e;
  out.grads.d_d_bar = e.dot(c.inputs.tail(count));
  return out;
}

double global_norm(const GradientBundle& g, Setting setting) {
  double sq = g.d_c_bar.squaredNorm() + g.d_d_bar * g.d_d_bar;
  if (trains_dynamics(setting)) sq += g.d_a_bar.squaredNorm() + g.d_b_bar.squaredNorm();
  return std::sqrt(sq);
}

void adam_update(DiscreteSSM& model, Adam& adam, const GradientBundle& g, const TrainConfig& cfg,
                 double lr) {
  ++adam.t;
  const double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(adam.t));
  const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(adam.t));
  const double step = lr / bias1;
  auto update = [&](auto& param, auto& m, auto& v, const auto& grad) {
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
    param.array() -= step * m.array() / ((v.array() / bias2).sqrt() + cfg.epsilon);
  };
  update(model.c_bar, adam.m.d_c_bar, adam.v.d_c_bar, g.d_c_bar);
  adam.m.d_d_bar = cfg.beta1 * adam.m.d_d_bar + (1.0 - cfg.beta1) * g.d_d_bar;
  adam.v.d_d_bar = cfg.beta2 * adam.v.d_d_bar + (1.0 - cfg.beta2) * g.d_d_bar * g.d_d_bar;
  model.d_bar -= step * adam.m.d_d_bar / (std::sqrt(adam.v.d_d_bar / bias2) + cfg.epsilon);
  if (trains_dynamics(cfg.setting)) {
    update(model.a_bar, adam.m.d_a_bar, adam.v.d_a_bar, g.d_a_bar);
    update(model.b_bar, adam.m.d_b_bar, adam.v.d_b_bar, g.d_b_bar);
  }
}

double scheduled_rate(const TrainConfig& cfg, std::size_t update, std::size_t total) {
  if (cfg.schedule == LearningRateSchedule::Constant || total == 0) return cfg.learning_rate;
  const double progress = static_cast<double>(update) / static_cast<double>(total);
  return cfg.learning_rate * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(mix_seed(seed, epoch));
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

}  // namespace

std::string to_string(Setting setting) {
  switch (setting) {
    case Setting::I: return "I";
    case Setting::II: return "II";
    case Setting::III: return "III";
    case Setting::IV: return "IV";
  }
  throw Error("unknown setting");
}

Setting parse_setting(std::string_view name) {
  if (name == "I" || name == "1") return Setting::I;
  if (name == "II" || name == "2") return Setting::II;
  if (name == "III" || name == "3") return Setting::III;
  if (name == "IV" || name == "4") return Setting::IV;
  throw Error("unknown setting '" + std::string(name) + "' (expected I, II, III, IV)");
}

std::string to_string(LearningRateSchedule schedule) {
  return schedule == LearningRateSchedule::Constant ? "constant" : "cosine";
}

LearningRateSchedule parse_schedule(std::string_view name) {
  if (name == "constant") return LearningRateSchedule::Constant;
  if (name == "cosine") return LearningRateSchedule::Cosine;
  throw Error("unknown learning-rate schedule '" + std::string(name) + "'");
}

GradientBundle GradientBundle::zeros(std::size_t n_state) {
  const auto n = static_cast<Eigen::Index>(n_state);
  return GradientBundle{Matrix::Zero(n, n), Vector::Zero(n), Vector::Zero(n), 0.0};
}

GradientBundle& GradientBundle::operator+=(const GradientBundle& other) {
  d_a_bar += other.d_a_bar;
  d_b_bar += other.d_b_bar;
  d_c_bar += other.d_c_bar;
  d_d_bar += other.d_d_bar;
  return *this;
}

GradientBundle& GradientBundle::operator*=(double factor) {
  d_a_bar *= factor;
  d_b_bar *= factor;
  d_c_bar *= factor;
  d_d_bar *= factor;
  return *this;
}

std::size_t burn_in_start(const Trajectory& traj, double burn_in) {
  if (burn_in < 0.0 || burn_in >= 1.0) throw Error("burn-in fraction must be in [0, 1)");
  const auto start = static_cast<std::size_t>(std::floor(burn_in * static_cast<double>(traj.steps())));
  return std::min(start, traj.steps() - 1);
}

double prediction_loss(const DiscreteSSM& model, const Trajectory& traj, std::size_t loss_start) {
  check_shapes(model);
  const std::size_t steps = check_window(traj, loss_start);
  Vector x = Vector::Zero(model.b_bar.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    x = model.a_bar * x + model.b_bar * traj.samples[k];
    if (k >= loss_start) {
      const double r = model.c_bar.dot(x) + model.d_bar * traj.samples[k] - traj.samples[k + 1];
      sum += r * r;
    }
  }
  return sum / static_cast<double>(steps - loss_start);
}

BpttResult bptt(const DiscreteSSM& model, const Trajectory& traj, std::size_t loss_start) {
  check_shapes(model);
  const std::size_t steps = check_window(traj, loss_start);
  const auto n = model.b_bar.size();
  const auto cols = static_cast<Eigen::Index>(steps);
  const double scale = 2.0 / static_cast<double>(steps - loss_start);

  // states.col(k) = x_k, k = 0 .. T.
  Matrix states(n, cols + 1);
  states.col(0).setZero();
  Vector inputs(cols);
  Vector e = Vector::Zero(cols);
  double loss = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    inputs(col) = traj.samples[k];
    states.col(col + 1).noalias() = model.a_bar * states.col(col);
    states.col(col + 1) += model.b_bar * inputs(col);
    if (!states.col(col + 1).allFinite()) non_finite("state", k + 1);
    if (k >= loss_start) {
      const double r = model.c_bar.dot(states.col(col + 1)) + model.d_bar * inputs(col) -
                       traj.samples[k + 1];
      loss += r * r;
      e(col) = scale * r;
    }
  }

  // adjoint.col(k) = dL/dx_{k+1}.
  const Matrix a_t = model.a_bar.transpose();
  Matrix adjoint(n, cols);
  Vector lambda = Vector::Zero(n);
  for (std::size_t i = steps; i-- > 0;) {
    const auto col = static_cast<Eigen::Index>(i);
    Vector next = model.c_bar * e(col);
    next.noalias() += a_t * lambda;
    lambda.swap(next);
    if (!lambda.allFinite()) non_finite("gradient", i + 1);
    adjoint.col(col) = lambda;
  }

  BpttResult out;
  out.loss = loss / static_cast<double>(steps - loss_start);
  out.grads.d_c_bar = states.rightCols(cols) * e;
  out.grads.d_d_bar = e.dot(inputs);
  out.grads.d_a_bar = adjoint * states.leftCols(cols).transpose();
  out.grads.d_b_bar = adjoint * inputs;
  return out;
}

DiscreteSSM randomize_readout(const DiscreteSSM& model, std::uint64_t seed) {
  DiscreteSSM out = model;
  Rng rng(mix_seed(seed, 0x5e771e3));
  for (Eigen::Index i = 0; i < out.c_bar.size(); ++i) out.c_bar(i) = rng.normal();
  out.d_bar = rng.normal();
  return out;
}

TrainResult train(const TrainConfig& config, const std::vector<Trajectory>& train_set,
                  const DiscreteSSM& model_init) {
  if (train_set.empty()) throw Error("train: empty training set");
  if (config.batch_size == 0) throw Error("train: batch size must be >= 1");
  if (!(config.learning_rate >= 0.0)) throw Error("train: learning rate must be >= 0");
  check_shapes(model_init);

  TrainResult result;
  result.model = config.setting == Setting::III ? randomize_readout(model_init, config.seed)
                                                : model_init;
  DiscreteSSM& model = result.model;
  const std::size_t n_traj = train_set.size();
  std::vector<std::size_t> loss_start(n_traj);
  for (std::size_t i = 0; i < n_traj; ++i) loss_start[i] = burn_in_start(train_set[i], config.burn_in);

  const bool cached = !trains_dynamics(config.setting);
  std::vector<CachedStates> cache;
  if (cached) {
    cache.resize(n_traj);
    parallel_for(n_traj, config.workers, [&](std::size_t i) {
      cache[i] = cache_states(model, train_set[i], loss_start[i]);
    });
  }
  auto evaluate = [&](std::size_t i, bool with_gradient) -> BpttResult {
    if (cached) return readout_gradient(model, cache[i]);
    if (with_gradient) return bptt(model, train_set[i], loss_start[i]);
    return BpttResult{prediction_loss(model, train_set[i], loss_start[i]), {}};
  };
  auto dataset_loss = [&] {
    std::vector<double> losses(n_traj);
    parallel_for(n_traj, config.workers, [&](std::size_t i) { losses[i] = evaluate(i, false).loss; });
    return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(n_traj);
  };

  result.initial_loss = dataset_loss();
  const auto n = static_cast<std::size_t>(model.b_bar.size());
  const std::size_t batches = (n_traj + config.batch_size - 1) / config.batch_size;

  if (!trains_readout(config.setting)) {
    result.loss_curve.assign(config.epochs, result.initial_loss);
    result.final_loss = result.initial_loss;
    return result;
  }

  Adam adam{GradientBundle::zeros(n), GradientBundle::zeros(n), 0};
  const std::size_t total_updates = config.epochs * batches;
  std::vector<BpttResult> parts;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto order = epoch_order(n_traj, config.seed, epoch);
    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t begin = b * config.batch_size;
      const std::size_t size = std::min(config.batch_size, n_traj - begin);
      parts.assign(size, BpttResult{});
      parallel_for(size, config.workers,
                   [&](std::size_t j) { parts[j] = evaluate(order[begin + j], true); });

      GradientBundle grad = GradientBundle::zeros(n);
      double batch_loss = 0.0;
      for (const auto& part : parts) {
        batch_loss += part.loss;
        grad.d_c_bar += part.grads.d_c_bar;
        grad.d_d_bar += part.grads.d_d_bar;
        if (!cached) {
          grad.d_a_bar += part.grads.d_a_bar;
          grad.d_b_bar += part.grads.d_b_bar;
        }
      }
      batch_loss /= static_cast<double>(size);
      grad *= 1.0 / static_cast<double>(size);
      if (!std::isfinite(batch_loss) || batch_loss > config.divergence_loss) {
        std::ostringstream msg;
        msg << "training diverged in epoch " << epoch << " (batch loss " << batch_loss << ")";
        throw DivergenceError(msg.str());
      }
      epoch_loss += batch_loss * static_cast<double>(size);

      const double norm = global_norm(grad, config.setting);
      if (config.clip_norm > 0.0 && norm > config.clip_norm) grad *= config.clip_norm / norm;
      adam_update(model, adam, grad, config, scheduled_rate(config, result.updates, total_updates));
      ++result.updates;
    }
    result.loss_curve.push_back(epoch_loss / static_cast<double>(n_traj));
  }
  result.final_loss = dataset_loss();
  return result;
}

std::vector<Trajectory> mixed_dataset(std::uint64_t seed, std::size_t n_functions,
                                      const MixedDatasetOptions& options) {
  if (n_functions < 3) throw Error("mixed_dataset: need at least 3 functions");
  std::vector<Trajectory> out;
  out.reserve(n_functions);
  for (std::size_t family = 0; family < 3; ++family) {
    const std::size_t count = n_functions / 3 + (family < n_functions % 3 ? 1 : 0);
    const std::uint64_t family_seed = mix_seed(seed, family);
    for (std::size_t i = 0; i < count; ++i) {
      const std::uint64_t s = mix_seed(family_seed, i);
      Trajectory traj;
      if (family == 0) {
        traj = sum_of_sines(options.sine_terms, 0.0, options.sine_f_hi, options.duration,
                            options.dt, s);
      } else if (family == 1) {
        Rng rng(s);
        WhiteSignalParams p;
        p.duration = options.duration;
        p.dt = options.dt;
        p.cutoff_hz = rng.uniform(options.white_gamma_lo, options.white_gamma_hi);
        p.period = options.white_period;
        traj = white_signal(p, mix_seed(s, 1));
      } else {
        traj = legendre_signal(options.legendre_degree, options.duration, options.dt, s);
      }
      out.push_back(std::move(traj));
    }
  }
  return out;
}

}  // namespace hippoicl
