// Command-line front end for the experiment harness.

#include <cmath>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hippoicl/experiments.hpp"

namespace {

using hippoicl::RunConfig;

/// Raw flag values; converted into a RunConfig after parsing.
struct Flags {
  std::string basis = "legt";
  std::string n;  // single value, or a list for sweep-n
  std::optional<std::size_t> pairs;
  std::string pairs_list = "8,16,32,64";
  std::string signal = "white";
  std::string scheme = "single";
  std::string settings = "I,II,III,IV";
  std::string setting = "I";
  std::string schedule = "constant";
  std::optional<std::size_t> t_start;
  std::optional<double> u0;
  std::optional<double> vdp_u0;
  std::string manifest;
};

void add_model_flags(CLI::App& cmd, Flags& f, RunConfig& c) {
  cmd.add_option("--basis", f.basis, "legt | legs | fout | fout-alt")->capture_default_str();
  cmd.add_option("--theta", c.model.theta, "LegT window length")->capture_default_str();
  cmd.add_option("--dt", c.model.dt, "sampling step")->capture_default_str();
  cmd.add_option("--scheme", f.scheme, "output discretization: single | double")->capture_default_str();
}

void add_run_flags(CLI::App& cmd, RunConfig& c) {
  cmd.add_option("--seed", c.seed, "master seed")->capture_default_str();
  cmd.add_option("--workers", c.workers, "worker threads (0 = all cores)")->capture_default_str();
  cmd.add_option("--out", c.output_dir, "output directory (default $HIPPOICL_OUTPUT_DIR or hippoicl-out)");
}

void add_signal_flags(CLI::App& cmd, Flags& f, RunConfig& c) {
  cmd.add_option("--signal", f.signal, "white | filtered | vdp | bernoulli | legendre | sines | linear | ck")
      ->capture_default_str();
  cmd.add_option("--steps", c.steps, "trajectory length T")->capture_default_str();
  cmd.add_option("--t-start", f.t_start, "first step of the evaluation window (default T/2)");
  cmd.add_option("--gamma", c.signal.gamma, "white signal cutoff (Hz)")->capture_default_str();
  cmd.add_option("--rms", c.signal.rms, "white signal RMS")->capture_default_str();
  cmd.add_option("--period", c.signal.period, "white signal synthesis period (0 = duration)");
  cmd.add_option("--alpha", c.signal.alpha, "filtered noise time constant")->capture_default_str();
  cmd.add_option("--mu", c.signal.mu, "Van der Pol mu")->capture_default_str();
  cmd.add_option("--u0", f.u0, "ODE initial value");
  cmd.add_option("--degree", c.signal.max_degree, "Legendre max degree")->capture_default_str();
  cmd.add_option("--terms", c.signal.n_terms, "number of sines")->capture_default_str();
  cmd.add_option("--f-hi", c.signal.f_hi, "highest sine frequency (Hz)")->capture_default_str();
  cmd.add_option("--slope", c.signal.slope, "linear signal slope")->capture_default_str();
  cmd.add_option("--intercept", c.signal.intercept, "linear signal intercept")->capture_default_str();
  cmd.add_option("--k", c.signal.k, "smoothness order of the ck signal")->capture_default_str();
}

void add_train_flags(CLI::App& cmd, Flags& f, RunConfig& c) {
  cmd.add_option("--n", c.train_state, "hidden state size")->capture_default_str();
  cmd.add_option("--epochs", c.train.epochs)->capture_default_str();
  cmd.add_option("--batch", c.train.batch_size)->capture_default_str();
  cmd.add_option("--lr", c.train.learning_rate, "Adam learning rate")->capture_default_str();
  cmd.add_option("--schedule", f.schedule, "constant | cosine")->capture_default_str();
  cmd.add_option("--clip", c.train.clip_norm, "global gradient norm clip (<= 0 disables)")
      ->capture_default_str();
  cmd.add_option("--burn-in", c.train.burn_in, "fraction of each trajectory excluded from the loss")
      ->capture_default_str();
  cmd.add_option("--train-seed", c.train.seed, "shuffle / initialization seed")->capture_default_str();
  cmd.add_option("--dataset-size", c.dataset_size)->capture_default_str();
  cmd.add_option("--train-duration", c.train_duration, "length of training trajectories (time units)")
      ->capture_default_str();
  cmd.add_option("--holdout", c.holdout_functions, "holdout functions")->capture_default_str();
  cmd.add_option("--steps", c.steps, "holdout trajectory length T")->capture_default_str();
}

std::size_t single_size(const std::string& text, std::size_t fallback) {
  if (text.empty()) return fallback;
  const auto values = hippoicl::parse_size_list(text);
  if (values.size() != 1) throw hippoicl::Error("--n takes a single value here");
  return values.front();
}

void finalize(hippoicl::Experiment experiment, const Flags& f, RunConfig& c) {
  c.experiment = experiment;
  c.model.kind = hippoicl::parse_model_kind(f.basis);
  c.model.scheme = f.scheme == "double" ? hippoicl::OutputDiscretization::Double
                                        : hippoicl::OutputDiscretization::Single;
  if (f.scheme != "single" && f.scheme != "double") {
    throw hippoicl::Error("--scheme must be single or double");
  }
  c.signal.family = hippoicl::parse_signal_family(f.signal);
  c.signal.u0 = f.u0;
  c.t_start = f.t_start;
  c.train.setting = hippoicl::parse_setting(f.setting);
  c.train.schedule = hippoicl::parse_schedule(f.schedule);
  const bool fourier = c.model.kind == hippoicl::ModelKind::FouT ||
                       c.model.kind == hippoicl::ModelKind::FouTAlt;
  if (experiment == hippoicl::Experiment::SweepN) {
    c.n_list = f.n.empty() ? hippoicl::default_n_list() : hippoicl::parse_size_list(f.n);
  } else if (f.pairs && fourier) {
    c.model.n_state = 2 * *f.pairs + 1;
  } else {
    c.model.n_state = single_size(f.n, c.model.n_state);
  }
  if (experiment == hippoicl::Experiment::BoundSlope) {
    c.pairs_list = hippoicl::parse_size_list(f.pairs_list);
  }
  if (experiment == hippoicl::Experiment::CompareSettings) {
    c.settings.clear();
    for (const auto& s : std::vector<std::string>(CLI::detail::split(f.settings, ','))) {
      c.settings.push_back(hippoicl::parse_setting(s));
    }
  }
  c.vdp_u0 = f.vdp_u0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constructed state-space predictors: construction, evaluation and training experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", hippoicl::version_string());

  Flags f;
  RunConfig c;
  std::optional<hippoicl::Experiment> chosen;
  auto bind = [&](CLI::App* cmd, hippoicl::Experiment e) {
    cmd->callback([&chosen, e] { chosen = e; });
    return cmd;
  };

  auto* construct = bind(app.add_subcommand("construct", "write a constructed model artifact"),
                         hippoicl::Experiment::Construct);
  add_model_flags(*construct, f, c);
  construct->add_option("--n", f.n, "hidden state size");
  construct->add_option("--pairs", f.pairs, "Fourier pairs (FouT kinds)");
  add_run_flags(*construct, c);

  auto* roll = bind(app.add_subcommand("rollout", "evaluate one trajectory"), hippoicl::Experiment::Rollout);
  add_model_flags(*roll, f, c);
  roll->add_option("--n", f.n, "hidden state size");
  roll->add_option("--pairs", f.pairs, "Fourier pairs (FouT kinds)");
  add_signal_flags(*roll, f, c);
  add_run_flags(*roll, c);

  auto* sweep = bind(app.add_subcommand("sweep-n", "MSE versus hidden state size"), hippoicl::Experiment::SweepN);
  add_model_flags(*sweep, f, c);
  sweep->add_option("--n", f.n, "list 'a,b,c' or range 'start:stop:step' (default 1:96:5)");
  add_signal_flags(*sweep, f, c);
  sweep->add_option("--functions", c.n_functions, "functions per N")->capture_default_str();
  add_run_flags(*sweep, c);

  auto* context = bind(app.add_subcommand("context-curve", "error versus context length"),
                       hippoicl::Experiment::ContextCurve);
  add_model_flags(*context, f, c);
  context->add_option("--n", f.n, "hidden state size");
  context->add_option("--pairs", f.pairs, "Fourier pairs (FouT kinds)");
  add_signal_flags(*context, f, c);
  context->add_option("--functions", c.n_functions)->capture_default_str();
  context->add_option("--window", c.window, "moving-average length")->capture_default_str();
  add_run_flags(*context, c);

  auto* slope = bind(app.add_subcommand("bound-slope", "convergence of the continuous derivative estimate"),
                     hippoicl::Experiment::BoundSlope);
  slope->add_option("--k", c.smoothness, "smoothness order (>= 3)")->capture_default_str();
  slope->add_option("--pairs", f.pairs_list, "list of Fourier pair counts")->capture_default_str();
  slope->add_option("--modes", c.n_modes, "modes in the test signal")->capture_default_str();
  slope->add_option("--fine-dt", c.fine_dt, "RK4 step")->capture_default_str();
  add_run_flags(*slope, c);

  auto* ode = bind(app.add_subcommand("ode", "Van der Pol and Bernoulli with LegT and FouT"),
                   hippoicl::Experiment::Ode);
  ode->add_option("--n", f.n, "hidden state size");
  ode->add_option("--theta", c.model.theta, "LegT window length")->capture_default_str();
  ode->add_option("--dt", c.model.dt)->capture_default_str();
  ode->add_option("--steps", c.steps)->capture_default_str();
  ode->add_option("--mu", c.mu)->capture_default_str();
  ode->add_option("--vdp-u0", f.vdp_u0, "Van der Pol initial value (default -tanh(mu))");
  ode->add_option("--bernoulli-u0", c.bernoulli_u0)->capture_default_str();
  add_run_flags(*ode, c);

  auto* train = bind(app.add_subcommand("train", "train one setting on the mixed dataset"),
                     hippoicl::Experiment::Train);
  train->add_option("--setting", f.setting, "I | II | III | IV")->capture_default_str();
  train->add_option("--theta", c.model.theta)->capture_default_str();
  train->add_option("--dt", c.model.dt)->capture_default_str();
  add_train_flags(*train, f, c);
  add_run_flags(*train, c);

  auto* compare = bind(app.add_subcommand("compare-settings", "train and evaluate several settings"),
                       hippoicl::Experiment::CompareSettings);
  compare->add_option("--settings", f.settings, "comma-separated settings")->capture_default_str();
  compare->add_option("--theta", c.model.theta)->capture_default_str();
  compare->add_option("--dt", c.model.dt)->capture_default_str();
  add_train_flags(*compare, f, c);
  add_run_flags(*compare, c);

  std::string rerun_out;
  auto* rerun = app.add_subcommand("rerun", "repeat a run from its manifest.json");
  rerun->add_option("manifest", f.manifest, "path to manifest.json")->required();
  rerun->add_option("--out", rerun_out, "output directory (default: the recorded one)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    hippoicl::RunOutcome outcome;
    if (rerun->parsed()) {
      outcome = hippoicl::rerun_from_manifest(f.manifest, rerun_out);
    } else {
      finalize(*chosen, f, c);
      outcome = hippoicl::run_experiment(c);
    }
    std::cout << "output: " << outcome.output_dir.string() << '\n';
    for (const auto& file : outcome.files) std::cout << "  " << file << '\n';
    std::cout << outcome.summary.dump(2) << '\n';
  } catch (const hippoicl::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
