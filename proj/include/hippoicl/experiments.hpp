#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hippoicl/continuous.hpp"
#include "hippoicl/predictor.hpp"
#include "hippoicl/trainer.hpp"

namespace hippoicl {

enum class Experiment {
  Construct,
  Rollout,
  SweepN,
  ContextCurve,
  BoundSlope,
  Ode,
  Train,
  CompareSettings,
};

std::string to_string(Experiment experiment);
Experiment parse_experiment(std::string_view name);

/// Everything an experiment needs; every field has a usable default.
struct RunConfig {
  Experiment experiment = Experiment::Rollout;

  ModelSpec model;                        // LegT, N = 65, theta = 10, dt = 1e-3
  std::vector<std::size_t> n_list;        // sweep-n; empty means 1, 6, ..., 96
  SignalSpec signal;                      // White, gamma = 1
  std::size_t steps = 10000;              // T
  std::optional<std::size_t> t_start;     // default T / 2
  std::size_t n_functions = 100;
  std::uint64_t seed = 0;
  std::size_t window = 100;               // context-curve moving average

  // bound-slope
  int smoothness = 4;
  std::vector<std::size_t> pairs_list = {8, 16, 32, 64};
  std::size_t n_modes = 1024;
  double fine_dt = 1e-4;

  // ode
  double mu = 7.0;
  std::optional<double> vdp_u0;  // default -tanh(mu)
  double bernoulli_u0 = 1.0;

  // train / compare-settings
  TrainConfig train;
  std::size_t train_state = 32;
  std::size_t dataset_size = 1024;
  double train_duration = 0.256;
  std::size_t holdout_functions = 30;
  std::vector<Setting> settings = {Setting::I, Setting::II, Setting::III, Setting::IV};

  std::size_t workers = 0;  // 0 means hardware concurrency
  std::string output_dir;   // empty means default_output_dir()
};

void to_json(nlohmann::json& j, const RunConfig& config);
void from_json(const nlohmann::json& j, RunConfig& config);

/// 1, 6, ..., 96.
std::vector<std::size_t> default_n_list();

/// Parses "a:b:step" (inclusive) or "a,b,c".
std::vector<std::size_t> parse_size_list(const std::string& text);

/// $HIPPOICL_OUTPUT_DIR if set, else "hippoicl-out".
std::string default_output_dir();

/// FNV-1a of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const RunConfig& config);

struct RunOutcome {
  std::filesystem::path output_dir;
  std::vector<std::string> files;  // written artifacts, relative to output_dir
  nlohmann::json summary;          // headline numbers, also stored in the manifest
};

/**
 * Runs the experiment, writes its CSV/binary artifacts and manifest.json into
 * the output directory, and returns the list of files. CSV content depends
 * only on the config, never on timing or worker count.
 */
RunOutcome run_experiment(const RunConfig& config);

/// Reads a manifest written by run_experiment and runs the same config,
/// optionally into another directory.
RunOutcome rerun_from_manifest(const std::string& manifest_path, const std::string& output_dir = {});

/// Version string baked in at build time.
std::string version_string();

// Frozen CSV schemas.
inline constexpr const char* kSweepColumns = "basis,N,gamma_or_alpha,mean_mse,std_mse,n_functions,seed0";
inline constexpr const char* kRolloutColumns = "k,u_next,prediction,abs_error";
inline constexpr const char* kRolloutSummaryColumns =
    "basis,N,signal,key_parameter,seed,t_start,mae,mse,copy_mae,copy_mse";
inline constexpr const char* kContextColumns = "k,mean_abs_error";
inline constexpr const char* kSlopeColumns = "k,N,sup_error,tail_bound";
inline constexpr const char* kSlopeSummaryColumns = "k,slope,intercept,integrated_ratio,lemma_violation";
inline constexpr const char* kOdeColumns = "system,basis,N,mse,mae";
inline constexpr const char* kLossColumns = "epoch,mean_loss";
inline constexpr const char* kSettingsColumns =
    "setting,initial_train_loss,final_train_loss,holdout_mse,holdout_std,updates";

}  // namespace hippoicl
