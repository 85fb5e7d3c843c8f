#include "hippoicl/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include "hippoicl/model_io.hpp"
#include "hippoicl/parallel.hpp"

#ifndef HIPPOICL_VERSION
#define HIPPOICL_VERSION "unknown"
#endif

namespace hippoicl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::pair<Experiment, const char*> kExperimentNames[] = {
    {Experiment::Construct, "construct"},       {Experiment::Rollout, "rollout"},
    {Experiment::SweepN, "sweep-n"},            {Experiment::ContextCurve, "context-curve"},
    {Experiment::BoundSlope, "bound-slope"},    {Experiment::Ode, "ode"},
    {Experiment::Train, "train"},               {Experiment::CompareSettings, "compare-settings"},
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvFile {
 public:
  CsvFile(const fs::path& dir, const std::string& name, const char* columns, RunOutcome& outcome)
      : out_(dir / name) {
    if (!out_) throw Error("cannot write " + (dir / name).string());
    out_ << columns << '\n';
    outcome.files.push_back(name);
  }

  template <typename... Fields>
  void row(const Fields&... fields) {
    bool first = true;
    ((out_ << (first ? "" : ",") << field(fields), first = false), ...);
    out_ << '\n';
  }

 private:
  static std::string field(double v) { return num(v); }
  static std::string field(std::size_t v) { return std::to_string(v); }
  static std::string field(int v) { return std::to_string(v); }
  static std::string field(const std::string& v) { return v; }
  static std::string field(const char* v) { return v; }

  std::ofstream out_;
};

std::string scheme_name(OutputDiscretization s) {
  return s == OutputDiscretization::Single ? "single" : "double";
}

OutputDiscretization parse_scheme(const std::string& s) {
  if (s == "single") return OutputDiscretization::Single;
  if (s == "double") return OutputDiscretization::Double;
  throw Error("unknown output discretization '" + s + "'");
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional(const json& j, const char* key, std::optional<double> fallback) {
  if (!j.contains(key)) return fallback;
  if (j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

/// Signal spec with the time axis taken from the run config.
SignalSpec signal_for(const RunConfig& c) {
  SignalSpec s = c.signal;
  s.dt = c.model.dt;
  s.duration = static_cast<double>(c.steps) * c.model.dt;
  return s;
}

std::string basis_label(const ModelSpec& m) {
  std::ostringstream out;
  out << to_string(m.kind) << ":N=" << m.n_state;
  if (m.kind == ModelKind::LegT) out << ":theta=" << num(m.theta);
  out << ":dt=" << num(m.dt) << ":" << scheme_name(m.scheme);
  return out.str();
}

DiscreteSSM require_fixed(Model model) {
  auto* fixed = std::get_if<DiscreteSSM>(&model);
  if (fixed == nullptr) throw Error("this experiment needs a time-invariant basis (not legs)");
  return std::move(*fixed);
}

void run_construct(const RunConfig& c, const fs::path& dir, RunOutcome& out) {
  const DiscreteSSM model = require_fixed(build_model(c.model));
  ModelArtifact artifact{model, basis_label(c.model), "constructed", ""};
  save_model(artifact, (dir / "model.bin").string());
  out.files.push_back("model.bin");
  out.summary = {{"n_state", model.n_state()},
                 {"spectral_radius", spectral_radius(model.a_bar)},
                 {"d_bar", model.d_bar}};
}

void run_rollout(const RunConfig& c, const fs::path& dir, RunOutcome& out) {
  const SignalSpec spec = signal_for(c);
  const Trajectory traj = make_signal(spec, c.seed);
  const Model model = build_model(c.model);
  const std::vector<double> predictions = predict(model, traj);
  const EvalReport report = rollout(model, traj, c.t_start);
  const EvalReport copy = copying_baseline(traj, c.t_start);

  CsvFile steps(dir, "rollout.csv", kRolloutColumns, out);
  for (std::size_t k = 0; k < predictions.size(); ++k) {
    steps.row(k, traj.samples[k + 1], predictions[k], report.abs_errors[k]);
  }
  CsvFile summary(dir, "rollout_summary.csv", kRolloutSummaryColumns, out);
  summary.row(to_string(c.model.kind), c.model.n_state, to_string(spec.family),
              spec.key_parameter(), std::to_string(c.seed), report.t_start, report.mae, report.mse,
              copy.mae, copy.mse);
  out.summary = {{"mae", report.mae}, {"mse", report.mse}, {"copy_mae", copy.mae},
                 {"copy_mse", copy.mse}, {"t_start", report.t_start}};
}

void run_sweep(const RunConfig& c, const fs::path& dir, RunOutcome& out) {
  const std::vector<std::size_t> n_list = c.n_list.empty() ? default_n_list() : c.n_list;
  const SignalSpec spec = signal_for(c);
  const auto rows = sweep_hidden_size(c.model, n_list, spec, c.n_functions, c.seed, c.workers);
  CsvFile csv(dir, "sweep.csv", kSweepColumns, out);
  json table = json::array();
  for (const auto& r : rows) {
    csv.row(to_string(c.model.kind), r.n_state, spec.key_parameter(), r.mean_mse, r.std_mse,
            r.n_functions, std::to_string(c.seed));
    table.push_back({{"N", r.n_state}, {"mean_mse", r.mean_mse}});
  }
  out.summary = {{"rows", table}};
}

void run_context(const RunConfig& c, const fs::path& dir, RunOutcome& out) {
  const SignalSpec spec = signal_for(c);
  std::vector<Trajectory> trajs(c.n_functions);
  parallel_for(c.n_functions, c.workers, [&](std::size_t i) { trajs[i] = make_signal(spec, c.seed + i); });
  const auto curve = error_vs_context(build_model(c.model), trajs, c.window, c.workers);
  CsvFile csv(dir, "context_curve.csv", kContextColumns, out);
  double first = 0.0, second = 0.0;
  const std::size_t half = curve.size() / 2;
  for (const auto& p : curve) {
    csv.row(p.k, p.mean_abs_error);
    (p.k < half ? first : second) += p.mean_abs_error;
  }
  out.summary = {{"mean_first_half", first / static_cast<double>(half)},
                 {"mean_second_half", second / static_cast<double>(curve.size() - half)},
                 {"settling_index_2x", settling_index(curve, 2.0)}};
}

void run_bound_slope(const RunConfig& c, const fs::path& dir, RunOutcome& out) {
  SlopeOptions options;
  options.n_modes = c.n_modes;
  options.fine_dt = c.fine_dt;
  const SlopeReport r = bound_slope(c.smoothness, c.pairs_list, options);
  CsvFile csv(dir, "bound_slope.csv", kSlopeColumns, out);
  for (std::size_t i = 0; i < r.n_pairs.size(); ++i) {
    csv.row(r.k, r.n_pairs[i], r.sup_errors[i], r.tail_bounds[i]);
  }
  CsvFile summary(dir, "bound_slope_summary.csv", kSlopeSummaryColumns, out);
  summary.row(r.k, r.slope, r.intercept, r.integrated_ratio, r.lemma_violation);
  out.summary = {{"slope", r.slope},
                 {"integrated_ratio", r.integrated_ratio},
                 {"lemma_violation", r.lemma_violation}};
}

void run_ode(const RunConfig& c, const fs::path& dir, RunOutcome& out) {
  const double duration = static_cast<double>(c.steps) * c.model.dt;
  const std::vector<std::pair<std::string, Trajectory>> systems = {
      {"van_der_pol", van_der_pol(duration, c.model.dt, c.mu, c.vdp_u0.value_or(-std::tanh(c.mu)))},
      {"bernoulli", bernoulli_ode(duration, c.model.dt, c.bernoulli_u0)},
  };
  CsvFile csv(dir, "ode.csv", kOdeColumns, out);
  json results = json::object();
  for (ModelKind kind : {ModelKind::LegT, ModelKind::FouT}) {
    ModelSpec spec = c.model;
    spec.kind = kind;
    const Model model = build_model(spec);
    for (const auto& [name, traj] : systems) {
      const EvalReport r = rollout(model, traj, c.t_start);
      csv.row(name, to_string(kind), spec.n_state, r.mse, r.mae);
      results[name + "/" + to_string(kind)] = r.mse;
    }
  }
  out.summary = results;
}

std::vector<Trajectory> training_set(const RunConfig& c) {
  MixedDatasetOptions opts;
  opts.duration = c.train_duration;
  opts.dt = c.model.dt;
  return mixed_dataset(c.seed, c.dataset_size, opts);
}

std::vector<Trajectory> holdout_set(const RunConfig& c) {
  MixedDatasetOptions opts;
  opts.duration = static_cast<double>(c.steps) * c.model.dt;
  opts.dt = c.model.dt;
  return mixed_dataset(mix_seed(c.seed, 0x401d07), c.holdout_functions, opts);
}

std::pair<double, double> holdout_mse(const DiscreteSSM& model, const std::vector<Trajectory>& set,
                                      const RunConfig& c) {
  std::vector<double> mse(set.size());
  parallel_for(set.size(), c.workers, [&](std::size_t i) { mse[i] = rollout(model, set[i], c.t_start).mse; });
  const double mean = std::accumulate(mse.begin(), mse.end(), 0.0) / static_cast<double>(mse.size());
  double var = 0.0;
  for (double v : mse) var += (v - mean) * (v - mean);
  return {mean, std::sqrt(var / static_cast<double>(mse.size()))};
}

DiscreteSSM training_init(const RunConfig& c) {
  ModelSpec spec = c.model;
  spec.n_state = c.train_state;
  return require_fixed(build_model(spec));
}

void write_loss_curve(const fs::path& dir, const std::string& name, const TrainResult& r,
                      RunOutcome& out) {
  CsvFile csv(dir, name, kLossColumns, out);
  for (std::size_t e = 0; e < r.loss_curve.size(); ++e) csv.row(e, r.loss_curve[e]);
}

void run_train(const RunConfig& c, const fs::path& dir, RunOutcome& out) {
  TrainConfig tc = c.train;
  tc.workers = c.workers;
  const TrainResult r = train(tc, training_set(c), training_init(c));
  write_loss_curve(dir, "loss_curve.csv", r, out);
  ModelArtifact artifact{r.model, basis_label(c.model), "trained", config_hash(c)};
  save_model(artifact, (dir / "model.bin").string());
  out.files.push_back("model.bin");
  const auto [mean, sd] = holdout_mse(r.model, holdout_set(c), c);
  out.summary = {{"setting", to_string(tc.setting)},
                 {"initial_train_loss", r.initial_loss},
                 {"final_train_loss", r.final_loss},
                 {"holdout_mse", mean},
                 {"holdout_std", sd}};
}

void run_compare(const RunConfig& c, const fs::path& dir, RunOutcome& out) {
  const auto train_set = training_set(c);
  const auto holdout = holdout_set(c);
  const DiscreteSSM init = training_init(c);
  std::vector<std::tuple<Setting, TrainResult, double, double>> results;
  for (Setting s : c.settings) {
    TrainConfig tc = c.train;
    tc.setting = s;
    tc.workers = c.workers;
    TrainResult r = train(tc, train_set, init);
    const auto [mean, sd] = holdout_mse(r.model, holdout, c);
    write_loss_curve(dir, "loss_" + to_string(s) + ".csv", r, out);
    results.emplace_back(s, std::move(r), mean, sd);
  }
  CsvFile csv(dir, "settings.csv", kSettingsColumns, out);
  json summary = json::object();
  for (const auto& [s, r, mean, sd] : results) {
    csv.row(to_string(s), r.initial_loss, r.final_loss, mean, sd, r.updates);
    summary[to_string(s)] = {{"holdout_mse", mean}, {"final_train_loss", r.final_loss}};
  }
  out.summary = summary;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string to_string(Experiment experiment) {
  for (const auto& [e, name] : kExperimentNames) {
    if (e == experiment) return name;
  }
  throw Error("unknown experiment");
}

Experiment parse_experiment(std::string_view name) {
  for (const auto& [e, n] : kExperimentNames) {
    if (name == n) return e;
  }
  throw Error("unknown experiment '" + std::string(name) + "'");
}

void to_json(json& j, const RunConfig& c) {
  const SignalSpec& s = c.signal;
  const TrainConfig& t = c.train;
  json settings = json::array();
  for (Setting st : c.settings) settings.push_back(to_string(st));
  j = json{
      {"experiment", to_string(c.experiment)},
      {"model",
       {{"kind", to_string(c.model.kind)},
        {"n_state", c.model.n_state},
        {"theta", c.model.theta},
        {"dt", c.model.dt},
        {"scheme", scheme_name(c.model.scheme)}}},
      {"n_list", c.n_list},
      {"signal",
       {{"family", to_string(s.family)},
        {"gamma", s.gamma},
        {"rms", s.rms},
        {"period", s.period},
        {"alpha", s.alpha},
        {"mu", s.mu},
        {"u0", optional_number(s.u0)},
        {"max_degree", s.max_degree},
        {"n_terms", s.n_terms},
        {"f_lo", s.f_lo},
        {"f_hi", s.f_hi},
        {"slope", s.slope},
        {"intercept", s.intercept},
        {"k", s.k},
        {"n_modes", s.n_modes}}},
      {"steps", c.steps},
      {"t_start", c.t_start ? json(*c.t_start) : json(nullptr)},
      {"n_functions", c.n_functions},
      {"seed", c.seed},
      {"window", c.window},
      {"smoothness", c.smoothness},
      {"pairs_list", c.pairs_list},
      {"n_modes", c.n_modes},
      {"fine_dt", c.fine_dt},
      {"mu", c.mu},
      {"vdp_u0", optional_number(c.vdp_u0)},
      {"bernoulli_u0", c.bernoulli_u0},
      {"train",
       {{"setting", to_string(t.setting)},
        {"batch_size", t.batch_size},
        {"epochs", t.epochs},
        {"learning_rate", t.learning_rate},
        {"schedule", to_string(t.schedule)},
        {"beta1", t.beta1},
        {"beta2", t.beta2},
        {"epsilon", t.epsilon},
        {"clip_norm", t.clip_norm},
        {"burn_in", t.burn_in},
        {"divergence_loss", t.divergence_loss},
        {"seed", t.seed}}},
      {"train_state", c.train_state},
      {"dataset_size", c.dataset_size},
      {"train_duration", c.train_duration},
      {"holdout_functions", c.holdout_functions},
      {"settings", settings},
      {"workers", c.workers},
      {"output_dir", c.output_dir},
  };
}

void from_json(const json& j, RunConfig& c) {
  c = RunConfig{};
  if (j.contains("experiment")) c.experiment = parse_experiment(j.at("experiment").get<std::string>());
  if (j.contains("model")) {
    const json& m = j.at("model");
    c.model.kind = parse_model_kind(m.value("kind", to_string(c.model.kind)));
    c.model.n_state = m.value("n_state", c.model.n_state);
    c.model.theta = m.value("theta", c.model.theta);
    c.model.dt = m.value("dt", c.model.dt);
    c.model.scheme = parse_scheme(m.value("scheme", scheme_name(c.model.scheme)));
  }
  c.n_list = j.value("n_list", c.n_list);
  if (j.contains("signal")) {
    const json& s = j.at("signal");
    SignalSpec& d = c.signal;
    d.family = parse_signal_family(s.value("family", to_string(d.family)));
    d.gamma = s.value("gamma", d.gamma);
    d.rms = s.value("rms", d.rms);
    d.period = s.value("period", d.period);
    d.alpha = s.value("alpha", d.alpha);
    d.mu = s.value("mu", d.mu);
    d.u0 = read_optional(s, "u0", d.u0);
    d.max_degree = s.value("max_degree", d.max_degree);
    d.n_terms = s.value("n_terms", d.n_terms);
    d.f_lo = s.value("f_lo", d.f_lo);
    d.f_hi = s.value("f_hi", d.f_hi);
    d.slope = s.value("slope", d.slope);
    d.intercept = s.value("intercept", d.intercept);
    d.k = s.value("k", d.k);
    d.n_modes = s.value("n_modes", d.n_modes);
  }
  c.steps = j.value("steps", c.steps);
  if (j.contains("t_start") && !j.at("t_start").is_null()) c.t_start = j.at("t_start").get<std::size_t>();
  c.n_functions = j.value("n_functions", c.n_functions);
  c.seed = j.value("seed", c.seed);
  c.window = j.value("window", c.window);
  c.smoothness = j.value("smoothness", c.smoothness);
  c.pairs_list = j.value("pairs_list", c.pairs_list);
  c.n_modes = j.value("n_modes", c.n_modes);
  c.fine_dt = j.value("fine_dt", c.fine_dt);
  c.mu = j.value("mu", c.mu);
  c.vdp_u0 = read_optional(j, "vdp_u0", c.vdp_u0);
  c.bernoulli_u0 = j.value("bernoulli_u0", c.bernoulli_u0);
  if (j.contains("train")) {
    const json& t = j.at("train");
    TrainConfig& d = c.train;
    d.setting = parse_setting(t.value("setting", to_string(d.setting)));
    d.batch_size = t.value("batch_size", d.batch_size);
    d.epochs = t.value("epochs", d.epochs);
    d.learning_rate = t.value("learning_rate", d.learning_rate);
    d.schedule = parse_schedule(t.value("schedule", to_string(d.schedule)));
    d.beta1 = t.value("beta1", d.beta1);
    d.beta2 = t.value("beta2", d.beta2);
    d.epsilon = t.value("epsilon", d.epsilon);
    d.clip_norm = t.value("clip_norm", d.clip_norm);
    d.burn_in = t.value("burn_in", d.burn_in);
    d.divergence_loss = t.value("divergence_loss", d.divergence_loss);
    d.seed = t.value("seed", d.seed);
  }
  c.train_state = j.value("train_state", c.train_state);
  c.dataset_size = j.value("dataset_size", c.dataset_size);
  c.train_duration = j.value("train_duration", c.train_duration);
  c.holdout_functions = j.value("holdout_functions", c.holdout_functions);
  if (j.contains("settings")) {
    c.settings.clear();
    for (const auto& s : j.at("settings")) c.settings.push_back(parse_setting(s.get<std::string>()));
  }
  c.workers = j.value("workers", c.workers);
  c.output_dir = j.value("output_dir", c.output_dir);
}

std::vector<std::size_t> default_n_list() {
  std::vector<std::size_t> out;
  for (std::size_t n = 1; n <= 96; n += 5) out.push_back(n);
  return out;
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
  auto to_size = [&](const std::string& tok) -> std::size_t {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size() || tok.empty() || v < 0) throw Error("bad integer '" + tok + "' in '" + text + "'");
    return static_cast<std::size_t>(v);
  };
  std::vector<std::string> parts;
  const char sep = text.find(':') != std::string::npos ? ':' : ',';
  std::stringstream ss(text);
  for (std::string tok; std::getline(ss, tok, sep);) parts.push_back(tok);
  std::vector<std::size_t> out;
  if (sep == ':') {
    if (parts.size() != 3) throw Error("range '" + text + "' must be start:stop:step");
    const std::size_t lo = to_size(parts[0]), hi = to_size(parts[1]), step = to_size(parts[2]);
    if (step == 0 || lo > hi) throw Error("empty range '" + text + "'");
    for (std::size_t v = lo; v <= hi; v += step) out.push_back(v);
  } else {
    for (const auto& p : parts) out.push_back(to_size(p));
  }
  if (out.empty()) throw Error("empty list '" + text + "'");
  return out;
}

std::string default_output_dir() {
  const char* env = std::getenv("HIPPOICL_OUTPUT_DIR");
  return (env != nullptr && *env != '\0') ? env : "hippoicl-out";
}

std::string config_hash(const RunConfig& config) {
  json j = config;
  // Where results go and how many threads compute them do not change them.
  j.erase("output_dir");
  j.erase("workers");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

std::string version_string() { return HIPPOICL_VERSION; }

RunOutcome run_experiment(const RunConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  RunOutcome out;
  out.output_dir = config.output_dir.empty() ? default_output_dir() : config.output_dir;
  fs::create_directories(out.output_dir);
  const fs::path& dir = out.output_dir;

  switch (config.experiment) {
    case Experiment::Construct: run_construct(config, dir, out); break;
    case Experiment::Rollout: run_rollout(config, dir, out); break;
    case Experiment::SweepN: run_sweep(config, dir, out); break;
    case Experiment::ContextCurve: run_context(config, dir, out); break;
    case Experiment::BoundSlope: run_bound_slope(config, dir, out); break;
    case Experiment::Ode: run_ode(config, dir, out); break;
    case Experiment::Train: run_train(config, dir, out); break;
    case Experiment::CompareSettings: run_compare(config, dir, out); break;
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  json manifest = {
      {"tool", "hippoicl"},
      {"version", version_string()},
      {"experiment", to_string(config.experiment)},
      {"config", config},
      {"config_hash", config_hash(config)},
      {"seeds", {{"seed", config.seed}, {"train_seed", config.train.seed}}},
      {"files", out.files},
      {"summary", out.summary},
      {"wall_time_seconds", wall},
  };
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
  return out;
}

RunOutcome rerun_from_manifest(const std::string& manifest_path, const std::string& output_dir) {
  std::ifstream in(manifest_path);
  if (!in) throw Error("cannot open manifest " + manifest_path);
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(std::string("malformed manifest: ") + e.what());
  }
  if (!manifest.contains("config")) throw Error("manifest has no config section");
  RunConfig config = manifest.at("config").get<RunConfig>();
  if (!output_dir.empty()) config.output_dir = output_dir;
  return run_experiment(config);
}

}  // namespace hippoicl
