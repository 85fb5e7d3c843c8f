#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hippoicl/byte_io.hpp"
#include "hippoicl/experiments.hpp"
#include "hippoicl/model_io.hpp"

using namespace hippoicl;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("hippoicl_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::size_t count_lines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

/// Hand-assembled model file with an arbitrary header and payload length.
std::string raw_model(std::uint32_t version, const nlohmann::json& header, std::size_t n_doubles) {
  std::ostringstream out;
  out.write("HIPPOICL", 8);
  const std::string text = header.dump();
  for (std::uint32_t v : {version, static_cast<std::uint32_t>(text.size())}) {
    for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  out << text;
  for (std::size_t i = 0; i < n_doubles; ++i) byte_io::put_f64(out, 0.5);
  return out.str();
}

RunConfig small_sweep(const fs::path& dir) {
  RunConfig c;
  c.experiment = Experiment::SweepN;
  c.n_list = parse_size_list("1:96:5");
  c.steps = 500;
  c.signal.duration = 0.5;
  c.signal.period = 10.0;
  c.n_functions = 2;
  c.seed = 3;
  c.workers = 1;
  c.output_dir = dir.string();
  return c;
}

}  // namespace

TEST_CASE("model artifact round trip is bit-exact") {
  ModelArtifact artifact;
  artifact.model = std::get<DiscreteSSM>(build_model(ModelSpec{ModelKind::LegT, 7, 10.0, 1e-3}));
  artifact.basis = "legt:N=7:theta=10";
  artifact.config_hash = "00ff";
  const fs::path path = fs::temp_directory_path() / "hippoicl_test_model.bin";
  save_model(artifact, path.string());
  const ModelArtifact back = load_model(path.string());
  CHECK(back.model.a_bar == artifact.model.a_bar);
  CHECK(back.model.b_bar == artifact.model.b_bar);
  CHECK(back.model.c_bar == artifact.model.c_bar);
  CHECK(back.model.d_bar == artifact.model.d_bar);
  CHECK(back.model.dt == artifact.model.dt);
  CHECK(back.basis == artifact.basis);
  CHECK(back.provenance == "constructed");
  CHECK(back.config_hash == "00ff");
  fs::remove(path);
  CHECK_THROWS_AS(load_model(path.string()), Error);
}

TEST_CASE("model artifact rejects malformed files with FormatError") {
  const nlohmann::json good = {{"n_state", 2}, {"dt", 1e-3}, {"payload_doubles", 9}};
  SUBCASE("well-formed hand-built file loads") {
    std::istringstream in(raw_model(1, good, 9));
    CHECK(read_model(in).model.n_state() == 2);
  }
  SUBCASE("wrong magic") {
    std::string bytes = raw_model(1, good, 9);
    bytes[0] = 'X';
    std::istringstream in(bytes);
    CHECK_THROWS_AS(read_model(in), FormatError);
  }
  SUBCASE("unsupported version") {
    std::istringstream in(raw_model(2, good, 9));
    CHECK_THROWS_AS(read_model(in), FormatError);
  }
  SUBCASE("header N disagrees with payload length") {
    nlohmann::json bad = good;
    bad["n_state"] = 3;
    std::istringstream in(raw_model(1, bad, 9));
    CHECK_THROWS_AS(read_model(in), FormatError);
  }
  SUBCASE("payload shorter than declared") {
    std::istringstream in(raw_model(1, good, 8));
    CHECK_THROWS_AS(read_model(in), FormatError);
  }
  SUBCASE("payload longer than declared") {
    std::istringstream in(raw_model(1, good, 10));
    CHECK_THROWS_AS(read_model(in), FormatError);
  }
  SUBCASE("header is not JSON") {
    std::string bytes = raw_model(1, good, 9);
    bytes[16] = '#';
    std::istringstream in(bytes);
    CHECK_THROWS_AS(read_model(in), FormatError);
  }
}

TEST_CASE("parse_size_list") {
  CHECK(parse_size_list("1:96:5").size() == 20);
  CHECK(parse_size_list("1:96:5").back() == 96);
  CHECK(parse_size_list("1:96:5") == default_n_list());
  CHECK(parse_size_list("8,16,32") == std::vector<std::size_t>{8, 16, 32});
  CHECK(parse_size_list("65") == std::vector<std::size_t>{65});
  CHECK_THROWS_AS(parse_size_list("a,b"), Error);
  CHECK_THROWS_AS(parse_size_list("1:10"), Error);
  CHECK_THROWS_AS(parse_size_list("10:1:1"), Error);
  CHECK_THROWS_AS(parse_size_list("1:10:0"), Error);
  CHECK_THROWS_AS(parse_size_list("-3"), Error);
}

TEST_CASE("RunConfig JSON round trip and hash") {
  RunConfig c;
  c.experiment = Experiment::CompareSettings;
  c.model.kind = ModelKind::FouTAlt;
  c.signal.family = SignalFamily::FilteredNoise;
  c.signal.u0 = 0.25;
  c.t_start = 123;
  c.settings = {Setting::II, Setting::IV};
  c.train.schedule = LearningRateSchedule::Cosine;
  c.seed = 99;
  const nlohmann::json j = c;
  const RunConfig back = j.get<RunConfig>();
  CHECK(nlohmann::json(back) == j);
  CHECK(config_hash(back) == config_hash(c));

  RunConfig moved = c;
  moved.output_dir = "/elsewhere";
  moved.workers = 7;
  CHECK(config_hash(moved) == config_hash(c));
  moved.seed = 100;
  CHECK(config_hash(moved) != config_hash(c));
  CHECK(config_hash(c).size() == 16);
}

TEST_CASE("experiment names round-trip") {
  for (auto e : {Experiment::Construct, Experiment::Rollout, Experiment::SweepN, Experiment::ContextCurve,
                 Experiment::BoundSlope, Experiment::Ode, Experiment::Train, Experiment::CompareSettings}) {
    CHECK(parse_experiment(to_string(e)) == e);
  }
  CHECK_THROWS_AS(parse_experiment("plot"), Error);
}

TEST_CASE("sweep-n over 1:96:5 writes 20 rows with the frozen header") {
  const fs::path dir = scratch("sweep");
  const RunOutcome out = run_experiment(small_sweep(dir));
  const std::string csv = slurp(dir / "sweep.csv");
  CHECK(csv.substr(0, csv.find('\n')) == kSweepColumns);
  CHECK(count_lines(csv) == 21);
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(std::find(out.files.begin(), out.files.end(), "sweep.csv") != out.files.end());
  fs::remove_all(dir);
}

TEST_CASE("identical configs give byte-identical CSVs, whatever the worker count") {
  const fs::path a = scratch("repro_a"), b = scratch("repro_b");
  RunConfig ca = small_sweep(a);
  RunConfig cb = small_sweep(b);
  cb.workers = 3;
  run_experiment(ca);
  run_experiment(cb);
  CHECK(slurp(a / "sweep.csv") == slurp(b / "sweep.csv"));

  ca.experiment = cb.experiment = Experiment::ContextCurve;
  ca.model.n_state = cb.model.n_state = 17;
  ca.window = cb.window = 20;
  run_experiment(ca);
  run_experiment(cb);
  CHECK(slurp(a / "context_curve.csv") == slurp(b / "context_curve.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("a manifest is enough to rerun the experiment") {
  const fs::path first = scratch("manifest_a"), second = scratch("manifest_b");
  RunConfig c;
  c.experiment = Experiment::Rollout;
  c.model.n_state = 9;
  c.signal.family = SignalFamily::Legendre;
  c.signal.duration = 0.5;
  c.steps = 500;
  c.seed = 11;
  c.output_dir = first.string();
  run_experiment(c);

  const nlohmann::json manifest = nlohmann::json::parse(slurp(first / "manifest.json"));
  CHECK(manifest.at("experiment") == "rollout");
  CHECK(manifest.at("config_hash") == config_hash(c));
  CHECK(manifest.at("tool") == "hippoicl");
  CHECK(manifest.contains("wall_time_seconds"));

  const RunOutcome again = rerun_from_manifest((first / "manifest.json").string(), second.string());
  CHECK(again.output_dir == second);
  for (const std::string file : {"rollout.csv", "rollout_summary.csv"}) {
    CAPTURE(file);
    CHECK(slurp(first / file) == slurp(second / file));
  }
  const std::string summary = slurp(first / "rollout_summary.csv");
  CHECK(summary.substr(0, summary.find('\n')) == kRolloutSummaryColumns);
  CHECK_THROWS_AS(rerun_from_manifest((first / "missing.json").string()), Error);
  fs::remove_all(first);
  fs::remove_all(second);
}

TEST_CASE("construct writes a loadable model artifact") {
  const fs::path dir = scratch("construct");
  RunConfig c;
  c.experiment = Experiment::Construct;
  c.model.n_state = 13;
  c.output_dir = dir.string();
  run_experiment(c);
  const ModelArtifact artifact = load_model((dir / "model.bin").string());
  const DiscreteSSM direct = std::get<DiscreteSSM>(build_model(c.model));
  CHECK(artifact.model.a_bar == direct.a_bar);
  CHECK(artifact.model.c_bar == direct.c_bar);
  CHECK(artifact.provenance == "constructed");
  fs::remove_all(dir);
}

TEST_CASE("output directory defaults to the environment variable") {
  const fs::path dir = scratch("envdir");
  ::setenv("HIPPOICL_OUTPUT_DIR", dir.string().c_str(), 1);
  CHECK(default_output_dir() == dir.string());
  RunConfig c = small_sweep(dir);
  c.output_dir.clear();
  c.n_list = {5};
  const RunOutcome out = run_experiment(c);
  CHECK(out.output_dir == dir);
  CHECK(fs::exists(dir / "sweep.csv"));
  ::unsetenv("HIPPOICL_OUTPUT_DIR");
  CHECK(default_output_dir() == "hippoicl-out");
  fs::remove_all(dir);
}
