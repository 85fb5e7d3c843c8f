#include <doctest.h>

#include <cmath>
#include <numeric>

#include "hippoicl/predictor.hpp"
#include "hippoicl/signals.hpp"

using namespace hippoicl;
using doctest::Approx;

namespace {

Trajectory constant_trajectory(double value, std::size_t steps, double dt = 1e-3) {
  Trajectory traj;
  traj.samples.assign(steps + 1, value);
  traj.dt = dt;
  return traj;
}

Trajectory iid_noise(std::size_t steps, std::uint64_t seed) {
  Rng rng(seed);
  Trajectory traj;
  traj.samples.resize(steps + 1);
  for (double& u : traj.samples) u = rng.normal();
  return traj;
}

DiscreteSSM copying_model(std::size_t n) {
  const ContinuousSSM ssm(HippoBasis::legt(n, 1.0), dynamics_matrices(HippoBasis::legt(n, 1.0)).a,
                          dynamics_matrices(HippoBasis::legt(n, 1.0)).b,
                          Vector::Zero(static_cast<Eigen::Index>(n)), 0.0);
  return discretize(ssm, 1e-3);
}

double mean_of(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  return std::accumulate(v.begin() + static_cast<std::ptrdiff_t>(lo),
                         v.begin() + static_cast<std::ptrdiff_t>(hi), 0.0) /
         static_cast<double>(hi - lo);
}

}  // namespace

TEST_CASE("step from the zero state") {
  const DiscreteSSM model = std::get<DiscreteSSM>(build_model(ModelSpec{ModelKind::LegT, 9, 1.0, 1e-3}));
  const StepResult r = step(model, PredictorState::zero(9), 0.8);
  const Vector x1 = model.b_bar * 0.8;
  CHECK((r.state.x - x1).cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.prediction == Approx(model.c_bar.dot(x1) + model.d_bar * 0.8).epsilon(1e-15));
  CHECK(r.state.k == 1);
  CHECK(r.state.last_u == 0.8);

  const StepResult r2 = step(model, r.state, -0.1);
  const Vector x2 = model.a_bar * x1 + model.b_bar * -0.1;
  CHECK((r2.state.x - x2).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK_THROWS_AS(step(model, PredictorState::zero(4), 0.0), Error);
}

TEST_CASE("copying model predicts the previous value exactly") {
  const Model model = copying_model(6);
  const Trajectory traj = iid_noise(200, 4);
  const auto pred = predict(model, traj);
  REQUIRE(pred.size() == 200);
  for (std::size_t k = 0; k < pred.size(); ++k) CHECK(pred[k] == traj.samples[k]);
  const EvalReport report = rollout(model, traj);
  const EvalReport copy = copying_baseline(traj);
  CHECK(report.mae == copy.mae);
  CHECK(report.mse == copy.mse);
}

TEST_CASE("FouT-alt with zero pairs is the copying predictor") {
  const Model model = build_model(ModelSpec{ModelKind::FouTAlt, 1, 10.0, 1e-3});
  const Trajectory traj = linear_signal(2.0, 0.0, 1.0, 1e-3);
  const auto pred = predict(model, traj);
  for (std::size_t k = 0; k < pred.size(); ++k) CHECK(pred[k] == traj.samples[k]);
}

TEST_CASE("constant input is predicted after three windows") {
  const Model model = build_model(ModelSpec{ModelKind::LegT, 65, 1.0, 1e-3});
  const Trajectory traj = constant_trajectory(0.6, 3500);
  const auto pred = predict(model, traj);
  for (std::size_t k = 3000; k < pred.size(); ++k) CHECK(std::abs(pred[k] - 0.6) < 1e-4);
}

TEST_CASE("rollout windows") {
  const Model model = build_model(ModelSpec{ModelKind::LegT, 17, 1.0, 1e-3});
  SUBCASE("length-2 trajectory has one error term") {
    Trajectory traj;
    traj.samples = {0.3, 0.5};
    const EvalReport report = rollout(model, traj);
    REQUIRE(report.abs_errors.size() == 1);
    CHECK(report.t_start == 0);
    CHECK(report.mae == report.abs_errors[0]);
    CHECK(report.mse == Approx(report.abs_errors[0] * report.abs_errors[0]));
  }
  SUBCASE("default window is the second half") {
    const Trajectory traj = white_signal(WhiteSignalParams{}, 1);
    const EvalReport report = rollout(model, traj);
    CHECK(report.t_start == 5000);
    CHECK(report.abs_errors.size() == 10000);
    CHECK(std::abs(report.mae - mean_of(report.abs_errors, 5000, 10000)) <= 1e-12);
    CHECK(report.mse >= report.mae * report.mae);
    const EvalReport custom = rollout(model, traj, 9000);
    CHECK(std::abs(custom.mae - mean_of(custom.abs_errors, 9000, 10000)) <= 1e-12);
    CHECK_THROWS_AS(rollout(model, traj, 10000), Error);
  }
  SUBCASE("too short") {
    Trajectory traj;
    traj.samples = {1.0};
    CHECK_THROWS_AS(rollout(model, traj), Error);
  }
}

TEST_CASE("prefix property: errors depend only on the past") {
  const Model model = build_model(ModelSpec{ModelKind::LegT, 33, 10.0, 1e-3});
  const Trajectory full = white_signal(WhiteSignalParams{}, 8);
  Trajectory prefix = full;
  prefix.samples.resize(4001);
  const auto a = rollout(model, full).abs_errors;
  const auto b = rollout(model, prefix).abs_errors;
  REQUIRE(b.size() == 4000);
  for (std::size_t k = 0; k < b.size(); ++k) CHECK(a[k] == b[k]);
}

TEST_CASE("linear signal: LegT N=33 beats copying") {
  const Model model = build_model(ModelSpec{ModelKind::LegT, 33, 10.0, 1e-3});
  const Trajectory traj = linear_signal(2.0, 0.5, 10.0, 1e-3);
  const EvalReport report = rollout(model, traj);
  const EvalReport copy = copying_baseline(traj);
  CHECK(copy.mae == Approx(0.002));
  CHECK(report.mae < copy.mae);
}

TEST_CASE("LegT N=65 White Signal gamma=0.3 lands near the published scale") {
  const Model model = build_model(ModelSpec{});
  SignalSpec signal;
  signal.gamma = 0.3;
  double mse = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) mse += rollout(model, make_signal(signal, seed)).mse;
  mse /= 10.0;
  // Published value 1.2e-11; allow 1.5 orders of magnitude either way.
  CHECK(mse < 1.2e-11 * std::pow(10.0, 1.5));
  CHECK(mse > 1.2e-11 * std::pow(10.0, -1.5));
}

TEST_CASE("LegS predictor runs and beats copying on a smooth signal") {
  const Model model = build_model(ModelSpec{ModelKind::LegS, 17, 10.0, 1e-3});
  REQUIRE(std::holds_alternative<LegsModel>(model));
  CHECK(model_state_size(model) == 17);
  CHECK(model_dt(model) == 1e-3);
  SignalSpec signal;
  signal.gamma = 0.3;
  const Trajectory traj = make_signal(signal, 2);
  const EvalReport report = rollout(model, traj);
  CHECK(std::isfinite(report.mse));
  CHECK(report.mse < copying_baseline(traj).mse);
}

TEST_CASE("model kind names") {
  for (auto kind : {ModelKind::LegT, ModelKind::LegS, ModelKind::FouT, ModelKind::FouTAlt}) {
    CHECK(parse_model_kind(to_string(kind)) == kind);
  }
  CHECK(to_string(ModelKind::FouTAlt) == "fout-alt");
  CHECK_THROWS_AS(parse_model_kind("fourier"), Error);
  // FouT kinds use (N - 1) / 2 pairs, so an even N rounds down.
  CHECK(model_state_size(build_model(ModelSpec{ModelKind::FouT, 4, 10.0, 1e-3})) == 3);
}

TEST_CASE("error_vs_context") {
  SUBCASE("copying model on iid noise is flat") {
    std::vector<Trajectory> set;
    for (std::uint64_t s = 0; s < 50; ++s) set.push_back(iid_noise(2000, s));
    const auto curve = error_vs_context(copying_model(5), set, 100);
    REQUIRE(curve.size() == 2000);
    std::vector<double> values;
    for (const auto& p : curve) values.push_back(p.mean_abs_error);
    const double first = mean_of(values, 100, 1000);
    const double second = mean_of(values, 1000, 2000);
    // E|X - Y| for independent standard normals.
    const double expected = 2.0 / std::sqrt(std::numbers::pi);
    CHECK(first == Approx(expected).epsilon(0.05));
    CHECK(second == Approx(expected).epsilon(0.05));
  }
  SUBCASE("LegT error falls with context") {
    const Model model = build_model(ModelSpec{});
    std::vector<Trajectory> set;
    for (std::uint64_t s = 0; s < 20; ++s) set.push_back(make_signal(SignalSpec{}, s));
    const auto curve = error_vs_context(model, set, 100, 2);
    std::vector<double> values;
    for (const auto& p : curve) values.push_back(p.mean_abs_error);
    CHECK(mean_of(values, 5000, 10000) < mean_of(values, 0, 5000));
  }
  SUBCASE("larger N settles no earlier") {
    std::vector<Trajectory> set;
    for (std::uint64_t s = 0; s < 20; ++s) set.push_back(make_signal(SignalSpec{}, s));
    std::size_t previous = 0;
    for (std::size_t n : {5u, 33u, 65u}) {
      ModelSpec spec;
      spec.n_state = n;
      const std::size_t settle = settling_index(error_vs_context(build_model(spec), set, 100), 2.0);
      CAPTURE(n);
      CHECK(settle >= previous);
      previous = settle;
    }
  }
  SUBCASE("worker count does not change the curve") {
    const Model model = build_model(ModelSpec{ModelKind::LegT, 9, 10.0, 1e-3});
    std::vector<Trajectory> set;
    for (std::uint64_t s = 0; s < 6; ++s) set.push_back(iid_noise(500, s));
    const auto one = error_vs_context(model, set, 50, 1);
    const auto three = error_vs_context(model, set, 50, 3);
    for (std::size_t k = 0; k < one.size(); ++k) CHECK(one[k].mean_abs_error == three[k].mean_abs_error);
  }
  SUBCASE("bad arguments") {
    const Model model = copying_model(3);
    std::vector<Trajectory> set{iid_noise(100, 1), iid_noise(90, 2)};
    CHECK_THROWS_AS(error_vs_context(model, set, 10), Error);
    set.pop_back();
    CHECK_THROWS_AS(error_vs_context(model, set, 0), Error);
    CHECK_THROWS_AS(error_vs_context(model, set, 101), Error);
    CHECK_THROWS_AS(error_vs_context(model, {}, 10), Error);
  }
}

TEST_CASE("settling_index") {
  std::vector<CurvePoint> curve;
  for (std::size_t k = 0; k < 10; ++k) curve.push_back({k, k < 4 ? 10.0 : 1.0});
  CHECK(settling_index(curve, 2.0) == 4);
  curve[7].mean_abs_error = 3.0;
  CHECK(settling_index(curve, 2.0) == 8);
}

TEST_CASE("sweep_hidden_size") {
  SignalSpec signal;
  signal.gamma = 1.0;
  SUBCASE("single N gives one row") {
    const auto rows = sweep_hidden_size(ModelSpec{}, {17}, signal, 3, 0);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].n_state == 17);
    CHECK(rows[0].n_functions == 3);
    double mean = 0.0, sq = 0.0;
    for (std::uint64_t s = 0; s < 3; ++s) {
      const double mse = rollout(build_model(ModelSpec{ModelKind::LegT, 17, 10.0, 1e-3}),
                                 make_signal(signal, s)).mse;
      mean += mse / 3.0;
      sq += mse * mse / 3.0;
    }
    CHECK(rows[0].mean_mse == Approx(mean).epsilon(1e-12));
    CHECK(rows[0].std_mse == Approx(std::sqrt(std::max(0.0, sq - mean * mean))).epsilon(1e-6));
  }
  SUBCASE("larger LegT state helps") {
    const auto rows = sweep_hidden_size(ModelSpec{}, {5, 65}, signal, 5, 0, 2);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].mean_mse < rows[0].mean_mse);
  }
}
