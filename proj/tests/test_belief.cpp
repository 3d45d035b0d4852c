#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "mpolicy/belief.hpp"
#include "mpolicy/errors.hpp"

using namespace mpolicy;

namespace {

using oracles::gaussian3;
using oracles::gaussian_history;

double weight_sum(const ParticleSet& b) {
  double s = 0.0;
  for (double w : b.weights) s += w;
  return s;
}

}  // namespace

TEST_CASE("pf_init draws historical rows with uniform weights") {
  const auto model = fixtures::stable_model();
  const auto history = fixtures::simulated_history(model, 50, 4);
  Rng rng(1);
  const auto b = pf_init(history, rng);
  CHECK(b.size() == 1000);
  for (double w : b.weights) CHECK(w == 1.0 / 1000.0);
  for (const auto& p : b.particles) {
    const bool found = std::any_of(history.states.begin(), history.states.end(),
                                   [&](const MacroState& s) { return s.macro() == p; });
    CHECK(found);
  }
  CHECK(effective_sample_size(b) == 1000.0);

  Rng again(1);
  CHECK(pf_init(history, again).particles == b.particles);

  const auto single = fixtures::history_of({{1.0, 2.0, 3.0, 4.0}});
  for (const auto& p : pf_init(single, rng, 25).particles) CHECK(p == Eigen::Vector3d(1.0, 2.0, 3.0));
  CHECK_THROWS_AS(pf_init(StateSeries{}, rng), InsufficientDataError);
}

TEST_CASE("belief_mean examples") {
  ParticleSet b;
  b.known_rate = 2.5;
  b.particles = {{1.0, -2.0, 3.0}, {-1.0, 2.0, -3.0}};
  b.weights = {0.5, 0.5};
  const auto m = belief_mean(b);
  CHECK(m.macro().isZero(0.0));
  CHECK(m.rate == 2.5);

  b.weights = {1.0, 0.0};
  CHECK(belief_mean(b).macro() == Eigen::Vector3d(1.0, -2.0, 3.0));

  b.particles = {{0.0, 0.0, 0.0}, {3.0, 6.0, 9.0}, {6.0, 0.0, -3.0}};
  b.weights = {0.5, 0.25, 0.25};
  CHECK(belief_mean(b).macro().isApprox(Eigen::Vector3d(2.25, 1.5, 1.5), 1e-15));
}

TEST_CASE("huge observation noise leaves weights unchanged") {
  const auto history = gaussian_history({3.0, 5.0, 0.0}, 1.0, 200, 2);
  Rng rng(3);
  auto b = pf_init(history, rng, 100);
  b.weights[0] = 0.3;
  for (std::size_t k = 1; k < 100; ++k) b.weights[k] = 0.7 / 99.0;
  const auto before = b.weights;
  const auto ev = pf_update(b, {3.0, 5.0, 0.0}, 1e12, rng, 0.0);
  CHECK_FALSE(ev.resampled);
  for (std::size_t k = 0; k < 100; ++k) CHECK(b.weights[k] == doctest::Approx(before[k]).epsilon(1e-12));
}

TEST_CASE("deterministic dynamics with identical particles") {
  Eigen::Matrix3d A;
  A << 0.5, 0.1, 0.0, 0.0, 0.9, 0.2, -0.1, 0.0, 0.7;
  const auto model = TransitionModel::make(A, Eigen::Vector3d(-0.1, 0.05, -0.2), Eigen::Vector3d(1.0, 0.5, 0.0),
                                           Eigen::Matrix3d::Zero(), true);
  const auto single = fixtures::history_of({{2.0, 5.0, -1.0, 3.0}});
  Rng rng(9);
  auto b = pf_init(single, rng, 1000);
  const Eigen::Vector3d expected = model.mean_next({2.0, 5.0, -1.0}, 3.5);
  pf_step(b, 3.5, {40.0, -10.0, 7.0}, model, 0.15, rng);
  CHECK((belief_mean(b).macro() - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(belief_mean(b).rate == 3.5);
}

TEST_CASE("weights stay normalized and ESS stays in range") {
  const auto model = fixtures::stable_model(0.3);
  const auto history = fixtures::simulated_history(model, 120, 5);
  Rng rng(6);
  Rng truth_rng(7);
  auto b = pf_init(history, rng);
  Eigen::Vector3d x = history.states[10].macro();
  int resamples = 0;
  for (int t = 0; t < 60; ++t) {
    x = step(model, x, 4.0, truth_rng);
    const auto ev = pf_step(b, 4.0, x + 0.15 * gaussian3(truth_rng), model, 0.15, rng);
    CHECK(std::abs(weight_sum(b) - 1.0) <= 1e-12);
    CHECK(ev.ess > 0.0);
    CHECK(ev.ess <= 1000.0 + 1e-9);
    CHECK(b.size() == 1000);
    if (ev.resampled) {
      ++resamples;
      CHECK(ev.ess < 500.0);
      CHECK(effective_sample_size(b) == 1000.0);
    } else {
      CHECK(ev.ess >= 500.0);
    }
  }
  CHECK(resamples > 0);
}

TEST_CASE("systematic resampling reproduces weights in expectation") {
  ParticleSet b;
  b.particles = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}};
  b.weights = {0.1, 0.2, 0.3, 0.4};
  std::array<int, 4> counts{};
  Rng rng(8);
  for (int rep = 0; rep < 2000; ++rep) {
    auto copy = b;
    systematic_resample(copy, rng);
    CHECK(copy.size() == 4);
    for (const auto& p : copy.particles) ++counts[static_cast<std::size_t>(p(0))];
  }
  for (std::size_t k = 0; k < 4; ++k) CHECK(counts[k] / 8000.0 == doctest::Approx(b.weights[k]).epsilon(0.05));
}

TEST_CASE("underflow resets to uniform weights") {
  const auto history = gaussian_history({3.0, 5.0, 0.0}, 0.5, 100, 1);
  Rng rng(2);
  auto b = pf_init(history, rng, 200);
  const auto ev = pf_update(b, {1e4, -1e4, 1e4}, 0.15, rng);
  CHECK(ev.underflow);
  CHECK(std::abs(weight_sum(b) - 1.0) <= 1e-12);
  CHECK(effective_sample_size(b) == 200.0);
}

TEST_CASE("belief converges to the hidden state without process noise") {
  const auto model = TransitionModel::make(0.9 * Eigen::Matrix3d::Identity(), Eigen::Vector3d(-0.05, 0.03, -0.1),
                                           Eigen::Vector3d(0.5, 0.55, 0.1), Eigen::Matrix3d::Zero(), true);
  const auto history = gaussian_history({3.0, 5.5, 0.0}, 1.5, 400, 31);
  Rng truth_rng(32);
  Eigen::Vector3d x(4.2, 6.3, -1.4);
  BeliefTracker tracker(model, history, BeliefSettings{}, 33);
  tracker.reset(MacroState::from(x + 0.15 * gaussian3(truth_rng), 3.0));
  for (int t = 1; t <= 30; ++t) {
    x = model.mean_next(x, 3.0);
    tracker.update(3.0, MacroState::from(x + 0.15 * gaussian3(truth_rng), 3.0));
  }
  CHECK((tracker.mean().macro() - x).cwiseAbs().maxCoeff() < 0.05);
  CHECK(tracker.underflow_events() == 0);
}

TEST_CASE("particle filter tracks the exact Kalman filter") {
  const auto oracle = oracles::filter_oracle();
  CHECK(oracle.deviation_in_sd.size() == 40);
  CHECK(oracle.min_sd > 0.0);
  for (std::size_t t = 0; t < oracle.deviation_in_sd.size(); ++t) {
    CAPTURE(t);
    CHECK(oracle.deviation_in_sd[t].maxCoeff() <= 3.0);
  }
}

TEST_CASE("tracker is seed deterministic and exports a trace") {
  const auto model = fixtures::stable_model();
  const auto history = fixtures::simulated_history(model, 60, 2);
  auto run = [&](std::uint64_t seed) {
    BeliefTracker t(model, history, BeliefSettings{}, seed);
    t.record_trace(true);
    t.reset(history.states[3]);
    for (int k = 4; k < 10; ++k) t.update(history.states[static_cast<std::size_t>(k)].rate, history.states[static_cast<std::size_t>(k)]);
    std::ostringstream out;
    write_belief_trace_csv(out, t.trace());
    return out.str();
  };
  const auto a = run(5);
  CHECK(a == run(5));
  CHECK(a != run(6));
  CHECK(a.rfind("step,mean_pi,mean_u,mean_y,std_pi,std_u,std_y,ess\n0,", 0) == 0);
  CHECK(std::count(a.begin(), a.end(), '\n') == 8);
}
