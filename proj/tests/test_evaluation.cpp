#include <doctest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "mpolicy/agents/baselines.hpp"
#include "mpolicy/agents/training.hpp"
#include "mpolicy/evaluation.hpp"

using namespace mpolicy;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

using oracles::with_moments;

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("hold at the target fixed point earns zero") {
  const auto model = fixtures::identity_model();
  const auto history = fixtures::history_of({{2.0, 4.5, 0.0, 3.0}});
  EvaluationSetup setup{model, history, ActionGrid::standard(), EpisodeConfig{}, RewardParams{}};
  HoldAgent hold("hold", ActionGrid::standard());
  const auto results = evaluate_policy(hold, setup, 5, 1);
  REQUIRE(results.size() == 5);
  for (const auto& r : results) {
    CHECK(r.discounted_return == 0.0);
    CHECK(r.mean_loss == 0.0);
    CHECK(r.length == 80);
    CHECK_FALSE(r.terminated);
  }
}

TEST_CASE("constant per-step loss discounts to the annuity value") {
  const auto model = fixtures::identity_model();
  const auto history = fixtures::history_of({{3.0, 6.5, 1.0, 3.0}});
  EvaluationSetup setup{model, history, ActionGrid::standard(), EpisodeConfig{}, RewardParams{}};
  HoldAgent hold("hold", ActionGrid::standard());
  const auto r = run_episode(hold, setup, 9);
  const double loss = 1.0 + 0.5 * 4.0;
  CHECK(r.mean_loss == doctest::Approx(loss).epsilon(1e-12));
  CHECK(r.components.inflation == doctest::Approx(1.0));
  CHECK(r.components.unemployment == doctest::Approx(2.0));
  CHECK(r.components.smoothing == 0.0);
  const double annuity = oracles::annuity(0.99, 80);
  CHECK(annuity == doctest::Approx(55.247678623618945).epsilon(1e-12));
  CHECK(std::abs(r.discounted_return + loss * annuity) < 1e-6);

  std::vector<TraceRow> trace;
  run_episode(hold, setup, 9, &trace);
  CHECK(trace.size() == 81);
  CHECK(trace.back().step == 80);
}

TEST_CASE("evaluation does not depend on the thread count") {
  const auto model = fixtures::stable_model();
  const auto history = fixtures::simulated_history(model, 80, 3);
  auto hyper = Hyperparameters::defaults();
  EpisodeConfig episode;
  episode.horizon = 20;
  TrainingContext ctx{model, history, RewardParams{}, episode, hyper};
  for (const char* m : {"q_legacy", "pomdp_q", "taylor"}) {
    CAPTURE(m);
    const auto agent = train_agent(m, ctx, 5, 4);
    EvaluationSetup setup{model, history, agent.policy->grid(), episode, RewardParams{}};
    const auto one = evaluate_policy(*agent.policy, setup, 24, 77, 1);
    const auto four = evaluate_policy(*agent.policy, setup, 24, 77, 4);
    REQUIRE(one.size() == four.size());
    for (std::size_t k = 0; k < one.size(); ++k) {
      CHECK(one[k].episode == static_cast<int>(k));
      CHECK(one[k].seed == mix_seed(77, k));
      CHECK(one[k].discounted_return == four[k].discounted_return);
      CHECK(one[k].mean_loss == four[k].mean_loss);
    }
    CHECK(one[0].discounted_return != one[1].discounted_return);
  }
}

TEST_CASE("grid mismatch is rejected") {
  const auto model = fixtures::identity_model();
  const auto history = fixtures::history_of({{2.0, 4.5, 0.0, 3.0}});
  EvaluationSetup setup{model, history, ActionGrid::standard(), EpisodeConfig{}, RewardParams{}};
  HoldAgent hold("hold", ActionGrid::enhanced());
  CHECK_THROWS_AS(evaluate_policy(hold, setup, 2, 1), std::invalid_argument);
}

TEST_CASE("cohens_d") {
  const std::vector<double> same{1.0, 2.0, 3.0};
  CHECK(cohens_d(same, same) == 0.0);
  const std::vector<double> a{1.0, 2.0, 3.0}, b{0.0, 1.0, 2.0};
  CHECK(cohens_d(a, b) == doctest::Approx(1.0));
  CHECK(cohens_d(b, a) == doctest::Approx(-1.0));

  const auto x = with_moments(-615.13, 309.58, 200, 1);
  const auto y = with_moments(-681.46, 438.20, 200, 2);
  CHECK(mean(x) == doctest::Approx(-615.13).epsilon(1e-12));
  CHECK(stddev(y) == doctest::Approx(438.20).epsilon(1e-12));
  CHECK(std::abs(cohens_d(x, y) - 0.175) <= 0.005);
  CHECK(cohens_d(y, x) == doctest::Approx(-cohens_d(x, y)).epsilon(1e-14));

  std::vector<double> xs = x, ys = y;
  for (auto& v : xs) v = 3.0 * v + 11.0;
  for (auto& v : ys) v = 3.0 * v + 11.0;
  CHECK(cohens_d(xs, ys) == doctest::Approx(cohens_d(x, y)).epsilon(1e-10));

  const std::vector<double> c1{5.0, 5.0}, c2{4.0, 4.0};
  CHECK(cohens_d(c1, c2) == std::numeric_limits<double>::infinity());
  CHECK(cohens_d(c2, c1) == -std::numeric_limits<double>::infinity());
  CHECK(cohens_d(c1, c1) == 0.0);
}

TEST_CASE("welch test") {
  const auto x = with_moments(0.0, 1.0, 50, 3);
  CHECK(welch_test(x, x) == doctest::Approx(1.0).epsilon(1e-9));
  const auto far = with_moments(10.0, 1.0, 50, 4);
  CHECK(welch_test(x, far) < 1e-10);
  const auto y = with_moments(0.3, 2.0, 40, 5);
  const double p = welch_test(x, y);
  CHECK(p > 0.0);
  CHECK(p < 1.0);
  CHECK(welch_test(y, x) == doctest::Approx(p).epsilon(1e-14));
  const std::vector<double> c{1.0, 1.0, 1.0};
  CHECK(welch_test(c, c) == 1.0);
  const std::vector<double> d{2.0, 2.0, 2.0};
  CHECK(welch_test(c, d) == 0.0);
}

TEST_CASE("confidence interval") {
  const std::vector<double> xs{0.0, 0.0, 2.0, 2.0};
  const auto [lo, hi] = confidence_interval(xs);
  CHECK(lo == doctest::Approx(-0.837).epsilon(1e-3));
  CHECK(hi == doctest::Approx(2.837).epsilon(1e-3));
  const std::vector<double> flat{4.0, 4.0, 4.0};
  CHECK(confidence_interval(flat) == std::pair<double, double>{4.0, 4.0});
  const auto sample = with_moments(-7.0, 3.0, 30, 6);
  const auto ci = confidence_interval(sample);
  CHECK(ci.first < -7.0);
  CHECK(ci.second > -7.0);
  CHECK(stddev(std::vector<double>{1.0}) == 0.0);
}

TEST_CASE("compare_all writes the report files") {
  const auto model = fixtures::stable_model();
  const auto history = fixtures::simulated_history(model, 60, 8);
  EpisodeConfig episode;
  episode.horizon = 15;
  EvaluationSetup setup{model, history, ActionGrid::standard(), episode, RewardParams{}};
  HoldAgent hold("hold", ActionGrid::standard());
  TaylorAgent taylor("taylor", ActionGrid::standard(), TaylorParams::standard(), 0.0, 20.0);
  std::vector<MethodResults> both{{"hold", evaluate_policy(hold, setup, 30, 5)},
                                  {"taylor", evaluate_policy(taylor, setup, 30, 5)}};

  const auto dir = fixtures::temp_dir("compare");
  const auto rep = compare_all(both, dir, "{}");
  CHECK(rep.summaries.size() == 2);
  CHECK(rep.summaries[0].mean_return >= rep.summaries[1].mean_return);
  CHECK(rep.comparisons.size() == 1);
  CHECK(first_line(slurp(dir / "summary.csv")) == "method,mean_return,std_return,mean_loss");
  CHECK(first_line(slurp(dir / "pairwise.csv")) == "method_a,method_b,cohens_d,p_value,ci_a_lo,ci_a_hi,ci_b_lo,ci_b_hi");
  CHECK(first_line(slurp(dir / "components.csv")).rfind("method,n_episodes,mean_loss,std_loss,", 0) == 0);
  const auto summary = slurp(dir / "summary.csv");
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 3);

  const auto again = fixtures::temp_dir("compare_again");
  compare_all(both, again, "{}");
  for (const char* f : {"summary.csv", "components.csv", "pairwise.csv", "episodes.csv", "manifest.json"}) {
    CAPTURE(f);
    CHECK(slurp(dir / f) == slurp(again / f));
  }

  std::vector<MethodResults> single{both[0]};
  compare_all(single, dir, "{}");
  CHECK_FALSE(std::filesystem::exists(dir / "pairwise.csv"));
  CHECK(std::filesystem::exists(dir / "summary.csv"));
}

TEST_CASE("summaries use sample statistics") {
  std::vector<EpisodeResult> rs(3);
  rs[0].discounted_return = -1.0;
  rs[1].discounted_return = -2.0;
  rs[2].discounted_return = -6.0;
  rs[2].terminated = true;
  for (auto& r : rs) r.length = 10;
  const auto s = summarize("m", rs);
  CHECK(s.mean_return == doctest::Approx(-3.0));
  CHECK(s.std_return == doctest::Approx(std::sqrt(7.0)));
  CHECK(s.terminations == 1);
  CHECK(s.mean_length == 10.0);
}
