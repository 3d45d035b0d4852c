#include <doctest.h>

#include <array>

#include "mpolicy/agents/policy.hpp"
#include "mpolicy/agents/tabular.hpp"
#include "oracles.hpp"

using namespace mpolicy;

TEST_CASE("q_learning_update arithmetic") {
  QTable t(2, 2);
  q_learning_update(t, 0, 1, -1.0, 1, true);
  CHECK(t.q(0, 1) == doctest::Approx(-0.1).epsilon(1e-15));
  CHECK(t.visits(0, 1) == 1);

  QTable z(2, 2);
  q_learning_update(z, 0, 0, 0.0, 1, false);
  CHECK(z.q(0, 0) == 0.0);

  QTable h(2, 2);
  h.q(0, 0) = -10.0;
  h.q(1, 0) = -9.0;
  h.q(1, 1) = -12.0;
  q_learning_update(h, 0, 0, -1.0, 1, false);
  CHECK(h.q(0, 0) == doctest::Approx(-9.991).epsilon(1e-12));
}

TEST_CASE("sarsa_update arithmetic") {
  QTable t(2, 2);
  sarsa_update(t, 0, 0, -2.0, 1, 1, false);
  CHECK(t.q(0, 0) == doctest::Approx(-0.2).epsilon(1e-15));

  QTable a(2, 2), b(2, 2);
  for (QTable* q : {&a, &b}) {
    q->q(0, 0) = -10.0;
    q->q(1, 0) = -9.0;
    q->q(1, 1) = -12.0;
  }
  q_learning_update(a, 0, 0, -1.0, 1, false);
  sarsa_update(b, 0, 0, -1.0, 1, argmax(b.row(1)), false);
  CHECK(a.q(0, 0) == b.q(0, 0));

  QTable d(2, 2);
  d.q(1, 1) = -100.0;
  sarsa_update(d, 0, 0, -1.0, 1, 1, true);
  CHECK(d.q(0, 0) == doctest::Approx(-0.1));
}

TEST_CASE("out-of-range indices throw") {
  QTable t(2, 3);
  CHECK_THROWS_AS(q_learning_update(t, 2, 0, -1.0, 0, false), std::out_of_range);
  CHECK_THROWS_AS(q_learning_update(t, 0, 3, -1.0, 0, false), std::out_of_range);
  CHECK_THROWS_AS(sarsa_update(t, 0, 0, -1.0, 0, 5, false), std::out_of_range);
}

TEST_CASE("argmax and epsilon_greedy") {
  const std::array<double, 3> tie{-1.0, -3.0, -1.0};
  CHECK(argmax(tie) == 0);
  Rng rng(1);
  const std::array<double, 3> v{-3.0, -1.0, -2.0};
  for (int k = 0; k < 100; ++k) CHECK(epsilon_greedy(v, 0.0, rng) == 1);

  std::array<int, 3> counts{};
  const int n = 10000;
  for (int k = 0; k < n; ++k) ++counts[epsilon_greedy(v, 1.0, rng)];
  for (int c : counts) CHECK(std::abs(c / double(n) - 1.0 / 3.0) < 0.02);
}

TEST_CASE("greedy choice is invariant to a per-state constant shift") {
  Rng rng(8);
  for (int k = 0; k < 200; ++k) {
    std::array<double, 5> v{};
    for (auto& x : v) x = -100.0 * uniform01(rng);
    auto shifted = v;
    const double c = -50.0 + 100.0 * uniform01(rng);
    for (auto& x : shifted) x += c;
    CHECK(argmax(v) == argmax(shifted));
  }
}

TEST_CASE("epsilon_schedule") {
  CHECK(epsilon_schedule(0, 10000) == doctest::Approx(0.9).epsilon(1e-9));
  CHECK(epsilon_schedule(10000, 10000) <= 0.016);
  double prev = 1.0;
  for (int k = 0; k <= 10000; k += 50) {
    const double e = epsilon_schedule(k, 10000);
    CHECK(e <= prev);
    prev = e;
  }
}

TEST_CASE("Q-learning and SARSA match value iteration on a toy MDP") {
  const oracles::ToyMdp mdp;
  const auto oracle = mdp.value_iteration_policy();
  CHECK(oracle == std::array<std::size_t, 2>{1, 1});
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto q = oracles::learn_toy<false>(mdp, seed);
    const auto sarsa = oracles::learn_toy<true>(mdp, seed);
    CHECK(q.greedy == oracle);
    CHECK(sarsa.greedy == oracle);
    CHECK(q.max_q <= 1e-9);
    CHECK(sarsa.max_q <= 1e-9);
  }
}

TEST_CASE("TabularQAgent acts greedily on the encoded state") {
  TabularQAgent agent("q_coarse", Discretizer::named("coarse"), ActionGrid::standard());
  const MacroState s{3.0, 5.0, 0.0, 4.0};
  CHECK(agent.act(s) == 0);
  const auto idx = agent.discretizer().encode(s);
  agent.table().q(idx, 0) = -5.0;
  agent.table().q(idx, 1) = -1.0;
  agent.table().q(idx, 2) = -3.0;
  CHECK(agent.act(s) == 1);
  CHECK(agent.action_values(s) == std::vector<double>{-5.0, -1.0, -3.0});
}
