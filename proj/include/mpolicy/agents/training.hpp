#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mpolicy/agents/actor_critic.hpp"
#include "mpolicy/agents/baselines.hpp"
#include "mpolicy/agents/bayes.hpp"
#include "mpolicy/agents/dqn.hpp"
#include "mpolicy/agents/policy.hpp"
#include "mpolicy/agents/tabular.hpp"
#include "mpolicy/discretizer.hpp"
#include "mpolicy/dynamics.hpp"
#include "mpolicy/environment.hpp"

namespace mpolicy {

enum class MethodFamily { q_learning, sarsa, actor_critic, dqn, bayes_thompson, bayes_ucb, pomdp_q, taylor, hold };

struct MethodSpec {
  std::string name;   // registry key, e.g. q_legacy
  std::string label;  // report label, e.g. "Q-learning (legacy)"
  MethodFamily family = MethodFamily::q_learning;
  std::string discretizer;  // empty for non-tabular methods
  std::string grid = "standard";
  int episodes = 0;  // 0: use the default training budget
  bool epsilon_decay = false;
  std::string taylor_variant;  // "standard" | "tuned" for Taylor baselines

  bool learned() const { return family != MethodFamily::taylor && family != MethodFamily::hold; }
};

struct TabularParams {
  double alpha = 0.1;
  double gamma = 0.99;
  double epsilon = 0.1;
  double epsilon_start = 0.9;  // decaying schedule (tuned variant)
  double epsilon_end = 0.01;
};

struct ActorCriticParams {
  double alpha_theta = 1e-3;
  double alpha_w = 1e-2;
  double gamma = 0.99;
  bool reinforce = false;  // full-episode REINFORCE instead of per-step TD actor updates
};

struct BayesParams {
  double prior_mu = 0.0;
  double prior_sigma = 500.0;
  double obs_noise_sigma = 10.0;
  double ucb_c = 2.0;
  double gamma = 0.99;
};

struct Hyperparameters {
  int default_episodes = 5000;
  TabularParams tabular;
  ActorCriticParams actor_critic;
  DqnParams dqn;
  BayesParams bayes;
  TaylorParams taylor = TaylorParams::standard();
  TaylorParams taylor_tuned = TaylorParams::tuned();
  BeliefSettings belief;
  std::map<std::string, Discretizer> discretizers;
  std::map<std::string, std::vector<double>> grids;
  std::vector<MethodSpec> methods;

  /// Registry defaults for all nine learners, the POMDP variant and the three
  /// rule baselines.
  static Hyperparameters defaults();

  const MethodSpec& method(const std::string& name) const;
  std::vector<std::string> method_names() const;
  ActionGrid grid(const std::string& name) const;
  const Discretizer& discretizer(const std::string& name) const;
};

/// Nine learners plus three baselines, in Table 1 style order.
std::vector<std::string> default_benchmark_methods();

struct TrainingContext {
  const TransitionModel& model;
  const StateSeries& history;
  RewardParams reward;
  EpisodeConfig episode;
  const Hyperparameters& hyper;
};

struct TrainingLogRow {
  int episode = 0;
  double discounted_return = 0.0;
  int steps = 0;
  double epsilon = std::numeric_limits<double>::quiet_NaN();
  double posterior_sigma = std::numeric_limits<double>::quiet_NaN();
};

struct TrainedAgent {
  std::unique_ptr<Policy> policy;
  std::vector<TrainingLogRow> log;
  int episodes = 0;
};

/// Runs the method's training loop. Deterministic in `seed`. Rule baselines
/// return immediately with an empty log. `episodes` overrides the method's
/// budget when set.
TrainedAgent train_agent(const std::string& method, const TrainingContext& ctx, std::optional<int> episodes,
                         std::uint64_t seed);

/// Builds a rule baseline (taylor, taylor_tuned, hold) without training.
std::unique_ptr<Policy> make_baseline(const std::string& method, const TrainingContext& ctx);

/// `episode,discounted_return,steps,epsilon,posterior_sigma`
void write_training_log_csv(std::ostream& out, const std::vector<TrainingLogRow>& log);

}  // namespace mpolicy
