#include "mpolicy/agents/training.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "mpolicy/belief.hpp"
#include "mpolicy/errors.hpp"
#include "mpolicy/text.hpp"

namespace mpolicy {

namespace {

MethodSpec spec(std::string name, std::string label, MethodFamily family, std::string discretizer = "",
                std::string grid = "standard") {
  MethodSpec s;
  s.name = std::move(name);
  s.label = std::move(label);
  s.family = family;
  s.discretizer = std::move(discretizer);
  s.grid = std::move(grid);
  return s;
}

/// What the agent sees each step: the raw observation, or the particle-filter
/// belief mean for POMDP agents.
class AgentView {
 public:
  AgentView(const TrainingContext& ctx, std::optional<BeliefSettings> belief, std::uint64_t seed) {
    if (belief) tracker_.emplace(ctx.model, ctx.history, *belief, seed);
  }
  MacroState start(const MacroState& obs) { return tracker_ ? tracker_->reset(obs) : obs; }
  MacroState next(double rate_set, const MacroState& obs) { return tracker_ ? tracker_->update(rate_set, obs) : obs; }

 private:
  std::optional<BeliefTracker> tracker_;
};

EpisodeConfig episode_config(const TrainingContext& ctx, const std::optional<BeliefSettings>& belief) {
  EpisodeConfig cfg = ctx.episode;
  cfg.observation_noise_sigma = belief ? belief->observation_sigma : 0.0;
  return cfg;
}

void check_reward(const StepOutcome& out) {
  if (!std::isfinite(out.reward)) throw DivergenceError("non-finite reward");
}

TrainedAgent train_tabular(const MethodSpec& m, const TrainingContext& ctx, int episodes, std::uint64_t seed,
                           int& ep) {
  const auto& p = ctx.hyper.tabular;
  std::optional<BeliefSettings> belief;
  if (m.family == MethodFamily::pomdp_q) belief = ctx.hyper.belief;
  auto agent = std::make_unique<TabularQAgent>(m.name, ctx.hyper.discretizer(m.discretizer), ctx.hyper.grid(m.grid),
                                               belief);
  Environment env(ctx.model, ctx.history, agent->grid(), episode_config(ctx, belief), ctx.reward, mix_seed(seed, 1));
  Rng rng = make_rng(seed, 2);
  AgentView view(ctx, belief, mix_seed(seed, 3));
  const auto& disc = agent->discretizer();
  auto& table = agent->table();
  const bool sarsa = m.family == MethodFamily::sarsa;

  TrainedAgent result;
  for (ep = 0; ep < episodes; ++ep) {
    const double eps = m.epsilon_decay ? epsilon_schedule(ep, episodes, p.epsilon_start, p.epsilon_end) : p.epsilon;
    std::size_t s = disc.encode(view.start(env.reset()));
    std::size_t a = epsilon_greedy(table.row(s), eps, rng);
    double ret = 0.0, discount = 1.0;
    while (!env.done()) {
      const auto out = env.step(a);
      check_reward(out);
      const std::size_t s_next = disc.encode(view.next(out.next_state.rate, env.observation()));
      std::size_t a_next;
      if (sarsa) {
        a_next = epsilon_greedy(table.row(s_next), eps, rng);
        sarsa_update(table, s, a, out.reward, s_next, a_next, out.terminated, p.alpha, p.gamma);
      } else {
        q_learning_update(table, s, a, out.reward, s_next, out.terminated, p.alpha, p.gamma);
        a_next = epsilon_greedy(table.row(s_next), eps, rng);
      }
      ret += discount * out.reward;
      discount *= p.gamma;
      s = s_next;
      a = a_next;
    }
    result.log.push_back({ep, ret, env.steps_taken(), eps, std::numeric_limits<double>::quiet_NaN()});
  }
  result.policy = std::move(agent);
  return result;
}

TrainedAgent train_bayes(const MethodSpec& m, const TrainingContext& ctx, int episodes, std::uint64_t seed,
                           int& ep) {
  const auto& p = ctx.hyper.bayes;
  const auto& disc = ctx.hyper.discretizer(m.discretizer);
  const auto grid = ctx.hyper.grid(m.grid);
  GaussianQPosterior post(disc.total_states(), grid.size(), p.prior_mu, p.prior_sigma * p.prior_sigma,
                          p.obs_noise_sigma * p.obs_noise_sigma);
  auto agent = std::make_unique<BayesQAgent>(
      m.name, disc, grid, m.family == MethodFamily::bayes_thompson ? BayesExploration::thompson : BayesExploration::ucb,
      p.ucb_c, std::move(post));
  Environment env(ctx.model, ctx.history, grid, episode_config(ctx, std::nullopt), ctx.reward, mix_seed(seed, 1));
  Rng rng = make_rng(seed, 2);
  auto& posterior = agent->posterior();

  TrainedAgent result;
  for (ep = 0; ep < episodes; ++ep) {
    std::size_t s = disc.encode(env.reset());
    double ret = 0.0, discount = 1.0;
    while (!env.done()) {
      const std::size_t a = agent->explore(s, rng);
      const auto out = env.step(a);
      check_reward(out);
      const std::size_t s_next = disc.encode(env.observation());
      const double target = out.reward + (out.terminated ? 0.0 : p.gamma * posterior.max_mu(s_next));
      if (!std::isfinite(target)) throw DivergenceError("non-finite Bayesian Q target");
      bayes_q_update(posterior, s, a, target);
      ret += discount * out.reward;
      discount *= p.gamma;
      s = s_next;
    }
    result.log.push_back(
        {ep, ret, env.steps_taken(), std::numeric_limits<double>::quiet_NaN(), posterior.mean_sigma()});
  }
  result.policy = std::move(agent);
  return result;
}

TrainedAgent train_actor_critic(const MethodSpec& m, const TrainingContext& ctx, int episodes, std::uint64_t seed,
                           int& ep) {
  const auto& p = ctx.hyper.actor_critic;
  const auto grid = ctx.hyper.grid(m.grid);
  auto agent = std::make_unique<ActorCriticAgent>(m.name, grid,
                                                  LinearActorCritic(grid.size(), FeatureScaler::fit(ctx.history)));
  auto& ac = agent->model();
  Environment env(ctx.model, ctx.history, grid, episode_config(ctx, std::nullopt), ctx.reward, mix_seed(seed, 1));
  Rng rng = make_rng(seed, 2);

  TrainedAgent result;
  std::vector<EpisodeStep> trajectory;
  for (ep = 0; ep < episodes; ++ep) {
    Eigen::VectorXd phi = ac.features(env.reset());
    double ret = 0.0, discount = 1.0;
    trajectory.clear();
    while (!env.done()) {
      const std::size_t a = sample_action(ac.probabilities(phi), rng);
      const auto out = env.step(a);
      check_reward(out);
      Eigen::VectorXd phi_next = ac.features(env.observation());
      if (p.reinforce) {
        trajectory.push_back({phi, a, out.reward});
      } else {
        actor_critic_step(ac, phi, a, out.reward, phi_next, out.terminated, p.alpha_theta, p.alpha_w, p.gamma);
      }
      ret += discount * out.reward;
      discount *= p.gamma;
      phi = std::move(phi_next);
    }
    if (p.reinforce) reinforce_episode(ac, trajectory, p.alpha_theta, p.alpha_w, p.gamma);
    if (!ac.theta.allFinite() || !ac.w.allFinite()) throw DivergenceError("actor-critic weights are not finite");
    result.log.push_back({ep, ret, env.steps_taken(), std::numeric_limits<double>::quiet_NaN(),
                          std::numeric_limits<double>::quiet_NaN()});
  }
  result.policy = std::move(agent);
  return result;
}

TrainedAgent train_dqn(const MethodSpec& m, const TrainingContext& ctx, int episodes, std::uint64_t seed,
                           int& ep) {
  const auto& p = ctx.hyper.dqn;
  const auto grid = ctx.hyper.grid(m.grid);
  Rng init_rng = make_rng(seed, 4);
  DqnLearner learner(grid.size(), FeatureScaler::fit(ctx.history), p, init_rng);
  Environment env(ctx.model, ctx.history, grid, episode_config(ctx, std::nullopt), ctx.reward, mix_seed(seed, 1));
  Rng rng = make_rng(seed, 2);
  const auto total_steps = static_cast<std::uint64_t>(episodes) * static_cast<std::uint64_t>(ctx.episode.horizon);

  TrainedAgent result;
  for (ep = 0; ep < episodes; ++ep) {
    Eigen::Vector4d obs = learner.encode(env.reset());
    double ret = 0.0, discount = 1.0, eps = 0.0;
    while (!env.done()) {
      eps = linear_epsilon(learner.env_steps(), total_steps, p);
      const Eigen::VectorXd q = learner.q_values(obs);
      const std::size_t a =
          epsilon_greedy(std::span<const double>(q.data(), static_cast<std::size_t>(q.size())), eps, rng);
      const auto out = env.step(a);
      check_reward(out);
      const Eigen::Vector4d next_obs = learner.encode(env.observation());
      learner.remember({obs, a, out.reward, next_obs, out.terminated});
      if (learner.ready()) learner.train_step(rng);
      learner.on_env_step();
      ret += discount * out.reward;
      discount *= p.gamma;
      obs = next_obs;
    }
    result.log.push_back({ep, ret, env.steps_taken(), eps, std::numeric_limits<double>::quiet_NaN()});
  }
  result.policy = std::make_unique<DqnAgent>(m.name, grid, learner.scaler(), learner.online());
  return result;
}

}  // namespace

Hyperparameters Hyperparameters::defaults() {
  Hyperparameters h;
  for (const auto& name : discretizer_schemes()) h.discretizers.emplace(name, Discretizer::named(name));
  for (const auto& [name, grid] : {std::pair{"standard", ActionGrid::standard()}, std::pair{"enhanced", ActionGrid::enhanced()}}) {
    h.grids[name] = std::vector<double>(grid.deltas().begin(), grid.deltas().end());
  }

  h.methods.push_back(spec("q_legacy", "Q-learning (legacy)", MethodFamily::q_learning, "legacy"));
  h.methods.push_back(spec("q_coarse", "Q-learning (coarse)", MethodFamily::q_learning, "coarse"));
  h.methods.push_back(spec("q_reduced", "Q-learning (reduced)", MethodFamily::q_learning, "reduced"));
  auto tuned = spec("q_tuned", "Q-learning Hyperparameter Tuned", MethodFamily::q_learning, "tuned", "enhanced");
  tuned.episodes = 10000;
  tuned.epsilon_decay = true;
  h.methods.push_back(tuned);
  h.methods.push_back(spec("sarsa_coarse", "SARSA (coarse)", MethodFamily::sarsa, "coarse"));
  h.methods.push_back(spec("actor_critic", "Actor-Critic", MethodFamily::actor_critic));
  h.methods.push_back(spec("dqn", "DQN", MethodFamily::dqn));
  h.methods.push_back(spec("bayes_thompson", "Bayesian Q-learning (Thompson)", MethodFamily::bayes_thompson, "legacy"));
  h.methods.push_back(spec("bayes_ucb", "Bayesian Q-learning (UCB)", MethodFamily::bayes_ucb, "legacy"));
  h.methods.push_back(spec("pomdp_q", "POMDP Q-learning (particle filter)", MethodFamily::pomdp_q, "legacy"));
  auto taylor = spec("taylor", "Taylor Rule", MethodFamily::taylor);
  taylor.taylor_variant = "standard";
  h.methods.push_back(taylor);
  auto taylor_tuned = spec("taylor_tuned", "Taylor Hyperparameter Tuned", MethodFamily::taylor);
  taylor_tuned.taylor_variant = "tuned";
  h.methods.push_back(taylor_tuned);
  h.methods.push_back(spec("hold", "Naive Hold", MethodFamily::hold));
  return h;
}

const MethodSpec& Hyperparameters::method(const std::string& name) const {
  for (const auto& m : methods) {
    if (m.name == name) return m;
  }
  std::string valid;
  for (const auto& m : methods) valid += (valid.empty() ? "" : ", ") + m.name;
  throw std::invalid_argument("unknown method '" + name + "'; valid methods: " + valid);
}

std::vector<std::string> Hyperparameters::method_names() const {
  std::vector<std::string> out;
  for (const auto& m : methods) out.push_back(m.name);
  return out;
}

ActionGrid Hyperparameters::grid(const std::string& name) const {
  auto it = grids.find(name);
  if (it == grids.end()) throw std::invalid_argument("unknown action grid '" + name + "'");
  return ActionGrid(it->second);
}

const Discretizer& Hyperparameters::discretizer(const std::string& name) const {
  auto it = discretizers.find(name);
  if (it == discretizers.end()) throw std::invalid_argument("unknown discretizer '" + name + "'");
  return it->second;
}

std::vector<std::string> default_benchmark_methods() {
  return {"q_legacy",       "q_coarse",  "q_reduced", "q_tuned", "sarsa_coarse", "actor_critic",
          "dqn",            "bayes_thompson", "bayes_ucb", "taylor",  "taylor_tuned", "hold"};
}

std::unique_ptr<Policy> make_baseline(const std::string& method, const TrainingContext& ctx) {
  const auto& m = ctx.hyper.method(method);
  const auto grid = ctx.hyper.grid(m.grid);
  if (m.family == MethodFamily::hold) return std::make_unique<HoldAgent>(m.name, grid);
  if (m.family == MethodFamily::taylor) {
    TaylorParams params = m.taylor_variant == "tuned" ? ctx.hyper.taylor_tuned : ctx.hyper.taylor;
    return std::make_unique<TaylorAgent>(m.name, grid, params, ctx.episode.rate_min, ctx.episode.rate_max);
  }
  throw std::invalid_argument("'" + method + "' is a learned method, not a baseline");
}

TrainedAgent train_agent(const std::string& method, const TrainingContext& ctx, std::optional<int> episodes,
                         std::uint64_t seed) {
  const auto& m = ctx.hyper.method(method);
  if (!m.learned()) return {make_baseline(method, ctx), {}, 0};

  const int n = episodes.value_or(m.episodes > 0 ? m.episodes : ctx.hyper.default_episodes);
  if (n < 1) throw std::invalid_argument("training needs at least one episode");
  TrainedAgent result;
  int ep = -1;
  try {
    switch (m.family) {
      case MethodFamily::q_learning:
      case MethodFamily::sarsa:
      case MethodFamily::pomdp_q: result = train_tabular(m, ctx, n, seed, ep); break;
      case MethodFamily::bayes_thompson:
      case MethodFamily::bayes_ucb: result = train_bayes(m, ctx, n, seed, ep); break;
      case MethodFamily::actor_critic: result = train_actor_critic(m, ctx, n, seed, ep); break;
      case MethodFamily::dqn: result = train_dqn(m, ctx, n, seed, ep); break;
      default: throw std::logic_error("unhandled method family");
    }
  } catch (const DivergenceError& e) {
    throw DivergenceError(m.name + " training diverged at episode " + std::to_string(ep) + ": " + e.what());
  }
  result.episodes = n;
  return result;
}

void write_training_log_csv(std::ostream& out, const std::vector<TrainingLogRow>& log) {
  out << "episode,discounted_return,steps,epsilon,posterior_sigma\n";
  const auto opt = [](double v) { return std::isnan(v) ? std::string() : text::fixed(v); };
  for (const auto& r : log) {
    out << r.episode << ',' << text::fixed(r.discounted_return) << ',' << r.steps << ',' << opt(r.epsilon) << ','
        << opt(r.posterior_sigma) << '\n';
  }
}

}  // namespace mpolicy
