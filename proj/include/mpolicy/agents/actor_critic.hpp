#pragma once

#include <Eigen/Core>
#include <memory>

#include "mpolicy/agents/policy.hpp"
#include "mpolicy/market_data.hpp"

namespace mpolicy {

class AgentRecord;

/// Per-variable standardization of (pi, u, y, i) from historical moments.
struct FeatureScaler {
  Eigen::Vector4d mean = Eigen::Vector4d::Zero();
  Eigen::Vector4d stddev = Eigen::Vector4d::Ones();

  static FeatureScaler fit(const StateSeries& history);
  Eigen::Vector4d standardize(const MacroState& s) const;
};

/// Softmax policy over linear logits theta * phi(s) and a linear critic
/// V(s) = w . phi(s), where phi is the standardized state plus a bias term.
struct LinearActorCritic {
  Eigen::MatrixXd theta;  // actions x features
  Eigen::VectorXd w;      // features
  FeatureScaler scaler;

  LinearActorCritic(std::size_t actions, FeatureScaler scaler);

  static constexpr Eigen::Index kFeatures = 5;

  Eigen::VectorXd features(const MacroState& s) const;
  Eigen::VectorXd probabilities(const Eigen::VectorXd& phi) const;
  double value(const Eigen::VectorXd& phi) const { return w.dot(phi); }
  double log_probability(const Eigen::VectorXd& phi, std::size_t action) const;
  /// d log pi(a|s) / d theta = (e_a - pi(.|s)) phi^T.
  Eigen::MatrixXd log_policy_gradient(const Eigen::VectorXd& phi, std::size_t action) const;
};

/// One TD(0) actor-critic update. Returns the TD error; throws
/// DivergenceError when it is not finite.
double actor_critic_step(LinearActorCritic& ac, const Eigen::VectorXd& phi, std::size_t action, double reward,
                         const Eigen::VectorXd& phi_next, bool done, double alpha_theta, double alpha_w,
                         double gamma);

struct EpisodeStep {
  Eigen::VectorXd phi;
  std::size_t action = 0;
  double reward = 0.0;
};

/// Monte-Carlo REINFORCE with the critic as baseline over a finished episode.
void reinforce_episode(LinearActorCritic& ac, const std::vector<EpisodeStep>& episode, double alpha_theta,
                       double alpha_w, double gamma);

std::size_t sample_action(const Eigen::VectorXd& probabilities, Rng& rng);

class ActorCriticAgent final : public Policy {
 public:
  ActorCriticAgent(std::string method, ActionGrid grid, LinearActorCritic model);

  static std::unique_ptr<ActorCriticAgent> from_record(const AgentRecord& rec);

  const std::string& method() const override { return method_; }
  const ActionGrid& grid() const override { return grid_; }
  /// Most probable action.
  std::size_t act(const MacroState& observation) const override;
  std::vector<double> action_values(const MacroState& observation) const override;
  void save(std::ostream& out) const override;

  LinearActorCritic& model() { return model_; }
  const LinearActorCritic& model() const { return model_; }

 private:
  std::string method_;
  ActionGrid grid_;
  LinearActorCritic model_;
};

}  // namespace mpolicy
