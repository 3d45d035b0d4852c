#include "mpolicy/agents/actor_critic.hpp"

#include <cmath>
#include <string>

#include "mpolicy/agents/agent_io.hpp"
#include "mpolicy/errors.hpp"

namespace mpolicy {

FeatureScaler FeatureScaler::fit(const StateSeries& history) {
  FeatureScaler f;
  if (history.size() < 2) return f;
  Eigen::Vector4d sum = Eigen::Vector4d::Zero();
  for (const auto& s : history.states) sum += Eigen::Vector4d(s.inflation, s.unemployment, s.output_gap, s.rate);
  f.mean = sum / static_cast<double>(history.size());
  Eigen::Vector4d ss = Eigen::Vector4d::Zero();
  for (const auto& s : history.states) {
    ss += (Eigen::Vector4d(s.inflation, s.unemployment, s.output_gap, s.rate) - f.mean).cwiseAbs2();
  }
  f.stddev = (ss / static_cast<double>(history.size() - 1)).cwiseSqrt();
  for (int k = 0; k < 4; ++k) {
    if (!(f.stddev(k) > 0.0)) f.stddev(k) = 1.0;
  }
  return f;
}

Eigen::Vector4d FeatureScaler::standardize(const MacroState& s) const {
  return (Eigen::Vector4d(s.inflation, s.unemployment, s.output_gap, s.rate) - mean).cwiseQuotient(stddev);
}

LinearActorCritic::LinearActorCritic(std::size_t actions, FeatureScaler scaler_)
    : theta(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(actions), kFeatures)),
      w(Eigen::VectorXd::Zero(kFeatures)),
      scaler(scaler_) {}

Eigen::VectorXd LinearActorCritic::features(const MacroState& s) const {
  Eigen::VectorXd phi(kFeatures);
  phi.head<4>() = scaler.standardize(s);
  phi(4) = 1.0;
  return phi;
}

Eigen::VectorXd LinearActorCritic::probabilities(const Eigen::VectorXd& phi) const {
  Eigen::VectorXd logits = theta * phi;
  logits.array() -= logits.maxCoeff();
  Eigen::VectorXd p = logits.array().exp();
  return p / p.sum();
}

double LinearActorCritic::log_probability(const Eigen::VectorXd& phi, std::size_t action) const {
  const Eigen::VectorXd logits = theta * phi;
  const double peak = logits.maxCoeff();
  const double log_norm = peak + std::log((logits.array() - peak).exp().sum());
  return logits(static_cast<Eigen::Index>(action)) - log_norm;
}

Eigen::MatrixXd LinearActorCritic::log_policy_gradient(const Eigen::VectorXd& phi, std::size_t action) const {
  Eigen::VectorXd indicator = -probabilities(phi);
  indicator(static_cast<Eigen::Index>(action)) += 1.0;
  return indicator * phi.transpose();
}

double actor_critic_step(LinearActorCritic& ac, const Eigen::VectorXd& phi, std::size_t action, double reward,
                         const Eigen::VectorXd& phi_next, bool done, double alpha_theta, double alpha_w,
                         double gamma) {
  const double bootstrap = done ? 0.0 : gamma * ac.value(phi_next);
  const double delta = reward + bootstrap - ac.value(phi);
  if (!std::isfinite(delta)) throw DivergenceError("actor-critic TD error is not finite");
  if (delta == 0.0) return delta;
  const Eigen::MatrixXd grad = ac.log_policy_gradient(phi, action);
  ac.w += alpha_w * delta * phi;
  ac.theta += alpha_theta * delta * grad;
  return delta;
}

void reinforce_episode(LinearActorCritic& ac, const std::vector<EpisodeStep>& episode, double alpha_theta,
                       double alpha_w, double gamma) {
  std::vector<double> returns(episode.size());
  double g = 0.0;
  for (std::size_t t = episode.size(); t-- > 0;) {
    g = episode[t].reward + gamma * g;
    returns[t] = g;
  }
  double discount = 1.0;
  for (std::size_t t = 0; t < episode.size(); ++t) {
    const auto& st = episode[t];
    const double advantage = returns[t] - ac.value(st.phi);
    if (!std::isfinite(advantage)) throw DivergenceError("REINFORCE advantage is not finite");
    const Eigen::MatrixXd grad = ac.log_policy_gradient(st.phi, st.action);
    ac.w += alpha_w * advantage * st.phi;
    ac.theta += alpha_theta * discount * advantage * grad;
    discount *= gamma;
  }
}

std::size_t sample_action(const Eigen::VectorXd& probabilities, Rng& rng) {
  const double u = uniform01(rng);
  double cumulative = 0.0;
  for (Eigen::Index a = 0; a < probabilities.size(); ++a) {
    cumulative += probabilities(a);
    if (u < cumulative) return static_cast<std::size_t>(a);
  }
  return static_cast<std::size_t>(probabilities.size() - 1);
}

ActorCriticAgent::ActorCriticAgent(std::string method, ActionGrid grid, LinearActorCritic model)
    : method_(std::move(method)), grid_(std::move(grid)), model_(std::move(model)) {
  if (model_.theta.rows() != static_cast<Eigen::Index>(grid_.size())) {
    throw std::invalid_argument("actor weights do not match the action grid");
  }
}

std::size_t ActorCriticAgent::act(const MacroState& observation) const {
  const Eigen::VectorXd logits = model_.theta * model_.features(observation);
  return argmax(std::span<const double>(logits.data(), static_cast<std::size_t>(logits.size())));
}

std::vector<double> ActorCriticAgent::action_values(const MacroState& observation) const {
  const Eigen::VectorXd p = model_.probabilities(model_.features(observation));
  return {p.data(), p.data() + p.size()};
}

void ActorCriticAgent::save(std::ostream& out) const {
  AgentWriter w(out, method_, "actor_critic", grid_);
  w.values("scaler_mean", std::span<const double>(model_.scaler.mean.data(), 4));
  w.values("scaler_std", std::span<const double>(model_.scaler.stddev.data(), 4));
  // row-major actions x features
  std::vector<double> theta;
  for (Eigen::Index r = 0; r < model_.theta.rows(); ++r) {
    for (Eigen::Index c = 0; c < model_.theta.cols(); ++c) theta.push_back(model_.theta(r, c));
  }
  w.values("theta", theta);
  w.values("w", std::span<const double>(model_.w.data(), static_cast<std::size_t>(model_.w.size())));
}

std::unique_ptr<ActorCriticAgent> ActorCriticAgent::from_record(const AgentRecord& rec) {
  FeatureScaler scaler;
  const auto m = rec.values("scaler_mean", 4), s = rec.values("scaler_std", 4);
  for (int k = 0; k < 4; ++k) {
    scaler.mean(k) = m[static_cast<std::size_t>(k)];
    scaler.stddev(k) = s[static_cast<std::size_t>(k)];
  }
  const auto actions = rec.grid->size();
  LinearActorCritic model(actions, scaler);
  const auto theta = rec.values("theta", actions * LinearActorCritic::kFeatures);
  for (Eigen::Index r = 0; r < model.theta.rows(); ++r) {
    for (Eigen::Index c = 0; c < model.theta.cols(); ++c) {
      model.theta(r, c) = theta[static_cast<std::size_t>(r * LinearActorCritic::kFeatures + c)];
    }
  }
  const auto w = rec.values("w", LinearActorCritic::kFeatures);
  for (Eigen::Index k = 0; k < model.w.size(); ++k) model.w(k) = w[static_cast<std::size_t>(k)];
  return std::make_unique<ActorCriticAgent>(rec.method, *rec.grid, std::move(model));
}

}  // namespace mpolicy
