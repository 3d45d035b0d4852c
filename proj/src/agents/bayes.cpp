#include "mpolicy/agents/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mpolicy/agents/agent_io.hpp"
#include "mpolicy/errors.hpp"

namespace mpolicy {

GaussianQPosterior::GaussianQPosterior(std::size_t states, std::size_t actions, double prior_mu,
                                       double prior_variance, double obs_noise_variance)
    : states_(states),
      actions_(actions),
      obs_noise_variance_(obs_noise_variance),
      mu_(states * actions, prior_mu),
      variance_(states * actions, prior_variance) {
  if (states == 0 || actions == 0) throw std::invalid_argument("posterior table needs states and actions");
  if (!(prior_variance > 0.0) || !(obs_noise_variance > 0.0)) {
    throw std::invalid_argument("prior and observation variances must be positive");
  }
}

std::size_t GaussianQPosterior::index(std::size_t s, std::size_t a) const {
  if (s >= states_ || a >= actions_) {
    throw std::out_of_range("posterior index (" + std::to_string(s) + ", " + std::to_string(a) + ") out of range");
  }
  return s * actions_ + a;
}

std::span<const double> GaussianQPosterior::mu_row(std::size_t s) const {
  return std::span<const double>(mu_).subspan(index(s, 0), actions_);
}

std::span<const double> GaussianQPosterior::variance_row(std::size_t s) const {
  return std::span<const double>(variance_).subspan(index(s, 0), actions_);
}

double GaussianQPosterior::max_mu(std::size_t s) const {
  auto r = mu_row(s);
  return *std::max_element(r.begin(), r.end());
}

void GaussianQPosterior::update(std::size_t s, std::size_t a, double target, double precision_weight) {
  const auto k = index(s, a);
  const double tau = 1.0 / variance_[k];
  const double tau_obs = precision_weight / obs_noise_variance_;
  mu_[k] = (tau * mu_[k] + tau_obs * target) / (tau + tau_obs);
  variance_[k] = 1.0 / (tau + tau_obs);
}

double GaussianQPosterior::mean_sigma() const {
  double total = 0.0;
  for (double v : variance_) total += std::sqrt(v);
  return total / static_cast<double>(variance_.size());
}

void bayes_q_update(GaussianQPosterior& post, std::size_t s, std::size_t a, double target_value) {
  post.update(s, a, target_value);
}

std::size_t thompson_select(const GaussianQPosterior& post, std::size_t s, Rng& rng) {
  const auto mu = post.mu_row(s);
  const auto var = post.variance_row(s);
  std::vector<double> draws(mu.size());
  for (std::size_t a = 0; a < mu.size(); ++a) draws[a] = mu[a] + std::sqrt(var[a]) * standard_normal(rng);
  return argmax(draws);
}

std::size_t ucb_select(const GaussianQPosterior& post, std::size_t s, double c) {
  const auto mu = post.mu_row(s);
  const auto var = post.variance_row(s);
  std::vector<double> scores(mu.size());
  for (std::size_t a = 0; a < mu.size(); ++a) scores[a] = mu[a] + c * std::sqrt(var[a]);
  return argmax(scores);
}

BayesQAgent::BayesQAgent(std::string method, Discretizer discretizer, ActionGrid grid, BayesExploration exploration,
                         double ucb_c, GaussianQPosterior posterior)
    : method_(std::move(method)),
      discretizer_(std::move(discretizer)),
      grid_(std::move(grid)),
      exploration_(exploration),
      ucb_c_(ucb_c),
      posterior_(std::move(posterior)) {
  if (posterior_.states() != discretizer_.total_states() || posterior_.actions() != grid_.size()) {
    throw std::invalid_argument("posterior shape does not match discretizer and grid");
  }
}

std::size_t BayesQAgent::act(const MacroState& observation) const {
  return argmax(posterior_.mu_row(discretizer_.encode(observation)));
}

std::vector<double> BayesQAgent::action_values(const MacroState& observation) const {
  auto r = posterior_.mu_row(discretizer_.encode(observation));
  return {r.begin(), r.end()};
}

std::vector<double> BayesQAgent::action_uncertainty(const MacroState& observation) const {
  auto r = posterior_.variance_row(discretizer_.encode(observation));
  std::vector<double> out;
  for (double v : r) out.push_back(std::sqrt(v));
  return out;
}

std::size_t BayesQAgent::explore(std::size_t state_index, Rng& rng) const {
  return exploration_ == BayesExploration::thompson ? thompson_select(posterior_, state_index, rng)
                                                    : ucb_select(posterior_, state_index, ucb_c_);
}

void BayesQAgent::save(std::ostream& out) const {
  AgentWriter w(out, method_, "bayes", grid_);
  w.discretizer(discretizer_);
  w.word("exploration", exploration_ == BayesExploration::thompson ? "thompson" : "ucb");
  w.scalar("ucb_c", ucb_c_);
  w.scalar("obs_noise_variance", posterior_.obs_noise_variance());
  w.values("mu", posterior_.all_mu());
  w.values("variance", posterior_.all_variance());
}

std::unique_ptr<BayesQAgent> BayesQAgent::from_record(const AgentRecord& rec) {
  auto disc = rec.discretizer();
  const auto n = disc.total_states() * rec.grid->size();
  const auto mode = rec.word("exploration");
  if (mode != "thompson" && mode != "ucb") throw FormatError("agent file: unknown exploration '" + mode + "'");
  GaussianQPosterior post(disc.total_states(), rec.grid->size(), 0.0, 1.0, rec.scalar("obs_noise_variance"));
  post.mutable_mu() = rec.values("mu", n);
  post.mutable_variance() = rec.values("variance", n);
  if (std::any_of(post.all_variance().begin(), post.all_variance().end(), [](double v) { return !(v > 0.0); })) {
    throw FormatError("agent file: posterior variances must be positive");
  }
  return std::make_unique<BayesQAgent>(rec.method, std::move(disc), *rec.grid,
                                       mode == "thompson" ? BayesExploration::thompson : BayesExploration::ucb,
                                       rec.scalar("ucb_c"), std::move(post));
}

}  // namespace mpolicy
