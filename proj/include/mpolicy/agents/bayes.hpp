#pragma once

#include <memory>
#include <span>
#include <vector>

#include "mpolicy/agents/policy.hpp"
#include "mpolicy/discretizer.hpp"

namespace mpolicy {

class AgentRecord;

/// Independent Gaussian posterior over each Q(s, a) with known observation
/// noise on the bootstrapped target.
class GaussianQPosterior {
 public:
  GaussianQPosterior(std::size_t states, std::size_t actions, double prior_mu = 0.0, double prior_variance = 250000.0,
                     double obs_noise_variance = 100.0);

  std::size_t states() const { return states_; }
  std::size_t actions() const { return actions_; }
  double obs_noise_variance() const { return obs_noise_variance_; }

  double mu(std::size_t s, std::size_t a) const { return mu_[index(s, a)]; }
  double variance(std::size_t s, std::size_t a) const { return variance_[index(s, a)]; }
  std::span<const double> mu_row(std::size_t s) const;
  std::span<const double> variance_row(std::size_t s) const;
  double max_mu(std::size_t s) const;

  /// Conjugate update of one cell towards `target` weighted by
  /// `precision_weight` observations.
  void update(std::size_t s, std::size_t a, double target, double precision_weight = 1.0);

  /// Mean posterior standard deviation over all cells.
  double mean_sigma() const;

  std::vector<double>& mutable_mu() { return mu_; }
  std::vector<double>& mutable_variance() { return variance_; }
  const std::vector<double>& all_mu() const { return mu_; }
  const std::vector<double>& all_variance() const { return variance_; }

 private:
  std::size_t index(std::size_t s, std::size_t a) const;

  std::size_t states_;
  std::size_t actions_;
  double obs_noise_variance_;
  std::vector<double> mu_;
  std::vector<double> variance_;
};

/// mu <- (tau mu + tau_obs target) / (tau + tau_obs); variance <- 1 / (tau + tau_obs).
void bayes_q_update(GaussianQPosterior& post, std::size_t s, std::size_t a, double target_value);

/// Samples q_a ~ N(mu, var) per action and returns the argmax.
std::size_t thompson_select(const GaussianQPosterior& post, std::size_t s, Rng& rng);

/// argmax of mu + c sigma, ties to the lowest index.
std::size_t ucb_select(const GaussianQPosterior& post, std::size_t s, double c = 2.0);

enum class BayesExploration { thompson, ucb };

/// Evaluates greedily on posterior means regardless of the exploration rule
/// used during training.
class BayesQAgent final : public Policy {
 public:
  BayesQAgent(std::string method, Discretizer discretizer, ActionGrid grid, BayesExploration exploration,
              double ucb_c, GaussianQPosterior posterior);

  static std::unique_ptr<BayesQAgent> from_record(const AgentRecord& rec);

  const std::string& method() const override { return method_; }
  const ActionGrid& grid() const override { return grid_; }
  std::size_t act(const MacroState& observation) const override;
  std::vector<double> action_values(const MacroState& observation) const override;
  std::vector<double> action_uncertainty(const MacroState& observation) const override;
  void save(std::ostream& out) const override;

  /// Training-time choice under the configured exploration rule.
  std::size_t explore(std::size_t state_index, Rng& rng) const;

  const Discretizer& discretizer() const { return discretizer_; }
  GaussianQPosterior& posterior() { return posterior_; }
  const GaussianQPosterior& posterior() const { return posterior_; }
  BayesExploration exploration() const { return exploration_; }

 private:
  std::string method_;
  Discretizer discretizer_;
  ActionGrid grid_;
  BayesExploration exploration_;
  double ucb_c_;
  GaussianQPosterior posterior_;
};

}  // namespace mpolicy
