#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mpolicy/belief.hpp"
#include "mpolicy/environment.hpp"
#include "mpolicy/macro_state.hpp"
#include "mpolicy/rng.hpp"

namespace mpolicy {

/// A trained (or rule-based) decision rule. `act` is the exploration-free
/// choice used for evaluation; implementations are immutable after training
/// and safe to share across threads.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual const std::string& method() const = 0;
  virtual const ActionGrid& grid() const = 0;
  virtual std::size_t act(const MacroState& observation) const = 0;

  /// Per-action value estimates; empty when the policy has none.
  virtual std::vector<double> action_values(const MacroState&) const { return {}; }
  /// Per-action posterior standard deviations; empty when not Bayesian.
  virtual std::vector<double> action_uncertainty(const MacroState&) const { return {}; }

  /// Set when the policy acts on a particle-filter belief mean instead of
  /// the raw observation.
  virtual std::optional<BeliefSettings> belief() const { return std::nullopt; }

  virtual void save(std::ostream& out) const = 0;
};

/// First index of the maximum (ties go to the lowest index).
std::size_t argmax(std::span<const double> values);

/// argmax with probability 1 - epsilon, otherwise uniform over all actions.
/// Always consumes one uniform draw, plus one index draw when exploring.
std::size_t epsilon_greedy(std::span<const double> values, double epsilon, Rng& rng);

/// end + (start - end) * exp(-5 k / total).
double epsilon_schedule(int episode, int total_episodes, double start = 0.9, double end = 0.01);

}  // namespace mpolicy
