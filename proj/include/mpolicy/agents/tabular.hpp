#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mpolicy/agents/policy.hpp"
#include "mpolicy/discretizer.hpp"

namespace mpolicy {

/// Dense Q(s, a) table with visit counts, zero-initialized.
class QTable {
 public:
  QTable(std::size_t states, std::size_t actions);

  std::size_t states() const { return states_; }
  std::size_t actions() const { return actions_; }

  double& q(std::size_t s, std::size_t a) { return values_[index(s, a)]; }
  double q(std::size_t s, std::size_t a) const { return values_[index(s, a)]; }
  std::uint64_t visits(std::size_t s, std::size_t a) const { return visits_[index(s, a)]; }
  void visit(std::size_t s, std::size_t a) { ++visits_[index(s, a)]; }

  std::span<const double> row(std::size_t s) const;
  double max_q(std::size_t s) const;

  const std::vector<double>& values() const { return values_; }
  const std::vector<std::uint64_t>& visit_counts() const { return visits_; }
  std::vector<double>& mutable_values() { return values_; }
  std::vector<std::uint64_t>& mutable_visit_counts() { return visits_; }

 private:
  std::size_t index(std::size_t s, std::size_t a) const;

  std::size_t states_;
  std::size_t actions_;
  std::vector<double> values_;
  std::vector<std::uint64_t> visits_;
};

/// Q(s,a) += alpha (r + gamma max_a' Q(s',a') (1 - done) - Q(s,a)).
void q_learning_update(QTable& table, std::size_t s, std::size_t a, double r, std::size_t s_next, bool done,
                       double alpha = 0.1, double gamma = 0.99);

/// Same with the bootstrap Q(s', a_next) of the action actually taken next.
void sarsa_update(QTable& table, std::size_t s, std::size_t a, double r, std::size_t s_next, std::size_t a_next,
                  bool done, double alpha = 0.1, double gamma = 0.99);

/// Greedy tabular policy shared by the Q-learning family, SARSA and the
/// belief-driven POMDP variant.
class TabularQAgent final : public Policy {
 public:
  TabularQAgent(std::string method, Discretizer discretizer, ActionGrid grid,
                std::optional<BeliefSettings> belief = std::nullopt);

  const std::string& method() const override { return method_; }
  const ActionGrid& grid() const override { return grid_; }
  std::size_t act(const MacroState& observation) const override;
  std::vector<double> action_values(const MacroState& observation) const override;
  std::optional<BeliefSettings> belief() const override { return belief_; }
  void save(std::ostream& out) const override;

  const Discretizer& discretizer() const { return discretizer_; }
  QTable& table() { return table_; }
  const QTable& table() const { return table_; }

 private:
  std::string method_;
  Discretizer discretizer_;
  ActionGrid grid_;
  std::optional<BeliefSettings> belief_;
  QTable table_;
};

}  // namespace mpolicy
