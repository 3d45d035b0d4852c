#include "mpolicy/agents/tabular.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "mpolicy/agents/agent_io.hpp"

namespace mpolicy {

QTable::QTable(std::size_t states, std::size_t actions)
    : states_(states), actions_(actions), values_(states * actions, 0.0), visits_(states * actions, 0) {
  if (states == 0 || actions == 0) throw std::invalid_argument("Q-table needs at least one state and action");
}

std::size_t QTable::index(std::size_t s, std::size_t a) const {
  if (s >= states_ || a >= actions_) {
    throw std::out_of_range("Q-table index (" + std::to_string(s) + ", " + std::to_string(a) + ") outside " +
                            std::to_string(states_) + " x " + std::to_string(actions_));
  }
  return s * actions_ + a;
}

std::span<const double> QTable::row(std::size_t s) const {
  return std::span<const double>(values_).subspan(index(s, 0), actions_);
}

double QTable::max_q(std::size_t s) const {
  auto r = row(s);
  return *std::max_element(r.begin(), r.end());
}

void q_learning_update(QTable& table, std::size_t s, std::size_t a, double r, std::size_t s_next, bool done,
                       double alpha, double gamma) {
  const double bootstrap = done ? 0.0 : gamma * table.max_q(s_next);
  double& q = table.q(s, a);
  q += alpha * (r + bootstrap - q);
  table.visit(s, a);
}

void sarsa_update(QTable& table, std::size_t s, std::size_t a, double r, std::size_t s_next, std::size_t a_next,
                  bool done, double alpha, double gamma) {
  const double next = table.q(s_next, a_next);  // validates indices even when done
  const double bootstrap = done ? 0.0 : gamma * next;
  double& q = table.q(s, a);
  q += alpha * (r + bootstrap - q);
  table.visit(s, a);
}

TabularQAgent::TabularQAgent(std::string method, Discretizer discretizer, ActionGrid grid,
                             std::optional<BeliefSettings> belief)
    : method_(std::move(method)),
      discretizer_(std::move(discretizer)),
      grid_(std::move(grid)),
      belief_(belief),
      table_(discretizer_.total_states(), grid_.size()) {}

std::size_t TabularQAgent::act(const MacroState& observation) const {
  return argmax(table_.row(discretizer_.encode(observation)));
}

std::vector<double> TabularQAgent::action_values(const MacroState& observation) const {
  auto r = table_.row(discretizer_.encode(observation));
  return {r.begin(), r.end()};
}

void TabularQAgent::save(std::ostream& out) const {
  AgentWriter w(out, method_, "tabular", grid_);
  w.discretizer(discretizer_);
  if (belief_) w.belief(*belief_);
  w.values("q_values", table_.values());
  w.counts("visits", table_.visit_counts());
}

}  // namespace mpolicy
