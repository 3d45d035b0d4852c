#include "mpolicy/agents/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mpolicy/agents/agent_io.hpp"

namespace mpolicy {

double taylor_target(const MacroState& s, const TaylorParams& p) {
  return p.r_star + s.inflation + p.phi_pi * (s.inflation - p.pi_star) + p.phi_y * s.output_gap;
}

std::size_t nearest_rate_action(double rate, double target, std::span<const double> deltas, double rate_min,
                                double rate_max) {
  if (deltas.empty()) throw std::invalid_argument("no actions to choose from");
  std::size_t best = 0;
  double best_gap = std::abs(std::clamp(rate + deltas[0], rate_min, rate_max) - target);
  for (std::size_t k = 1; k < deltas.size(); ++k) {
    const double gap = std::abs(std::clamp(rate + deltas[k], rate_min, rate_max) - target);
    const bool better = gap < best_gap ||
                        (gap == best_gap && (std::abs(deltas[k]) < std::abs(deltas[best]) ||
                                             (std::abs(deltas[k]) == std::abs(deltas[best]) && deltas[k] < deltas[best])));
    if (better) {
      best = k;
      best_gap = gap;
    }
  }
  return best;
}

std::size_t taylor_action(const MacroState& state, const TaylorParams& params, const ActionGrid& grid,
                          double rate_min, double rate_max) {
  return nearest_rate_action(state.rate, taylor_target(state, params), grid.deltas(), rate_min, rate_max);
}

std::size_t hold_action(const ActionGrid& grid) { return grid.hold_index(); }

TaylorAgent::TaylorAgent(std::string method, ActionGrid grid, TaylorParams params, double rate_min, double rate_max)
    : method_(std::move(method)), grid_(std::move(grid)), params_(params), rate_min_(rate_min), rate_max_(rate_max) {}

std::size_t TaylorAgent::act(const MacroState& observation) const {
  return taylor_action(observation, params_, grid_, rate_min_, rate_max_);
}

void TaylorAgent::save(std::ostream& out) const {
  AgentWriter w(out, method_, "taylor", grid_);
  w.values("taylor", std::vector<double>{params_.r_star, params_.phi_pi, params_.phi_y, params_.pi_star});
  w.values("rate_bounds", std::vector<double>{rate_min_, rate_max_});
}

std::unique_ptr<TaylorAgent> TaylorAgent::from_record(const AgentRecord& rec) {
  const auto p = rec.values("taylor", 4);
  const auto bounds = rec.values("rate_bounds", 2);
  return std::make_unique<TaylorAgent>(rec.method, *rec.grid, TaylorParams{p[0], p[1], p[2], p[3]}, bounds[0],
                                       bounds[1]);
}

void HoldAgent::save(std::ostream& out) const { AgentWriter(out, method_, "hold", grid_); }

}  // namespace mpolicy
