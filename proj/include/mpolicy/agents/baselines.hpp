#pragma once

#include <memory>
#include <span>

#include "mpolicy/agents/policy.hpp"

namespace mpolicy {

class AgentRecord;

struct TaylorParams {
  double r_star = 2.0;
  double phi_pi = 0.5;
  double phi_y = 0.5;
  double pi_star = 2.0;

  static TaylorParams standard() { return {}; }
  static TaylorParams tuned() { return {2.0, 1.5, 0.5, 2.0}; }
};

/// i* = r* + pi + phi_pi (pi - pi*) + phi_y y
double taylor_target(const MacroState& state, const TaylorParams& params);

/// Index into `deltas` whose clamped rate lands closest to `target`. Ties go
/// to the smaller |delta|, then the smaller delta, so the result depends only
/// on the delta values and not on their order.
std::size_t nearest_rate_action(double rate, double target, std::span<const double> deltas, double rate_min,
                                double rate_max);

std::size_t taylor_action(const MacroState& state, const TaylorParams& params, const ActionGrid& grid,
                          double rate_min = 0.0, double rate_max = 20.0);

std::size_t hold_action(const ActionGrid& grid);

class TaylorAgent final : public Policy {
 public:
  TaylorAgent(std::string method, ActionGrid grid, TaylorParams params, double rate_min, double rate_max);

  static std::unique_ptr<TaylorAgent> from_record(const AgentRecord& rec);

  const std::string& method() const override { return method_; }
  const ActionGrid& grid() const override { return grid_; }
  std::size_t act(const MacroState& observation) const override;
  void save(std::ostream& out) const override;

 private:
  std::string method_;
  ActionGrid grid_;
  TaylorParams params_;
  double rate_min_;
  double rate_max_;
};

class HoldAgent final : public Policy {
 public:
  HoldAgent(std::string method, ActionGrid grid) : method_(std::move(method)), grid_(std::move(grid)) {}

  const std::string& method() const override { return method_; }
  const ActionGrid& grid() const override { return grid_; }
  std::size_t act(const MacroState&) const override { return grid_.hold_index(); }
  void save(std::ostream& out) const override;

 private:
  std::string method_;
  ActionGrid grid_;
};

}  // namespace mpolicy
