#pragma once

// The discrete-action monetary policy MDP and its noisy-observation wrapper.

#include <iosfwd>
#include <span>
#include <vector>

#include "mpolicy/dynamics.hpp"
#include "mpolicy/macro_state.hpp"
#include "mpolicy/market_data.hpp"
#include "mpolicy/rng.hpp"

namespace mpolicy {

/// Rate changes in percentage points, sorted, symmetric and containing 0.
class ActionGrid {
 public:
  explicit ActionGrid(std::vector<double> deltas);

  static ActionGrid standard() { return ActionGrid({-0.5, 0.0, 0.5}); }
  static ActionGrid enhanced() { return ActionGrid({-1.0, -0.5, 0.0, 0.5, 1.0}); }

  std::size_t size() const { return deltas_.size(); }
  double delta(std::size_t index) const { return deltas_.at(index); }
  std::span<const double> deltas() const { return deltas_; }
  std::size_t hold_index() const { return hold_; }

  bool operator==(const ActionGrid& other) const { return deltas_ == other.deltas_; }

 private:
  std::vector<double> deltas_;
  std::size_t hold_ = 0;
};

struct RewardParams {
  double pi_star = 2.0;
  double u_star = 4.5;
  double w_pi = 1.0;
  double lambda_u = 0.5;
  double eta = 0.1;
};

struct LossComponents {
  double inflation = 0.0;
  double unemployment = 0.0;
  double smoothing = 0.0;

  double total() const { return inflation + unemployment + smoothing; }
};

struct RewardResult {
  double reward = 0.0;
  LossComponents losses;
};

struct EpisodeConfig {
  int horizon = 80;
  double max_abs_inflation = 25.0;
  double unemployment_min = 0.0;
  double unemployment_max = 30.0;
  double max_abs_output_gap = 30.0;
  double rate_min = 0.0;
  double rate_max = 20.0;
  double observation_noise_sigma = 0.0;

  void validate() const;
  bool diverged(const MacroState& s) const;
};

struct StepOutcome {
  MacroState next_state;
  double reward = 0.0;
  LossComponents losses;
  double realized_delta = 0.0;
  bool terminated = false;
  bool truncated = false;
};

/// Quadratic dual-mandate loss on the post-transition state. The reward is
/// exactly the negated sum of the returned components.
RewardResult reward(const MacroState& state_after, double realized_delta_i, const RewardParams& params);

/// Uniform draw over historical rows, rate clamped to the configured bounds.
MacroState reset(const StateSeries& history, const EpisodeConfig& cfg, Rng& rng);

StepOutcome env_step(const MacroState& state, std::size_t action_index, const ActionGrid& grid,
                     const TransitionModel& model, const EpisodeConfig& cfg, const RewardParams& params, Rng& rng);

/// Adds N(0, sigma^2) noise to inflation, unemployment and output gap; the
/// rate is returned exactly. With sigma == 0 the state is returned untouched
/// and no random numbers are drawn.
MacroState observe(const MacroState& state, const EpisodeConfig& cfg, Rng& rng);

/// Stateful episode driver around the free functions. Dynamics and
/// observation noise draw from separate streams so the true trajectory under a
/// fixed action sequence does not depend on the noise level.
class Environment {
 public:
  Environment(const TransitionModel& model, const StateSeries& history, ActionGrid grid, EpisodeConfig cfg,
              RewardParams params, std::uint64_t seed);

  /// Starts a new episode and returns the first observation.
  MacroState reset();
  StepOutcome step(std::size_t action_index);

  const MacroState& state() const { return state_; }
  const MacroState& observation() const { return observation_; }
  int steps_taken() const { return steps_; }
  bool done() const { return done_; }

  const ActionGrid& grid() const { return grid_; }
  const EpisodeConfig& config() const { return cfg_; }
  const RewardParams& reward_params() const { return params_; }
  const TransitionModel& model() const { return *model_; }
  const StateSeries& history() const { return *history_; }

 private:
  const TransitionModel* model_;
  const StateSeries* history_;
  ActionGrid grid_;
  EpisodeConfig cfg_;
  RewardParams params_;
  Rng dynamics_rng_;
  Rng observation_rng_;
  MacroState state_;
  MacroState observation_;
  int steps_ = 0;
  bool done_ = true;
};

struct TraceRow {
  int step = 0;
  MacroState state;
  double action_delta = 0.0;
  double reward = 0.0;
  LossComponents losses;
  bool terminated = false;
};

/// `step,pi,u,y,i,action_delta,reward,inf_loss,unemp_loss,smooth_loss,terminated`
void write_trace_csv(std::ostream& out, std::span<const TraceRow> rows);

}  // namespace mpolicy
