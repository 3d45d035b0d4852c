#include "mpolicy/environment.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "mpolicy/errors.hpp"
#include "mpolicy/text.hpp"

namespace mpolicy {

ActionGrid::ActionGrid(std::vector<double> deltas) : deltas_(std::move(deltas)) {
  if (deltas_.empty()) throw std::invalid_argument("action grid is empty");
  if (!std::is_sorted(deltas_.begin(), deltas_.end()) ||
      std::adjacent_find(deltas_.begin(), deltas_.end()) != deltas_.end()) {
    throw std::invalid_argument("action grid must be strictly ascending");
  }
  for (std::size_t k = 0; k < deltas_.size(); ++k) {
    if (deltas_[k] != -deltas_[deltas_.size() - 1 - k]) {
      throw std::invalid_argument("action grid must be symmetric about 0");
    }
  }
  auto zero = std::find(deltas_.begin(), deltas_.end(), 0.0);
  if (zero == deltas_.end()) throw std::invalid_argument("action grid must contain 0");
  hold_ = static_cast<std::size_t>(zero - deltas_.begin());
}

void EpisodeConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("episode horizon must be >= 1");
  if (!(observation_noise_sigma >= 0.0)) throw std::invalid_argument("observation noise sigma must be >= 0");
  if (!(rate_min <= rate_max)) throw std::invalid_argument("rate bounds are inverted");
}

bool EpisodeConfig::diverged(const MacroState& s) const {
  if (!s.finite()) return true;
  return std::abs(s.inflation) > max_abs_inflation || s.unemployment < unemployment_min ||
         s.unemployment > unemployment_max || std::abs(s.output_gap) > max_abs_output_gap;
}

RewardResult reward(const MacroState& state_after, double realized_delta_i, const RewardParams& params) {
  const double dpi = state_after.inflation - params.pi_star;
  const double du = state_after.unemployment - params.u_star;
  RewardResult r;
  r.losses.inflation = params.w_pi * dpi * dpi;
  r.losses.unemployment = params.lambda_u * du * du;
  r.losses.smoothing = params.eta * realized_delta_i * realized_delta_i;
  r.reward = -r.losses.total();
  return r;
}

MacroState reset(const StateSeries& history, const EpisodeConfig& cfg, Rng& rng) {
  if (history.empty()) throw InsufficientDataError("cannot sample an initial state from an empty history");
  MacroState s = history.states[uniform_index(rng, history.size())];
  s.rate = std::clamp(s.rate, cfg.rate_min, cfg.rate_max);
  return s;
}

StepOutcome env_step(const MacroState& state, std::size_t action_index, const ActionGrid& grid,
                     const TransitionModel& model, const EpisodeConfig& cfg, const RewardParams& params, Rng& rng) {
  if (action_index >= grid.size()) {
    throw std::out_of_range("action index " + std::to_string(action_index) + " outside grid of size " +
                            std::to_string(grid.size()));
  }
  const double rate = std::clamp(state.rate + grid.delta(action_index), cfg.rate_min, cfg.rate_max);
  StepOutcome out;
  out.realized_delta = rate - state.rate;
  out.next_state = MacroState::from(step(model, state.macro(), rate, rng), rate);
  const auto r = reward(out.next_state, out.realized_delta, params);
  out.reward = r.reward;
  out.losses = r.losses;
  out.terminated = cfg.diverged(out.next_state);
  return out;
}

MacroState observe(const MacroState& state, const EpisodeConfig& cfg, Rng& rng) {
  const double sigma = cfg.observation_noise_sigma;
  if (sigma == 0.0) return state;
  MacroState obs = state;
  obs.inflation += sigma * standard_normal(rng);
  obs.unemployment += sigma * standard_normal(rng);
  obs.output_gap += sigma * standard_normal(rng);
  return obs;
}

Environment::Environment(const TransitionModel& model, const StateSeries& history, ActionGrid grid,
                         EpisodeConfig cfg, RewardParams params, std::uint64_t seed)
    : model_(&model),
      history_(&history),
      grid_(std::move(grid)),
      cfg_(cfg),
      params_(params),
      dynamics_rng_(make_rng(seed, 0)),
      observation_rng_(make_rng(seed, 1)) {
  cfg_.validate();
}

MacroState Environment::reset() {
  state_ = mpolicy::reset(*history_, cfg_, dynamics_rng_);
  observation_ = observe(state_, cfg_, observation_rng_);
  steps_ = 0;
  done_ = false;
  return observation_;
}

StepOutcome Environment::step(std::size_t action_index) {
  if (done_) throw std::logic_error("step() called on a finished episode; call reset() first");
  auto out = env_step(state_, action_index, grid_, *model_, cfg_, params_, dynamics_rng_);
  ++steps_;
  out.truncated = !out.terminated && steps_ >= cfg_.horizon;
  state_ = out.next_state;
  observation_ = observe(state_, cfg_, observation_rng_);
  done_ = out.terminated || out.truncated;
  return out;
}

void write_trace_csv(std::ostream& out, std::span<const TraceRow> rows) {
  out << "step,pi,u,y,i,action_delta,reward,inf_loss,unemp_loss,smooth_loss,terminated\n";
  for (const auto& r : rows) {
    out << r.step << ',' << text::fixed(r.state.inflation) << ',' << text::fixed(r.state.unemployment) << ','
        << text::fixed(r.state.output_gap) << ',' << text::fixed(r.state.rate) << ',' << text::fixed(r.action_delta)
        << ',' << text::fixed(r.reward) << ',' << text::fixed(r.losses.inflation) << ','
        << text::fixed(r.losses.unemployment) << ',' << text::fixed(r.losses.smoothing) << ','
        << (r.terminated ? 1 : 0) << '\n';
  }
}

}  // namespace mpolicy
