#pragma once

// Particle-filter belief over the hidden (inflation, unemployment, output gap)
// block under Gaussian observation noise. The policy rate is known exactly.

#include <Eigen/Core>
#include <iosfwd>
#include <vector>

#include "mpolicy/dynamics.hpp"
#include "mpolicy/macro_state.hpp"
#include "mpolicy/market_data.hpp"
#include "mpolicy/rng.hpp"

namespace mpolicy {

struct BeliefSettings {
  double observation_sigma = 0.15;
  std::size_t particles = 1000;
  double ess_fraction = 0.5;  // resample when ESS < fraction * N

  bool operator==(const BeliefSettings&) const = default;
};

struct ParticleSet {
  std::vector<Eigen::Vector3d> particles;
  std::vector<double> weights;
  double known_rate = 0.0;

  std::size_t size() const { return particles.size(); }
};

struct FilterEvent {
  bool resampled = false;
  bool underflow = false;  // observation incompatible with every particle; weights reset to uniform
  double ess = 0.0;        // after the update, before any resampling
};

/// Particles drawn uniformly from historical (pi, u, y) rows, uniform weights.
ParticleSet pf_init(const StateSeries& history, Rng& rng, std::size_t n = 1000);

/// 1 / sum(w^2); exactly N for uniform weights.
double effective_sample_size(const ParticleSet& belief);

/// Systematic resampling; leaves uniform weights.
void systematic_resample(ParticleSet& belief, Rng& rng);

/// Reweights by the Gaussian observation likelihood and resamples when the
/// ESS drops below `ess_fraction * N`. Underflow is judged on the total
/// unnormalized kernel mass (< 1e-300).
FilterEvent pf_update(ParticleSet& belief, const Eigen::Vector3d& observation, double sigma_obs, Rng& rng,
                      double ess_fraction = 0.5);

/// Propagates every particle through the transition model at the set rate,
/// then applies pf_update.
FilterEvent pf_step(ParticleSet& belief, double rate_set, const Eigen::Vector3d& observation,
                    const TransitionModel& model, double sigma_obs, Rng& rng, double ess_fraction = 0.5);

/// Weighted particle mean with the known rate.
MacroState belief_mean(const ParticleSet& belief);
Eigen::Vector3d belief_std(const ParticleSet& belief);

struct BeliefTraceRow {
  int step = 0;
  MacroState mean;
  Eigen::Vector3d std = Eigen::Vector3d::Zero();
  double ess = 0.0;
};

/// Runs the filter alongside an episode so a discrete agent can act on the
/// belief mean.
class BeliefTracker {
 public:
  BeliefTracker(const TransitionModel& model, const StateSeries& history, BeliefSettings settings,
                std::uint64_t seed);

  /// Fresh particles from history, conditioned on the first observation.
  MacroState reset(const MacroState& first_observation);
  /// Advances one quarter given the rate that was set and the new observation.
  MacroState update(double rate_set, const MacroState& observation);

  MacroState mean() const { return belief_mean(belief_); }
  const ParticleSet& particles() const { return belief_; }
  int underflow_events() const { return underflows_; }
  const std::vector<BeliefTraceRow>& trace() const { return trace_; }
  void record_trace(bool on) { record_ = on; }

 private:
  void log(int step, double ess);

  const TransitionModel* model_;
  const StateSeries* history_;
  BeliefSettings settings_;
  Rng rng_;
  ParticleSet belief_;
  int step_ = 0;
  int underflows_ = 0;
  bool record_ = false;
  std::vector<BeliefTraceRow> trace_;
};

/// `step,mean_pi,mean_u,mean_y,std_pi,std_u,std_y,ess`
void write_belief_trace_csv(std::ostream& out, const std::vector<BeliefTraceRow>& rows);

}  // namespace mpolicy
