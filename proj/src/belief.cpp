#include "mpolicy/belief.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "mpolicy/errors.hpp"
#include "mpolicy/text.hpp"

namespace mpolicy {

ParticleSet pf_init(const StateSeries& history, Rng& rng, std::size_t n) {
  if (history.empty()) throw InsufficientDataError("particle filter needs a non-empty history");
  if (n == 0) throw std::invalid_argument("particle count must be positive");
  ParticleSet set;
  set.particles.reserve(n);
  for (std::size_t k = 0; k < n; ++k) set.particles.push_back(history.states[uniform_index(rng, history.size())].macro());
  set.weights.assign(n, 1.0 / static_cast<double>(n));
  return set;
}

double effective_sample_size(const ParticleSet& belief) {
  const auto& w = belief.weights;
  if (std::all_of(w.begin(), w.end(), [&](double v) { return v == w.front(); })) {
    return static_cast<double>(w.size());
  }
  double sum_sq = 0.0;
  for (double v : w) sum_sq += v * v;
  return 1.0 / sum_sq;
}

void systematic_resample(ParticleSet& belief, Rng& rng) {
  const std::size_t n = belief.size();
  const double step = 1.0 / static_cast<double>(n);
  const double u0 = uniform01(rng) * step;
  std::vector<Eigen::Vector3d> chosen;
  chosen.reserve(n);
  double cumulative = belief.weights[0];
  std::size_t j = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double u = u0 + static_cast<double>(k) * step;
    while (u > cumulative && j + 1 < n) {
      ++j;
      cumulative += belief.weights[j];
    }
    chosen.push_back(belief.particles[j]);
  }
  belief.particles = std::move(chosen);
  belief.weights.assign(n, step);
}

FilterEvent pf_update(ParticleSet& belief, const Eigen::Vector3d& observation, double sigma_obs, Rng& rng,
                      double ess_fraction) {
  const std::size_t n = belief.size();
  std::vector<double> log_kernel(n);
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    const Eigen::Vector3d z = (observation - belief.particles[k]) / sigma_obs;
    log_kernel[k] = -0.5 * z.squaredNorm();
    if (belief.weights[k] > 0.0) peak = std::max(peak, log_kernel[k]);
  }

  FilterEvent event;
  double mass = 0.0;
  if (std::isfinite(peak)) {
    for (std::size_t k = 0; k < n; ++k) mass += belief.weights[k] * std::exp(log_kernel[k] - peak);
  }
  if (!std::isfinite(peak) || !(mass > 0.0) || peak + std::log(mass) < std::log(1e-300)) {
    event.underflow = true;
    belief.weights.assign(n, 1.0 / static_cast<double>(n));
  } else {
    for (std::size_t k = 0; k < n; ++k) belief.weights[k] *= std::exp(log_kernel[k] - peak) / mass;
    double total = 0.0;
    for (double w : belief.weights) total += w;
    for (double& w : belief.weights) w /= total;
  }

  event.ess = effective_sample_size(belief);
  if (event.ess < ess_fraction * static_cast<double>(n)) {
    systematic_resample(belief, rng);
    event.resampled = true;
  }
  return event;
}

FilterEvent pf_step(ParticleSet& belief, double rate_set, const Eigen::Vector3d& observation,
                    const TransitionModel& model, double sigma_obs, Rng& rng, double ess_fraction) {
  for (auto& p : belief.particles) p = step(model, p, rate_set, rng);
  belief.known_rate = rate_set;
  return pf_update(belief, observation, sigma_obs, rng, ess_fraction);
}

MacroState belief_mean(const ParticleSet& belief) {
  Eigen::Vector3d m = Eigen::Vector3d::Zero();
  for (std::size_t k = 0; k < belief.size(); ++k) m += belief.weights[k] * belief.particles[k];
  return MacroState::from(m, belief.known_rate);
}

Eigen::Vector3d belief_std(const ParticleSet& belief) {
  const Eigen::Vector3d m = belief_mean(belief).macro();
  Eigen::Vector3d var = Eigen::Vector3d::Zero();
  for (std::size_t k = 0; k < belief.size(); ++k) {
    var += belief.weights[k] * (belief.particles[k] - m).cwiseAbs2();
  }
  return var.cwiseSqrt();
}

BeliefTracker::BeliefTracker(const TransitionModel& model, const StateSeries& history, BeliefSettings settings,
                             std::uint64_t seed)
    : model_(&model), history_(&history), settings_(settings), rng_(make_rng(seed, 7)) {}

MacroState BeliefTracker::reset(const MacroState& first_observation) {
  belief_ = pf_init(*history_, rng_, settings_.particles);
  belief_.known_rate = first_observation.rate;
  step_ = 0;
  trace_.clear();
  const auto event = pf_update(belief_, first_observation.macro(), settings_.observation_sigma, rng_,
                               settings_.ess_fraction);
  if (event.underflow) ++underflows_;
  log(0, event.ess);
  return mean();
}

MacroState BeliefTracker::update(double rate_set, const MacroState& observation) {
  const auto event = pf_step(belief_, rate_set, observation.macro(), *model_, settings_.observation_sigma, rng_,
                             settings_.ess_fraction);
  if (event.underflow) ++underflows_;
  log(++step_, event.ess);
  return mean();
}

void BeliefTracker::log(int step, double ess) {
  if (!record_) return;
  trace_.push_back({step, mean(), belief_std(belief_), ess});
}

void write_belief_trace_csv(std::ostream& out, const std::vector<BeliefTraceRow>& rows) {
  out << "step,mean_pi,mean_u,mean_y,std_pi,std_u,std_y,ess\n";
  for (const auto& r : rows) {
    out << r.step << ',' << text::fixed(r.mean.inflation) << ',' << text::fixed(r.mean.unemployment) << ','
        << text::fixed(r.mean.output_gap) << ',' << text::fixed(r.std(0)) << ',' << text::fixed(r.std(1)) << ','
        << text::fixed(r.std(2)) << ',' << text::fixed(r.ess, 3) << '\n';
  }
}

}  // namespace mpolicy
