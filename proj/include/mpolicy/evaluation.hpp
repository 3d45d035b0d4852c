#pragma once

// Greedy evaluation of trained policies, summary statistics and report files.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mpolicy/agents/policy.hpp"
#include "mpolicy/dynamics.hpp"
#include "mpolicy/environment.hpp"

namespace mpolicy {

struct EpisodeResult {
  std::string method;
  int episode = 0;
  std::uint64_t seed = 0;
  double discounted_return = 0.0;
  double mean_loss = 0.0;  // undiscounted mean of per-step losses
  LossComponents components;  // per-step means
  int length = 0;
  bool terminated = false;
};

struct EvaluationSetup {
  const TransitionModel& model;
  const StateSeries& history;
  ActionGrid grid;
  EpisodeConfig episode;
  RewardParams reward;
  double gamma = 0.99;
};

/// One greedy episode. Belief-driven policies act on the particle-filter mean
/// of noisy observations; everything else sees the true state.
EpisodeResult run_episode(const Policy& policy, const EvaluationSetup& setup, std::uint64_t seed,
                          std::vector<TraceRow>* trace = nullptr);

/// Runs `n_episodes` greedy episodes, episode k seeded with mix_seed(base_seed, k).
/// The result does not depend on `threads`. Throws std::invalid_argument when
/// the policy was trained on a different action grid.
std::vector<EpisodeResult> evaluate_policy(const Policy& policy, const EvaluationSetup& setup, int n_episodes,
                                           std::uint64_t base_seed, int threads = 1);

double mean(std::span<const double> xs);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double stddev(std::span<const double> xs);

/// Pooled-std standardized mean difference. Zero pooled std gives 0 for equal
/// means and a signed infinity otherwise.
double cohens_d(std::span<const double> a, std::span<const double> b);

/// Two-sided Welch t-test p-value.
double welch_test(std::span<const double> a, std::span<const double> b);

std::pair<double, double> confidence_interval(std::span<const double> xs, double level = 0.95);

struct MethodSummary {
  std::string method;
  int n_episodes = 0;
  double mean_return = 0.0;
  double std_return = 0.0;
  double mean_loss = 0.0;
  double std_loss = 0.0;
  LossComponents component_mean;
  LossComponents component_std;
  double mean_length = 0.0;
  int terminations = 0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

struct Comparison {
  std::string method_a;
  std::string method_b;
  double cohens_d = 0.0;
  double p_value = 1.0;
  std::pair<double, double> ci_a;
  std::pair<double, double> ci_b;
};

MethodSummary summarize(const std::string& method, std::span<const EpisodeResult> results);

struct MethodResults {
  std::string method;
  std::vector<EpisodeResult> episodes;
};

struct Report {
  std::vector<MethodSummary> summaries;  // sorted by mean return, best first
  std::vector<Comparison> comparisons;
};

/// Summaries sorted by mean return descending (ties by name) and all pairwise
/// comparisons in that order.
Report build_report(std::span<const MethodResults> results);

/// Writes summary.csv, components.csv, pairwise.csv (two or more methods),
/// episodes.csv and manifest.json into `out_dir`.
Report compare_all(std::span<const MethodResults> results, const std::filesystem::path& out_dir,
                   const std::string& manifest_json);

void write_summary_csv(std::ostream& out, std::span<const MethodSummary> summaries);
void write_components_csv(std::ostream& out, std::span<const MethodSummary> summaries);
void write_pairwise_csv(std::ostream& out, std::span<const Comparison> comparisons);
void write_episodes_csv(std::ostream& out, std::span<const MethodResults> results);

}  // namespace mpolicy
