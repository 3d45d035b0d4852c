#pragma once

// End-to-end benchmark: fit dynamics, train every configured method, evaluate
// greedily and write the report directory.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mpolicy/config.hpp"
#include "mpolicy/evaluation.hpp"
#include "mpolicy/market_data.hpp"

namespace mpolicy {

/// Training seed for one method: depends on the run seed and the method name
/// only, never on list position or scheduling.
std::uint64_t method_seed(std::uint64_t run_seed, const std::string& method);
/// Shared evaluation seed so every method faces the same start states.
std::uint64_t evaluation_seed(std::uint64_t run_seed);

using ProgressFn = std::function<void(const std::string&)>;

/// Runs `jobs` independent tasks on up to `threads` workers. The first
/// exception (in job order) is rethrown after all workers finish.
void run_jobs(std::size_t jobs, int threads, const std::function<void(std::size_t)>& job);

struct BenchmarkResult {
  TransitionModel model;
  std::vector<MethodResults> results;
  Report report;
  std::string manifest;
};

/// Writes model.txt, fit_diagnostics.csv, agents/, training/ and the
/// evaluation reports into `out_dir`.
BenchmarkResult run_benchmark(const RunConfig& cfg, const StateSeries& history, const std::filesystem::path& out_dir,
                              int threads, const ProgressFn& progress = {});

/// Manifest JSON for a run: seed, resolved config, config and model hashes and
/// any extra string fields.
std::string make_manifest(const RunConfig& cfg, const TransitionModel& model,
                          const std::map<std::string, std::string>& extra = {});

}  // namespace mpolicy
