#include "mpolicy/pipeline.hpp"

#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "mpolicy/agents/agent_io.hpp"
#include "mpolicy/dynamics.hpp"
#include "mpolicy/text.hpp"

namespace mpolicy {

std::uint64_t method_seed(std::uint64_t run_seed, const std::string& method) {
  return mix_seed(run_seed, std::stoull(text::fnv1a_hex(method), nullptr, 16));
}

std::uint64_t evaluation_seed(std::uint64_t run_seed) { return mix_seed(run_seed, 0xe7a1); }

void run_jobs(std::size_t jobs, int threads, const std::function<void(std::size_t)>& job) {
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), jobs);
  std::vector<std::exception_ptr> errors(jobs);
  if (workers <= 1) {
    for (std::size_t k = 0; k < jobs; ++k) job(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < jobs; k = next++) {
        try {
          job(k);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string make_manifest(const RunConfig& cfg, const TransitionModel& model,
                          const std::map<std::string, std::string>& extra) {
  std::ostringstream model_text;
  save_model(model_text, model);
  const std::string config_text = dump_config(cfg);
  nlohmann::ordered_json doc;
  doc["seed"] = cfg.seed;
  doc["config_hash"] = text::fnv1a_hex(config_text);
  doc["model_hash"] = text::fnv1a_hex(model_text.str());
  for (const auto& [k, v] : extra) doc[k] = v;
  doc["config"] = nlohmann::ordered_json::parse(config_text);
  return doc.dump(2) + "\n";
}

BenchmarkResult run_benchmark(const RunConfig& cfg, const StateSeries& history, const std::filesystem::path& out_dir,
                              int threads, const ProgressFn& progress) {
  const auto say = [&](const std::string& msg) {
    if (progress) progress(msg);
  };
  std::filesystem::create_directories(out_dir / "agents");
  std::filesystem::create_directories(out_dir / "training");

  const auto fit = fit_ols(history, cfg.intercept);
  save_model(out_dir / "model.txt", fit.model);
  {
    std::ofstream diag(out_dir / "fit_diagnostics.csv", std::ios::binary);
    write_diagnostics(diag, fit.diagnostics);
  }
  say("fitted dynamics on " + std::to_string(history.states.size()) + " quarters");

  TrainingContext ctx{fit.model, history, cfg.reward, cfg.episode, cfg.hyper};
  std::vector<std::unique_ptr<Policy>> policies(cfg.methods.size());
  std::mutex say_mutex;
  run_jobs(cfg.methods.size(), threads, [&](std::size_t k) {
    const auto& name = cfg.methods[k];
    auto trained = train_agent(name, ctx, std::nullopt, method_seed(cfg.seed, name));
    save_policy(out_dir / "agents" / (name + ".agent"), *trained.policy);
    if (!trained.log.empty()) {
      std::ofstream log(out_dir / "training" / (name + ".csv"), std::ios::binary);
      write_training_log_csv(log, trained.log);
    }
    policies[k] = std::move(trained.policy);
    std::lock_guard lock(say_mutex);
    say("trained " + name + (trained.episodes > 0 ? " (" + std::to_string(trained.episodes) + " episodes)" : ""));
  });

  BenchmarkResult out{fit.model, {}, {}, {}};
  const auto eval_seed = evaluation_seed(cfg.seed);
  for (std::size_t k = 0; k < cfg.methods.size(); ++k) {
    const auto& spec = cfg.hyper.method(cfg.methods[k]);
    EvaluationSetup setup{fit.model, history, cfg.hyper.grid(spec.grid), cfg.episode, cfg.reward, cfg.eval_gamma};
    out.results.push_back({cfg.methods[k], evaluate_policy(*policies[k], setup, cfg.eval_episodes, eval_seed, threads)});
  }
  say("evaluated " + std::to_string(cfg.methods.size()) + " methods over " + std::to_string(cfg.eval_episodes) +
      " episodes each");
  out.manifest = make_manifest(cfg, fit.model, {{"command", "compare"}});
  out.report = compare_all(out.results, out_dir, out.manifest);
  return out;
}

}  // namespace mpolicy
