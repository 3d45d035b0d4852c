// mpolicy: fit dynamics, train agents, evaluate and compare monetary policy
// methods from the command line.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "mpolicy/agents/agent_io.hpp"
#include "mpolicy/config.hpp"
#include "mpolicy/dynamics.hpp"
#include "mpolicy/errors.hpp"
#include "mpolicy/evaluation.hpp"
#include "mpolicy/market_data.hpp"
#include "mpolicy/pipeline.hpp"
#include "mpolicy/text.hpp"

namespace {

using namespace mpolicy;

constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kDivergence = 3;

struct Common {
  std::string config_path;
  std::string data_dir;
  std::optional<std::uint64_t> seed;
  bool print_config = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "JSON run configuration");
  cmd->add_option("--data-dir", c.data_dir, "directory with the FRED CSV extracts");
  cmd->add_option("--seed", c.seed, "run seed");
  cmd->add_flag("--print-config", c.print_config, "print the resolved configuration and exit");
}

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config_path.empty() ? RunConfig{} : load_config(c.config_path);
  if (!c.data_dir.empty()) cfg.data_dir = c.data_dir;
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

bool parse_on_off(const std::string& s) {
  if (s == "on") return true;
  if (s == "off") return false;
  throw ConfigError("--intercept expects 'on' or 'off', got '" + s + "'");
}

StateSeries history_for(const RunConfig& cfg) { return load_state_series(resolve_data_dir(cfg.data_dir)); }


}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reinforcement-learning monetary policy benchmark"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "mpolicy 1.0");

  Common fit_c, train_c, eval_c, cmp_c;

  auto* fit = app.add_subcommand("fit-dynamics", "estimate the linear transition model by OLS");
  add_common(fit, fit_c);
  std::string intercept_flag, fit_out = "model.txt", fit_diag, fit_states;
  fit->add_option("--intercept", intercept_flag, "on|off (overrides the config)");
  fit->add_option("--out", fit_out, "model file to write");
  fit->add_option("--diagnostics", fit_diag, "fit diagnostics CSV (default <out>.diagnostics.csv)");
  fit->add_option("--states-csv", fit_states, "also write the aligned quarterly state series");

  auto* train = app.add_subcommand("train", "train one method and save the agent");
  add_common(train, train_c);
  std::string method, model_path, agent_out, log_path;
  std::optional<int> episodes;
  train->add_option("--method", method, "method name from the registry")->required();
  train->add_option("--episodes", episodes, "override the method's training budget");
  train->add_option("--model", model_path, "model file from fit-dynamics")->required();
  train->add_option("--out", agent_out, "agent file to write")->required();
  train->add_option("--log", log_path, "training log CSV (default <out>.log.csv)");

  auto* evaluate = app.add_subcommand("evaluate", "evaluate saved agents and rule baselines");
  add_common(evaluate, eval_c);
  std::vector<std::string> agent_files;
  std::vector<std::string> baselines{"taylor", "taylor_tuned", "hold"};
  std::string eval_model, eval_out;
  std::optional<int> eval_episodes;
  int eval_threads = 1;
  evaluate->add_option("--agent", agent_files, "saved agent file (repeatable)");
  evaluate->add_option("--baselines", baselines, "rule baselines to include")->delimiter(',');
  evaluate->add_option("--model", eval_model, "model file from fit-dynamics")->required();
  evaluate->add_option("--out-dir", eval_out, "report directory");
  evaluate->add_option("--episodes", eval_episodes, "evaluation episodes per method");
  evaluate->add_option("--threads", eval_threads, "worker threads")->check(CLI::PositiveNumber);

  auto* compare = app.add_subcommand("compare", "fit, train every configured method, evaluate and report");
  add_common(compare, cmp_c);
  std::string cmp_out;
  std::vector<std::string> cmp_methods;
  int cmp_threads = 1;
  compare->add_option("--out-dir", cmp_out, "report directory (default: config output_dir)");
  compare->add_option("--methods", cmp_methods, "methods to run (default: config list)")->delimiter(',');
  compare->add_option("--threads", cmp_threads, "worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kUsage;
  }

  try {
    if (fit->parsed()) {
      RunConfig cfg = resolve(fit_c);
      if (!intercept_flag.empty()) cfg.intercept = parse_on_off(intercept_flag);
      if (fit_c.print_config) {
        std::cout << dump_config(cfg);
        return 0;
      }
      const auto history = history_for(cfg);
      const auto result = fit_ols(history, cfg.intercept);
      save_model(fit_out, result.model);
      std::ofstream diag(fit_diag.empty() ? fit_out + ".diagnostics.csv" : fit_diag, std::ios::binary);
      write_diagnostics(diag, result.diagnostics);
      if (!fit_states.empty()) {
        std::ofstream states(fit_states, std::ios::binary);
        write_state_series_csv(states, history);
      }
      std::cerr << "fitted " << history.states.size() << " quarters, intercept "
                << (cfg.intercept ? "on" : "off") << " -> " << fit_out << '\n';
    } else if (train->parsed()) {
      RunConfig cfg = resolve(train_c);
      if (train_c.print_config) {
        std::cout << dump_config(cfg);
        return 0;
      }
      cfg.hyper.method(method);
      const auto model = load_model(model_path);
      const auto history = history_for(cfg);
      const std::uint64_t seed = train_c.seed.value_or(method_seed(cfg.seed, method));
      TrainingContext ctx{model, history, cfg.reward, cfg.episode, cfg.hyper};
      auto trained = train_agent(method, ctx, episodes, seed);
      save_policy(agent_out, *trained.policy);
      std::ofstream log(log_path.empty() ? agent_out + ".log.csv" : log_path, std::ios::binary);
      write_training_log_csv(log, trained.log);
      std::cerr << "trained " << method << " for " << trained.episodes << " episodes (seed " << seed << ") -> "
                << agent_out << '\n';
    } else if (evaluate->parsed()) {
      RunConfig cfg = resolve(eval_c);
      if (eval_episodes) cfg.eval_episodes = *eval_episodes;
      if (!eval_out.empty()) cfg.output_dir = eval_out;
      cfg.validate();
      if (eval_c.print_config) {
        std::cout << dump_config(cfg);
        return 0;
      }
      const auto model = load_model(eval_model);
      const auto history = history_for(cfg);
      TrainingContext ctx{model, history, cfg.reward, cfg.episode, cfg.hyper};
      std::vector<std::unique_ptr<Policy>> policies;
      std::map<std::string, std::string> extra{{"command", "evaluate"}};
      for (const auto& path : agent_files) {
        if (!std::filesystem::exists(path)) throw DataError("agent file not found: " + path);
        std::ifstream in(path, std::ios::binary);
        std::stringstream bytes;
        bytes << in.rdbuf();
        policies.push_back(load_policy(bytes));
        extra["agent_hash." + policies.back()->method()] = text::fnv1a_hex(bytes.str());
      }
      for (const auto& b : baselines) policies.push_back(make_baseline(b, ctx));
      if (policies.empty()) throw ConfigError("nothing to evaluate: pass --agent files or --baselines");
      std::vector<MethodResults> results;
      const auto seed = evaluation_seed(cfg.seed);
      for (const auto& p : policies) {
        EvaluationSetup setup{model, history, p->grid(), cfg.episode, cfg.reward, cfg.eval_gamma};
        const auto& spec_grid = [&]() -> std::optional<ActionGrid> {
          try {
            return cfg.hyper.grid(cfg.hyper.method(p->method()).grid);
          } catch (const std::invalid_argument&) {
            return std::nullopt;
          }
        }();
        if (spec_grid) setup.grid = *spec_grid;
        results.push_back({p->method(), evaluate_policy(*p, setup, cfg.eval_episodes, seed, eval_threads)});
      }
      const auto report = compare_all(results, cfg.output_dir, make_manifest(cfg, model, extra));
      write_summary_csv(std::cout, report.summaries);
    } else if (compare->parsed()) {
      RunConfig cfg = resolve(cmp_c);
      if (!cmp_methods.empty()) cfg.methods = cmp_methods;
      if (!cmp_out.empty()) cfg.output_dir = cmp_out;
      cfg.validate();
      if (cmp_c.print_config) {
        std::cout << dump_config(cfg);
        return 0;
      }
      const auto history = history_for(cfg);
      const auto result = run_benchmark(cfg, history, cfg.output_dir, cmp_threads,
                                        [](const std::string& msg) { std::cerr << msg << '\n'; });
      write_summary_csv(std::cout, result.report.summaries);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << '\n';
    return kDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return 0;
}
