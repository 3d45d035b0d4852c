#include "mpolicy/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include "json.hpp"
#include <set>
#include <sstream>

#include "mpolicy/errors.hpp"

#ifndef MPOLICY_SAMPLE_DATA_DIR
#define MPOLICY_SAMPLE_DATA_DIR "data/sample"
#endif

namespace mpolicy {

using nlohmann::ordered_json;

namespace {

std::string family_name(MethodFamily f) {
  switch (f) {
    case MethodFamily::q_learning: return "q_learning";
    case MethodFamily::sarsa: return "sarsa";
    case MethodFamily::actor_critic: return "actor_critic";
    case MethodFamily::dqn: return "dqn";
    case MethodFamily::bayes_thompson: return "bayes_thompson";
    case MethodFamily::bayes_ucb: return "bayes_ucb";
    case MethodFamily::pomdp_q: return "pomdp_q";
    case MethodFamily::taylor: return "taylor";
    case MethodFamily::hold: return "hold";
  }
  return "";
}

MethodFamily parse_family(const std::string& s, const std::string& path) {
  for (auto f : {MethodFamily::q_learning, MethodFamily::sarsa, MethodFamily::actor_critic, MethodFamily::dqn,
                 MethodFamily::bayes_thompson, MethodFamily::bayes_ucb, MethodFamily::pomdp_q, MethodFamily::taylor,
                 MethodFamily::hold}) {
    if (family_name(f) == s) return f;
  }
  throw ConfigError(path + ": unknown method family '" + s + "'");
}

// Reads or writes one JSON object level. The same field list drives parsing
// and dumping so the two cannot drift apart.
class Level {
 public:
  Level(ordered_json* node, std::string path, bool writing) : node_(node), path_(std::move(path)), writing_(writing) {
    if (!writing_ && !node_->is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <class T>
  void field(const char* key, T& value) {
    if (writing_) {
      (*node_)[key] = value;
      return;
    }
    seen_.insert(key);
    auto it = node_->find(key);
    if (it == node_->end()) return;
    try {
      value = it->template get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(child(key) + ": wrong type");
    }
  }

  void object(const char* key, const std::function<void(Level&)>& body) {
    if (writing_) {
      ordered_json sub = ordered_json::object();
      Level l(&sub, child(key), true);
      body(l);
      (*node_)[key] = std::move(sub);
      return;
    }
    seen_.insert(key);
    auto it = node_->find(key);
    if (it == node_->end()) return;
    Level l(&*it, child(key), false);
    body(l);
    l.finish();
  }

  /// Free-form children (map keyed by name).
  ordered_json* raw(const char* key) {
    seen_.insert(key);
    if (writing_) {
      (*node_)[key] = ordered_json::object();
      return &(*node_)[key];
    }
    auto it = node_->find(key);
    return it == node_->end() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = node_->begin(); it != node_->end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(child(it.key()) + ": unknown key");
    }
  }

  bool writing() const { return writing_; }
  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  ordered_json* node_;
  std::string path_;
  bool writing_;
  std::set<std::string> seen_;
};

void visit_taylor(Level& l, TaylorParams& t) {
  l.field("r_star", t.r_star);
  l.field("phi_pi", t.phi_pi);
  l.field("phi_y", t.phi_y);
  l.field("pi_star", t.pi_star);
}

void visit_methods(Level& top, Hyperparameters& h) {
  ordered_json* node = top.raw("method_registry");
  if (top.writing()) {
    for (auto& m : h.methods) {
      ordered_json entry = ordered_json::object();
      Level l(&entry, top.child("method_registry." + m.name), true);
      std::string family = family_name(m.family);
      l.field("label", m.label);
      l.field("family", family);
      l.field("discretizer", m.discretizer);
      l.field("grid", m.grid);
      l.field("episodes", m.episodes);
      l.field("epsilon_decay", m.epsilon_decay);
      l.field("taylor_variant", m.taylor_variant);
      (*node)[m.name] = std::move(entry);
    }
    return;
  }
  if (!node) return;
  if (!node->is_object()) throw ConfigError(top.child("method_registry") + ": expected an object");
  for (auto it = node->begin(); it != node->end(); ++it) {
    const std::string path = top.child("method_registry." + it.key());
    auto existing = std::find_if(h.methods.begin(), h.methods.end(), [&](const auto& m) { return m.name == it.key(); });
    MethodSpec spec;
    spec.name = it.key();
    if (existing != h.methods.end()) spec = *existing;
    std::string family = family_name(spec.family);
    Level l(&it.value(), path, false);
    l.field("label", spec.label);
    l.field("family", family);
    l.field("discretizer", spec.discretizer);
    l.field("grid", spec.grid);
    l.field("episodes", spec.episodes);
    l.field("epsilon_decay", spec.epsilon_decay);
    l.field("taylor_variant", spec.taylor_variant);
    l.finish();
    spec.family = parse_family(family, path + ".family");
    if (existing != h.methods.end()) {
      *existing = spec;
    } else {
      h.methods.push_back(spec);
    }
  }
}

void visit_discretizers(Level& top, Hyperparameters& h) {
  ordered_json* node = top.raw("discretizers");
  if (top.writing()) {
    for (const auto& [name, d] : h.discretizers) {
      ordered_json dims = ordered_json::array();
      for (const auto& dim : d.dims()) {
        dims.push_back({{"variable", std::string(variable_name(dim.variable))},
                        {"lower", dim.lower},
                        {"upper", dim.upper},
                        {"bins", dim.bins}});
      }
      (*node)[name] = std::move(dims);
    }
    return;
  }
  if (!node) return;
  if (!node->is_object()) throw ConfigError(top.child("discretizers") + ": expected an object");
  for (auto it = node->begin(); it != node->end(); ++it) {
    const std::string path = top.child("discretizers." + it.key());
    if (!it.value().is_array()) throw ConfigError(path + ": expected an array of dimensions");
    std::vector<DimensionBins> dims;
    for (auto& entry : it.value()) {
      DimensionBins dim{Variable::inflation, 0.0, 0.0, 0};
      std::string variable;
      Level l(&entry, path, false);
      l.field("variable", variable);
      l.field("lower", dim.lower);
      l.field("upper", dim.upper);
      l.field("bins", dim.bins);
      l.finish();
      try {
        dim.variable = parse_variable(variable);
      } catch (const std::exception& e) {
        throw ConfigError(path + ": " + e.what());
      }
      dims.push_back(dim);
    }
    try {
      h.discretizers.insert_or_assign(it.key(), Discretizer(it.key(), dims));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(path + ": " + e.what());
    }
  }
}

void visit(Level& root, RunConfig& c) {
  root.field("data_dir", c.data_dir);
  root.field("intercept", c.intercept);
  root.field("seed", c.seed);
  root.field("eval_episodes", c.eval_episodes);
  root.field("eval_gamma", c.eval_gamma);
  root.field("output_dir", c.output_dir);
  root.field("methods", c.methods);
  root.object("reward", [&](Level& l) {
    l.field("pi_star", c.reward.pi_star);
    l.field("u_star", c.reward.u_star);
    l.field("w_pi", c.reward.w_pi);
    l.field("lambda_u", c.reward.lambda_u);
    l.field("eta", c.reward.eta);
  });
  root.object("episode", [&](Level& l) {
    l.field("horizon", c.episode.horizon);
    l.field("max_abs_inflation", c.episode.max_abs_inflation);
    l.field("unemployment_min", c.episode.unemployment_min);
    l.field("unemployment_max", c.episode.unemployment_max);
    l.field("max_abs_output_gap", c.episode.max_abs_output_gap);
    l.field("rate_min", c.episode.rate_min);
    l.field("rate_max", c.episode.rate_max);
  });
  auto& h = c.hyper;
  root.object("training", [&](Level& t) {
    t.field("default_episodes", h.default_episodes);
    t.object("tabular", [&](Level& l) {
      l.field("alpha", h.tabular.alpha);
      l.field("gamma", h.tabular.gamma);
      l.field("epsilon", h.tabular.epsilon);
      l.field("epsilon_start", h.tabular.epsilon_start);
      l.field("epsilon_end", h.tabular.epsilon_end);
    });
    t.object("actor_critic", [&](Level& l) {
      l.field("alpha_theta", h.actor_critic.alpha_theta);
      l.field("alpha_w", h.actor_critic.alpha_w);
      l.field("gamma", h.actor_critic.gamma);
      l.field("reinforce", h.actor_critic.reinforce);
    });
    t.object("dqn", [&](Level& l) {
      l.field("hidden", h.dqn.hidden);
      l.field("buffer_capacity", h.dqn.buffer_capacity);
      l.field("batch_size", h.dqn.batch_size);
      l.field("learning_rate", h.dqn.learning_rate);
      l.field("beta1", h.dqn.beta1);
      l.field("beta2", h.dqn.beta2);
      l.field("gamma", h.dqn.gamma);
      l.field("target_sync_steps", h.dqn.target_sync_steps);
      l.field("epsilon_start", h.dqn.epsilon_start);
      l.field("epsilon_end", h.dqn.epsilon_end);
      l.field("epsilon_decay_fraction", h.dqn.epsilon_decay_fraction);
    });
    t.object("bayes", [&](Level& l) {
      l.field("prior_mu", h.bayes.prior_mu);
      l.field("prior_sigma", h.bayes.prior_sigma);
      l.field("obs_noise_sigma", h.bayes.obs_noise_sigma);
      l.field("ucb_c", h.bayes.ucb_c);
      l.field("gamma", h.bayes.gamma);
    });
    t.object("belief", [&](Level& l) {
      l.field("observation_sigma", h.belief.observation_sigma);
      l.field("particles", h.belief.particles);
      l.field("ess_fraction", h.belief.ess_fraction);
    });
    t.object("taylor", [&](Level& l) { visit_taylor(l, h.taylor); });
    t.object("taylor_tuned", [&](Level& l) { visit_taylor(l, h.taylor_tuned); });
    t.field("grids", h.grids);
    visit_discretizers(t, h);
    visit_methods(t, h);
  });
}

}  // namespace

void RunConfig::validate() const {
  if (eval_episodes < 1) throw ConfigError("eval_episodes must be at least 1");
  if (!(eval_gamma > 0.0 && eval_gamma <= 1.0)) throw ConfigError("eval_gamma must lie in (0, 1]");
  if (hyper.default_episodes < 1) throw ConfigError("training.default_episodes must be at least 1");
  if (hyper.belief.particles < 1) throw ConfigError("training.belief.particles must be at least 1");
  if (hyper.dqn.batch_size < 1 || hyper.dqn.buffer_capacity < hyper.dqn.batch_size) {
    throw ConfigError("training.dqn: need 1 <= batch_size <= buffer_capacity");
  }
  try {
    episode.validate();
    for (const auto& [name, deltas] : hyper.grids) ActionGrid check(deltas);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  for (const auto& name : methods) {
    const MethodSpec* spec = nullptr;
    try {
      spec = &hyper.method(name);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (!hyper.grids.count(spec->grid)) throw ConfigError(name + ": unknown action grid '" + spec->grid + "'");
    const bool tabular = spec->family == MethodFamily::q_learning || spec->family == MethodFamily::sarsa ||
                         spec->family == MethodFamily::pomdp_q || spec->family == MethodFamily::bayes_thompson ||
                         spec->family == MethodFamily::bayes_ucb;
    if (tabular && !hyper.discretizers.count(spec->discretizer)) {
      throw ConfigError(name + ": unknown discretizer '" + spec->discretizer + "'");
    }
  }
}

RunConfig parse_config(const std::string& json_text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  Level root(&doc, "", false);
  visit(root, cfg);
  root.finish();
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string dump_config(const RunConfig& cfg) {
  ordered_json doc = ordered_json::object();
  RunConfig copy = cfg;
  Level root(&doc, "", true);
  visit(root, copy);
  return doc.dump(2) + "\n";
}

std::filesystem::path resolve_data_dir(const std::string& configured) {
  if (!configured.empty()) return configured;
  if (const char* env = std::getenv("MPOLICY_DATA_DIR"); env && *env) return env;
  return MPOLICY_SAMPLE_DATA_DIR;
}

}  // namespace mpolicy
