#include "mpolicy/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>

#include "mpolicy/belief.hpp"
#include "mpolicy/errors.hpp"
#include "mpolicy/rng.hpp"
#include "mpolicy/text.hpp"

namespace mpolicy {

EpisodeResult run_episode(const Policy& policy, const EvaluationSetup& setup, std::uint64_t seed,
                          std::vector<TraceRow>* trace) {
  EpisodeConfig cfg = setup.episode;
  const auto belief = policy.belief();
  cfg.observation_noise_sigma = belief ? belief->observation_sigma : 0.0;
  Environment env(setup.model, setup.history, setup.grid, cfg, setup.reward, seed);
  std::optional<BeliefTracker> tracker;
  if (belief) tracker.emplace(setup.model, setup.history, *belief, mix_seed(seed, 1));

  EpisodeResult r;
  r.method = policy.method();
  r.seed = seed;
  MacroState view = env.reset();
  if (tracker) view = tracker->reset(view);
  if (trace) trace->push_back({0, env.state(), 0.0, 0.0, {}, false});
  double discount = 1.0;
  while (!env.done()) {
    const std::size_t a = policy.act(view);
    const auto out = env.step(a);
    if (!std::isfinite(out.reward)) throw DivergenceError(policy.method() + ": non-finite reward during evaluation");
    r.discounted_return += discount * out.reward;
    discount *= setup.gamma;
    r.mean_loss += out.losses.total();
    r.components.inflation += out.losses.inflation;
    r.components.unemployment += out.losses.unemployment;
    r.components.smoothing += out.losses.smoothing;
    r.terminated = out.terminated;
    if (trace) trace->push_back({env.steps_taken(), out.next_state, out.realized_delta, out.reward, out.losses, out.terminated});
    view = env.observation();
    if (tracker) view = tracker->update(out.next_state.rate, view);
  }
  r.length = env.steps_taken();
  const double n = r.length;
  r.mean_loss /= n;
  r.components.inflation /= n;
  r.components.unemployment /= n;
  r.components.smoothing /= n;
  return r;
}

std::vector<EpisodeResult> evaluate_policy(const Policy& policy, const EvaluationSetup& setup, int n_episodes,
                                           std::uint64_t base_seed, int threads) {
  if (!(policy.grid() == setup.grid)) {
    throw std::invalid_argument("policy '" + policy.method() + "' was trained on a " +
                                std::to_string(policy.grid().size()) + "-action grid but the environment uses " +
                                std::to_string(setup.grid.size()) + " actions");
  }
  if (n_episodes < 1) throw std::invalid_argument("evaluation needs at least one episode");
  std::vector<EpisodeResult> results(static_cast<std::size_t>(n_episodes));
  const auto run = [&](int k) {
    results[k] = run_episode(policy, setup, mix_seed(base_seed, static_cast<std::uint64_t>(k)));
    results[k].episode = k;
  };

  const int workers = std::clamp(threads, 1, n_episodes);
  if (workers == 1) {
    for (int k = 0; k < n_episodes; ++k) run(k);
    return results;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int k = next++; k < n_episodes && !failed; k = next++) {
        try {
          run(k);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return results;
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean of an empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double stddev(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double cohens_d(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("cohens_d needs at least two values per sample");
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double sa = stddev(a), sb = stddev(b);
  const double pooled = std::sqrt(((na - 1.0) * sa * sa + (nb - 1.0) * sb * sb) / (na + nb - 2.0));
  const double diff = mean(a) - mean(b);
  if (pooled == 0.0) {
    if (diff == 0.0) return 0.0;
    return diff > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  }
  return diff / pooled;
}

double welch_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("welch_test needs at least two values per sample");
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double va = std::pow(stddev(a), 2) / na, vb = std::pow(stddev(b), 2) / nb;
  const double diff = mean(a) - mean(b);
  if (va + vb == 0.0) return diff == 0.0 ? 1.0 : 0.0;
  const double t = diff / std::sqrt(va + vb);
  const double df = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  const boost::math::students_t dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

std::pair<double, double> confidence_interval(std::span<const double> xs, double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("confidence level must lie in (0, 1)");
  const double m = mean(xs);
  if (xs.size() < 2) return {m, m};
  const double n = static_cast<double>(xs.size());
  const boost::math::students_t dist(n - 1.0);
  const double half = boost::math::quantile(dist, 0.5 + level / 2.0) * stddev(xs) / std::sqrt(n);
  return {m - half, m + half};
}

MethodSummary summarize(const std::string& method, std::span<const EpisodeResult> results) {
  if (results.empty()) throw std::invalid_argument("no episodes to summarize for " + method);
  std::vector<double> ret, loss, inf, unemp, smooth;
  MethodSummary s;
  s.method = method;
  s.n_episodes = static_cast<int>(results.size());
  double length = 0.0;
  for (const auto& r : results) {
    ret.push_back(r.discounted_return);
    loss.push_back(r.mean_loss);
    inf.push_back(r.components.inflation);
    unemp.push_back(r.components.unemployment);
    smooth.push_back(r.components.smoothing);
    length += r.length;
    s.terminations += r.terminated ? 1 : 0;
  }
  s.mean_return = mean(ret);
  s.std_return = stddev(ret);
  s.mean_loss = mean(loss);
  s.std_loss = stddev(loss);
  s.component_mean = {mean(inf), mean(unemp), mean(smooth)};
  s.component_std = {stddev(inf), stddev(unemp), stddev(smooth)};
  s.mean_length = length / static_cast<double>(results.size());
  std::tie(s.ci_lo, s.ci_hi) = confidence_interval(ret);
  return s;
}

namespace {

std::vector<double> returns_of(const MethodResults& m) {
  std::vector<double> out;
  out.reserve(m.episodes.size());
  for (const auto& e : m.episodes) out.push_back(e.discounted_return);
  return out;
}

std::string num(double v) { return text::fixed(v); }

}  // namespace

Report build_report(std::span<const MethodResults> results) {
  std::vector<std::size_t> order(results.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Report rep;
  std::vector<MethodSummary> raw;
  for (const auto& m : results) raw.push_back(summarize(m.method, m.episodes));
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (raw[x].mean_return != raw[y].mean_return) return raw[x].mean_return > raw[y].mean_return;
    return raw[x].method < raw[y].method;
  });
  for (std::size_t i : order) rep.summaries.push_back(raw[i]);

  for (std::size_t x = 0; x < order.size(); ++x) {
    const auto ra = returns_of(results[order[x]]);
    for (std::size_t y = x + 1; y < order.size(); ++y) {
      const auto rb = returns_of(results[order[y]]);
      Comparison c;
      c.method_a = results[order[x]].method;
      c.method_b = results[order[y]].method;
      if (ra.size() >= 2 && rb.size() >= 2) {
        c.cohens_d = cohens_d(ra, rb);
        c.p_value = welch_test(ra, rb);
      } else {
        c.cohens_d = std::numeric_limits<double>::quiet_NaN();
        c.p_value = std::numeric_limits<double>::quiet_NaN();
      }
      c.ci_a = confidence_interval(ra);
      c.ci_b = confidence_interval(rb);
      rep.comparisons.push_back(c);
    }
  }
  return rep;
}

void write_summary_csv(std::ostream& out, std::span<const MethodSummary> summaries) {
  out << "method,mean_return,std_return,mean_loss\n";
  for (const auto& s : summaries) {
    out << s.method << ',' << num(s.mean_return) << ',' << num(s.std_return) << ',' << num(s.mean_loss) << '\n';
  }
}

void write_components_csv(std::ostream& out, std::span<const MethodSummary> summaries) {
  out << "method,n_episodes,mean_loss,std_loss,inflation_mean,inflation_std,unemployment_mean,unemployment_std,"
         "smoothing_mean,smoothing_std,mean_length,terminations,return_ci_lo,return_ci_hi\n";
  for (const auto& s : summaries) {
    out << s.method << ',' << s.n_episodes << ',' << num(s.mean_loss) << ',' << num(s.std_loss) << ','
        << num(s.component_mean.inflation) << ',' << num(s.component_std.inflation) << ','
        << num(s.component_mean.unemployment) << ',' << num(s.component_std.unemployment) << ','
        << num(s.component_mean.smoothing) << ',' << num(s.component_std.smoothing) << ',' << num(s.mean_length)
        << ',' << s.terminations << ',' << num(s.ci_lo) << ',' << num(s.ci_hi) << '\n';
  }
}

void write_pairwise_csv(std::ostream& out, std::span<const Comparison> comparisons) {
  out << "method_a,method_b,cohens_d,p_value,ci_a_lo,ci_a_hi,ci_b_lo,ci_b_hi\n";
  for (const auto& c : comparisons) {
    out << c.method_a << ',' << c.method_b << ',' << num(c.cohens_d) << ',' << text::exact(c.p_value) << ','
        << num(c.ci_a.first) << ',' << num(c.ci_a.second) << ',' << num(c.ci_b.first) << ',' << num(c.ci_b.second)
        << '\n';
  }
}

void write_episodes_csv(std::ostream& out, std::span<const MethodResults> results) {
  out << "method,episode,seed,discounted_return,mean_loss,inflation_loss,unemployment_loss,smoothing_loss,length,"
         "terminated\n";
  for (const auto& m : results) {
    for (const auto& e : m.episodes) {
      out << m.method << ',' << e.episode << ',' << e.seed << ',' << num(e.discounted_return) << ','
          << num(e.mean_loss) << ',' << num(e.components.inflation) << ',' << num(e.components.unemployment) << ','
          << num(e.components.smoothing) << ',' << e.length << ',' << (e.terminated ? 1 : 0) << '\n';
    }
  }
}

Report compare_all(std::span<const MethodResults> results, const std::filesystem::path& out_dir,
                   const std::string& manifest_json) {
  if (results.empty()) throw std::invalid_argument("nothing to compare: no methods were evaluated");
  auto rep = build_report(results);
  std::filesystem::create_directories(out_dir);
  const auto open = [&](const char* name) {
    std::ofstream f(out_dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (out_dir / name).string());
    return f;
  };
  {
    auto f = open("summary.csv");
    write_summary_csv(f, rep.summaries);
  }
  {
    auto f = open("components.csv");
    write_components_csv(f, rep.summaries);
  }
  std::filesystem::remove(out_dir / "pairwise.csv");
  if (results.size() < 2) {
    std::cerr << "warning: only one method evaluated; pairwise comparison skipped\n";
  } else {
    auto f = open("pairwise.csv");
    write_pairwise_csv(f, rep.comparisons);
  }
  {
    auto f = open("episodes.csv");
    write_episodes_csv(f, results);
  }
  {
    auto f = open("manifest.json");
    f << manifest_json;
    if (manifest_json.empty() || manifest_json.back() != '\n') f << '\n';
  }
  return rep;
}

}  // namespace mpolicy
