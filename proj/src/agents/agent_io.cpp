#include "mpolicy/agents/agent_io.hpp"

#include <fstream>
#include <sstream>

#include "mpolicy/agents/actor_critic.hpp"
#include "mpolicy/agents/baselines.hpp"
#include "mpolicy/agents/bayes.hpp"
#include "mpolicy/agents/dqn.hpp"
#include "mpolicy/agents/tabular.hpp"
#include "mpolicy/errors.hpp"
#include "mpolicy/text.hpp"

namespace mpolicy {

namespace {
constexpr const char* kAgentMagic = "mpolicy-agent";
constexpr int kAgentVersion = 1;
}  // namespace

AgentWriter::AgentWriter(std::ostream& out, const std::string& method, std::string_view kind, const ActionGrid& grid)
    : out_(out) {
  out_ << kAgentMagic << ' ' << kAgentVersion << '\n';
  word("method", method);
  word("kind", kind);
  values("grid", grid.deltas());
}

void AgentWriter::discretizer(const Discretizer& d) {
  out_ << "discretizer ";
  write_discretizer(out_, d);
  out_ << '\n';
}

void AgentWriter::belief(const BeliefSettings& b) {
  out_ << "belief " << text::exact(b.observation_sigma) << ' ' << b.particles << ' ' << text::exact(b.ess_fraction)
       << '\n';
}

void AgentWriter::word(std::string_view key, std::string_view value) { out_ << key << ' ' << value << '\n'; }

void AgentWriter::scalar(std::string_view key, double value) { out_ << key << ' ' << text::exact(value) << '\n'; }

void AgentWriter::values(std::string_view key, std::span<const double> values) {
  out_ << key;
  for (double v : values) out_ << ' ' << text::exact(v);
  out_ << '\n';
}

void AgentWriter::counts(std::string_view key, std::span<const std::uint64_t> counts) {
  out_ << key;
  for (auto v : counts) out_ << ' ' << v;
  out_ << '\n';
}

const std::vector<std::string>& AgentRecord::field(const std::string& key) const {
  auto it = fields_.find(key);
  if (it == fields_.end()) throw FormatError("agent file: missing field '" + key + "'");
  return it->second;
}

std::string AgentRecord::word(const std::string& key) const {
  const auto& f = field(key);
  if (f.size() != 1) throw FormatError("agent file: field '" + key + "' must hold one word");
  return f.front();
}

double AgentRecord::scalar(const std::string& key) const {
  return text::parse_double(word(key), "agent field " + key);
}

std::vector<double> AgentRecord::values(const std::string& key, std::optional<std::size_t> expected) const {
  const auto& f = field(key);
  if (expected && f.size() != *expected) {
    throw FormatError("agent file: field '" + key + "' has " + std::to_string(f.size()) + " values, expected " +
                      std::to_string(*expected));
  }
  std::vector<double> out;
  out.reserve(f.size());
  for (const auto& t : f) out.push_back(text::parse_double(t, "agent field " + key));
  return out;
}

std::vector<std::uint64_t> AgentRecord::counts(const std::string& key, std::optional<std::size_t> expected) const {
  const auto& f = field(key);
  if (expected && f.size() != *expected) throw FormatError("agent file: field '" + key + "' has wrong size");
  std::vector<std::uint64_t> out;
  out.reserve(f.size());
  for (const auto& t : f) {
    const auto v = text::parse_int(t, "agent field " + key);
    if (v < 0) throw FormatError("agent file: negative count in '" + key + "'");
    out.push_back(static_cast<std::uint64_t>(v));
  }
  return out;
}

Discretizer AgentRecord::discretizer() const {
  std::vector<std::string> tokens = field("discretizer");
  return read_discretizer(tokens, 0);
}

std::optional<BeliefSettings> AgentRecord::belief() const {
  if (!has("belief")) return std::nullopt;
  const auto& f = field("belief");
  if (f.size() != 3) throw FormatError("agent file: belief needs sigma, particles, ess fraction");
  BeliefSettings b;
  b.observation_sigma = text::parse_double(f[0], "belief sigma");
  b.particles = static_cast<std::size_t>(text::parse_int(f[1], "belief particles"));
  b.ess_fraction = text::parse_double(f[2], "belief ess fraction");
  return b;
}

AgentRecord read_agent_record(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty agent file");
  auto head = text::tokens(line);
  if (head.size() != 2 || head[0] != kAgentMagic) throw FormatError("not an agent file");
  if (head[1] != std::to_string(kAgentVersion)) throw FormatError("unsupported agent file version " + head[1]);
  AgentRecord rec;
  while (std::getline(in, line)) {
    auto tok = text::tokens(line);
    if (tok.empty()) continue;
    auto key = tok.front();
    tok.erase(tok.begin());
    if (rec.fields().contains(key)) throw FormatError("agent file: duplicate field '" + key + "'");
    rec.fields().emplace(std::move(key), std::move(tok));
  }
  rec.method = rec.word("method");
  rec.kind = rec.word("kind");
  try {
    rec.grid = ActionGrid(rec.values("grid"));
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("agent file: ") + e.what());
  }
  return rec;
}

void save_policy(std::ostream& out, const Policy& policy) { policy.save(out); }

void save_policy(const std::filesystem::path& path, const Policy& policy) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  policy.save(out);
}

std::unique_ptr<Policy> load_policy(std::istream& in) {
  const auto rec = read_agent_record(in);
  try {
    if (rec.kind == "tabular") {
      auto agent = std::make_unique<TabularQAgent>(rec.method, rec.discretizer(), *rec.grid, rec.belief());
      const auto n = agent->table().states() * agent->table().actions();
      agent->table().mutable_values() = rec.values("q_values", n);
      agent->table().mutable_visit_counts() = rec.counts("visits", n);
      return agent;
    }
    if (rec.kind == "bayes") return BayesQAgent::from_record(rec);
    if (rec.kind == "actor_critic") return ActorCriticAgent::from_record(rec);
    if (rec.kind == "dqn") return DqnAgent::from_record(rec);
    if (rec.kind == "taylor") return TaylorAgent::from_record(rec);
    if (rec.kind == "hold") return std::make_unique<HoldAgent>(rec.method, *rec.grid);
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("agent file: ") + e.what());
  }
  throw FormatError("agent file: unknown kind '" + rec.kind + "'");
}

std::unique_ptr<Policy> load_policy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open agent file " + path.string());
  return load_policy(in);
}

}  // namespace mpolicy
