#pragma once

// Versioned plain-text agent files: a magic line followed by one
// `key value...` line per field. Doubles are written in shortest
// round-trip form so save -> load is bit-exact.
//
//   mpolicy-agent 1
//   method q_legacy
//   kind tabular
//   grid -0.5 0 0.5
//   discretizer legacy 4 inflation -2 12 6 ...
//   q_values ...

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mpolicy/belief.hpp"
#include "mpolicy/discretizer.hpp"
#include "mpolicy/environment.hpp"

namespace mpolicy {

class Policy;

class AgentWriter {
 public:
  AgentWriter(std::ostream& out, const std::string& method, std::string_view kind, const ActionGrid& grid);

  void discretizer(const Discretizer& d);
  void belief(const BeliefSettings& b);
  void word(std::string_view key, std::string_view value);
  void scalar(std::string_view key, double value);
  void values(std::string_view key, std::span<const double> values);
  void counts(std::string_view key, std::span<const std::uint64_t> counts);

 private:
  std::ostream& out_;
};

class AgentRecord {
 public:
  std::string method;
  std::string kind;
  std::optional<ActionGrid> grid;

  bool has(const std::string& key) const { return fields_.contains(key); }
  const std::vector<std::string>& field(const std::string& key) const;
  std::string word(const std::string& key) const;
  double scalar(const std::string& key) const;
  std::vector<double> values(const std::string& key, std::optional<std::size_t> expected = std::nullopt) const;
  std::vector<std::uint64_t> counts(const std::string& key, std::optional<std::size_t> expected = std::nullopt) const;
  Discretizer discretizer() const;
  std::optional<BeliefSettings> belief() const;

  std::map<std::string, std::vector<std::string>>& fields() { return fields_; }

 private:
  std::map<std::string, std::vector<std::string>> fields_;
};

AgentRecord read_agent_record(std::istream& in);

void save_policy(std::ostream& out, const Policy& policy);
void save_policy(const std::filesystem::path& path, const Policy& policy);
std::unique_ptr<Policy> load_policy(std::istream& in);
std::unique_ptr<Policy> load_policy(const std::filesystem::path& path);

}  // namespace mpolicy
