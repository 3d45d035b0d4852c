#pragma once

// FRED-format ingestion and construction of the quarterly macro state history.

#include <chrono>
#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mpolicy/macro_state.hpp"

namespace mpolicy {

struct Observation {
  std::chrono::year_month_day date;
  std::optional<double> value;  // nullopt for FRED's '.' marker
};

struct RawSeries {
  std::string series_id;
  std::vector<Observation> observations;
};

struct Quarter {
  int year = 0;
  int q = 1;  // 1..4

  static Quarter of(std::chrono::year_month_day date);
  Quarter shifted(int quarters) const;
  Quarter next() const { return shifted(1); }
  Quarter prev() const { return shifted(-1); }
  auto operator<=>(const Quarter&) const = default;
};

/// Contiguous run of quarters from the first to the last observed quarter.
/// Quarters without data hold nullopt.
struct QuarterlyColumn {
  Quarter first;
  std::vector<std::optional<double>> values;

  std::size_t size() const { return values.size(); }
  Quarter quarter(std::size_t k) const { return first.shifted(static_cast<int>(k)); }
};

enum class Aggregation { mean_of_months, quarter_value };

/// Canonical column names and the FRED series backing each of them.
namespace columns {
inline constexpr const char* cpi = "cpi";
inline constexpr const char* unemployment = "unemployment";
inline constexpr const char* gdp = "gdp";
inline constexpr const char* gdp_potential = "gdp_potential";
inline constexpr const char* fedfunds = "fedfunds";
}  // namespace columns

struct SeriesBinding {
  const char* column;
  const char* series_id;
  Aggregation aggregation;
};

/// CPIAUCSL, UNRATE, GDPC1, GDPPOT, FEDFUNDS.
const std::vector<SeriesBinding>& standard_bindings();

/// Rows are quarters that had every column present. Quarters need not be
/// consecutive; a missing quarter simply has no row.
struct QuarterlyFrame {
  std::vector<Quarter> quarters;
  std::map<std::string, std::vector<double>> columns;
};

/// Historical macro states. `quarters[k]` labels `states[k]`; a transition
/// k -> k+1 exists only when the two quarters are adjacent.
struct StateSeries {
  std::vector<Quarter> quarters;
  std::vector<MacroState> states;

  std::size_t size() const { return states.size(); }
  bool empty() const { return states.empty(); }
  bool has_transition(std::size_t k) const {
    return k + 1 < quarters.size() && quarters[k].next() == quarters[k + 1];
  }
  /// Indices k with a valid (k, k+1) pair.
  std::vector<std::size_t> transition_starts() const;
  /// Indices k where a gap precedes row k.
  std::vector<std::size_t> gap_positions() const;
};

RawSeries parse_fred_csv(const std::filesystem::path& path);
RawSeries parse_fred_csv(std::istream& in, const std::string& source_name);

QuarterlyColumn to_quarterly(const RawSeries& series, Aggregation method);

/// Year-over-year percent change; the first four quarters are missing.
QuarterlyColumn yoy_inflation(const QuarterlyColumn& cpi);

QuarterlyColumn output_gap(const QuarterlyColumn& gdp, const QuarterlyColumn& gdp_potential);

/// Inner-joins the columns on quarter and drops rows with any missing value.
QuarterlyFrame align(const std::map<std::string, QuarterlyColumn>& columns);

StateSeries build_state_series(const QuarterlyFrame& frame);

/// Reads the five standard series from `dir` (files named <SERIES_ID>.csv).
QuarterlyFrame load_frame(const std::filesystem::path& dir);
StateSeries load_state_series(const std::filesystem::path& dir);

void write_state_series_csv(std::ostream& out, const StateSeries& series);

}  // namespace mpolicy
