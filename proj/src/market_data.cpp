#include "mpolicy/market_data.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "mpolicy/errors.hpp"
#include "mpolicy/text.hpp"

namespace mpolicy {

namespace {

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::optional<std::chrono::year_month_day> parse_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto y = s.substr(0, 4), m = s.substr(5, 2), d = s.substr(8, 2);
  if (!all_digits(y) || !all_digits(m) || !all_digits(d)) return std::nullopt;
  std::chrono::year_month_day date{std::chrono::year{std::stoi(std::string(y))},
                                   std::chrono::month{static_cast<unsigned>(std::stoi(std::string(m)))},
                                   std::chrono::day{static_cast<unsigned>(std::stoi(std::string(d)))}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::string where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line);
}

const char* series_for_column(const std::string& column) {
  for (const auto& b : standard_bindings()) {
    if (column == b.column) return b.series_id;
  }
  return "?";
}

// Column over the contiguous range spanned by `quarters`, with holes where the
// frame has no row.
QuarterlyColumn frame_column(const QuarterlyFrame& frame, const std::vector<double>& values) {
  QuarterlyColumn col{frame.quarters.front(), {}};
  const Quarter last = frame.quarters.back();
  for (Quarter q = col.first; q <= last; q = q.next()) col.values.emplace_back();
  for (std::size_t k = 0; k < frame.quarters.size(); ++k) {
    const auto offset = (frame.quarters[k].year - col.first.year) * 4 + (frame.quarters[k].q - col.first.q);
    col.values[static_cast<std::size_t>(offset)] = values[k];
  }
  return col;
}

}  // namespace

Quarter Quarter::of(std::chrono::year_month_day date) {
  const auto month = static_cast<unsigned>(date.month());
  return {static_cast<int>(date.year()), static_cast<int>((month - 1) / 3 + 1)};
}

Quarter Quarter::shifted(int quarters) const {
  int index = year * 4 + (q - 1) + quarters;
  // floor division for negative offsets
  int y = index >= 0 ? index / 4 : -((-index + 3) / 4);
  return {y, index - y * 4 + 1};
}

std::vector<std::size_t> StateSeries::transition_starts() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k + 1 < quarters.size(); ++k) {
    if (has_transition(k)) out.push_back(k);
  }
  return out;
}

std::vector<std::size_t> StateSeries::gap_positions() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 1; k < quarters.size(); ++k) {
    if (quarters[k - 1].next() != quarters[k]) out.push_back(k);
  }
  return out;
}

const std::vector<SeriesBinding>& standard_bindings() {
  static const std::vector<SeriesBinding> bindings = {
      {columns::cpi, "CPIAUCSL", Aggregation::mean_of_months},
      {columns::unemployment, "UNRATE", Aggregation::mean_of_months},
      {columns::gdp, "GDPC1", Aggregation::quarter_value},
      {columns::gdp_potential, "GDPPOT", Aggregation::quarter_value},
      {columns::fedfunds, "FEDFUNDS", Aggregation::mean_of_months},
  };
  return bindings;
}

RawSeries parse_fred_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_fred_csv(in, path.string());
}

RawSeries parse_fred_csv(std::istream& in, const std::string& source_name) {
  RawSeries series;
  std::string line;
  std::size_t line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (!text::trim(line).empty()) break;
  }
  auto header = text::split(text::trim(line), ',');
  if (header.size() != 2 || (text::trim(header[0]) != "DATE" && text::trim(header[0]) != "observation_date") ||
      text::trim(header[1]).empty()) {
    throw ParseError(where(source_name, line_no) + ": expected header 'DATE,<SERIES_ID>'");
  }
  series.series_id = std::string(text::trim(header[1]));

  while (std::getline(in, line)) {
    ++line_no;
    auto trimmed = text::trim(line);
    if (trimmed.empty()) continue;
    auto fields = text::split(trimmed, ',');
    if (fields.size() != 2) throw ParseError(where(source_name, line_no) + ": expected two fields");
    auto date = parse_iso_date(text::trim(fields[0]));
    if (!date) {
      throw ParseError(where(source_name, line_no) + ": malformed date '" + std::string(fields[0]) + "'");
    }
    if (!series.observations.empty() && *date <= series.observations.back().date) {
      throw ParseError(where(source_name, line_no) + ": dates must be strictly increasing");
    }
    Observation obs{*date, std::nullopt};
    auto value = text::trim(fields[1]);
    if (value != ".") obs.value = text::parse_double(value, where(source_name, line_no));
    series.observations.push_back(obs);
  }
  if (series.observations.empty()) {
    throw InsufficientDataError(source_name + ": series " + series.series_id + " has no observations");
  }
  return series;
}

QuarterlyColumn to_quarterly(const RawSeries& series, Aggregation method) {
  if (series.observations.empty()) {
    throw InsufficientDataError("series " + series.series_id + " is empty");
  }
  const Quarter first = Quarter::of(series.observations.front().date);
  const Quarter last = Quarter::of(series.observations.back().date);
  QuarterlyColumn col{first, {}};
  std::vector<double> sums;
  std::vector<int> counts;
  std::vector<bool> seen;
  for (Quarter q = first; q <= last; q = q.next()) {
    col.values.emplace_back();
    sums.push_back(0.0);
    counts.push_back(0);
    seen.push_back(false);
  }
  for (const auto& obs : series.observations) {
    const Quarter q = Quarter::of(obs.date);
    const auto k = static_cast<std::size_t>((q.year - first.year) * 4 + (q.q - first.q));
    if (method == Aggregation::quarter_value) {
      // first observation dated inside the quarter wins
      if (!seen[k]) col.values[k] = obs.value;
      seen[k] = true;
    } else if (obs.value) {
      sums[k] += *obs.value;
      counts[k] += 1;
    }
  }
  if (method == Aggregation::mean_of_months) {
    for (std::size_t k = 0; k < col.values.size(); ++k) {
      if (counts[k] > 0) col.values[k] = sums[k] / counts[k];
    }
  }
  return col;
}

QuarterlyColumn yoy_inflation(const QuarterlyColumn& cpi) {
  if (cpi.size() < 5) throw InsufficientDataError("year-over-year inflation needs at least 5 quarters of CPI");
  QuarterlyColumn out{cpi.first, std::vector<std::optional<double>>(cpi.size())};
  for (std::size_t t = 4; t < cpi.size(); ++t) {
    const auto& now = cpi.values[t];
    const auto& base = cpi.values[t - 4];
    if (!now || !base) continue;
    if (*base <= 0.0) {
      const Quarter q = cpi.quarter(t - 4);
      throw DomainError("nonpositive CPI in " + std::to_string(q.year) + "Q" + std::to_string(q.q));
    }
    out.values[t] = (*now / *base - 1.0) * 100.0;
  }
  return out;
}

QuarterlyColumn output_gap(const QuarterlyColumn& gdp, const QuarterlyColumn& gdp_potential) {
  const Quarter first = std::max(gdp.first, gdp_potential.first);
  const Quarter last = std::min(gdp.quarter(gdp.size() - 1), gdp_potential.quarter(gdp_potential.size() - 1));
  QuarterlyColumn out{first, {}};
  const auto offset = [](const QuarterlyColumn& c, Quarter q) {
    return static_cast<std::size_t>((q.year - c.first.year) * 4 + (q.q - c.first.q));
  };
  for (Quarter q = first; q <= last; q = q.next()) {
    const auto& g = gdp.values[offset(gdp, q)];
    const auto& p = gdp_potential.values[offset(gdp_potential, q)];
    if (p && *p <= 0.0) {
      throw DomainError("nonpositive potential GDP in " + std::to_string(q.year) + "Q" + std::to_string(q.q));
    }
    if (g && p) {
      out.values.emplace_back((*g - *p) / *p * 100.0);
    } else {
      out.values.emplace_back();
    }
  }
  return out;
}

QuarterlyFrame align(const std::map<std::string, QuarterlyColumn>& columns) {
  QuarterlyFrame frame;
  if (columns.empty()) return frame;
  Quarter first = columns.begin()->second.first;
  Quarter last = columns.begin()->second.quarter(columns.begin()->second.size() - 1);
  for (const auto& [name, col] : columns) {
    first = std::max(first, col.first);
    last = std::min(last, col.quarter(col.size() - 1));
  }
  for (const auto& [name, col] : columns) frame.columns[name];
  for (Quarter q = first; q <= last; q = q.next()) {
    bool complete = true;
    for (const auto& [name, col] : columns) {
      const auto k = static_cast<std::size_t>((q.year - col.first.year) * 4 + (q.q - col.first.q));
      if (!col.values[k]) {
        complete = false;
        break;
      }
    }
    if (!complete) continue;
    frame.quarters.push_back(q);
    for (const auto& [name, col] : columns) {
      const auto k = static_cast<std::size_t>((q.year - col.first.year) * 4 + (q.q - col.first.q));
      frame.columns[name].push_back(*col.values[k]);
    }
  }
  return frame;
}

StateSeries build_state_series(const QuarterlyFrame& frame) {
  for (const auto& b : standard_bindings()) {
    if (!frame.columns.contains(b.column)) {
      throw DataError(std::string("missing column '") + b.column + "' (series " + b.series_id + ")");
    }
  }
  for (const auto& [name, values] : frame.columns) {
    if (values.size() != frame.quarters.size()) {
      throw DataError("column '" + name + "' (series " + series_for_column(name) + ") is not aligned");
    }
  }
  if (frame.quarters.size() < 5) {
    throw InsufficientDataError("need at least 8 usable quarters, frame has " + std::to_string(frame.quarters.size()));
  }

  const auto inflation = yoy_inflation(frame_column(frame, frame.columns.at(columns::cpi)));
  const auto gap =
      output_gap(frame_column(frame, frame.columns.at(columns::gdp)), frame_column(frame, frame.columns.at(columns::gdp_potential)));
  const auto& unemployment = frame.columns.at(columns::unemployment);
  const auto& rate = frame.columns.at(columns::fedfunds);

  StateSeries out;
  for (std::size_t k = 0; k < frame.quarters.size(); ++k) {
    const Quarter q = frame.quarters[k];
    const auto offset = static_cast<std::size_t>((q.year - inflation.first.year) * 4 + (q.q - inflation.first.q));
    const auto& pi = inflation.values[offset];
    const auto& y = gap.values[offset];
    if (!pi || !y) continue;
    MacroState s{*pi, unemployment[k], *y, rate[k]};
    if (!s.finite()) continue;
    out.quarters.push_back(q);
    out.states.push_back(s);
  }
  if (out.size() < 8) {
    throw InsufficientDataError("need at least 8 usable quarters, got " + std::to_string(out.size()));
  }
  return out;
}

QuarterlyFrame load_frame(const std::filesystem::path& dir) {
  std::map<std::string, QuarterlyColumn> cols;
  for (const auto& b : standard_bindings()) {
    const auto path = dir / (std::string(b.series_id) + ".csv");
    if (!std::filesystem::exists(path)) {
      throw DataError(std::string("missing series ") + b.series_id + ": " + path.string() + " not found");
    }
    cols.emplace(b.column, to_quarterly(parse_fred_csv(path), b.aggregation));
  }
  return align(cols);
}

StateSeries load_state_series(const std::filesystem::path& dir) { return build_state_series(load_frame(dir)); }

void write_state_series_csv(std::ostream& out, const StateSeries& series) {
  out << "year,quarter,inflation,unemployment,output_gap,fed_funds\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series.states[k];
    out << series.quarters[k].year << ',' << series.quarters[k].q << ',' << text::exact(s.inflation) << ','
        << text::exact(s.unemployment) << ',' << text::exact(s.output_gap) << ',' << text::exact(s.rate) << '\n';
  }
}

}  // namespace mpolicy
