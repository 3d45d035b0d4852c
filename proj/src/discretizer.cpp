#include "mpolicy/discretizer.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "mpolicy/errors.hpp"
#include "mpolicy/text.hpp"

namespace mpolicy {

namespace {

// Ranges bracket the historical extremes of the post-war sample with margin.
constexpr DimensionBins kInflation{Variable::inflation, -2.0, 12.0, 0};
constexpr DimensionBins kUnemployment{Variable::unemployment, 2.0, 12.0, 0};
constexpr DimensionBins kOutputGap{Variable::output_gap, -8.0, 8.0, 0};
constexpr DimensionBins kRate{Variable::rate, 0.0, 15.0, 0};

DimensionBins with_bins(DimensionBins d, int bins) {
  d.bins = bins;
  return d;
}

}  // namespace

std::string_view variable_name(Variable v) {
  switch (v) {
    case Variable::inflation: return "inflation";
    case Variable::unemployment: return "unemployment";
    case Variable::output_gap: return "output_gap";
    case Variable::rate: return "rate";
  }
  return "?";
}

Variable parse_variable(std::string_view name) {
  for (auto v : {Variable::inflation, Variable::unemployment, Variable::output_gap, Variable::rate}) {
    if (variable_name(v) == name) return v;
  }
  throw std::invalid_argument("unknown state variable '" + std::string(name) + "'");
}

double component(const MacroState& s, Variable v) {
  switch (v) {
    case Variable::inflation: return s.inflation;
    case Variable::unemployment: return s.unemployment;
    case Variable::output_gap: return s.output_gap;
    case Variable::rate: return s.rate;
  }
  return 0.0;
}

void set_component(MacroState& s, Variable v, double value) {
  switch (v) {
    case Variable::inflation: s.inflation = value; break;
    case Variable::unemployment: s.unemployment = value; break;
    case Variable::output_gap: s.output_gap = value; break;
    case Variable::rate: s.rate = value; break;
  }
}

Discretizer::Discretizer(std::string scheme, std::vector<DimensionBins> dims)
    : scheme_(std::move(scheme)), dims_(std::move(dims)) {
  if (dims_.empty()) throw std::invalid_argument("discretizer needs at least one dimension");
  for (const auto& d : dims_) {
    if (d.bins < 1) throw std::invalid_argument("bin count must be positive");
    if (!(d.lower < d.upper)) throw std::invalid_argument("bin range must have lower < upper");
    total_ *= static_cast<std::size_t>(d.bins);
  }
}

Discretizer Discretizer::named(std::string_view scheme) {
  if (scheme == "legacy") {
    return Discretizer("legacy", {with_bins(kInflation, 6), with_bins(kUnemployment, 6), with_bins(kOutputGap, 7),
                                  with_bins(kRate, 6)});
  }
  if (scheme == "coarse") {
    return Discretizer("coarse", {with_bins(kInflation, 4), with_bins(kUnemployment, 4), with_bins(kOutputGap, 4),
                                  with_bins(kRate, 4)});
  }
  if (scheme == "reduced") {
    return Discretizer("reduced", {with_bins(kInflation, 8), with_bins(kRate, 8)});
  }
  if (scheme == "tuned") {
    return Discretizer("tuned", {with_bins(kInflation, 4), with_bins(kUnemployment, 4), with_bins(kOutputGap, 4)});
  }
  throw std::invalid_argument("unknown discretizer '" + std::string(scheme) + "' (legacy|coarse|reduced|tuned)");
}

const std::vector<std::string>& discretizer_schemes() {
  static const std::vector<std::string> names = {"legacy", "coarse", "reduced", "tuned"};
  return names;
}

int Discretizer::bin_of(const DimensionBins& dim, double value) const {
  if (!(value > dim.lower)) return 0;  // also catches NaN
  if (value >= dim.upper) return dim.bins - 1;
  const int bin = static_cast<int>(std::floor((value - dim.lower) / (dim.upper - dim.lower) * dim.bins));
  return std::min(bin, dim.bins - 1);
}

std::size_t Discretizer::encode(const MacroState& state) const {
  std::size_t index = 0;
  for (const auto& d : dims_) {
    index = index * static_cast<std::size_t>(d.bins) + static_cast<std::size_t>(bin_of(d, component(state, d.variable)));
  }
  return index;
}

MacroState Discretizer::bin_center(std::size_t state_index) const {
  if (state_index >= total_) {
    throw std::out_of_range("state index " + std::to_string(state_index) + " outside [0, " + std::to_string(total_) +
                            ")");
  }
  MacroState s;
  for (auto it = dims_.rbegin(); it != dims_.rend(); ++it) {
    const auto bins = static_cast<std::size_t>(it->bins);
    const auto bin = state_index % bins;
    state_index /= bins;
    const double width = (it->upper - it->lower) / it->bins;
    set_component(s, it->variable, it->lower + (static_cast<double>(bin) + 0.5) * width);
  }
  return s;
}

void write_discretizer(std::ostream& out, const Discretizer& d) {
  out << d.scheme() << ' ' << d.dims().size();
  for (const auto& dim : d.dims()) {
    out << ' ' << variable_name(dim.variable) << ' ' << text::exact(dim.lower) << ' ' << text::exact(dim.upper) << ' '
        << dim.bins;
  }
}

Discretizer read_discretizer(const std::vector<std::string>& tokens, std::size_t first) {
  if (tokens.size() < first + 2) throw FormatError("truncated discretizer spec");
  const auto n = static_cast<std::size_t>(text::parse_int(tokens[first + 1], "discretizer dimension count"));
  if (tokens.size() != first + 2 + 4 * n) throw FormatError("discretizer spec has wrong token count");
  std::vector<DimensionBins> dims;
  for (std::size_t k = 0; k < n; ++k) {
    const auto base = first + 2 + 4 * k;
    dims.push_back({parse_variable(tokens[base]), text::parse_double(tokens[base + 1], "discretizer lower"),
                    text::parse_double(tokens[base + 2], "discretizer upper"),
                    static_cast<int>(text::parse_int(tokens[base + 3], "discretizer bins"))});
  }
  return Discretizer(tokens[first], std::move(dims));
}

}  // namespace mpolicy
