#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "mpolicy/macro_state.hpp"

namespace mpolicy {

enum class Variable { inflation, unemployment, output_gap, rate };

std::string_view variable_name(Variable v);
Variable parse_variable(std::string_view name);
double component(const MacroState& s, Variable v);
void set_component(MacroState& s, Variable v, double value);

struct DimensionBins {
  Variable variable;
  double lower;
  double upper;
  int bins;

  bool operator==(const DimensionBins&) const = default;
};

/// Uniform per-dimension bins combined in row-major order over `dims`.
class Discretizer {
 public:
  Discretizer(std::string scheme, std::vector<DimensionBins> dims);

  /// legacy 6x6x7x6, coarse 4^4, reduced (pi, i) 8x8, tuned (pi, u, y) 4x4x4.
  static Discretizer named(std::string_view scheme);

  const std::string& scheme() const { return scheme_; }
  const std::vector<DimensionBins>& dims() const { return dims_; }
  std::size_t total_states() const { return total_; }

  /// Total: out-of-range and non-finite values clamp to the edge bins.
  std::size_t encode(const MacroState& state) const;
  int bin_of(const DimensionBins& dim, double value) const;

  /// Bin midpoints for the used dimensions; unused components are 0.
  MacroState bin_center(std::size_t state_index) const;

  bool operator==(const Discretizer& other) const { return scheme_ == other.scheme_ && dims_ == other.dims_; }

 private:
  std::string scheme_;
  std::vector<DimensionBins> dims_;
  std::size_t total_ = 1;
};

const std::vector<std::string>& discretizer_schemes();

// One line: `<scheme> <ndims> (<variable> <lower> <upper> <bins>)...`
void write_discretizer(std::ostream& out, const Discretizer& d);
Discretizer read_discretizer(const std::vector<std::string>& tokens, std::size_t first);

}  // namespace mpolicy
