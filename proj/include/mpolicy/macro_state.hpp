#pragma once

#include <Eigen/Core>
#include <cmath>

namespace mpolicy {

/// Economy snapshot, all in percent.
struct MacroState {
  double inflation = 0.0;
  double unemployment = 0.0;
  double output_gap = 0.0;
  double rate = 0.0;

  /// The non-instrument block [inflation, unemployment, output_gap].
  Eigen::Vector3d macro() const { return {inflation, unemployment, output_gap}; }

  static MacroState from(const Eigen::Vector3d& x, double rate) { return {x(0), x(1), x(2), rate}; }

  bool finite() const {
    return std::isfinite(inflation) && std::isfinite(unemployment) && std::isfinite(output_gap) &&
           std::isfinite(rate);
  }

  bool operator==(const MacroState&) const = default;
};

}  // namespace mpolicy
