#pragma once

// Small synthetic worlds shared by the unit tests.

#include <Eigen/Core>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "mpolicy/dynamics.hpp"
#include "mpolicy/market_data.hpp"

namespace fixtures {

inline mpolicy::StateSeries history_of(const std::vector<mpolicy::MacroState>& states,
                                       mpolicy::Quarter first = {2000, 1}) {
  mpolicy::StateSeries h;
  for (std::size_t k = 0; k < states.size(); ++k) {
    h.quarters.push_back(first.shifted(static_cast<int>(k)));
    h.states.push_back(states[k]);
  }
  return h;
}

inline mpolicy::TransitionModel identity_model() {
  return mpolicy::TransitionModel::make(Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(),
                                        Eigen::Matrix3d::Zero());
}

inline mpolicy::TransitionModel stable_model(double noise = 0.3) {
  Eigen::Matrix3d A;
  A << 0.9, 0.05, 0.1, -0.02, 0.95, -0.05, 0.05, -0.1, 0.8;
  Eigen::Vector3d B(-0.05, 0.02, -0.08);
  Eigen::Vector3d c(0.3, 0.25, 0.2);
  Eigen::Matrix3d sigma = noise * noise * Eigen::Matrix3d::Identity();
  return mpolicy::TransitionModel::make(A, B, c, sigma, true);
}

/// Simulated history around a plausible steady state.
inline mpolicy::StateSeries simulated_history(const mpolicy::TransitionModel& model, int n, std::uint64_t seed) {
  mpolicy::Rng rng(seed);
  std::vector<mpolicy::MacroState> states;
  Eigen::Vector3d x(3.0, 5.5, -0.5);
  double rate = 4.0;
  for (int k = 0; k < n; ++k) {
    states.push_back(mpolicy::MacroState::from(x, rate));
    rate = std::clamp(rate + 0.25 * (mpolicy::uniform01(rng) - 0.5), 0.0, 15.0);
    x = mpolicy::step(model, x, rate, rng);
  }
  return history_of(states);
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("mpolicy_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures
