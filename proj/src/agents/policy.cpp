#include "mpolicy/agents/policy.hpp"

#include <cmath>
#include <stdexcept>

namespace mpolicy {

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax of an empty value set");
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (values[k] > values[best]) best = k;
  }
  return best;
}

std::size_t epsilon_greedy(std::span<const double> values, double epsilon, Rng& rng) {
  if (uniform01(rng) < epsilon) return uniform_index(rng, values.size());
  return argmax(values);
}

double epsilon_schedule(int episode, int total_episodes, double start, double end) {
  if (total_episodes <= 0) return end;
  return end + (start - end) * std::exp(-5.0 * static_cast<double>(episode) / static_cast<double>(total_episodes));
}

}  // namespace mpolicy
