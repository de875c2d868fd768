#include "lorentz/sampling.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>

#include "lorentz/parallel.hpp"

namespace lorentz {

PhasePoint sample_mu(RandomStream &rng) {
  const double theta = 2.0 * std::numbers::pi * rng.uniform();
  const double phi = std::asin(2.0 * rng.uniform() - 1.0);
  return {theta, phi, {0, 0}};
}

unsigned default_threads() {
  if (const char *env = std::getenv("LORENTZ_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception &) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace lorentz
