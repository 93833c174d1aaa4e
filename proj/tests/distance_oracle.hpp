#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ssbfsk/modulator.hpp"

namespace oracle {

// Exhaustive oracle: every pair of length-N sequences with different first symbols,
// log2(M) * (1/Ts) * integral over [0, N Ts] of (1 - cos(phi_a - phi_b)) by trapezoid
// on the modulator's own phase samples.
inline double all_pairs_minimum(const ssbfsk::CpmScheme& s, int N) {
  const int M = s.M;
  long count = 1;
  for (int i = 0; i < N; ++i) count *= M;
  std::vector<std::vector<double>> phases;
  std::vector<int> first;
  for (long code = 0; code < count; ++code) {
    std::vector<int> sym(static_cast<std::size_t>(N));
    long c = code;
    for (int i = 0; i < N; ++i, c /= M) sym[static_cast<std::size_t>(i)] = static_cast<int>(c % M);
    phases.push_back(ssbfsk::phase_trajectory(s, sym).phi);
    first.push_back(sym[0]);
  }
  const std::size_t samples = static_cast<std::size_t>(N) * static_cast<std::size_t>(s.sps());
  const double dt = 1.0 / s.sps();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < phases.size(); ++a) {
    for (std::size_t b = 0; b < phases.size(); ++b) {
      if (first[a] == first[b]) continue;
      double acc = 0.0;
      for (std::size_t k = 0; k <= samples; ++k) {
        const double v = 1.0 - std::cos(phases[a][k] - phases[b][k]);
        acc += (k == 0 || k == samples) ? 0.5 * v : v;
      }
      best = std::min(best, s.bits_per_symbol() * acc * dt);
    }
  }
  return best;
}

}  // namespace oracle
