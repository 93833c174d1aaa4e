#pragma once

#include <span>
#include <vector>

#include "ssbfsk/modulator.hpp"

namespace ssbfsk {

// Element-wise difference of two symbol-index sequences.
struct DifferenceSequence {
  std::vector<int> gamma;

  std::size_t size() const { return gamma.size(); }
  int sum() const;
  // gamma[0] in 1..M-1 and every later entry in -(M-1)..M-1.
  bool is_candidate(int M) const;
  bool operator==(const DifferenceSequence&) const = default;
};

struct DistanceResult {
  double d_squared = 0.0;
  DifferenceSequence achieved_by;
  std::vector<DifferenceSequence> witnesses;  // every sequence tied at the minimum
  int N_used = 0;
  bool converged = false;
  double bound = 0.0;                // merger upper bound d_B^2 used to prune
  std::vector<double> history;       // history[n-1] = d_min^2 observed over n symbols
};

struct UpperBound {
  double d_squared = 0.0;
  std::vector<DifferenceSequence> witnesses;
};

inline constexpr int kDefaultMergers = 3;
inline constexpr int kDefaultMaxObservation = 30;
inline constexpr double kPruneTolerance = 1e-9;

// Normalized squared distance log2(M) * {N - (1/Ts) int_0^{N Ts} cos(phi(t, gamma)) dt}
// for the difference sequence padded with zeros to N symbols, integrated with the
// trapezoidal rule on the pulse sampling grid.
double d_squared(const CpmScheme& scheme, const DifferenceSequence& gamma, int N);

// Minimum distance over every merging candidate of length m + 1 (first entry positive,
// zero sum), each evaluated once its difference phase has settled.
UpperBound upper_bound(const CpmScheme& scheme, int m = kDefaultMergers);

// Bound-pruned breadth-first search over difference sequences of up to N_max symbols.
DistanceResult d_min(const CpmScheme& scheme, int m = kDefaultMergers, int N_max = kDefaultMaxObservation);

double q_function(double x);
// Q(sqrt(d_min^2 * Eb/N0)).
double union_bound_pe(double d_min_sq, double ebn0_db);

struct DistanceSweepRow {
  double h = 0.0;
  double bound = 0.0;
  double d_min = 0.0;
  int N_used = 0;
  bool converged = false;
};

// Runs d_min over a list of modulation indices, keeping the pulse fixed.
std::vector<DistanceSweepRow> dmin_sweep(const CpmScheme& base, std::span<const double> h_values,
                                         int m = kDefaultMergers, int N_max = kDefaultMaxObservation);

}  // namespace ssbfsk
