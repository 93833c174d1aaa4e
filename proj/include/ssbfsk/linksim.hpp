#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ssbfsk/modulator.hpp"

namespace ssbfsk {

struct Rational {
  long p = 0;
  long q = 1;
};

constexpr int kMaxPhaseDenominator = 200;
constexpr int kMetricSamplesPerSymbol = 16;

// Best rational approximation p/q (lowest terms, q <= max_q) within 1e-9 of x.
// Throws ConfigError when none exists.
Rational rationalize(double x, long max_q = kMaxPhaseDenominator);

// CPM trellis. A state is (phase residue r, last L-1 symbol indices), the residue
// counting multiples of 2*pi / phase_states. States are numbered r * histories + hist,
// where hist holds the newest index in its lowest base-M digit.
struct Trellis {
  int M = 2;
  int L = 1;
  Rational h;
  int phase_states = 1;  // q for NonNegative alphabets, 2q for Bipolar
  int histories = 1;     // M^(L-1)
  int samples_per_symbol = kMetricSamplesPerSymbol;
  double dt = 0.0;
  std::vector<int> phase_step;  // residue increment when a pulse of index k completes
  // waveforms[hf * sps + k]: one-symbol segment for full history hf = a_n + M * hist,
  // relative to the accumulated phase of the state. Constant envelope sqrt(Es/Ts).
  std::vector<Complex> waveforms;
  std::vector<Complex> rotations;  // exp(j 2 pi r / phase_states)

  int num_states() const { return phase_states * histories; }
  int full_histories() const { return histories * M; }
  int next_state(int state, int input) const;
  std::span<const Complex> branch(int state, int input, std::vector<Complex>& scratch) const;
};

Trellis build_trellis(const CpmScheme& scheme, int samples_per_symbol = kMetricSamplesPerSymbol);

struct DetectorOptions {
  int traceback_depth = 0;             // <= 0 means 5 (L + q)
  double reference_phase_offset = 0.0;  // applied to every branch reference
};

// Viterbi detection from the zero state (index-0 pre-history). `received` holds
// n_symbols * sps samples; the last `tail` symbols are known to be index 0 and the
// survivor is chosen among states whose history is all zeros. Returns the indices.
std::vector<int> viterbi_detect(const Trellis& trellis, std::span<const Complex> received, int n_symbols, int tail,
                                const DetectorOptions& options = {});

struct BerPoint {
  double ebn0_db = 0.0;
  std::uint64_t bit_errors = 0;
  std::uint64_t bits = 0;
  double ber = 0.0;
  double union_bound = 0.0;
};

struct BerOptions {
  std::uint64_t max_bits = 1'000'000;
  std::uint64_t target_errors = 100;
  std::uint64_t seed = 1;
  int frame_symbols = 2000;
  int samples_per_symbol = kMetricSamplesPerSymbol;
  int traceback_depth = 0;
  bool noiseless = false;
  std::optional<double> dmin2;  // computed with d_min when absent
};

// Symbol index carrying the given Gray-coded bit pattern and back.
int gray_encode(int index);
int gray_decode(int bits);

std::vector<BerPoint> simulate_ber(const CpmScheme& scheme, std::span<const double> ebn0_db, const BerOptions& options = {});

}  // namespace ssbfsk
