#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "ssbfsk/pulses.hpp"

namespace ssbfsk {

using Complex = std::complex<double>;

// One modulation configuration: alphabet size, index, pulse and phase law.
//
// The phase is phi(t) = 2*pi * sum_i weight(k_i) * phi0(t - i*Ts) where k_i is the
// symbol index (0..M-1). For NonNegative alphabets weight(k) = 2h*k (effective index
// h~ = 2h), for Bipolar alphabets weight(k) = h*(2k - M + 1). A completed pulse adds
// pi * weight(k) to the phase.
struct CpmScheme {
  int M = 2;
  double h = 1.0;
  SampledPulse pulse;
  double Es = 1.0;
  Alphabet alphabet = Alphabet::NonNegative;

  // Builds and validates. The alphabet defaults to the pulse family's natural one.
  static CpmScheme make(int M, double h, const PulseSpec& spec,
                        int samples_per_symbol = kDefaultSamplesPerSymbol,
                        std::optional<Alphabet> alphabet = std::nullopt, double Es = 1.0);

  // Throws DomainError / ConfigError naming the violated invariant.
  void validate() const;

  int L() const { return pulse.spec.L; }
  int sps() const { return pulse.samples_per_symbol; }
  double Ts() const { return pulse.spec.Ts; }
  double bits_per_symbol() const;
  double amplitude() const;  // sqrt(Es / Ts)

  double phase_weight(int index) const;
  // Maps alphabet values (0..M-1 or odd +-values) to indices 0..M-1, throwing InputError.
  int index_of(int symbol) const;
  int value_of(int index) const;

  // Same configuration resampled at a different rate.
  CpmScheme resampled(int samples_per_symbol) const;
};

struct PhaseTrajectory {
  std::vector<double> t;    // seconds
  std::vector<double> phi;  // radians, unwrapped
};

// Block synthesis of N symbols over [0, (N + L - 1) Ts], i.e. (N + L - 1) * sps + 1
// samples, so every pulse has completed at the last sample.
PhaseTrajectory phase_trajectory(const CpmScheme& scheme, std::span<const int> symbols);
std::vector<Complex> modulate(const CpmScheme& scheme, std::span<const int> symbols);

// Streaming synthesis: each pushed symbol emits the sps samples of its own interval
// [n Ts, (n + 1) Ts). State is the completed phase plus the last L phase weights.
// Confined to one thread at a time.
class StreamingModulator {
 public:
  explicit StreamingModulator(const CpmScheme& scheme);

  // Pretend `count` symbols with the given index were sent before t = 0 without
  // emitting samples. Used to align with a receiver that assumes a known pre-history.
  void prime(int index, int count);

  void push(int symbol, std::vector<Complex>& out);
  std::vector<Complex> push(std::span<const int> symbols);
  // Same as push but takes symbol indices 0..M-1.
  void push_index(int index, std::vector<Complex>& out);

  void reset();
  double completed_phase() const { return completed_phase_; }
  long symbols_pushed() const { return pushed_; }

 private:
  void advance(double weight, std::vector<Complex>* out, std::vector<double>* phase_out);
  friend PhaseTrajectory phase_trajectory(const CpmScheme&, std::span<const int>);

  const CpmScheme* scheme_;
  std::vector<double> window_;  // window_[j] = weight of the symbol j intervals ago
  double completed_phase_ = 0.0;
  long pushed_ = 0;
};

}  // namespace ssbfsk
