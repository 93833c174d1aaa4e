#pragma once

#include <string_view>
#include <vector>

namespace ssbfsk {

inline constexpr int kDefaultSamplesPerSymbol = 64;

enum class PulseFamily { Lorentzian, RaisedCosine, GaussianGmsk };

// Symbol alphabet and matching phase law.
//   NonNegative: symbols 0..M-1, phase weight 2h*k (SSB-FSK).
//   Bipolar:     symbols +-1, +-3, ..., +-(M-1), phase weight h*a (conventional CPM).
enum class Alphabet { NonNegative, Bipolar };

std::string_view to_string(PulseFamily family);
std::string_view to_string(Alphabet alphabet);
PulseFamily parse_pulse_family(std::string_view text);
Alphabet parse_alphabet(std::string_view text);

struct PulseSpec {
  PulseFamily family = PulseFamily::Lorentzian;
  int L = 1;         // support in symbol intervals
  double w = 1.0;    // Lorentzian width, in units of Ts
  double bt = 0.3;   // Gaussian bandwidth-time product
  double Ts = 1.0;   // symbol duration in seconds

  // Throws DomainError naming the violated constraint.
  void validate() const;
};

// Frequency pulse and phase response sampled on t_k = k*Ts/samples_per_symbol,
// k = 0..L*samples_per_symbol.
//
// Every family is stored in the same normalization: phi0 rises from 0 to 1/2 over
// the support and g = 4*pi*d(phi0)/dt (in units of 1/Ts), so the area under g is 2*pi.
struct SampledPulse {
  PulseSpec spec;
  int samples_per_symbol = kDefaultSamplesPerSymbol;
  std::vector<double> g;
  std::vector<double> phi0;
  double mu = 1.0;  // truncation correction factor (1 for the comparison families)
  Alphabet natural_alphabet = Alphabet::NonNegative;

  int support_samples() const { return spec.L * samples_per_symbol; }

  // phi0 at sample index k, extended by 0 before the support and 1/2 after it.
  double phase_at(long k) const {
    if (k <= 0) return 0.0;
    if (k >= static_cast<long>(phi0.size())) return 0.5;
    return phi0[static_cast<std::size_t>(k)];
  }
};

// mu(L) = pi / (2 arctan(L Ts / (2 w))), with w and Ts in the same time unit.
double correction_factor(int L, double w, double Ts = 1.0);

// Truncated Lorentzian frequency pulse evaluated in closed form at time t (units of Ts)
// measured from the start of the support [0, L]; zero outside the support.
double lorentzian_frequency(double t, int L, double w);

SampledPulse lorentzian_pulse(const PulseSpec& spec, int samples_per_symbol = kDefaultSamplesPerSymbol);

// Textbook LRC and Gaussian (GMSK) pulses truncated to L symbols.
SampledPulse comparison_pulse(const PulseSpec& spec, int samples_per_symbol = kDefaultSamplesPerSymbol);

// Dispatches on spec.family.
SampledPulse make_pulse(const PulseSpec& spec, int samples_per_symbol = kDefaultSamplesPerSymbol);

}  // namespace ssbfsk
