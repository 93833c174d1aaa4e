#include "ssbfsk/modulator.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ssbfsk/errors.hpp"

namespace ssbfsk {
namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

CpmScheme CpmScheme::make(int M, double h, const PulseSpec& spec, int samples_per_symbol,
                          std::optional<Alphabet> alphabet, double Es) {
  CpmScheme s;
  s.M = M;
  s.h = h;
  s.pulse = make_pulse(spec, samples_per_symbol);
  s.Es = Es;
  s.alphabet = alphabet.value_or(s.pulse.natural_alphabet);
  s.validate();
  return s;
}

void CpmScheme::validate() const {
  if (M != 2 && M != 4 && M != 8) {
    throw DomainError("alphabet size M must be 2, 4 or 8 (got " + std::to_string(M) + ")");
  }
  if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("modulation index h must be > 0");
  if (!(Es > 0.0)) throw DomainError("symbol energy Es must be > 0");
  pulse.spec.validate();
  if (pulse.spec.family == PulseFamily::Lorentzian && alphabet != Alphabet::NonNegative) {
    throw DomainError("Lorentzian (SSB-FSK) schemes require the non_negative alphabet");
  }
  if (pulse.phi0.size() != static_cast<std::size_t>(pulse.support_samples() + 1)) {
    throw ConfigError("sampled pulse length does not match L * samples_per_symbol + 1");
  }
}

double CpmScheme::bits_per_symbol() const { return std::log2(static_cast<double>(M)); }

double CpmScheme::amplitude() const { return std::sqrt(Es / Ts()); }

double CpmScheme::phase_weight(int index) const {
  return alphabet == Alphabet::NonNegative ? 2.0 * h * index : h * (2 * index - M + 1);
}

int CpmScheme::index_of(int symbol) const {
  if (alphabet == Alphabet::NonNegative) {
    if (symbol < 0 || symbol >= M) {
      throw InputError("symbol " + std::to_string(symbol) + " outside alphabet 0.." + std::to_string(M - 1));
    }
    return symbol;
  }
  const int shifted = symbol + M - 1;
  if (shifted < 0 || shifted > 2 * (M - 1) || shifted % 2 != 0) {
    throw InputError("symbol " + std::to_string(symbol) + " outside bipolar alphabet +-1..+-" +
                     std::to_string(M - 1));
  }
  return shifted / 2;
}

int CpmScheme::value_of(int index) const {
  return alphabet == Alphabet::NonNegative ? index : 2 * index - M + 1;
}

CpmScheme CpmScheme::resampled(int samples_per_symbol) const {
  CpmScheme s = *this;
  s.pulse = make_pulse(pulse.spec, samples_per_symbol);
  return s;
}

StreamingModulator::StreamingModulator(const CpmScheme& scheme)
    : scheme_(&scheme), window_(static_cast<std::size_t>(scheme.L()), 0.0) {}

void StreamingModulator::reset() {
  std::fill(window_.begin(), window_.end(), 0.0);
  completed_phase_ = 0.0;
  pushed_ = 0;
}

void StreamingModulator::prime(int index, int count) {
  const double weight = scheme_->phase_weight(index);
  for (int i = 0; i < count; ++i) {
    completed_phase_ += std::numbers::pi * window_.back();
    for (std::size_t j = window_.size() - 1; j > 0; --j) window_[j] = window_[j - 1];
    window_[0] = weight;
  }
}

void StreamingModulator::advance(double weight, std::vector<Complex>* out, std::vector<double>* phase_out) {
  // The oldest weight leaves the window: its pulse has completed.
  completed_phase_ += std::numbers::pi * window_.back();
  for (std::size_t j = window_.size() - 1; j > 0; --j) window_[j] = window_[j - 1];
  window_[0] = weight;
  ++pushed_;

  const SampledPulse& p = scheme_->pulse;
  const int sps = p.samples_per_symbol;
  const double amp = scheme_->amplitude();
  for (int k = 0; k < sps; ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < window_.size(); ++j) {
      if (window_[j] != 0.0) acc += window_[j] * p.phi0[static_cast<std::size_t>(k + static_cast<int>(j) * sps)];
    }
    const double phi = completed_phase_ + kTwoPi * acc;
    if (out) out->push_back(std::polar(amp, phi));
    if (phase_out) phase_out->push_back(phi);
  }
}

void StreamingModulator::push(int symbol, std::vector<Complex>& out) {
  advance(scheme_->phase_weight(scheme_->index_of(symbol)), &out, nullptr);
}

void StreamingModulator::push_index(int index, std::vector<Complex>& out) {
  if (index < 0 || index >= scheme_->M) throw InputError("symbol index out of range");
  advance(scheme_->phase_weight(index), &out, nullptr);
}

std::vector<Complex> StreamingModulator::push(std::span<const int> symbols) {
  std::vector<Complex> out;
  out.reserve(symbols.size() * static_cast<std::size_t>(scheme_->sps()));
  for (int s : symbols) push(s, out);
  return out;
}

PhaseTrajectory phase_trajectory(const CpmScheme& scheme, std::span<const int> symbols) {
  std::vector<double> weights;
  weights.reserve(symbols.size());
  for (int s : symbols) weights.push_back(scheme.phase_weight(scheme.index_of(s)));

  StreamingModulator mod(scheme);
  PhaseTrajectory traj;
  const int sps = scheme.sps();
  const std::size_t n = (symbols.size() + static_cast<std::size_t>(scheme.L()) - 1) * static_cast<std::size_t>(sps) + 1;
  traj.phi.reserve(n);
  for (double wgt : weights) mod.advance(wgt, nullptr, &traj.phi);
  // Let the last L - 1 pulses run out; then one closing sample with everything completed.
  for (int i = 0; i + 1 < scheme.L(); ++i) mod.advance(0.0, nullptr, &traj.phi);
  if (!symbols.empty()) {
    double final_phase = mod.completed_phase();
    for (double wgt : mod.window_) final_phase += std::numbers::pi * wgt;
    traj.phi.push_back(final_phase);
  } else {
    traj.phi.push_back(0.0);
  }
  traj.t.resize(traj.phi.size());
  const double dt = scheme.Ts() / sps;
  for (std::size_t k = 0; k < traj.t.size(); ++k) traj.t[k] = static_cast<double>(k) * dt;
  return traj;
}

std::vector<Complex> modulate(const CpmScheme& scheme, std::span<const int> symbols) {
  const PhaseTrajectory traj = phase_trajectory(scheme, symbols);
  std::vector<Complex> s;
  s.reserve(traj.phi.size());
  const double amp = scheme.amplitude();
  for (double phi : traj.phi) s.push_back(std::polar(amp, phi));
  return s;
}

}  // namespace ssbfsk
