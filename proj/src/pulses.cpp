#include "ssbfsk/pulses.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ssbfsk/errors.hpp"

namespace ssbfsk {
namespace {

constexpr double kPi = std::numbers::pi;

double gaussian_q(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

// Antiderivative of Q(k x): x Q(k x) - pdf(k x) / k.
double gaussian_q_integral(double x, double k) {
  const double u = k * x;
  const double pdf = std::exp(-0.5 * u * u) / std::sqrt(2.0 * kPi);
  return x * gaussian_q(u) - pdf / k;
}

void check_sampling(int samples_per_symbol) {
  if (samples_per_symbol < 2) {
    throw ConfigError("samples_per_symbol must be >= 2 (got " + std::to_string(samples_per_symbol) + ")");
  }
}

SampledPulse empty_pulse(const PulseSpec& spec, int samples_per_symbol) {
  SampledPulse p;
  p.spec = spec;
  p.samples_per_symbol = samples_per_symbol;
  const auto n = static_cast<std::size_t>(spec.L * samples_per_symbol + 1);
  p.g.resize(n);
  p.phi0.resize(n);
  return p;
}

}  // namespace

std::string_view to_string(PulseFamily family) {
  switch (family) {
    case PulseFamily::Lorentzian: return "lorentzian";
    case PulseFamily::RaisedCosine: return "raised_cosine";
    case PulseFamily::GaussianGmsk: return "gmsk";
  }
  return "unknown";
}

std::string_view to_string(Alphabet alphabet) {
  return alphabet == Alphabet::NonNegative ? "non_negative" : "bipolar";
}

PulseFamily parse_pulse_family(std::string_view text) {
  if (text == "lorentzian") return PulseFamily::Lorentzian;
  if (text == "raised_cosine" || text == "rc") return PulseFamily::RaisedCosine;
  if (text == "gmsk" || text == "gaussian") return PulseFamily::GaussianGmsk;
  throw InputError("unknown pulse family '" + std::string(text) + "'");
}

Alphabet parse_alphabet(std::string_view text) {
  if (text == "non_negative") return Alphabet::NonNegative;
  if (text == "bipolar") return Alphabet::Bipolar;
  throw InputError("unknown alphabet '" + std::string(text) + "'");
}

void PulseSpec::validate() const {
  if (L < 1) throw DomainError("pulse length L must be >= 1 (got " + std::to_string(L) + ")");
  if (!(Ts > 0.0)) throw DomainError("symbol duration Ts must be > 0");
  if (family == PulseFamily::Lorentzian && !(w > 0.0)) {
    throw DomainError("Lorentzian width w must be > 0 (got " + std::to_string(w) + ")");
  }
  if (family == PulseFamily::GaussianGmsk && !(bt > 0.0)) {
    throw DomainError("Gaussian bandwidth-time product bt must be > 0 (got " + std::to_string(bt) + ")");
  }
}

double correction_factor(int L, double w, double Ts) {
  if (L <= 0 || !(w > 0.0) || !(Ts > 0.0)) {
    throw DomainError("correction_factor requires L, w, Ts > 0");
  }
  return kPi / (2.0 * std::atan(L * Ts / (2.0 * w)));
}

double lorentzian_frequency(double t, int L, double w) {
  if (t < 0.0 || t > L) return 0.0;
  const double mu = correction_factor(L, w);
  const double x = t - 0.5 * L;
  return mu * 2.0 * w / (x * x + w * w);
}

SampledPulse lorentzian_pulse(const PulseSpec& spec, int samples_per_symbol) {
  if (spec.family != PulseFamily::Lorentzian) {
    throw InputError("lorentzian_pulse called with a non-Lorentzian spec");
  }
  spec.validate();
  check_sampling(samples_per_symbol);

  SampledPulse p = empty_pulse(spec, samples_per_symbol);
  p.natural_alphabet = Alphabet::NonNegative;
  // w is in units of Ts, so the dimensionless pulse uses Ts = 1 throughout.
  p.mu = correction_factor(spec.L, spec.w * spec.Ts, spec.Ts);

  const double centre = 0.5 * spec.L;
  const double offset = std::atan(centre / spec.w);
  const double scale = p.mu / (2.0 * kPi);
  for (std::size_t k = 0; k < p.g.size(); ++k) {
    const double t = static_cast<double>(k) / samples_per_symbol;
    const double x = t - centre;
    p.g[k] = p.mu * 2.0 * spec.w / (x * x + spec.w * spec.w);
    p.phi0[k] = scale * (std::atan(x / spec.w) + offset);
  }
  p.phi0.front() = 0.0;
  return p;
}

SampledPulse comparison_pulse(const PulseSpec& spec, int samples_per_symbol) {
  if (spec.family == PulseFamily::Lorentzian) {
    throw InputError("comparison_pulse does not build Lorentzian pulses; use lorentzian_pulse");
  }
  spec.validate();
  check_sampling(samples_per_symbol);

  SampledPulse p = empty_pulse(spec, samples_per_symbol);
  p.natural_alphabet = Alphabet::Bipolar;
  p.mu = 1.0;
  const double L = spec.L;

  if (spec.family == PulseFamily::RaisedCosine) {
    for (std::size_t k = 0; k < p.g.size(); ++k) {
      const double t = static_cast<double>(k) / samples_per_symbol;
      const double arg = 2.0 * kPi * t / L;
      p.phi0[k] = t / (2.0 * L) - std::sin(arg) / (4.0 * kPi);
      p.g[k] = 4.0 * kPi * (1.0 - std::cos(arg)) / (2.0 * L);
    }
  } else {
    const double k_bt = 2.0 * kPi * spec.bt / std::sqrt(std::log(2.0));
    const double centre = 0.5 * L;
    auto shape = [&](double t) {
      const double x = t - centre;
      return gaussian_q(k_bt * (x - 0.5)) - gaussian_q(k_bt * (x + 0.5));
    };
    auto area = [&](double t) {
      const double x = t - centre;
      return gaussian_q_integral(x - 0.5, k_bt) - gaussian_q_integral(x + 0.5, k_bt);
    };
    const double a0 = area(0.0);
    const double total = area(L) - a0;
    for (std::size_t k = 0; k < p.g.size(); ++k) {
      const double t = static_cast<double>(k) / samples_per_symbol;
      p.phi0[k] = 0.5 * (area(t) - a0) / total;
      p.g[k] = 2.0 * kPi * shape(t) / total;
    }
  }
  p.phi0.front() = 0.0;
  p.phi0.back() = 0.5;
  return p;
}

SampledPulse make_pulse(const PulseSpec& spec, int samples_per_symbol) {
  return spec.family == PulseFamily::Lorentzian ? lorentzian_pulse(spec, samples_per_symbol)
                                                : comparison_pulse(spec, samples_per_symbol);
}

}  // namespace ssbfsk
