#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ssbfsk/errors.hpp"
#include "ssbfsk/pulses.hpp"

using namespace ssbfsk;

namespace {

PulseSpec lorentz(int L, double w) {
  PulseSpec s;
  s.family = PulseFamily::Lorentzian;
  s.L = L;
  s.w = w;
  return s;
}

// Trapezoid area of the sampled frequency pulse, in units of Ts.
double area(const SampledPulse& p) {
  const double dt = 1.0 / p.samples_per_symbol;
  double a = 0.0;
  for (std::size_t k = 1; k < p.g.size(); ++k) a += 0.5 * (p.g[k] + p.g[k - 1]) * dt;
  return a;
}

// Independent long-double evaluation of the truncation correction.
long double mu_oracle(int L, long double w) {
  return std::numbers::pi_v<long double> / (2.0L * std::atan(static_cast<long double>(L) / (2.0L * w)));
}

}  // namespace

TEST_CASE("correction factor matches a long-double oracle") {
  for (int L = 1; L <= 12; ++L) {
    for (double w : {0.05, 0.1, 0.37, 0.8, 1.3, 3.0, 9.5}) {
      CHECK(correction_factor(L, w) == doctest::Approx(static_cast<double>(mu_oracle(L, w))).epsilon(1e-14));
    }
  }
  CHECK(correction_factor(2, 1.6) == doctest::Approx(2.81203).epsilon(1e-5));
  CHECK(correction_factor(5, 1.3) > 1.0);
}

TEST_CASE("correction factor depends on w only through w / Ts") {
  CHECK(correction_factor(4, 2.0, 2.0) == doctest::Approx(correction_factor(4, 1.0, 1.0)));
}

TEST_CASE("lorentzian pulse integrates to 2 pi and phase ends at one half") {
  for (int L : {1, 2, 5, 12}) {
    for (double w : {0.1, 0.5, 1.3, 4.0}) {
      const SampledPulse p = lorentzian_pulse(lorentz(L, w));
      CHECK(p.phi0.front() == doctest::Approx(0.0));
      CHECK(p.phi0.back() == doctest::Approx(0.5).epsilon(1e-12));
      const double target = 4.0 * std::numbers::pi * (p.phi0.back() - p.phi0.front());
      // Second-order quadrature error: 1e-4 at the default rate, 1e-6 at 1024 samples.
      CHECK(area(p) == doctest::Approx(target).epsilon(1e-4));
      CHECK(area(lorentzian_pulse(lorentz(L, w), 1024)) == doctest::Approx(target).epsilon(1e-6));
    }
  }
}

TEST_CASE("terminal phase does not depend on the sampling rate") {
  for (double w : {0.2, 1.3, 6.0}) {
    const double a = lorentzian_pulse(lorentz(5, w), 64).phi0.back();
    const double b = lorentzian_pulse(lorentz(5, w), 128).phi0.back();
    CHECK(std::abs(a - b) < 1e-9);
  }
}

TEST_CASE("correction factor exceeds one and approaches one for narrow pulses") {
  double prev = correction_factor(1, 4.0);
  for (double w : {2.0, 1.0, 0.5, 0.1, 0.01}) {
    const double mu = correction_factor(1, w);
    CHECK(mu > 1.0);
    CHECK(mu < prev);
    prev = mu;
  }
  CHECK(correction_factor(12, 0.001) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("lorentzian pulse is symmetric and peaks at the centre") {
  const SampledPulse p = lorentzian_pulse(lorentz(5, 1.3));
  const std::size_t n = p.g.size();
  for (std::size_t k = 0; k < n; ++k) CHECK(p.g[k] == doctest::Approx(p.g[n - 1 - k]).epsilon(1e-12));
  const double peak = p.g[n / 2];
  for (double v : p.g) CHECK(v <= peak + 1e-12);
  CHECK(peak == doctest::Approx(2.0 * p.mu / 1.3));
}

TEST_CASE("phase response is monotone") {
  for (PulseFamily fam : {PulseFamily::Lorentzian, PulseFamily::RaisedCosine, PulseFamily::GaussianGmsk}) {
    PulseSpec s = lorentz(4, 0.7);
    s.family = fam;
    const SampledPulse p = make_pulse(s, 32);
    for (std::size_t k = 1; k < p.phi0.size(); ++k) CHECK(p.phi0[k] >= p.phi0[k - 1] - 1e-15);
    CHECK(p.phi0.back() == doctest::Approx(0.5).epsilon(1e-9));
  }
}

TEST_CASE("closed-form lorentzian frequency agrees with the samples") {
  const SampledPulse p = lorentzian_pulse(lorentz(3, 0.9), 16);
  for (std::size_t k = 0; k < p.g.size(); ++k) {
    CHECK(p.g[k] == doctest::Approx(lorentzian_frequency(static_cast<double>(k) / 16.0, 3, 0.9)));
  }
  CHECK(lorentzian_frequency(-0.1, 3, 0.9) == 0.0);
  CHECK(lorentzian_frequency(3.1, 3, 0.9) == 0.0);
}

TEST_CASE("phase samples follow the arctangent closed form") {
  const double L = 5, w = 1.2;
  const SampledPulse p = lorentzian_pulse(lorentz(5, w), 8);
  for (std::size_t k = 0; k < p.phi0.size(); ++k) {
    const double t = static_cast<double>(k) / 8.0;
    const double expect = p.mu / (2.0 * std::numbers::pi) * (std::atan((t - L / 2) / w) + std::atan(L / (2 * w)));
    CHECK(p.phi0[k] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("raised cosine and gaussian pulses") {
  PulseSpec rc;
  rc.family = PulseFamily::RaisedCosine;
  rc.L = 2;
  const SampledPulse prc = make_pulse(rc);
  CHECK(area(prc) == doctest::Approx(2.0 * std::numbers::pi).epsilon(1e-6));
  CHECK(prc.g.front() == doctest::Approx(0.0));
  CHECK(prc.natural_alphabet == Alphabet::Bipolar);

  PulseSpec gm;
  gm.family = PulseFamily::GaussianGmsk;
  gm.L = 4;
  gm.bt = 0.3;
  const SampledPulse pg = make_pulse(gm);
  CHECK(area(pg) == doctest::Approx(2.0 * std::numbers::pi).epsilon(1e-6));
  CHECK(pg.g.front() < 0.02 * pg.g[pg.g.size() / 2]);
}

TEST_CASE("invalid pulse parameters are rejected") {
  CHECK_THROWS_AS(lorentz(5, 0.0).validate(), DomainError);
  CHECK_THROWS_AS(lorentz(5, -1.0).validate(), DomainError);
  CHECK_THROWS_AS(lorentz(0, 1.0).validate(), DomainError);
  PulseSpec bad_ts = lorentz(2, 1.0);
  bad_ts.Ts = 0.0;
  CHECK_THROWS_AS(bad_ts.validate(), DomainError);
  PulseSpec bad_bt;
  bad_bt.family = PulseFamily::GaussianGmsk;
  bad_bt.bt = 0.0;
  CHECK_THROWS_AS(bad_bt.validate(), DomainError);
  CHECK_THROWS_AS(lorentzian_pulse(lorentz(2, 1.0), 1), ConfigError);
  CHECK_THROWS_AS(comparison_pulse(lorentz(2, 1.0)), InputError);
}

TEST_CASE("family and alphabet names round trip") {
  for (PulseFamily f : {PulseFamily::Lorentzian, PulseFamily::RaisedCosine, PulseFamily::GaussianGmsk}) {
    CHECK(parse_pulse_family(to_string(f)) == f);
  }
  for (Alphabet a : {Alphabet::NonNegative, Alphabet::Bipolar}) CHECK(parse_alphabet(to_string(a)) == a);
  CHECK_THROWS_AS(parse_pulse_family("triangle"), InputError);
}
