#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ssbfsk/errors.hpp"
#include "ssbfsk/modulator.hpp"

using namespace ssbfsk;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

CpmScheme lorentz_scheme(int M, double h, int L, double w, double Es = 1.0) {
  PulseSpec s;
  s.L = L;
  s.w = w;
  return CpmScheme::make(M, h, s, kDefaultSamplesPerSymbol, std::nullopt, Es);
}

std::vector<int> random_symbols(const CpmScheme& s, int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::vector<int> out;
  for (int i = 0; i < n; ++i) out.push_back(s.value_of(static_cast<int>(rng() % static_cast<unsigned>(s.M))));
  return out;
}

double wrap(double x) { return std::remainder(x, kTwoPi); }

}  // namespace

TEST_CASE("all-zero symbols give zero phase and a constant signal") {
  const CpmScheme s = lorentz_scheme(4, 0.7, 3, 0.8, 2.0);
  const std::vector<int> zeros(12, 0);
  const PhaseTrajectory t = phase_trajectory(s, zeros);
  CHECK(t.phi.size() == (12 + 3 - 1) * 64 + 1);
  for (double p : t.phi) CHECK(p == 0.0);
  for (const Complex& z : modulate(s, zeros)) CHECK(z == Complex(std::sqrt(2.0), 0.0));
}

TEST_CASE("integer index returns to a multiple of 2 pi") {
  const CpmScheme s = lorentz_scheme(2, 1.0, 4, 0.6);
  const auto symbols = random_symbols(s, 37, 3);
  const PhaseTrajectory t = phase_trajectory(s, symbols);
  CHECK(std::abs(wrap(t.phi.back())) < 1e-9);
}

TEST_CASE("binary staircase is non-decreasing and climbs 2 pi per one") {
  const CpmScheme s = lorentz_scheme(2, 1.0, 4, 0.3);
  const std::vector<int> bits{1, 1, 1, 1, 0, 1, 1, 0, 0, 1};
  const PhaseTrajectory t = phase_trajectory(s, bits);
  for (std::size_t k = 1; k < t.phi.size(); ++k) CHECK(t.phi[k] >= t.phi[k - 1] - 1e-12);
  const double ones = static_cast<double>(std::count(bits.begin(), bits.end(), 1));
  CHECK(t.phi.back() == doctest::Approx(kTwoPi * ones).epsilon(1e-12));
  CHECK(t.t.back() == doctest::Approx(13.0));
}

TEST_CASE("completed symbol adds 2 pi h k") {
  const CpmScheme s = lorentz_scheme(4, 0.33, 2, 0.7);
  for (int k = 0; k < 4; ++k) {
    const std::vector<int> one{k};
    CHECK(phase_trajectory(s, one).phi.back() == doctest::Approx(kTwoPi * 0.33 * k));
  }
}

TEST_CASE("constant envelope and energy per symbol") {
  const CpmScheme s = lorentz_scheme(8, 0.41, 5, 1.1, 3.0);
  const auto symbols = random_symbols(s, 50, 9);
  const auto sig = modulate(s, symbols);
  const double amp = std::sqrt(3.0);
  for (const Complex& z : sig) CHECK(std::abs(std::abs(z) - amp) <= 1e-12 * amp);
  const double dt = 1.0 / 64;
  double energy = 0.0;
  for (std::size_t k = 0; k < 50 * 64; ++k) energy += std::norm(sig[k]) * dt;
  CHECK(energy == doctest::Approx(50 * 3.0).epsilon(1e-11));
}

TEST_CASE("phase steps are bounded by the instantaneous frequency") {
  for (auto [M, h, L, w] : {std::tuple{2, 0.78, 5, 1.3}, std::tuple{4, 0.33, 2, 0.7}, std::tuple{8, 0.2, 3, 0.3}}) {
    const CpmScheme s = lorentz_scheme(M, h, L, w);
    const auto symbols = random_symbols(s, 100, 11);
    const PhaseTrajectory t = phase_trajectory(s, symbols);
    // d(phi)/dt = (1/2) sum_i weight_i g(t - i Ts); bound the overlap sum of g.
    double overlap = 0.0;
    for (int k = 0; k < 64; ++k) {
      double acc = 0.0;
      for (int j = 0; j < L; ++j) acc += s.pulse.g[static_cast<std::size_t>(k + 64 * j)];
      overlap = std::max(overlap, acc);
    }
    const double bound = 0.5 * s.phase_weight(M - 1) * overlap / 64.0 * 1.01;
    double worst = 0.0;
    for (std::size_t k = 1; k < t.phi.size(); ++k) worst = std::max(worst, std::abs(t.phi[k] - t.phi[k - 1]));
    CHECK(worst <= bound);
    CHECK(worst < std::numbers::pi);
  }
}

TEST_CASE("streaming concatenation is sample exact") {
  const CpmScheme s = lorentz_scheme(4, 0.49, 3, 0.9);
  const auto a = random_symbols(s, 20, 1);
  const auto b = random_symbols(s, 17, 2);
  std::vector<int> ab(a);
  ab.insert(ab.end(), b.begin(), b.end());

  StreamingModulator split(s);
  auto first = split.push(a);
  const auto second = split.push(b);
  first.insert(first.end(), second.begin(), second.end());
  StreamingModulator whole(s);
  const auto joined = whole.push(ab);
  REQUIRE(first.size() == joined.size());
  for (std::size_t k = 0; k < joined.size(); ++k) CHECK(first[k] == joined[k]);
  CHECK(whole.symbols_pushed() == 37);

  const auto block = modulate(s, ab);
  for (std::size_t k = 0; k < joined.size(); ++k) CHECK(std::abs(block[k] - joined[k]) < 1e-12);
}

TEST_CASE("reset restarts the streaming state") {
  const CpmScheme s = lorentz_scheme(2, 0.65, 5, 1.2);
  const auto a = random_symbols(s, 10, 4);
  StreamingModulator m(s);
  const auto once = m.push(a);
  m.reset();
  CHECK(m.completed_phase() == 0.0);
  CHECK(m.push(a) == once);
}

TEST_CASE("bipolar alphabet for comparison pulses") {
  PulseSpec rc;
  rc.family = PulseFamily::RaisedCosine;
  rc.L = 2;
  const CpmScheme s = CpmScheme::make(4, 0.25, rc);
  CHECK(s.alphabet == Alphabet::Bipolar);
  CHECK(s.index_of(-3) == 0);
  CHECK(s.index_of(3) == 3);
  CHECK(s.value_of(1) == -1);
  CHECK_THROWS_AS(s.index_of(0), InputError);
  CHECK_THROWS_AS(s.index_of(5), InputError);
  const std::vector<int> one{3};
  CHECK(phase_trajectory(s, one).phi.back() == doctest::Approx(std::numbers::pi * 0.25 * 3));
}

TEST_CASE("invalid schemes are rejected") {
  PulseSpec p;
  p.L = 2;
  p.w = 1.0;
  CHECK_THROWS_AS(CpmScheme::make(3, 0.5, p), DomainError);
  CHECK_THROWS_AS(CpmScheme::make(2, 0.0, p), DomainError);
  CHECK_THROWS_AS(CpmScheme::make(2, 0.5, p, 64, Alphabet::Bipolar), DomainError);
  CHECK_THROWS_AS(CpmScheme::make(2, 0.5, p, 64, std::nullopt, 0.0), DomainError);
  const CpmScheme s = lorentz_scheme(2, 0.5, 2, 1.0);
  const std::vector<int> bad{0, 2};
  CHECK_THROWS_AS(modulate(s, bad), InputError);
}

TEST_CASE("resampling keeps the phase law") {
  const CpmScheme s = lorentz_scheme(2, 0.78, 5, 1.3);
  const CpmScheme r = s.resampled(16);
  CHECK(r.sps() == 16);
  const std::vector<int> sym{1, 0, 1, 1};
  const auto fine = phase_trajectory(s, sym).phi;
  const auto coarse = phase_trajectory(r, sym).phi;
  for (std::size_t k = 0; k < coarse.size(); ++k) CHECK(coarse[k] == doctest::Approx(fine[4 * k]).epsilon(1e-12));
}
