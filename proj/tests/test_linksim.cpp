#include <doctest.h>

#include <cmath>
#include <random>
#include <algorithm>
#include <bit>
#include <numbers>
#include <tuple>

#include "ssbfsk/distance.hpp"
#include "ssbfsk/errors.hpp"
#include "ssbfsk/linksim.hpp"

using namespace ssbfsk;

namespace {

CpmScheme lorentz_scheme(int M, double h, int L, double w) {
  PulseSpec s;
  s.L = L;
  s.w = w;
  return CpmScheme::make(M, h, s);
}

// One frame built the same way the simulator does: index-0 pre-history, L zero tail.
std::vector<Complex> transmit(const CpmScheme& scheme, const std::vector<int>& indices, int sps) {
  const CpmScheme tx = scheme.resampled(sps);
  StreamingModulator mod(tx);
  mod.prime(0, tx.L() - 1);
  std::vector<Complex> out;
  for (int a : indices) mod.push_index(a, out);
  return out;
}

std::vector<int> random_frame(int M, int n, int tail, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<int> out(static_cast<std::size_t>(n + tail), 0);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = static_cast<int>(rng() % static_cast<unsigned>(M));
  return out;
}

}  // namespace

TEST_CASE("rationalize finds lowest terms") {
  CHECK(rationalize(0.78).p == 39);
  CHECK(rationalize(0.78).q == 50);
  CHECK(rationalize(0.5).q == 2);
  CHECK(rationalize(1.04).p == 26);
  CHECK(rationalize(1.04).q == 25);
  CHECK(rationalize(0.33).q == 100);
  CHECK(rationalize(2.0).q == 1);
  CHECK_THROWS_AS(rationalize(std::numbers::pi), ConfigError);
  CHECK_THROWS_AS(rationalize(0.777), ConfigError);
}

TEST_CASE("trellis sizes") {
  const Trellis a = build_trellis(lorentz_scheme(2, 0.5, 2, 0.5));
  CHECK(a.phase_states == 2);
  CHECK(a.num_states() == 4);
  const Trellis b = build_trellis(lorentz_scheme(2, 0.78, 5, 1.3));
  CHECK(b.num_states() == 800);
  CHECK(b.num_states() <= b.h.q * 16);
  CHECK_THROWS_AS(build_trellis(lorentz_scheme(2, 0.777, 2, 0.5)), ConfigError);
}

TEST_CASE("every state has M distinct successors and constant-envelope branches") {
  const CpmScheme s = lorentz_scheme(4, 0.33, 2, 0.7);
  const Trellis t = build_trellis(s);
  std::vector<int> incoming(static_cast<std::size_t>(t.num_states()), 0);
  std::vector<Complex> scratch;
  for (int st = 0; st < t.num_states(); ++st) {
    std::vector<int> next;
    for (int a = 0; a < t.M; ++a) {
      const int ns = t.next_state(st, a);
      CHECK(ns >= 0);
      CHECK(ns < t.num_states());
      next.push_back(ns);
      ++incoming[static_cast<std::size_t>(ns)];
      for (const Complex& z : t.branch(st, a, scratch)) CHECK(std::abs(z) == doctest::Approx(1.0).epsilon(1e-12));
    }
    std::sort(next.begin(), next.end());
    CHECK(std::unique(next.begin(), next.end()) == next.end());
  }
  for (int c : incoming) CHECK(c == t.M);
}

TEST_CASE("branch waveforms reproduce the modulator along a path") {
  const CpmScheme s = lorentz_scheme(2, 0.65, 5, 1.2);
  const Trellis t = build_trellis(s);
  const auto frame = random_frame(2, 40, 5, 3);
  const auto sig = transmit(s, frame, t.samples_per_symbol);
  int state = 0;
  std::vector<Complex> scratch;
  for (std::size_t n = 0; n < frame.size(); ++n) {
    const auto seg = t.branch(state, frame[n], scratch);
    for (int k = 0; k < t.samples_per_symbol; ++k) {
      CHECK(std::abs(seg[static_cast<std::size_t>(k)] - sig[n * 16 + static_cast<std::size_t>(k)]) < 1e-9);
    }
    state = t.next_state(state, frame[n]);
  }
  CHECK(state % t.histories == 0);
}

TEST_CASE("noiseless detection recovers every table scheme") {
  const std::vector<std::tuple<int, int, double, double>> schemes{
      {2, 5, 1.3, 0.78}, {4, 2, 0.7, 0.49}, {8, 2, 0.6, 0.36}, {2, 5, 1.2, 0.65}, {4, 2, 0.8, 0.33}, {8, 2, 0.6, 0.26},
      {2, 12, 0.8, 1.04}, {4, 2, 0.7, 0.44}, {8, 2, 0.7, 0.35}, {2, 6, 1.1, 0.67}, {4, 2, 0.7, 0.33}};
  for (const auto& [M, L, w, h] : schemes) {
    const CpmScheme s = lorentz_scheme(M, h, L, w);
    BerOptions opt;
    opt.noiseless = true;
    opt.dmin2 = 1.0;
    opt.max_bits = static_cast<std::uint64_t>(10'000 * std::log2(M));
    const double snr[] = {0.0};
    const auto r = simulate_ber(s, snr, opt);
    INFO("M=" << M << " L=" << L << " w=" << w << " h=" << h);
    CHECK(r[0].bit_errors == 0);
    CHECK(r[0].bits >= opt.max_bits);
  }
}

TEST_CASE("a common phase offset leaves decisions unchanged") {
  const CpmScheme s = lorentz_scheme(2, 0.78, 5, 1.3);
  const Trellis t = build_trellis(s);
  const auto frame = random_frame(2, 300, 5, 8);
  auto sig = transmit(s, frame, 16);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.2);
  for (auto& z : sig) z += Complex(n(rng), n(rng));
  const auto plain = viterbi_detect(t, sig, static_cast<int>(frame.size()), 5);
  const double offset = 0.937;
  auto rotated = sig;
  for (auto& z : rotated) z *= std::polar(1.0, offset);
  DetectorOptions opt;
  opt.reference_phase_offset = offset;
  CHECK(viterbi_detect(t, rotated, static_cast<int>(frame.size()), 5, opt) == plain);
}

TEST_CASE("seeded runs are reproducible") {
  const CpmScheme s = lorentz_scheme(2, 0.65, 5, 1.2);
  BerOptions opt;
  opt.max_bits = 20'000;
  opt.seed = 42;
  opt.dmin2 = 1.79;
  const double snr[] = {2.0, 4.0};
  const auto a = simulate_ber(s, snr, opt);
  const auto b = simulate_ber(s, snr, opt);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(a[i].bit_errors == b[i].bit_errors);
    CHECK(a[i].bits == b[i].bits);
    CHECK(a[i].ber >= 0.0);
    CHECK(a[i].ber <= 1.0);
    CHECK(a[i].union_bound == doctest::Approx(union_bound_pe(1.79, snr[i])));
  }
  opt.seed = 43;
  const auto c = simulate_ber(s, snr, opt);
  CHECK((c[0].bit_errors != a[0].bit_errors || c[1].bit_errors != a[1].bit_errors));
}

TEST_CASE("stopping rules") {
  const CpmScheme s = lorentz_scheme(2, 0.65, 5, 1.2);
  BerOptions opt;
  opt.dmin2 = 1.79;
  opt.max_bits = 10'000;
  opt.target_errors = 50;
  const double snr[] = {0.0};
  const auto r = simulate_ber(s, snr, opt);
  CHECK((r[0].bit_errors >= 50 || r[0].bits >= 10'000));
  opt.max_bits = 100;
  CHECK_THROWS_AS(simulate_ber(s, snr, opt), InputError);
}

TEST_CASE("gray mapping") {
  for (int i = 0; i < 8; ++i) {
    CHECK(gray_decode(gray_encode(i)) == i);
    if (i > 0) CHECK(std::popcount(static_cast<unsigned>(gray_encode(i) ^ gray_encode(i - 1))) == 1);
  }
}
