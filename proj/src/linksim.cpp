#include "ssbfsk/linksim.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "ssbfsk/distance.hpp"
#include "ssbfsk/errors.hpp"

namespace ssbfsk {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

int ipow(int base, int exp) {
  int r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

}  // namespace

Rational rationalize(double x, long max_q) {
  if (!std::isfinite(x)) throw ConfigError("modulation index must be finite");
  // Continued-fraction convergents.
  long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double r = x;
  for (int iter = 0; iter < 64; ++iter) {
    const double a = std::floor(r);
    const long ai = static_cast<long>(a);
    const long p2 = ai * p1 + p0;
    const long q2 = ai * q1 + q0;
    if (q2 > max_q) break;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    if (std::abs(x - static_cast<double>(p1) / static_cast<double>(q1)) < 1e-9) {
      const long g = std::gcd(p1, q1);
      return {p1 / g, q1 / g};
    }
    const double frac = r - a;
    if (frac < 1e-15) break;
    r = 1.0 / frac;
  }
  throw ConfigError("modulation index is not a rational p/q with q <= " + std::to_string(max_q));
}

int Trellis::next_state(int state, int input) const {
  const int r = state / histories;
  const int hist = state % histories;
  const int hf = input + M * hist;
  const int oldest = hf / histories;
  const int nr = (r + phase_step[static_cast<std::size_t>(oldest)]) % phase_states;
  return nr * histories + hf % histories;
}

std::span<const Complex> Trellis::branch(int state, int input, std::vector<Complex>& scratch) const {
  const int r = state / histories;
  const int hf = input + M * (state % histories);
  scratch.resize(static_cast<std::size_t>(samples_per_symbol));
  for (int k = 0; k < samples_per_symbol; ++k) {
    scratch[static_cast<std::size_t>(k)] =
        rotations[static_cast<std::size_t>(r)] * waveforms[static_cast<std::size_t>(hf * samples_per_symbol + k)];
  }
  return scratch;
}

Trellis build_trellis(const CpmScheme& scheme, int samples_per_symbol) {
  scheme.validate();
  Trellis t;
  t.M = scheme.M;
  t.L = scheme.L();
  t.h = rationalize(scheme.h);
  t.phase_states = static_cast<int>(scheme.alphabet == Alphabet::Bipolar ? 2 * t.h.q : t.h.q);
  if (t.L > 14) throw ConfigError("trellis memory too large");
  t.histories = ipow(t.M, t.L - 1);
  if (static_cast<long>(t.phase_states) * t.histories > (1L << 24)) throw ConfigError("trellis has too many states");
  t.samples_per_symbol = samples_per_symbol;
  t.dt = scheme.Ts() / samples_per_symbol;

  const CpmScheme rx = scheme.resampled(samples_per_symbol);
  const double hq = static_cast<double>(t.h.p) / static_cast<double>(t.h.q);
  std::vector<double> weight(static_cast<std::size_t>(t.M));
  for (int k = 0; k < t.M; ++k) {
    // Completed pulse adds pi * weight = 2 pi * (phase_states * weight / 2) / phase_states.
    const long num = scheme.alphabet == Alphabet::Bipolar ? t.h.p * (2L * k - t.M + 1) : t.h.p * k;
    const long step = ((num % t.phase_states) + t.phase_states) % t.phase_states;
    t.phase_step.push_back(static_cast<int>(step));
    weight[static_cast<std::size_t>(k)] = scheme.alphabet == Alphabet::Bipolar ? hq * (2 * k - t.M + 1) : 2.0 * hq * k;
  }

  const double amp = scheme.amplitude();
  const int full = t.full_histories();
  t.waveforms.resize(static_cast<std::size_t>(full) * samples_per_symbol);
  for (int hf = 0; hf < full; ++hf) {
    for (int k = 0; k < samples_per_symbol; ++k) {
      double acc = 0.0;
      int digits = hf;
      for (int j = 0; j < t.L; ++j) {
        const int a = digits % t.M;
        digits /= t.M;
        acc += weight[static_cast<std::size_t>(a)] * rx.pulse.phi0[static_cast<std::size_t>(k + j * samples_per_symbol)];
      }
      t.waveforms[static_cast<std::size_t>(hf * samples_per_symbol + k)] = std::polar(amp, kTwoPi * acc);
    }
  }
  t.rotations.resize(static_cast<std::size_t>(t.phase_states));
  for (int r = 0; r < t.phase_states; ++r) t.rotations[static_cast<std::size_t>(r)] = std::polar(1.0, kTwoPi * r / t.phase_states);
  return t;
}

std::vector<int> viterbi_detect(const Trellis& t, std::span<const Complex> received, int n_symbols, int tail,
                                const DetectorOptions& options) {
  const int sps = t.samples_per_symbol;
  if (n_symbols < 0 || static_cast<std::size_t>(n_symbols) * sps > received.size()) {
    throw InputError("received signal shorter than the symbol count");
  }
  const int S = t.num_states();
  const int H = t.histories;
  const int M = t.M;
  const int full = t.full_histories();
  const int depth = options.traceback_depth > 0 ? options.traceback_depth : 5 * (t.L + static_cast<int>(t.h.q));

  std::vector<Complex> rot(t.rotations);
  if (options.reference_phase_offset != 0.0) {
    const Complex c = std::polar(1.0, options.reference_phase_offset);
    for (auto& z : rot) z *= c;
  }

  constexpr double kNone = -std::numeric_limits<double>::infinity();
  std::vector<double> metric(static_cast<std::size_t>(S), kNone);
  std::vector<double> next(static_cast<std::size_t>(S));
  metric[0] = 0.0;
  std::vector<std::uint8_t> ring(static_cast<std::size_t>(depth) * S);
  std::vector<Complex> Z(static_cast<std::size_t>(full));
  std::vector<int> decided(static_cast<std::size_t>(n_symbols), 0);

  // Follows survivors from `state` at time `from` down to time `to`, writing decisions
  // for times in [to, write_from].
  auto trace = [&](int state, int from, int to, int write_from) {
    for (int n = from; n >= to; --n) {
      const int d = ring[static_cast<std::size_t>(n % depth) * S + static_cast<std::size_t>(state)];
      const int r = state / H;
      const int hf = state % H + d * H;
      if (n <= write_from) decided[static_cast<std::size_t>(n)] = hf % M;
      const int pr = (r - t.phase_step[static_cast<std::size_t>(d)] + t.phase_states) % t.phase_states;
      state = pr * H + hf / M;
    }
  };

  for (int n = 0; n < n_symbols; ++n) {
    const Complex* rx = received.data() + static_cast<std::size_t>(n) * sps;
    for (int hf = 0; hf < full; ++hf) {
      const Complex* w = t.waveforms.data() + static_cast<std::size_t>(hf) * sps;
      Complex acc{0.0, 0.0};
      for (int k = 0; k < sps; ++k) acc += rx[k] * std::conj(w[k]);
      Z[static_cast<std::size_t>(hf)] = acc * t.dt;
    }
    std::fill(next.begin(), next.end(), kNone);
    std::uint8_t* dec = ring.data() + static_cast<std::size_t>(n % depth) * S;
    const bool tail_symbol = n >= n_symbols - tail;
    for (int s = 0; s < S; ++s) {
      const double m = metric[static_cast<std::size_t>(s)];
      if (m == kNone) continue;
      const int r = s / H;
      const int hist = s % H;
      const Complex rc = std::conj(rot[static_cast<std::size_t>(r)]);
      for (int a = 0; a < (tail_symbol ? 1 : M); ++a) {
        const int hf = a + M * hist;
        const int oldest = hf / H;
        const int ns = ((r + t.phase_step[static_cast<std::size_t>(oldest)]) % t.phase_states) * H + hf % H;
        const double cand = m + (rc * Z[static_cast<std::size_t>(hf)]).real();
        if (cand > next[static_cast<std::size_t>(ns)]) {
          next[static_cast<std::size_t>(ns)] = cand;
          dec[ns] = static_cast<std::uint8_t>(oldest);
        }
      }
    }
    metric.swap(next);
    if (n % 64 == 63) {
      double top = kNone;
      for (double m : metric) top = std::max(top, m);
      for (double& m : metric) {
        if (m != kNone) m -= top;
      }
    }
    const int out = n - depth + 1;
    if (out >= 0) {
      int best = 0;
      for (int s = 1; s < S; ++s) {
        if (metric[static_cast<std::size_t>(s)] > metric[static_cast<std::size_t>(best)]) best = s;
      }
      trace(best, n, out, out);
    }
  }

  if (n_symbols > 0) {
    int best = -1;
    for (int s = 0; s < S; ++s) {
      if (tail > 0 && s % H != 0) continue;
      if (best < 0 || metric[static_cast<std::size_t>(s)] > metric[static_cast<std::size_t>(best)]) best = s;
    }
    const int first = std::max(0, n_symbols - depth + 1);
    trace(best, n_symbols - 1, first, n_symbols - 1);
  }
  return decided;
}

int gray_encode(int index) { return index ^ (index >> 1); }

int gray_decode(int bits) {
  int index = 0;
  for (; bits; bits >>= 1) index ^= bits;
  return index;
}

std::vector<BerPoint> simulate_ber(const CpmScheme& scheme, std::span<const double> ebn0_db, const BerOptions& options) {
  if (options.max_bits < 10'000) throw InputError("max_bits must be at least 10^4");
  if (options.frame_symbols < 1) throw InputError("frame_symbols must be positive");
  const CpmScheme tx = scheme.resampled(options.samples_per_symbol);
  const Trellis trellis = build_trellis(scheme, options.samples_per_symbol);
  const double dmin2 = options.dmin2 ? *options.dmin2 : d_min(scheme).d_squared;
  const int bits_per_symbol = std::countr_zero(static_cast<unsigned>(scheme.M));
  const int L = scheme.L();
  const int n_total = options.frame_symbols + L;
  const double Eb = scheme.Es / bits_per_symbol;
  DetectorOptions det;
  det.traceback_depth = options.traceback_depth;

  std::vector<BerPoint> points;
  for (std::size_t idx = 0; idx < ebn0_db.size(); ++idx) {
    BerPoint pt;
    pt.ebn0_db = ebn0_db[idx];
    pt.union_bound = union_bound_pe(dmin2, pt.ebn0_db);
    std::mt19937_64 rng(splitmix64(options.seed ^ splitmix64(static_cast<std::uint64_t>(idx) + 1)));
    const double N0 = Eb / std::pow(10.0, pt.ebn0_db / 10.0);
    const double sigma = options.noiseless ? 0.0 : std::sqrt(N0 / (2.0 * trellis.dt));
    std::normal_distribution<double> noise(0.0, 1.0);

    std::vector<int> sent(static_cast<std::size_t>(n_total));
    std::vector<Complex> signal;
    while (pt.bits < options.max_bits && pt.bit_errors < options.target_errors) {
      for (int n = 0; n < n_total; ++n) {
        sent[static_cast<std::size_t>(n)] = n < options.frame_symbols ? static_cast<int>(rng() % static_cast<unsigned>(scheme.M)) : 0;
      }
      StreamingModulator mod(tx);
      mod.prime(0, L - 1);
      signal.clear();
      signal.reserve(static_cast<std::size_t>(n_total) * options.samples_per_symbol);
      for (int a : sent) mod.push_index(a, signal);
      if (sigma > 0.0) {
        for (auto& z : signal) z += Complex(sigma * noise(rng), sigma * noise(rng));
      }
      const std::vector<int> got = viterbi_detect(trellis, signal, n_total, L, det);
      for (int n = 0; n < options.frame_symbols; ++n) {
        const int diff = gray_encode(sent[static_cast<std::size_t>(n)]) ^ gray_encode(got[static_cast<std::size_t>(n)]);
        pt.bit_errors += static_cast<std::uint64_t>(std::popcount(static_cast<unsigned>(diff)));
      }
      pt.bits += static_cast<std::uint64_t>(options.frame_symbols) * bits_per_symbol;
    }
    pt.ber = static_cast<double>(pt.bit_errors) / static_cast<double>(pt.bits);
    points.push_back(pt);
  }
  return points;
}

}  // namespace ssbfsk
