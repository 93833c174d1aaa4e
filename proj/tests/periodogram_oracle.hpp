#pragma once

// Averaged-periodogram check of the analytic PSD: Welch estimate of a long random
// stream (Hann window, 50% overlap) against the analytic PSD smoothed by the same
// window kernel.

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "ssbfsk/modulator.hpp"
#include "ssbfsk/spectrum.hpp"

namespace oracle {

struct PeriodogramComparison {
  double relative_rms = 0.0;
  int bins = 0;
};

struct Welch {
  std::vector<double> freq;  // cycles per Ts
  std::vector<double> P;
  int segment = 0;  // samples
  double dt = 0.0;
};

inline Welch welch_periodogram(const ssbfsk::CpmScheme& base, long n_symbols, int segment_symbols, int sps,
                               std::uint64_t seed) {
  using ssbfsk::Complex;
  const ssbfsk::CpmScheme scheme = base.resampled(sps);
  std::mt19937_64 rng(seed);
  ssbfsk::StreamingModulator mod(scheme);
  std::vector<Complex> x;
  x.reserve(static_cast<std::size_t>(n_symbols * sps));
  for (long i = 0; i < n_symbols; ++i) mod.push_index(static_cast<int>(rng() % static_cast<unsigned>(scheme.M)), x);

  Welch out;
  out.segment = segment_symbols * sps;
  out.dt = scheme.Ts() / sps;
  const int N = out.segment;
  std::vector<double> win(static_cast<std::size_t>(N));
  double wsum2 = 0.0;
  for (int n = 0; n < N; ++n) {
    win[static_cast<std::size_t>(n)] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / N);
    wsum2 += win[static_cast<std::size_t>(n)] * win[static_cast<std::size_t>(n)];
  }
  fftw_complex* buf = fftw_alloc_complex(static_cast<std::size_t>(N));
  fftw_plan plan = fftw_plan_dft_1d(N, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  std::vector<double> acc(static_cast<std::size_t>(N), 0.0);
  long segments = 0;
  for (std::size_t start = 0; start + static_cast<std::size_t>(N) <= x.size(); start += static_cast<std::size_t>(N / 2)) {
    for (int n = 0; n < N; ++n) {
      const Complex v = x[start + static_cast<std::size_t>(n)] * win[static_cast<std::size_t>(n)];
      buf[n][0] = v.real();
      buf[n][1] = v.imag();
    }
    fftw_execute(plan);
    for (int k = 0; k < N; ++k) acc[static_cast<std::size_t>(k)] += buf[k][0] * buf[k][0] + buf[k][1] * buf[k][1];
    ++segments;
  }
  fftw_destroy_plan(plan);
  fftw_free(buf);

  const double scale = out.dt / (wsum2 * static_cast<double>(segments));
  for (int k = -N / 2; k < N / 2; ++k) {
    const int idx = k < 0 ? k + N : k;
    out.freq.push_back(static_cast<double>(k) / (N * out.dt) * scheme.Ts());
    out.P.push_back(acc[static_cast<std::size_t>(idx)] * scale);
  }
  return out;
}

// dt / sum(w^2) * |W(theta)|^2 for the periodic Hann window of length N.
inline double hann_kernel(double theta, int N) {
  auto dirichlet = [N](double th) {
    const double s = std::sin(0.5 * th);
    const double mag = std::abs(s) < 1e-12 ? N * std::cos(0.5 * N * th) / std::cos(0.5 * th) : std::sin(0.5 * N * th) / s;
    return std::polar(mag, -0.5 * th * (N - 1));
  };
  const double step = 2.0 * std::numbers::pi / N;
  const std::complex<double> W = 0.5 * dirichlet(theta) - 0.25 * dirichlet(theta - step) - 0.25 * dirichlet(theta + step);
  return std::norm(W) / (0.375 * N);
}

// Expected periodogram: the analytic PSD (continuous part and lines) smoothed by the
// window kernel, evaluated at frequency f (cycles per Ts).
inline double smoothed_psd(const ssbfsk::PsdEstimate& psd, double f, int N, double dt) {
  const double two_pi_dt = 2.0 * std::numbers::pi * dt;
  double acc = 0.0;
  for (std::size_t i = 1; i < psd.freq.size(); ++i) {
    const double df = psd.freq[i] - psd.freq[i - 1];
    const double a = psd.S[i - 1] * hann_kernel(two_pi_dt * (f - psd.freq[i - 1]), N);
    const double b = psd.S[i] * hann_kernel(two_pi_dt * (f - psd.freq[i]), N);
    acc += 0.5 * (a + b) * df;
  }
  for (const auto& line : psd.lines) acc += line.power * hann_kernel(two_pi_dt * (f - line.f), N);
  return acc * dt;
}

inline PeriodogramComparison compare_periodogram(const ssbfsk::CpmScheme& scheme, long n_symbols = 100000,
                                                 int segment_symbols = 64, int sps = 32, std::uint64_t seed = 7) {
  const ssbfsk::PsdEstimate analytic = ssbfsk::psd(scheme);
  const ssbfsk::OccupiedBand band = ssbfsk::occupied_band(analytic, 0.99, scheme.M);
  const Welch est = welch_periodogram(scheme, n_symbols, segment_symbols, sps, seed);
  double num = 0.0, den = 0.0;
  PeriodogramComparison out;
  for (std::size_t k = 0; k < est.freq.size(); ++k) {
    if (est.freq[k] < band.f_low || est.freq[k] > band.f_high) continue;
    const double expect = smoothed_psd(analytic, est.freq[k], est.segment, est.dt);
    num += (est.P[k] - expect) * (est.P[k] - expect);
    den += expect * expect;
    ++out.bins;
  }
  out.relative_rms = std::sqrt(num / den);
  return out;
}

}  // namespace oracle
