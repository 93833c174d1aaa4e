#include "ssbfsk/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "ssbfsk/errors.hpp"

namespace ssbfsk {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

std::vector<double> resolve_priors(const CpmScheme& scheme, Priors priors) {
  if (priors.empty()) return std::vector<double>(static_cast<std::size_t>(scheme.M), 1.0 / scheme.M);
  if (priors.size() != static_cast<std::size_t>(scheme.M)) {
    throw InputError("expected " + std::to_string(scheme.M) + " symbol priors");
  }
  double sum = 0.0;
  for (double p : priors) {
    if (p < 0.0) throw InputError("symbol priors must be non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InputError("symbol priors must sum to 1");
  return {priors.begin(), priors.end()};
}

// Trapezoidal Fourier integral of R over samples [first, first + count) with spacing dt,
// with the exponent referenced to tau = 0 at `first`.
Complex fourier_segment(const std::vector<Complex>& R, std::size_t first, std::size_t count, double dt, double f) {
  const Complex step = std::polar(1.0, -kTwoPi * f * dt);
  Complex phasor(1.0, 0.0);
  Complex acc(0.0, 0.0);
  for (std::size_t k = 0; k < count; ++k) {
    const double w = (k == 0 || k + 1 == count) ? 0.5 : 1.0;
    acc += w * R[first + k] * phasor;
    phasor *= step;
  }
  return acc * dt;
}

// d/df of exp(-j 2 pi f offset) * fourier_segment(...).
Complex fourier_segment_derivative(const std::vector<Complex>& R, std::size_t first, std::size_t count, double dt,
                                   double f, double offset) {
  Complex acc(0.0, 0.0);
  for (std::size_t k = 0; k < count; ++k) {
    const double w = (k == 0 || k + 1 == count) ? 0.5 : 1.0;
    const double tau = offset + static_cast<double>(k) * dt;
    acc += w * R[first + k] * Complex(0.0, -kTwoPi * tau) * std::polar(1.0, -kTwoPi * f * tau);
  }
  return acc * dt;
}

double wrap_unit(double x) {
  double v = x - std::floor(x);
  if (v >= 1.0 - 1e-12) v = 0.0;
  return v;
}

std::vector<double> build_grid(const FrequencyGrid& grid, const Complex& c_alpha, bool integer_branch) {
  if (!(grid.step > 0.0) || !(grid.f_max > grid.f_min)) throw InputError("invalid frequency grid");
  std::vector<double> f;
  const auto n = static_cast<std::size_t>(std::floor((grid.f_max - grid.f_min) / grid.step + 1e-9)) + 1;
  f.reserve(n);
  for (std::size_t k = 0; k < n; ++k) f.push_back(grid.f_min + static_cast<double>(k) * grid.step);

  const double rho = std::abs(c_alpha);
  const double v = wrap_unit(std::arg(c_alpha) / kTwoPi);
  const long m_lo = static_cast<long>(std::floor(grid.f_min - v)) - 1;
  const long m_hi = static_cast<long>(std::ceil(grid.f_max - v)) + 1;
  if (integer_branch) {
    for (long m = m_lo; m <= m_hi; ++m) f.push_back(static_cast<double>(m) + v);
  } else if (grid.refine_near_lines && rho > 0.9) {
    // The geometric factor peaks at f = m + v with half-width about (1 - rho) / pi.
    const double width = (1.0 - rho) / kPi;
    const double lo = width / 50.0;
    const double hi = std::max(2.0 * grid.step, 100.0 * width);
    if (lo < hi) {
      constexpr int kRefine = 200;
      const double ratio = std::pow(hi / lo, 1.0 / (kRefine - 1));
      for (long m = m_lo; m <= m_hi; ++m) {
        const double centre = static_cast<double>(m) + v;
        f.push_back(centre);
        double u = lo;
        for (int k = 0; k < kRefine; ++k, u *= ratio) {
          f.push_back(centre - u);
          f.push_back(centre + u);
        }
      }
    }
  }
  std::erase_if(f, [&](double x) { return x < grid.f_min || x > grid.f_max; });
  std::sort(f.begin(), f.end());
  f.erase(std::unique(f.begin(), f.end(), [](double a, double b) { return std::abs(a - b) < 1e-13; }), f.end());
  return f;
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double acc = 0.0;
  for (std::size_t k = 1; k < x.size(); ++k) acc += 0.5 * (y[k] + y[k - 1]) * (x[k] - x[k - 1]);
  return acc;
}

}  // namespace

Complex characteristic_sum(const CpmScheme& scheme, Priors priors) {
  const std::vector<double> p = resolve_priors(scheme, priors);
  Complex c(0.0, 0.0);
  for (int k = 0; k < scheme.M; ++k) c += p[static_cast<std::size_t>(k)] * std::polar(1.0, kPi * scheme.phase_weight(k));
  return c;
}

Autocorrelation autocorrelation(const CpmScheme& scheme, int max_lag_symbols, Priors priors) {
  const std::vector<double> p = resolve_priors(scheme, priors);
  const int L = scheme.L();
  const int sps = scheme.sps();
  if (max_lag_symbols < 0) max_lag_symbols = L + 1;

  std::vector<double> weights(static_cast<std::size_t>(scheme.M));
  for (int k = 0; k < scheme.M; ++k) weights[static_cast<std::size_t>(k)] = kTwoPi * scheme.phase_weight(k);

  Autocorrelation out;
  out.samples_per_symbol = sps;
  const int count = max_lag_symbols * sps + 1;
  out.tau.resize(static_cast<std::size_t>(count));
  out.R.resize(static_cast<std::size_t>(count));

  std::vector<Complex> product(static_cast<std::size_t>(sps + 1));
  for (int idx = 0; idx < count; ++idx) {
    const int m = idx / sps;
    const int frac = idx % sps;  // tau' in samples
    std::fill(product.begin(), product.end(), Complex(1.0, 0.0));
    for (int i = 1 - L; i <= m + 1; ++i) {
      for (int u = 0; u <= sps; ++u) {
        const double later = scheme.pulse.phase_at(static_cast<long>(u + frac - (i - m) * sps));
        const double earlier = scheme.pulse.phase_at(static_cast<long>(u - i * sps));
        const double delta = later - earlier;
        if (delta == 0.0) continue;
        Complex sum(0.0, 0.0);
        for (int k = 0; k < scheme.M; ++k) {
          sum += p[static_cast<std::size_t>(k)] * std::polar(1.0, weights[static_cast<std::size_t>(k)] * delta);
        }
        product[static_cast<std::size_t>(u)] *= sum;
      }
    }
    Complex acc(0.0, 0.0);
    for (int u = 0; u <= sps; ++u) acc += ((u == 0 || u == sps) ? 0.5 : 1.0) * product[static_cast<std::size_t>(u)];
    out.R[static_cast<std::size_t>(idx)] = acc / static_cast<double>(sps);
    out.tau[static_cast<std::size_t>(idx)] = static_cast<double>(idx) / sps;
  }
  return out;
}

FrequencyGrid FrequencyGrid::for_scheme(const CpmScheme& scheme) {
  // Peak instantaneous frequency: max |weight| * max_t sum_j g(t + j) / (4 pi).
  const SampledPulse& pulse = scheme.pulse;
  const int sps = pulse.samples_per_symbol;
  double overlap = 0.0;
  for (int k = 0; k <= sps; ++k) {
    double acc = 0.0;
    for (int j = 0; j < pulse.spec.L; ++j) acc += pulse.g[static_cast<std::size_t>(k + j * sps)];
    overlap = std::max(overlap, acc);
  }
  double w_lo = 0.0;
  double w_hi = 0.0;
  for (int k = 0; k < scheme.M; ++k) {
    w_lo = std::min(w_lo, scheme.phase_weight(k));
    w_hi = std::max(w_hi, scheme.phase_weight(k));
  }
  FrequencyGrid grid;
  grid.f_min = std::min(-4.0, std::floor(w_lo * overlap / (4.0 * kPi)) - 4.0);
  grid.f_max = std::max(8.0, std::ceil(w_hi * overlap / (4.0 * kPi)) + 4.0);
  return grid;
}

double PsdEstimate::continuous_power() const { return trapezoid(freq, S); }

double PsdEstimate::power_below(double cut) const {
  double acc = 0.0;
  for (std::size_t k = 1; k < freq.size(); ++k) {
    const double a = freq[k - 1];
    const double b = freq[k];
    if (a >= cut) break;
    if (b <= cut) {
      acc += 0.5 * (S[k] + S[k - 1]) * (b - a);
    } else {
      const double s_cut = S[k - 1] + (S[k] - S[k - 1]) * (cut - a) / (b - a);
      acc += 0.5 * (S[k - 1] + s_cut) * (cut - a);
    }
  }
  for (const auto& line : lines) {
    if (line.f < cut) acc += line.power;
  }
  return acc;
}

PsdEstimate psd(const CpmScheme& scheme, const FrequencyGrid& grid, Priors priors) {
  PsdEstimate est;
  est.priors = resolve_priors(scheme, priors);
  est.c_alpha = characteristic_sum(scheme, est.priors);
  est.integer_branch = std::abs(est.c_alpha) > 1.0 - kIntegerBranchThreshold;
  est.v = wrap_unit(std::arg(est.c_alpha) / kTwoPi);

  const int L = scheme.L();
  const int sps = scheme.sps();
  const Autocorrelation ac = autocorrelation(scheme, L + 1, est.priors);
  const double dt = 1.0 / sps;
  const auto head = static_cast<std::size_t>(L * sps + 1);  // [0, L Ts]
  const auto tail_first = static_cast<std::size_t>(L * sps);
  const auto tail = static_cast<std::size_t>(sps + 1);       // [L Ts, (L + 1) Ts]

  est.freq = build_grid(grid, est.c_alpha, est.integer_branch);
  est.S.resize(est.freq.size());

  for (std::size_t n = 0; n < est.freq.size(); ++n) {
    const double f = est.freq[n];
    const Complex first = fourier_segment(ac.R, 0, head, dt, f);
    const Complex remainder = std::polar(1.0, -kTwoPi * f * L) * fourier_segment(ac.R, tail_first, tail, dt, f);
    if (!est.integer_branch) {
      const Complex geometric = 1.0 / (1.0 - est.c_alpha * std::polar(1.0, -kTwoPi * f));
      est.S[n] = 2.0 * std::real(first + geometric * remainder);
    } else {
      // sum_m exp(-j 2 pi m (f - v)) = 1/2 + (1/2) sum delta(f - v - m) - (j/2) cot(pi (f - v));
      // the delta train becomes the line list, the rest is the continuous part.
      const double x = f - est.v;
      const double offset = x - std::round(x);
      double cot_term;
      if (std::abs(offset) < 1e-7) {
        const Complex slope = fourier_segment_derivative(ac.R, tail_first, tail, dt, f, static_cast<double>(L));
        cot_term = std::imag(slope) / kPi;
      } else {
        cot_term = std::imag(remainder) / std::tan(kPi * x);
      }
      est.S[n] = 2.0 * std::real(first + 0.5 * remainder) + cot_term;
    }
  }

  if (est.integer_branch) {
    const long m_lo = static_cast<long>(std::ceil(est.freq.front() - est.v - 1e-12));
    const long m_hi = static_cast<long>(std::floor(est.freq.back() - est.v + 1e-12));
    for (long m = m_lo; m <= m_hi; ++m) {
      const double fm = static_cast<double>(m) + est.v;
      const Complex remainder = std::polar(1.0, -kTwoPi * fm * L) * fourier_segment(ac.R, tail_first, tail, dt, fm);
      const double power = std::real(remainder);
      if (power > 1e-15) est.lines.push_back({fm, power});
    }
  }

  double line_power = 0.0;
  for (const auto& line : est.lines) line_power += line.power;
  est.raw_power = est.continuous_power() + line_power;
  if (!(est.raw_power > 0.0)) throw ConvergenceError("PSD integrates to a non-positive power");
  for (double& s : est.S) s /= est.raw_power;
  for (auto& line : est.lines) line.power /= est.raw_power;
  est.total_power = est.continuous_power();
  for (const auto& line : est.lines) est.total_power += line.power;
  return est;
}

PsdEstimate psd(const CpmScheme& scheme) {
  // Widen a side while its edge density, extrapolated as a 1/f^4 tail about the band
  // centre, leaves more than kTailTolerance outside the grid. Sides stop a quarter of the
  // sampling rate from the centre, well short of the first spectral image.
  constexpr double kTailTolerance = 1e-5;
  FrequencyGrid grid = FrequencyGrid::for_scheme(scheme);
  const double centre = 0.5 * (grid.f_min + grid.f_max);
  const double reach = 0.25 * scheme.sps();
  const double lo_limit = std::min(grid.f_min, centre - reach);
  const double hi_limit = std::max(grid.f_max, centre + reach);
  PsdEstimate est = psd(scheme, grid);
  double step = 4.0;
  for (;;) {
    const bool lo = grid.f_min > lo_limit && est.S.front() * (centre - grid.f_min) / 3.0 > kTailTolerance;
    const bool hi = grid.f_max < hi_limit && est.S.back() * (grid.f_max - centre) / 3.0 > kTailTolerance;
    if (!lo && !hi) break;
    if (lo) grid.f_min = std::max(lo_limit, grid.f_min - step);
    if (hi) grid.f_max = std::min(hi_limit, grid.f_max + step);
    step *= 2.0;
    est = psd(scheme, grid);
  }
  return est;
}

OccupiedBand occupied_band(const PsdEstimate& est, double fraction, int M) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw InputError("occupancy fraction must lie in (0, 1)");
  const std::size_t n = est.freq.size();
  if (n < 2) throw InputError("PSD grid too small");

  // cont[k]: continuous power on [f_0, f_k]; lines_le[k] / lines_lt[k]: line power at f <= f_k / f < f_k.
  std::vector<double> cont(n, 0.0);
  for (std::size_t k = 1; k < n; ++k) {
    cont[k] = cont[k - 1] + 0.5 * (est.S[k] + est.S[k - 1]) * (est.freq[k] - est.freq[k - 1]);
  }
  std::vector<double> lines_le(n, 0.0);
  std::vector<double> lines_lt(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    for (const auto& line : est.lines) {
      if (line.f <= est.freq[k] + 1e-12) lines_le[k] += line.power;
      if (line.f < est.freq[k] - 1e-12) lines_lt[k] += line.power;
    }
  }
  const double target = fraction * est.total_power;

  OccupiedBand band;
  band.fraction = fraction;
  double best = std::numeric_limits<double>::infinity();
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (j < i) j = i;
    auto power = [&](std::size_t hi) { return (cont[hi] - cont[i]) + (lines_le[hi] - lines_lt[i]); };
    while (j < n && power(j) < target) ++j;
    if (j == n) break;
    const double width = est.freq[j] - est.freq[i];
    if (width < best) {
      best = width;
      band.f_low = est.freq[i];
      band.f_high = est.freq[j];
    }
  }
  if (!std::isfinite(best)) throw ConvergenceError("no frequency interval holds the requested power fraction");
  band.bt_b = best / std::log2(static_cast<double>(M));
  return band;
}

OccupancyReport occupancy(const PsdEstimate& est, int M) {
  OccupancyReport r;
  r.b99 = occupied_band(est, 0.99, M);
  r.b999 = occupied_band(est, 0.999, M);
  r.ssb_loss_percent = ssb_loss(est);
  return r;
}

double ssb_loss(const PsdEstimate& est) {
  double moment = 0.0;
  for (std::size_t k = 1; k < est.freq.size(); ++k) {
    const double fa = est.freq[k - 1];
    const double fb = est.freq[k];
    moment += 0.5 * (fa * est.S[k - 1] + fb * est.S[k]) * (fb - fa);
  }
  for (const auto& line : est.lines) moment += line.f * line.power;
  const double below = est.power_below(0.0);
  const double suppressed = moment >= 0.0 ? below : est.total_power - below;
  return 100.0 * suppressed / est.total_power;
}

}  // namespace ssbfsk
