#pragma once

#include <complex>
#include <span>
#include <vector>

#include "ssbfsk/modulator.hpp"

namespace ssbfsk {

// Symbol probabilities P_k. An empty span means uniform.
using Priors = std::span<const double>;

struct Autocorrelation {
  int samples_per_symbol = 0;
  std::vector<double> tau;  // units of Ts
  std::vector<Complex> R;
};

// Time-averaged autocorrelation of the cyclostationary baseband signal on the grid
// tau = k / sps, k = 0..max_lag_symbols * sps. Defaults to max_lag_symbols = L + 1.
Autocorrelation autocorrelation(const CpmScheme& scheme, int max_lag_symbols = -1, Priors priors = {});

// C_alpha = sum_k P_k exp(j*pi*weight(k)); for the non-negative alphabet this is
// sum_k P_k exp(j*2*pi*h*k).
Complex characteristic_sum(const CpmScheme& scheme, Priors priors = {});

struct SpectralLine {
  double f = 0.0;      // cycles per Ts
  double power = 0.0;
};

struct PsdEstimate {
  std::vector<double> freq;  // cycles per Ts, ascending; may be non-uniform
  std::vector<double> S;     // continuous part
  std::vector<SpectralLine> lines;
  double total_power = 0.0;  // after normalization
  double raw_power = 0.0;    // continuous integral + lines before normalization
  std::vector<double> priors;
  Complex c_alpha{};
  double v = 0.0;
  bool integer_branch = false;

  double continuous_power() const;
  // Continuous + line power on f < cut (when `below`) or f >= cut.
  double power_below(double cut) const;
};

struct FrequencyGrid {
  double f_min = -4.0;
  double f_max = 8.0;
  double step = 1.0 / 1024.0;
  bool refine_near_lines = true;

  // Covers the instantaneous-frequency range of the scheme with at least [-4, 8] / Ts.
  static FrequencyGrid for_scheme(const CpmScheme& scheme);
};

inline constexpr double kIntegerBranchThreshold = 1e-6;

PsdEstimate psd(const CpmScheme& scheme, const FrequencyGrid& grid, Priors priors = {});
PsdEstimate psd(const CpmScheme& scheme);

struct OccupiedBand {
  double fraction = 0.0;
  double f_low = 0.0;
  double f_high = 0.0;
  double bt_b = 0.0;  // (f_high - f_low) * Ts / log2(M)
};

struct OccupancyReport {
  OccupiedBand b99;
  OccupiedBand b999;
  double ssb_loss_percent = 0.0;

  const OccupiedBand& band(double fraction) const { return fraction >= 0.995 ? b999 : b99; }
};

// Narrowest frequency interval holding `fraction` of the power (lines included).
OccupiedBand occupied_band(const PsdEstimate& psd, double fraction, int M);
OccupancyReport occupancy(const PsdEstimate& psd, int M);

// Percentage of the power on the suppressed side of f = 0 (the side opposite the
// spectral centroid).
double ssb_loss(const PsdEstimate& psd);

}  // namespace ssbfsk
