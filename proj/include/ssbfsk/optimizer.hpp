#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ssbfsk/distance.hpp"
#include "ssbfsk/pulses.hpp"

namespace ssbfsk {

// One SSB-FSK configuration in the design space.
struct ConfigParams {
  int M = 2;
  double h = 0.5;
  int L = 2;
  double w = 0.5;

  auto operator<=>(const ConfigParams&) const = default;
};

struct DesignSpace {
  double h_min = 0.01;
  double h_max = 2.0;
  double h_step = 0.01;
  std::vector<int> L_values{2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  std::vector<int> M_values{2, 4, 8};
  double w_min = 0.1;
  double w_step = 0.1;
  double w_max = 0.0;  // <= 0 means w_lim(L) for every L
  double occupancy_fraction = 0.99;
  std::vector<ConfigParams> extra;  // additional tuples evaluated alongside the grid

  static DesignSpace full();
  // h step 0.05, w step 0.4, L in {2, 3, 5, 6}.
  static DesignSpace desk(std::vector<int> M_values = {2});

  void validate() const;
  // Grid tuples plus extras, deduplicated, in lexicographic (M, h, L, w) order.
  std::vector<ConfigParams> enumerate() const;
};

struct ParetoPoint {
  ConfigParams params;
  double f1 = 0.0;  // 10 log10(d_min^2 / 2), dB
  double f2 = 0.0;  // 1 / (B Tb)
  double dmin2 = 0.0;
  double bw = 0.0;
  double ssb_loss_percent = 0.0;
  int N_used = 0;
  bool converged = false;
};

ParetoPoint make_point(const ConfigParams& params, double dmin2, double bw, double ssb_loss_percent, int N_used,
                       bool converged);

struct EvaluationOptions {
  int mergers = kDefaultMergers;
  int N_max = kDefaultMaxObservation;
  int samples_per_symbol = kDefaultSamplesPerSymbol;
};

// Smallest width on the 0.1 grid whose truncated Lorentzian stays within 10% (relative
// 2-norm over 4096 samples) of the w = 1000 pulse.
double w_lim(int L, double Ts = 1.0);
// Relative 2-norm distance between the pulse of width w and the w = 1000 pulse.
double pulse_shape_error(int L, double w);

ParetoPoint evaluate_config(const ConfigParams& params, double occupancy_fraction, const EvaluationOptions& options = {});
// Any scheme (e.g. the GMSK reference) evaluated through the same distance and PSD pipeline.
ParetoPoint evaluate_scheme(const CpmScheme& scheme, double occupancy_fraction, const EvaluationOptions& options = {});
ParetoPoint gmsk_reference(double occupancy_fraction, double bt = 0.3, int L = 4, const EvaluationOptions& options = {});

// Weak Pareto front: points for which no other point is strictly better in both
// objectives. Sorted by f2 ascending.
std::vector<ParetoPoint> pareto_front(std::span<const ParetoPoint> points);

// Points with d_min^2 >= reference and bandwidth <= reference.
std::vector<ParetoPoint> filter_reference(std::span<const ParetoPoint> front, const ParetoPoint& reference);

std::string config_key(const ConfigParams& params, double fraction, const EvaluationOptions& options);
std::uint64_t config_hash(const std::string& key);

// Append-only store of evaluated configurations, keyed by parameter hash.
class ResultStore {
 public:
  explicit ResultStore(std::filesystem::path path);

  const std::filesystem::path& path() const { return path_; }
  std::optional<ParetoPoint> find(std::uint64_t hash) const;
  void append(std::uint64_t hash, const ParetoPoint& point, double fraction);
  std::size_t size() const { return entries_.size(); }

 private:
  std::filesystem::path path_;
  std::vector<std::pair<std::uint64_t, ParetoPoint>> entries_;
};

struct SweepOptions {
  int jobs = 1;
  std::optional<std::filesystem::path> checkpoint;
  EvaluationOptions evaluation;
  std::ostream* progress = nullptr;
};

// Evaluates every tuple of the design space, resuming from the checkpoint when given.
// The result order is lexicographic in (M, h, L, w) regardless of scheduling.
std::vector<ParetoPoint> evaluate_grid(const DesignSpace& space, const SweepOptions& options = {});

}  // namespace ssbfsk
