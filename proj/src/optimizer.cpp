#include "ssbfsk/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "ssbfsk/errors.hpp"
#include "ssbfsk/spectrum.hpp"

namespace ssbfsk {
namespace {

constexpr int kShapeSamples = 4096;
constexpr double kReferenceWidth = 1000.0;
constexpr double kShapeTolerance = 0.1;

double snap(double x) { return std::round(x * 1e6) / 1e6; }

std::vector<double> grid_values(double lo, double hi, double step) {
  std::vector<double> out;
  const long n = static_cast<long>(std::floor((hi - lo) / step + 1e-6));
  for (long k = 0; k <= n; ++k) out.push_back(snap(lo + static_cast<double>(k) * step));
  return out;
}

std::vector<double> sampled_lorentzian(int L, double w) {
  std::vector<double> g(kShapeSamples);
  for (int i = 0; i < kShapeSamples; ++i) {
    const double t = static_cast<double>(L) * i / (kShapeSamples - 1);
    g[static_cast<std::size_t>(i)] = lorentzian_frequency(t, L, w);
  }
  return g;
}

}  // namespace

DesignSpace DesignSpace::full() { return DesignSpace{}; }

DesignSpace DesignSpace::desk(std::vector<int> M_values) {
  DesignSpace s;
  s.h_min = 0.05;
  s.h_step = 0.05;
  s.w_step = 0.4;
  s.L_values = {2, 3, 5, 6};
  s.M_values = std::move(M_values);
  return s;
}

void DesignSpace::validate() const {
  if (!(h_step > 0.0) || !(w_step > 0.0)) throw InputError("design-space steps must be positive");
  if (!(h_min > 0.0) || h_max < h_min) throw InputError("invalid h range");
  if (!(w_min > 0.0)) throw InputError("w_min must be positive");
  if (!(occupancy_fraction > 0.0 && occupancy_fraction < 1.0)) throw InputError("occupancy fraction must lie in (0, 1)");
  for (int L : L_values) {
    if (L < 1 || L > 12) throw InputError("design-space L must lie in 1..12");
  }
  for (int M : M_values) {
    if (M != 2 && M != 4 && M != 8) throw InputError("design-space M must be 2, 4 or 8");
  }
}

std::vector<ConfigParams> DesignSpace::enumerate() const {
  validate();
  std::vector<ConfigParams> out;
  const std::vector<double> hs = grid_values(h_min, h_max, h_step);
  for (int M : M_values) {
    for (int L : L_values) {
      const double upper = w_max > 0.0 ? w_max : w_lim(L);
      const std::vector<double> ws = grid_values(w_min, upper, w_step);
      for (double h : hs) {
        for (double w : ws) out.push_back({M, h, L, w});
      }
    }
  }
  out.insert(out.end(), extra.begin(), extra.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ParetoPoint make_point(const ConfigParams& params, double dmin2, double bw, double ssb_loss_percent, int N_used,
                       bool converged) {
  ParetoPoint p;
  p.params = params;
  p.dmin2 = dmin2;
  p.bw = bw;
  p.ssb_loss_percent = ssb_loss_percent;
  p.N_used = N_used;
  p.converged = converged;
  p.f1 = 10.0 * std::log10(dmin2 / 2.0);
  p.f2 = 1.0 / bw;
  return p;
}

double pulse_shape_error(int L, double w) {
  const std::vector<double> reference = sampled_lorentzian(L, kReferenceWidth);
  const std::vector<double> g = sampled_lorentzian(L, w);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    num += (g[i] - reference[i]) * (g[i] - reference[i]);
    den += reference[i] * reference[i];
  }
  return std::sqrt(num / den);
}

double w_lim(int L, double Ts) {
  if (L < 1) throw DomainError("w_lim requires L >= 1");
  if (!(Ts > 0.0)) throw DomainError("w_lim requires Ts > 0");
  // The error falls monotonically with w; return the first grid width inside tolerance.
  for (int k = 1; k <= 10000; ++k) {
    const double w = k / 10.0;
    if (pulse_shape_error(L, w) <= kShapeTolerance) return w * Ts;
  }
  throw ConvergenceError("w_lim search did not reach the tolerance");
}

ParetoPoint evaluate_scheme(const CpmScheme& scheme, double occupancy_fraction, const EvaluationOptions& options) {
  const DistanceResult dist = d_min(scheme, options.mergers, options.N_max);
  const PsdEstimate spectrum = psd(scheme);
  const OccupiedBand band = occupied_band(spectrum, occupancy_fraction, scheme.M);
  ConfigParams params{scheme.M, scheme.h, scheme.L(), scheme.pulse.spec.w};
  return make_point(params, dist.d_squared, band.bt_b, ssb_loss(spectrum), dist.N_used, dist.converged);
}

ParetoPoint evaluate_config(const ConfigParams& params, double occupancy_fraction, const EvaluationOptions& options) {
  PulseSpec spec;
  spec.family = PulseFamily::Lorentzian;
  spec.L = params.L;
  spec.w = params.w;
  const CpmScheme scheme = CpmScheme::make(params.M, params.h, spec, options.samples_per_symbol);
  return evaluate_scheme(scheme, occupancy_fraction, options);
}

ParetoPoint gmsk_reference(double occupancy_fraction, double bt, int L, const EvaluationOptions& options) {
  PulseSpec spec;
  spec.family = PulseFamily::GaussianGmsk;
  spec.L = L;
  spec.bt = bt;
  const CpmScheme scheme = CpmScheme::make(2, 0.5, spec, options.samples_per_symbol);
  ParetoPoint p = evaluate_scheme(scheme, occupancy_fraction, options);
  p.params.w = 0.0;
  return p;
}

std::vector<ParetoPoint> pareto_front(std::span<const ParetoPoint> points) {
  for (const auto& p : points) {
    if (!std::isfinite(p.f1) || !std::isfinite(p.f2)) throw InputError("pareto_front requires finite objectives");
  }
  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points[a].f2 > points[b].f2; });

  // Sweep by decreasing f2. A point is dominated iff some point with strictly larger
  // f2 also has strictly larger f1; ties in f2 are compared only against earlier groups.
  std::vector<ParetoPoint> front;
  double best_f1 = -std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    double group_best = -std::numeric_limits<double>::infinity();
    while (j < order.size() && points[order[j]].f2 == points[order[i]].f2) {
      const ParetoPoint& p = points[order[j]];
      if (!(best_f1 > p.f1)) front.push_back(p);
      group_best = std::max(group_best, p.f1);
      ++j;
    }
    best_f1 = std::max(best_f1, group_best);
    i = j;
  }
  std::stable_sort(front.begin(), front.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
    if (a.f2 != b.f2) return a.f2 < b.f2;
    return a.params < b.params;
  });
  return front;
}

std::vector<ParetoPoint> filter_reference(std::span<const ParetoPoint> front, const ParetoPoint& reference) {
  if (!std::isfinite(reference.dmin2) || !std::isfinite(reference.bw)) {
    throw InputError("reference point must have finite objectives");
  }
  std::vector<ParetoPoint> out;
  for (const auto& p : front) {
    if (p.dmin2 >= reference.dmin2 && p.bw <= reference.bw) out.push_back(p);
  }
  return out;
}

std::string config_key(const ConfigParams& params, double fraction, const EvaluationOptions& options) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "M=%d|h=%.6f|L=%d|w=%.6f|frac=%.6f|m=%d|N=%d|sps=%d", params.M, params.h, params.L,
                params.w, fraction, options.mergers, options.N_max, options.samples_per_symbol);
  return buf;
}

std::uint64_t config_hash(const std::string& key) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char c : key) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

ResultStore::ResultStore(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(path_);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> f;
    while (std::getline(row, field, ',')) f.push_back(field);
    if (f.size() != 10) continue;  // truncated tail of an interrupted run
    try {
      ConfigParams params{std::stoi(f[1]), std::stod(f[2]), std::stoi(f[3]), std::stod(f[4])};
      ParetoPoint p = make_point(params, std::stod(f[5]), std::stod(f[6]), std::stod(f[7]), std::stoi(f[8]), f[9] == "1");
      entries_.emplace_back(std::stoull(f[0], nullptr, 16), p);
    } catch (const std::exception&) {
      continue;
    }
  }
}

std::optional<ParetoPoint> ResultStore::find(std::uint64_t hash) const {
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (it->first == hash) return it->second;
  }
  return std::nullopt;
}

void ResultStore::append(std::uint64_t hash, const ParetoPoint& p, double /*fraction*/) {
  std::ofstream out(path_, std::ios::app);
  char buf[320];
  std::snprintf(buf, sizeof buf, "%016llx,%d,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%d,%d\n",
                static_cast<unsigned long long>(hash), p.params.M, p.params.h, p.params.L, p.params.w, p.dmin2, p.bw,
                p.ssb_loss_percent, p.N_used, p.converged ? 1 : 0);
  out << buf;
  out.flush();
  entries_.emplace_back(hash, p);
}

std::vector<ParetoPoint> evaluate_grid(const DesignSpace& space, const SweepOptions& options) {
  const std::vector<ConfigParams> tuples = space.enumerate();
  const double fraction = space.occupancy_fraction;

  std::optional<ResultStore> store;
  if (options.checkpoint) store.emplace(*options.checkpoint);

  std::vector<std::optional<ParetoPoint>> results(tuples.size());
  std::vector<std::uint64_t> hashes(tuples.size());
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    hashes[i] = config_hash(config_key(tuples[i], fraction, options.evaluation));
    if (store) results[i] = store->find(hashes[i]);
    if (!results[i]) pending.push_back(i);
  }

  std::atomic<std::size_t> next{0};
  std::mutex lock;
  std::size_t done = 0;
  auto worker = [&] {
    for (;;) {
      const std::size_t slot = next.fetch_add(1);
      if (slot >= pending.size()) return;
      const std::size_t i = pending[slot];
      ParetoPoint p = evaluate_config(tuples[i], fraction, options.evaluation);
      std::lock_guard guard(lock);
      results[i] = p;
      if (store) store->append(hashes[i], p, fraction);
      ++done;
      if (options.progress && (done % 50 == 0 || done == pending.size())) {
        *options.progress << "evaluated " << done << "/" << pending.size() << "\n" << std::flush;
      }
    }
  };
  const int jobs = std::max(1, options.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }

  std::vector<ParetoPoint> out;
  out.reserve(tuples.size());
  for (auto& r : results) out.push_back(*r);
  return out;
}

}  // namespace ssbfsk
