#include "ssbfsk/distance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <unordered_map>

#include "ssbfsk/errors.hpp"

namespace ssbfsk {
namespace {

constexpr double kPi = std::numbers::pi;

// Difference phase 4*pi*h*(sum_j gamma_{n-j} phi0(t + j Ts) + S/2) over one symbol
// interval, where S is the sum of every difference whose pulse has completed.
class DifferencePhaseModel {
 public:
  explicit DifferencePhaseModel(const CpmScheme& scheme)
      : L_(scheme.L()), sps_(scheme.sps()), scale_(4.0 * kPi * scheme.h), log2m_(scheme.bits_per_symbol()) {
    const auto stride = static_cast<std::size_t>(sps_ + 1);
    segments_.resize(static_cast<std::size_t>(L_) * stride);
    for (int j = 0; j < L_; ++j) {
      for (int k = 0; k <= sps_; ++k) {
        segments_[static_cast<std::size_t>(j) * stride + static_cast<std::size_t>(k)] =
            scheme.pulse.phase_at(static_cast<long>(k) + static_cast<long>(j) * sps_);
      }
    }
    weights_.assign(stride, 1.0 / sps_);
    weights_.front() *= 0.5;
    weights_.back() *= 0.5;
    phase_.resize(stride);
  }

  int L() const { return L_; }

  // window[j] = gamma_{n-j}, j = 0..L-1.
  double interval(const int* window, int completed_sum) {
    const auto stride = static_cast<std::size_t>(sps_ + 1);
    std::fill(phase_.begin(), phase_.end(), 0.5 * completed_sum);
    for (int j = 0; j < L_; ++j) {
      const int g = window[j];
      if (g == 0) continue;
      const double* seg = &segments_[static_cast<std::size_t>(j) * stride];
      for (std::size_t k = 0; k < stride; ++k) phase_[k] += g * seg[k];
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < stride; ++k) acc += weights_[k] * (1.0 - std::cos(scale_ * phase_[k]));
    return log2m_ * acc;
  }

 private:
  int L_;
  int sps_;
  double scale_;
  double log2m_;
  std::vector<double> segments_;
  std::vector<double> weights_;
  std::vector<double> phase_;
};

double evaluate(DifferencePhaseModel& model, std::span<const int> gamma, int N) {
  const int L = model.L();
  std::vector<int> window(static_cast<std::size_t>(L), 0);
  int completed = 0;
  double d = 0.0;
  for (int n = 0; n < N; ++n) {
    if (n - L >= 0 && static_cast<std::size_t>(n - L) < gamma.size()) completed += gamma[static_cast<std::size_t>(n - L)];
    for (int j = 0; j < L; ++j) {
      const int idx = n - j;
      window[static_cast<std::size_t>(j)] =
          (idx >= 0 && static_cast<std::size_t>(idx) < gamma.size()) ? gamma[static_cast<std::size_t>(idx)] : 0;
    }
    d += model.interval(window.data(), completed);
  }
  return d;
}

DifferenceSequence trimmed(std::vector<int> gamma) {
  while (!gamma.empty() && gamma.back() == 0) gamma.pop_back();
  return DifferenceSequence{std::move(gamma)};
}

void add_witness(std::vector<DifferenceSequence>& witnesses, DifferenceSequence seq) {
  if (std::find(witnesses.begin(), witnesses.end(), seq) == witnesses.end()) witnesses.push_back(std::move(seq));
}

double tolerance_for(double reference) {
  return std::isfinite(reference) ? kPruneTolerance * std::max(1.0, reference) : kPruneTolerance;
}

bool is_integer(double x) { return std::abs(x - std::round(x)) < 1e-9; }

struct SearchNode {
  std::int32_t parent;
  std::int8_t gamma;
  std::int32_t completed;  // sum of differences whose pulse has completed
  double distance;
};

}  // namespace

int DifferenceSequence::sum() const { return std::accumulate(gamma.begin(), gamma.end(), 0); }

bool DifferenceSequence::is_candidate(int M) const {
  if (gamma.empty() || gamma[0] < 1 || gamma[0] > M - 1) return false;
  return std::all_of(gamma.begin() + 1, gamma.end(), [M](int g) { return std::abs(g) <= M - 1; });
}

double d_squared(const CpmScheme& scheme, const DifferenceSequence& gamma, int N) {
  if (N < static_cast<int>(gamma.size())) {
    throw InputError("observation length N=" + std::to_string(N) + " shorter than the difference sequence");
  }
  for (int g : gamma.gamma) {
    if (std::abs(g) > scheme.M - 1) throw InputError("difference entry outside +-(M-1)");
  }
  DifferencePhaseModel model(scheme);
  return evaluate(model, gamma.gamma, N);
}

UpperBound upper_bound(const CpmScheme& scheme, int m) {
  if (m < 1) throw InputError("merger count m must be >= 1 (got " + std::to_string(m) + ")");
  DifferencePhaseModel model(scheme);
  const int M = scheme.M;
  const int length = m + 1;
  const int N = length + scheme.L();

  UpperBound result;
  result.d_squared = std::numeric_limits<double>::infinity();
  std::vector<int> gamma(static_cast<std::size_t>(length), 0);
  std::vector<int> digits(static_cast<std::size_t>(m), -(M - 1));

  for (int first = 1; first <= M - 1; ++first) {
    std::fill(digits.begin(), digits.end(), -(M - 1));
    for (;;) {
      const int tail = std::accumulate(digits.begin(), digits.end(), 0);
      if (first + tail == 0) {
        gamma[0] = first;
        std::copy(digits.begin(), digits.end(), gamma.begin() + 1);
        const double d = evaluate(model, gamma, N);
        const double tol = tolerance_for(result.d_squared);
        if (d < result.d_squared - tol) {
          result.d_squared = d;
          result.witnesses.clear();
          add_witness(result.witnesses, trimmed(gamma));
        } else if (std::abs(d - result.d_squared) <= tol) {
          add_witness(result.witnesses, trimmed(gamma));
        }
      }
      // Odometer over the m free entries.
      std::size_t pos = 0;
      while (pos < digits.size() && digits[pos] == M - 1) digits[pos++] = -(M - 1);
      if (pos == digits.size()) break;
      ++digits[pos];
    }
  }
  return result;
}

DistanceResult d_min(const CpmScheme& scheme, int m, int N_max) {
  const int L = scheme.L();
  if (m < 1) throw InputError("merger count m must be >= 1");
  if (N_max < L + 1) throw InputError("N_max must be >= L + 1");
  if (L > 12) throw ConfigError("d_min search supports L <= 12");

  const int M = scheme.M;
  DifferencePhaseModel model(scheme);
  const UpperBound bound = upper_bound(scheme, m);

  DistanceResult result;
  result.bound = bound.d_squared;
  double best = bound.d_squared;
  std::vector<DifferenceSequence> witnesses = bound.witnesses;

  // layers[n] holds the live prefixes of n + 1 symbols. The window of a node is read
  // back through its parents, so it is kept alongside in a flat array.
  std::vector<std::vector<SearchNode>> layers;
  std::vector<std::vector<std::int8_t>> windows;  // L entries per node, newest first

  auto path_of = [&](std::size_t layer, std::int32_t index) {
    std::vector<int> g(layer + 1);
    for (std::size_t n = layer + 1; n-- > 0;) {
      const SearchNode& node = layers[n][static_cast<std::size_t>(index)];
      g[n] = node.gamma;
      index = node.parent;
    }
    return g;
  };

  auto record_merge = [&](double d, std::vector<int> path) {
    const double tol = tolerance_for(best);
    if (d < best - tol) {
      best = d;
      witnesses.clear();
      add_witness(witnesses, trimmed(std::move(path)));
    } else if (std::abs(d - best) <= tol) {
      add_witness(witnesses, trimmed(std::move(path)));
    }
  };

  std::vector<int> window(static_cast<std::size_t>(L), 0);
  {
    std::vector<SearchNode> first;
    std::vector<std::int8_t> first_windows;
    for (int g0 = 1; g0 <= M - 1; ++g0) {
      std::fill(window.begin(), window.end(), 0);
      window[0] = g0;
      const double d = model.interval(window.data(), 0);
      if (d < best - kPruneTolerance) {
        first.push_back({-1, static_cast<std::int8_t>(g0), 0, d});
        for (int v : window) first_windows.push_back(static_cast<std::int8_t>(v));
      }
    }
    layers.push_back(std::move(first));
    windows.push_back(std::move(first_windows));
  }

  auto live_minimum = [&](const std::vector<SearchNode>& layer) {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& node : layer) lo = std::min(lo, node.distance);
    return lo;
  };
  result.history.push_back(std::min(best, live_minimum(layers.back())));

  std::unordered_map<std::uint64_t, std::int32_t> index_of;
  int observed = 1;
  while (!layers.back().empty() && observed < N_max) {
    const std::size_t prev = layers.size() - 1;
    std::vector<SearchNode> next;
    std::vector<std::int8_t> next_windows;
    index_of.clear();

    for (std::size_t i = 0; i < layers[prev].size(); ++i) {
      const SearchNode& node = layers[prev][i];
      if (node.distance >= best - kPruneTolerance) continue;
      const std::int8_t* old = &windows[prev][i * static_cast<std::size_t>(L)];
      const int completed = node.completed + old[L - 1];
      for (int j = L - 1; j > 0; --j) window[static_cast<std::size_t>(j)] = old[j - 1];

      for (int x = -(M - 1); x <= M - 1; ++x) {
        window[0] = x;
        const bool quiet = std::all_of(window.begin(), window.end(), [](int v) { return v == 0; });
        if (quiet && is_integer(scheme.h * completed)) {
          // Both phase trajectories coincide from here on.
          std::vector<int> path = path_of(prev, static_cast<std::int32_t>(i));
          record_merge(node.distance, std::move(path));
          continue;
        }
        const double d = node.distance + model.interval(window.data(), completed);
        if (d >= best - kPruneTolerance) continue;

        // Future increments depend only on the newest L - 1 differences and the
        // completed sum after the oldest one drops out.
        std::uint64_t key = static_cast<std::uint64_t>(completed + window[static_cast<std::size_t>(L - 1)] + (1 << 19));
        for (int j = 0; j + 1 < L; ++j) key = (key << 4) | static_cast<std::uint64_t>(window[static_cast<std::size_t>(j)] + 7);

        auto [it, inserted] = index_of.try_emplace(key, static_cast<std::int32_t>(next.size()));
        if (inserted) {
          next.push_back({static_cast<std::int32_t>(i), static_cast<std::int8_t>(x), completed, d});
          for (int v : window) next_windows.push_back(static_cast<std::int8_t>(v));
        } else if (d < next[static_cast<std::size_t>(it->second)].distance) {
          const auto slot = static_cast<std::size_t>(it->second);
          next[slot] = {static_cast<std::int32_t>(i), static_cast<std::int8_t>(x), completed, d};
          std::copy(window.begin(), window.end(), next_windows.begin() + static_cast<std::ptrdiff_t>(slot) * L);
        }
      }
    }

    // The bound may have tightened while the layer was built.
    std::vector<SearchNode> kept;
    std::vector<std::int8_t> kept_windows;
    for (std::size_t i = 0; i < next.size(); ++i) {
      if (next[i].distance < best - kPruneTolerance) {
        kept.push_back(next[i]);
        kept_windows.insert(kept_windows.end(), next_windows.begin() + static_cast<std::ptrdiff_t>(i) * L,
                            next_windows.begin() + static_cast<std::ptrdiff_t>(i + 1) * L);
      }
    }
    layers.push_back(std::move(kept));
    windows.push_back(std::move(kept_windows));
    ++observed;
    result.history.push_back(std::min(best, live_minimum(layers.back())));
  }

  const auto& last = layers.back();
  result.converged = last.empty();
  result.N_used = observed;
  result.d_squared = std::min(best, live_minimum(last));
  if (!result.converged && live_minimum(last) < best) {
    const std::size_t layer = layers.size() - 1;
    for (std::size_t i = 0; i < last.size(); ++i) {
      if (last[i].distance <= result.d_squared + kPruneTolerance) {
        add_witness(result.witnesses, DifferenceSequence{path_of(layer, static_cast<std::int32_t>(i))});
      }
    }
  } else {
    result.witnesses = std::move(witnesses);
  }
  if (!result.witnesses.empty()) result.achieved_by = result.witnesses.front();
  return result;
}

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double union_bound_pe(double d_min_sq, double ebn0_db) {
  if (!(d_min_sq > 0.0)) throw InputError("d_min^2 must be > 0");
  return q_function(std::sqrt(d_min_sq * std::pow(10.0, ebn0_db / 10.0)));
}

std::vector<DistanceSweepRow> dmin_sweep(const CpmScheme& base, std::span<const double> h_values, int m, int N_max) {
  std::vector<DistanceSweepRow> rows;
  rows.reserve(h_values.size());
  for (double h : h_values) {
    CpmScheme s = base;
    s.h = h;
    s.validate();
    const DistanceResult r = d_min(s, m, N_max);
    rows.push_back({h, r.bound, r.d_squared, r.N_used, r.converged});
  }
  return rows;
}

}  // namespace ssbfsk
