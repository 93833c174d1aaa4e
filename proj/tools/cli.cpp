#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "ssbfsk/distance.hpp"
#include "ssbfsk/errors.hpp"
#include "ssbfsk/io.hpp"
#include "ssbfsk/linksim.hpp"
#include "ssbfsk/modulator.hpp"
#include "ssbfsk/optimizer.hpp"
#include "ssbfsk/pulses.hpp"
#include "ssbfsk/spectrum.hpp"

namespace ssbfsk::cli {
namespace fs = std::filesystem;

namespace {

struct Context {
  std::ostream& out;
  std::ostream& err;
  std::string out_dir;
  std::string output;  // explicit file, "-" for stdout
  std::uint64_t seed = 1;
  int jobs = 1;
  bool full = false;
  double fraction = 0.99;
};

// Thrown to signal a specific exit code after output has been written.
struct ExitCode {
  int code;
};

// Output sink: the explicit --output file, stdout for "-", else <out_dir>/<name>.
class Sink {
 public:
  Sink(const Context& ctx, const std::string& default_name) {
    if (ctx.output == "-") {
      stream_ = &ctx.out;
      return;
    }
    path_ = ctx.output.empty() ? fs::path(ctx.out_dir) / default_name : fs::path(ctx.output);
    if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
    file_.open(path_);
    if (!file_) throw InputError("cannot write '" + path_.string() + "'");
    stream_ = &file_;
  }
  std::ostream& stream() { return *stream_; }
  std::string where() const { return path_.empty() ? std::string("stdout") : path_.string(); }

 private:
  fs::path path_;
  std::ofstream file_;
  std::ostream* stream_ = nullptr;
};

std::ofstream open_in_dir(const Context& ctx, const std::string& name) {
  fs::create_directories(ctx.out_dir);
  std::ofstream f(fs::path(ctx.out_dir) / name);
  if (!f) throw InputError("cannot write '" + (fs::path(ctx.out_dir) / name).string() + "'");
  return f;
}

std::string num(double x) { return format_double(x, 10); }

CpmScheme lorentzian_scheme(int M, double h, int L, double w, int sps = kDefaultSamplesPerSymbol) {
  PulseSpec spec;
  spec.family = PulseFamily::Lorentzian;
  spec.L = L;
  spec.w = w;
  return CpmScheme::make(M, h, spec, sps);
}

CpmScheme load_scheme(const std::string& path) {
  if (path.empty()) throw ConfigError("--scheme <file> is required");
  return load_scheme_file(path).build();
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> values;
  const auto colon = std::count(text.begin(), text.end(), ':');
  if (colon == 2) {
    double lo = 0.0, step = 0.0, hi = 0.0;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    if (!(in >> lo >> c1 >> step >> c2 >> hi) || step <= 0.0) throw InputError("range must be lo:step:hi");
    const long n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long k = 0; k <= n; ++k) values.push_back(lo + static_cast<double>(k) * step);
    return values;
  }
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) values.push_back(std::stod(item));
  }
  if (values.empty()) throw InputError("empty value list");
  return values;
}

// ---------------------------------------------------------------------------
// Reproduction report

class Report {
 public:
  void check(const std::string& name, bool pass, const std::string& detail) {
    lines_.push_back(std::string(pass ? "PASS " : "FAIL ") + name + ": " + detail);
    all_ &= pass;
  }
  void within(const std::string& name, double value, double target, double tol) {
    check(name, std::abs(value - target) <= tol,
          num(value) + " vs " + num(target) + " +- " + num(tol));
  }
  void relative(const std::string& name, double value, double target, double rel) {
    check(name, std::abs(value - target) <= rel * std::abs(target),
          num(value) + " vs " + num(target) + " +- " + num(100.0 * rel) + "%");
  }
  bool passed() const { return all_; }
  void write(std::ostream& os) const {
    for (const auto& l : lines_) os << l << '\n';
  }

 private:
  std::vector<std::string> lines_;
  bool all_ = true;
};

struct TableRow {
  std::string label;
  ParetoPoint point;
};

void write_rows(std::ostream& os, const std::string& params, const std::vector<TableRow>& rows, double fraction) {
  write_csv_preamble(os, params + " fraction=" + num(fraction),
                     {"label", "M", "h", "L", "w", "dmin2", "bw", "ssb_loss", "N_used", "converged"});
  for (const auto& r : rows) {
    const auto& p = r.point;
    os << r.label << ',' << p.params.M << ',' << num(p.params.h) << ',' << p.params.L << ',' << num(p.params.w) << ','
       << num(p.dmin2) << ',' << num(p.bw) << ',' << num(p.ssb_loss_percent) << ',' << p.N_used << ','
       << (p.converged ? 1 : 0) << '\n';
  }
}

double best_unit_band(const PsdEstimate& p) {
  double best = 0.0;
  for (double a = p.freq.front(); a + 1.0 <= p.freq.back(); a += 1.0 / 128.0) {
    best = std::max(best, p.power_below(a + 1.0) - p.power_below(a));
  }
  return best;
}

double psd_at(const PsdEstimate& p, double f) {
  const auto it = std::lower_bound(p.freq.begin(), p.freq.end(), f);
  const auto i = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - p.freq.begin(), static_cast<std::ptrdiff_t>(p.S.size()) - 1));
  return p.S[i];
}

void reproduce_table1(const Context& ctx, Report& report) {
  const std::map<int, double> expected{{2, 1.6}, {4, 3.2}, {6, 4.8}, {8, 6.4}, {10, 7.9}, {12, 9.5}};
  auto f = open_in_dir(ctx, "table1.csv");
  write_csv_preamble(f, "family=lorentzian Ts=1 samples=4096 tolerance=0.1", {"L", "w_lim"});
  for (const auto& [L, w] : expected) {
    const double got = w_lim(L);
    f << L << ',' << num(got) << '\n';
    report.check("w_lim(L=" + std::to_string(L) + ")", std::abs(got - w) < 1e-9, num(got) + " vs " + num(w));
  }
}

void reproduce_table2(const Context& ctx, Report& report) {
  const ParetoPoint a = evaluate_config({2, 0.78, 5, 1.3}, 0.99);
  const ParetoPoint b = evaluate_config({2, 0.65, 5, 1.2}, 0.99);
  auto f = open_in_dir(ctx, "table2.csv");
  write_rows(f, "lorentzian", {{"A", a}, {"B", b}}, 0.99);
  report.relative("A d_min^2", a.dmin2, 2.4, 0.02);
  report.relative("A B99*Tb", a.bw, 0.906, 0.03);
  report.within("A SSB loss %", a.ssb_loss_percent, 1.764, 0.2);
  report.check("A N_used <= 15", a.N_used <= 15, std::to_string(a.N_used));
  report.relative("B d_min^2", b.dmin2, 1.774, 0.02);
  report.relative("B B99*Tb", b.bw, 0.785, 0.03);
}

void reproduce_table3(const Context& ctx, Report& report) {
  const ParetoPoint a = evaluate_config({2, 1.04, 12, 0.8}, 0.999);
  const ParetoPoint q = evaluate_config({4, 0.33, 2, 0.7}, 0.999);
  auto f = open_in_dir(ctx, "table3.csv");
  write_rows(f, "lorentzian", {{"A'", a}, {"M4", q}}, 0.999);
  report.relative("A' d_min^2", a.dmin2, 3.346, 0.02);
  report.relative("A' B999*Tb", a.bw, 1.129, 0.03);
  report.within("A' SSB loss %", a.ssb_loss_percent, 0.366, 0.1);
  report.relative("M=4 d_min^2", q.dmin2, 1.814, 0.02);
  report.relative("M=4 B999*Tb", q.bw, 0.902, 0.03);
}

void reproduce_table4(const Context& ctx, Report& report) {
  const ParetoPoint c = evaluate_config({2, 1.0, 12, 0.37}, 0.999);
  const ParetoPoint a = evaluate_config({2, 1.04, 12, 0.8}, 0.999);
  auto f = open_in_dir(ctx, "table4.csv");
  write_rows(f, "lorentzian", {{"integer_h", c}, {"A'", a}}, 0.999);
  report.relative("h=1 B999*Tb", c.bw, 2.06, 0.03);
  report.relative("A' B999*Tb", a.bw, 1.129, 0.03);
  report.relative("h=1 d^2", c.dmin2, 1.9, 0.02);
  report.relative("A' d^2", a.dmin2, 3.346, 0.02);
  report.within("h=1 SSB loss %", c.ssb_loss_percent, 0.469, 0.1);
  report.within("A' SSB loss %", a.ssb_loss_percent, 0.366, 0.1);
  report.check("ordering", c.bw > a.bw && c.dmin2 < a.dmin2 && c.ssb_loss_percent > a.ssb_loss_percent,
               "h=1 wider, closer and leakier than A'");
}

void reproduce_fig4(const Context& ctx, Report& report) {
  const std::vector<double> widths{0.1, 0.3, 0.5, 0.7, 0.9, 1.1, 1.3};
  auto bound_at = [](double h, double w) { return upper_bound(lorentzian_scheme(2, h, 5, w)).d_squared; };
  auto f = open_in_dir(ctx, "fig4.csv");
  std::vector<std::string> header{"h"};
  for (double w : widths) header.push_back("d_B2_w" + num(w));
  write_csv_preamble(f, "family=lorentzian M=2 L=5 m=3", header);
  for (int k = 1; k <= 100; ++k) {
    const double h = 0.02 * k;
    f << num(h);
    for (double w : widths) f << ',' << num(bound_at(h, w));
    f << '\n';
  }
  auto best_width = [&](double h) {
    double best_w = widths.front(), best = -1.0;
    for (double w : widths) {
      const double d = bound_at(h, w);
      if (d > best) best = d, best_w = w;
    }
    return best_w;
  };
  report.check("h=0.5 best width", best_width(0.5) == 0.1, "w=" + num(best_width(0.5)));
  report.check("h=1.5 best width", best_width(1.5) == 1.3, "w=" + num(best_width(1.5)));
  const double b09 = bound_at(1.9, 0.9);
  const double b13 = bound_at(1.9, 1.3);
  report.check("h=1.9 bound w=0.9 above w=1.3", b09 > b13, num(b09) + " > " + num(b13));
  const double d161 = d_min(lorentzian_scheme(2, 1.61, 5, 1.3), kDefaultMergers, 30).d_squared;
  report.check("h=1.61 d_min^2 > 5", d161 > 5.0, num(d161));
  const ParetoPoint g = gmsk_reference(0.99);
  report.within("GMSK gap dB", 10.0 * std::log10(2.4 / g.dmin2), 1.36, 0.15);
}

void reproduce_fig5(const Context& ctx, Report& report) {
  auto f = open_in_dir(ctx, "fig5.csv");
  write_csv_preamble(f, "family=lorentzian M=2 L=5 w=1.3 m=3 N_max=30", {"h", "d_B2", "d_min2", "N_used"});
  CpmScheme s = lorentzian_scheme(2, 1.0, 5, 1.3);
  for (int k = 1; k <= 40; ++k) {
    s.h = 0.05 * k;
    const DistanceResult r = d_min(s);
    f << num(s.h) << ',' << num(r.bound) << ',' << num(r.d_squared) << ',' << r.N_used << '\n';
  }
  s.h = 1.5;
  const DistanceResult r = d_min(s);
  report.check("h=1.5 d_min^2 below d_B^2", r.bound - r.d_squared > 1e-3, num(r.d_squared) + " < " + num(r.bound));
}

void reproduce_fig6(const Context& ctx, Report& report) {
  const CpmScheme a = lorentzian_scheme(2, 0.78, 5, 1.3);
  const CpmScheme b = lorentzian_scheme(2, 0.65, 5, 1.2);
  const std::vector<double> snr = parse_list("0:1:8");
  BerOptions opt;
  opt.seed = ctx.seed;
  opt.max_bits = 4'000'000;
  opt.dmin2 = d_min(a).d_squared;
  const auto ra = simulate_ber(a, snr, opt);
  opt.dmin2 = d_min(b).d_squared;
  const auto rb = simulate_ber(b, snr, opt);

  auto f = open_in_dir(ctx, "fig6.csv");
  write_csv_preamble(f, "configs A=(2,0.78,5,1.3) B=(2,0.65,5,1.2) seed=" + std::to_string(ctx.seed),
                     {"ebn0_db", "ber_A", "union_A", "ber_B", "union_B"});
  for (std::size_t i = 0; i < snr.size(); ++i) {
    f << num(snr[i]) << ',' << num(ra[i].ber) << ',' << num(ra[i].union_bound) << ',' << num(rb[i].ber) << ','
      << num(rb[i].union_bound) << '\n';
  }

  BerOptions clean = opt;
  clean.noiseless = true;
  clean.max_bits = 10'000;
  const double inf_snr[] = {100.0};
  const auto r0 = simulate_ber(a, inf_snr, clean);
  report.check("A noiseless round trip", r0[0].bit_errors == 0 && r0[0].bits >= 10'000,
               std::to_string(r0[0].bit_errors) + " errors in " + std::to_string(r0[0].bits) + " bits");
  const auto first = std::find_if(ra.begin(), ra.end(), [](const BerPoint& p) { return p.bit_errors > 0 && p.ber < 1e-3; });
  if (first == ra.end()) {
    report.check("A BER vs union bound", false, "BER never dropped below 1e-3");
  } else {
    const double ratio = first->ber / first->union_bound;
    report.check("A BER vs union bound", ratio >= 1.0 / 3.0 && ratio <= 3.0,
                 "ratio " + num(ratio) + " at " + num(first->ebn0_db) + " dB");
  }
  bool ordered = true;
  int compared = 0;
  for (std::size_t i = 0; i < snr.size(); ++i) {
    if (snr[i] < 5.0 || ra[i].bit_errors == 0) continue;
    ++compared;
    ordered &= rb[i].ber > ra[i].ber;
  }
  report.check("B above A at high SNR", ordered && compared > 0, std::to_string(compared) + " points compared");
}

void reproduce_fig7(const Context& ctx, Report& report) {
  auto f = open_in_dir(ctx, "fig7.csv");
  write_csv_preamble(f, "family=lorentzian M=2 L=5 h=0.78 w=0.3,0.7,1.3", {"f", "S_w0.3", "S_w0.7", "S_w1.3"});
  std::vector<PsdEstimate> curves;
  FrequencyGrid grid;
  grid.refine_near_lines = false;
  for (double w : {0.3, 0.7, 1.3}) curves.push_back(psd(lorentzian_scheme(2, 0.78, 5, w), grid));
  for (std::size_t i = 0; i < curves[0].freq.size(); ++i) {
    f << num(curves[0].freq[i]) << ',' << num(curves[0].S[i]) << ',' << num(curves[1].S[i]) << ',' << num(curves[2].S[i]) << '\n';
  }
  std::vector<double> unit, b99;
  for (const auto& c : curves) {
    unit.push_back(best_unit_band(c));
    b99.push_back(occupied_band(c, 0.99, 2).bt_b);
  }
  report.check("unit-band power grows with w", unit[0] < unit[1] && unit[1] < unit[2],
               num(unit[0]) + " < " + num(unit[1]) + " < " + num(unit[2]));
  report.check("B99 shrinks with w", b99[0] > b99[1] && b99[1] > b99[2],
               num(b99[0]) + " > " + num(b99[1]) + " > " + num(b99[2]));
}

void reproduce_fig8(const Context& ctx, Report& report) {
  const PsdEstimate near = psd(lorentzian_scheme(2, 1.04, 12, 0.8));
  const PsdEstimate exact = psd(lorentzian_scheme(2, 1.0, 12, 0.8));
  {
    auto f = open_in_dir(ctx, "fig8.csv");
    write_csv_preamble(f, "family=lorentzian M=2 L=12 w=0.8 h=1.04", {"f", "S", "is_line"});
    for (std::size_t i = 0; i < near.freq.size(); ++i) f << num(near.freq[i]) << ',' << num(near.S[i]) << ",0\n";
  }
  for (int m = 0; m <= 1; ++m) {
    const double fm = m + near.v;
    const double peak = psd_at(near, fm);
    const double side = std::max(psd_at(near, fm - 0.25), psd_at(near, fm + 0.25));
    report.check("h=1.04 spike at " + num(fm), peak > 5.0 * side, num(peak) + " vs shoulder " + num(side));
  }
  double line_power = 0.0;
  for (const auto& l : exact.lines) {
    if (std::abs(l.f) < 1e-9 || std::abs(l.f - 1.0) < 1e-9) line_power += l.power;
  }
  report.check("h=1 discrete lines at 0 and 1/Ts", exact.integer_branch && line_power > 1e-3, num(line_power));
}

using Target = std::function<void(const Context&, Report&)>;

const std::map<std::string, Target>& targets() {
  static const std::map<std::string, Target> t{
      {"table1", reproduce_table1}, {"table2", reproduce_table2}, {"table3", reproduce_table3},
      {"table4", reproduce_table4}, {"fig4", reproduce_fig4},     {"fig5", reproduce_fig5},
      {"fig6", reproduce_fig6},     {"fig7", reproduce_fig7},     {"fig8", reproduce_fig8}};
  return t;
}

int run_reproduce(const Context& ctx, const std::vector<std::string>& names) {
  std::vector<std::string> todo = names;
  if (todo.size() == 1 && todo[0] == "all") {
    todo.clear();
    for (const auto& [name, fn] : targets()) todo.push_back(name);
  }
  bool all = true;
  for (const auto& name : todo) {
    const auto it = targets().find(name);
    if (it == targets().end()) throw InputError("unknown reproduction target '" + name + "'");
    Report report;
    it->second(ctx, report);
    auto f = open_in_dir(ctx, name + "_report.txt");
    f << "# ssbfsk " << kToolVersion << " reproduce " << name << '\n';
    report.write(f);
    ctx.out << "[" << name << "]\n";
    report.write(ctx.out);
    all &= report.passed();
  }
  return all ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------------------
// Data subcommands

void cmd_pulse(const Context& ctx, const std::string& path, int sps) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  PulseSpec spec;
  if (j.is_object() && j.contains("M")) {
    const SchemeFile file = scheme_file_from_json(j);
    spec = file.pulse;
    if (sps <= 0) sps = file.samples_per_symbol;
  } else {
    spec = pulse_spec_from_json(j);
  }
  if (sps <= 0) sps = kDefaultSamplesPerSymbol;
  const SampledPulse p = make_pulse(spec, sps);
  Sink sink(ctx, "pulse.csv");
  write_csv_preamble(sink.stream(), "family=" + std::string(to_string(spec.family)) + " L=" + std::to_string(spec.L) +
                                        " w=" + num(spec.w) + " bt=" + num(spec.bt) + " Ts=" + num(spec.Ts) +
                                        " sps=" + std::to_string(sps),
                     {"t", "g", "phi0"});
  const double dt = spec.Ts / sps;
  for (std::size_t k = 0; k < p.g.size(); ++k) {
    sink.stream() << num(static_cast<double>(k) * dt) << ',' << num(p.g[k]) << ',' << num(p.phi0[k]) << '\n';
  }
  ctx.out << "mu=" << num(p.mu) << " samples=" << p.g.size() << " -> " << sink.where() << '\n';
}

void cmd_modulate(const Context& ctx, const CpmScheme& scheme, const std::string& symbols_text, int random_count) {
  std::vector<int> symbols;
  if (!symbols_text.empty()) {
    std::istringstream in(symbols_text);
    std::string item;
    while (std::getline(in, item, ',')) {
      if (!item.empty()) symbols.push_back(std::stoi(item));
    }
  } else {
    std::mt19937_64 rng(ctx.seed);
    for (int i = 0; i < random_count; ++i) {
      symbols.push_back(scheme.value_of(static_cast<int>(rng() % static_cast<unsigned>(scheme.M))));
    }
  }
  if (symbols.empty()) throw InputError("no symbols: pass --symbols or --random");
  const PhaseTrajectory traj = phase_trajectory(scheme, symbols);
  Sink sink(ctx, "modulate.csv");
  write_csv_preamble(sink.stream(), describe(scheme) + " symbols=" + std::to_string(symbols.size()), {"t", "re", "im", "phi"});
  const double amp = scheme.amplitude();
  for (std::size_t k = 0; k < traj.t.size(); ++k) {
    const Complex s = std::polar(amp, traj.phi[k]);
    sink.stream() << num(traj.t[k]) << ',' << num(s.real()) << ',' << num(s.imag()) << ',' << num(traj.phi[k]) << '\n';
  }
  ctx.out << traj.t.size() << " samples -> " << sink.where() << '\n';
}

int cmd_dmin(const Context& ctx, const CpmScheme& scheme, int m, int n_max) {
  const DistanceResult r = d_min(scheme, m, n_max);
  Json j = to_json(r);
  j["scheme"] = describe(scheme);
  j["tool_version"] = kToolVersion;
  Sink sink(ctx, "dmin.json");
  sink.stream() << j.dump(2) << '\n';
  ctx.out << "d_min^2=" << num(r.d_squared) << " d_B^2=" << num(r.bound) << " N_used=" << r.N_used
          << (r.converged ? "" : " (not converged)") << '\n';
  if (!r.converged) {
    ctx.err << "d_min search did not converge within N_max=" << n_max << '\n';
    return kExitNotConverged;
  }
  return kExitOk;
}

int cmd_dmin_sweep(const Context& ctx, const CpmScheme& scheme, const std::string& h_values, int m, int n_max) {
  const std::vector<double> hs = parse_list(h_values);
  const auto rows = dmin_sweep(scheme, hs, m, n_max);
  Sink sink(ctx, "dmin_sweep.csv");
  write_csv_preamble(sink.stream(), describe(scheme) + " m=" + std::to_string(m) + " N_max=" + std::to_string(n_max),
                     {"h", "d_B2", "d_min2", "N_used", "converged"});
  bool all = true;
  for (const auto& r : rows) {
    sink.stream() << num(r.h) << ',' << num(r.bound) << ',' << num(r.d_min) << ',' << r.N_used << ','
                  << (r.converged ? 1 : 0) << '\n';
    all &= r.converged;
  }
  ctx.out << rows.size() << " rows -> " << sink.where() << '\n';
  return all ? kExitOk : kExitNotConverged;
}

void cmd_psd(const Context& ctx, const CpmScheme& scheme, double f_min, double f_max, double step) {
  FrequencyGrid grid = FrequencyGrid::for_scheme(scheme);
  if (!std::isnan(f_min)) grid.f_min = f_min;
  if (!std::isnan(f_max)) grid.f_max = f_max;
  if (step > 0.0) grid.step = step;
  const PsdEstimate p = psd(scheme, grid);
  Sink sink(ctx, "psd.csv");
  write_csv_preamble(sink.stream(), describe(scheme) + " f_min=" + num(grid.f_min) + " f_max=" + num(grid.f_max) +
                                        " step=" + num(grid.step),
                     {"f", "S", "is_line"});
  for (std::size_t i = 0; i < p.freq.size(); ++i) sink.stream() << num(p.freq[i]) << ',' << num(p.S[i]) << ",0\n";
  for (const auto& l : p.lines) sink.stream() << num(l.f) << ',' << num(l.power) << ",1\n";
  ctx.out << "total power=" << num(p.total_power) << " lines=" << p.lines.size() << " -> " << sink.where() << '\n';
}

void cmd_occupancy(const Context& ctx, const CpmScheme& scheme) {
  const PsdEstimate p = psd(scheme);
  const OccupancyReport r = occupancy(p, scheme.M);
  Json j = to_json(r);
  j["band"] = to_json(occupied_band(p, ctx.fraction, scheme.M));
  j["scheme"] = describe(scheme);
  j["tool_version"] = kToolVersion;
  Sink sink(ctx, "occupancy.json");
  sink.stream() << j.dump(2) << '\n';
  ctx.out << "B99*Tb=" << num(r.b99.bt_b) << " B999*Tb=" << num(r.b999.bt_b) << " SSB-loss=" << num(r.ssb_loss_percent)
          << "%\n";
}

void cmd_ssb_loss(const Context& ctx, const CpmScheme& scheme) {
  const double loss = ssb_loss(psd(scheme));
  ctx.out << num(loss) << '\n';
}

void cmd_wlim(const Context& ctx, const std::string& L_values) {
  Sink sink(ctx, "wlim.csv");
  write_csv_preamble(sink.stream(), "family=lorentzian Ts=1 samples=4096 tolerance=0.1", {"L", "w_lim"});
  ctx.out << "L  w_lim\n";
  for (double Ld : parse_list(L_values)) {
    const int L = static_cast<int>(std::lround(Ld));
    const double w = w_lim(L);
    sink.stream() << L << ',' << num(w) << '\n';
    ctx.out << L << "  " << num(w) << '\n';
  }
}

void write_points(std::ostream& os, const std::string& params, const std::vector<ParetoPoint>& pts) {
  write_csv_preamble(os, params, {"M", "h", "L", "w", "dmin2", "bw", "ssb_loss", "N"});
  for (const auto& p : pts) {
    os << p.params.M << ',' << num(p.params.h) << ',' << p.params.L << ',' << num(p.params.w) << ',' << num(p.dmin2)
       << ',' << num(p.bw) << ',' << num(p.ssb_loss_percent) << ',' << p.N_used << '\n';
  }
}

void cmd_pareto(const Context& ctx, const std::string& space_path, const std::string& checkpoint, double reference_bt,
                bool fraction_given) {
  DesignSpace space;
  if (!space_path.empty()) {
    std::ifstream in(space_path);
    if (!in) throw ConfigError("cannot open '" + space_path + "'");
    Json j;
    try {
      j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    space = design_space_from_json(j);
  } else if (ctx.full) {
    space = DesignSpace::full();
  } else {
    space = DesignSpace::desk();
    space.extra = {{2, 0.78, 5, 1.3}, {2, 0.65, 5, 1.2}};
  }
  if (fraction_given) space.occupancy_fraction = ctx.fraction;

  SweepOptions opt;
  opt.jobs = ctx.jobs;
  if (!checkpoint.empty()) opt.checkpoint = checkpoint;
  opt.progress = &ctx.err;
  const std::vector<ParetoPoint> cloud = evaluate_grid(space, opt);
  const std::vector<ParetoPoint> front = pareto_front(cloud);
  const ParetoPoint ref = gmsk_reference(space.occupancy_fraction, reference_bt);
  const std::vector<ParetoPoint> filtered = filter_reference(front, ref);

  const std::string params = "design_space=" + to_json(space).dump() + " fraction=" + num(space.occupancy_fraction);
  auto c = open_in_dir(ctx, "pareto_cloud.csv");
  write_points(c, params, cloud);
  auto f = open_in_dir(ctx, "pareto_front.csv");
  write_points(f, params, front);
  auto r = open_in_dir(ctx, "pareto_filtered.csv");
  write_points(r, params + " reference=gmsk bt=" + num(reference_bt) + " dmin2=" + num(ref.dmin2) + " bw=" + num(ref.bw),
               filtered);
  ctx.out << "cloud=" << cloud.size() << " front=" << front.size() << " beating GMSK(BT=" << num(reference_bt)
          << ")=" << filtered.size() << " -> " << ctx.out_dir << '\n';
}

void cmd_ber(const Context& ctx, const CpmScheme& scheme, const std::string& ebn0, std::uint64_t max_bits,
             std::uint64_t target_errors, int frame, bool noiseless) {
  BerOptions opt;
  opt.seed = ctx.seed;
  opt.max_bits = max_bits;
  opt.target_errors = target_errors;
  opt.frame_symbols = frame;
  opt.noiseless = noiseless;
  const auto points = simulate_ber(scheme, parse_list(ebn0), opt);
  Sink sink(ctx, "ber.csv");
  write_csv_preamble(sink.stream(), describe(scheme) + " seed=" + std::to_string(ctx.seed) + " max_bits=" +
                                        std::to_string(max_bits) + " target_errors=" + std::to_string(target_errors),
                     {"ebn0_db", "bits", "errors", "ber", "union_bound"});
  for (const auto& p : points) {
    sink.stream() << num(p.ebn0_db) << ',' << p.bits << ',' << p.bit_errors << ',' << num(p.ber) << ','
                  << num(p.union_bound) << '\n';
  }
  ctx.out << points.size() << " points -> " << sink.where() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const char* env_dir = std::getenv(kOutDirVariable);
  Context ctx{out, err, env_dir && *env_dir ? env_dir : ".", "", 1, 1, false, 0.99};

  CLI::App app{"SSB-FSK continuous phase modulation analysis"};
  app.require_subcommand(1);
  app.add_option("--out", ctx.out_dir, "output directory (default $" + std::string(kOutDirVariable) + " or .)");
  app.add_option("-o,--output", ctx.output, "output file for single-file subcommands; - for stdout");
  app.add_option("--seed", ctx.seed, "random seed");
  app.add_option("--jobs", ctx.jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--full", ctx.full, "use the full design grid");
  auto* fraction = app.add_option("--fraction", ctx.fraction, "occupied-band power fraction")
                       ->check(CLI::IsMember({0.99, 0.999}));
  app.fallthrough();

  std::string scheme_path;
  auto with_scheme = [&](CLI::App* sub) { sub->add_option("--scheme", scheme_path, "scheme JSON file")->required(); };

  std::function<int()> action;

  auto* pulse = app.add_subcommand("pulse", "sample a frequency pulse");
  int pulse_sps = 0;
  pulse->add_option("--scheme", scheme_path, "scheme or pulse JSON file")->required();
  pulse->add_option("--sps", pulse_sps, "samples per symbol");
  pulse->callback([&] { action = [&] { cmd_pulse(ctx, scheme_path, pulse_sps); return kExitOk; }; });

  auto* modulate = app.add_subcommand("modulate", "synthesize the baseband waveform");
  std::string symbols;
  int random_count = 0;
  with_scheme(modulate);
  modulate->add_option("--symbols", symbols, "comma-separated alphabet values");
  modulate->add_option("--random", random_count, "number of random symbols");
  modulate->callback([&] {
    action = [&] { cmd_modulate(ctx, load_scheme(scheme_path), symbols, random_count); return kExitOk; };
  });

  int mergers = kDefaultMergers;
  int n_max = kDefaultMaxObservation;
  auto* dmin = app.add_subcommand("dmin", "minimum Euclidean distance");
  with_scheme(dmin);
  dmin->add_option("--mergers", mergers, "merger count for the upper bound");
  dmin->add_option("--nmax", n_max, "maximum observation length");
  dmin->callback([&] { action = [&] { return cmd_dmin(ctx, load_scheme(scheme_path), mergers, n_max); }; });

  std::string h_values = "0.02:0.02:2";
  auto* sweep = app.add_subcommand("dmin-sweep", "d_B^2 and d_min^2 over modulation indices");
  with_scheme(sweep);
  sweep->add_option("--h-values", h_values, "lo:step:hi or comma list");
  sweep->add_option("--mergers", mergers, "merger count for the upper bound");
  sweep->add_option("--nmax", n_max, "maximum observation length");
  sweep->callback([&] { action = [&] { return cmd_dmin_sweep(ctx, load_scheme(scheme_path), h_values, mergers, n_max); }; });

  double f_min = std::nan(""), f_max = std::nan(""), step = 0.0;
  auto* psd_cmd = app.add_subcommand("psd", "power spectral density");
  with_scheme(psd_cmd);
  psd_cmd->add_option("--f-min", f_min, "lowest frequency (1/Ts)");
  psd_cmd->add_option("--f-max", f_max, "highest frequency (1/Ts)");
  psd_cmd->add_option("--step", step, "grid step (1/Ts)");
  psd_cmd->callback([&] { action = [&] { cmd_psd(ctx, load_scheme(scheme_path), f_min, f_max, step); return kExitOk; }; });

  auto* occ = app.add_subcommand("occupancy", "occupied bandwidth and SSB loss");
  with_scheme(occ);
  occ->callback([&] { action = [&] { cmd_occupancy(ctx, load_scheme(scheme_path)); return kExitOk; }; });

  auto* loss = app.add_subcommand("ssb-loss", "power percentage on the suppressed side");
  with_scheme(loss);
  loss->callback([&] { action = [&] { cmd_ssb_loss(ctx, load_scheme(scheme_path)); return kExitOk; }; });

  std::string L_values = "2,4,6,8,10,12";
  auto* wlim = app.add_subcommand("wlim", "limit width per pulse length");
  wlim->add_option("--L", L_values, "pulse lengths");
  wlim->callback([&] { action = [&] { cmd_wlim(ctx, L_values); return kExitOk; }; });

  std::string space_path, checkpoint;
  double reference_bt = 0.3;
  auto* pareto = app.add_subcommand("pareto", "design-space sweep and Pareto front");
  pareto->add_option("--space", space_path, "design space JSON file");
  pareto->add_option("--checkpoint", checkpoint, "append-only result store");
  pareto->add_option("--reference-bt", reference_bt, "GMSK reference BT");
  pareto->callback([&] {
    action = [&] { cmd_pareto(ctx, space_path, checkpoint, reference_bt, fraction->count() > 0); return kExitOk; };
  });

  std::string ebn0 = "0:1:8";
  std::uint64_t max_bits = 1'000'000, target_errors = 100;
  int frame = 2000;
  bool noiseless = false;
  auto* ber = app.add_subcommand("ber", "Viterbi BER over AWGN");
  with_scheme(ber);
  ber->add_option("--ebn0", ebn0, "Eb/N0 values in dB: lo:step:hi or comma list");
  ber->add_option("--max-bits", max_bits, "bit budget per point");
  ber->add_option("--target-errors", target_errors, "stop a point after this many errors");
  ber->add_option("--frame", frame, "symbols per frame");
  ber->add_flag("--noiseless", noiseless, "disable the noise");
  ber->callback([&] {
    action = [&] { cmd_ber(ctx, load_scheme(scheme_path), ebn0, max_bits, target_errors, frame, noiseless); return kExitOk; };
  });

  std::vector<std::string> names;
  auto* reproduce = app.add_subcommand("reproduce", "rerun a reference table or figure with checks");
  reproduce->add_option("target", names, "table1 table2 table3 table4 fig4 fig5 fig6 fig7 fig8 or all")->required();
  reproduce->callback([&] { action = [&] { return run_reproduce(ctx, names); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitFailure;
  }

  try {
    return action ? action() : kExitFailure;
  } catch (const DomainError& e) {
    err << "invalid scheme: " << e.what() << '\n';
    return kExitInvalidScheme;
  } catch (const ConfigError& e) {
    err << "invalid scheme: " << e.what() << '\n';
    return kExitInvalidScheme;
  } catch (const ConvergenceError& e) {
    err << "not converged: " << e.what() << '\n';
    return kExitNotConverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace ssbfsk::cli
