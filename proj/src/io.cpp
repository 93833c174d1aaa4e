#include "ssbfsk/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>

#include "ssbfsk/errors.hpp"

namespace ssbfsk {
namespace {

void reject_unknown(const Json& j, const std::set<std::string>& allowed, const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(std::string(what) + ": unknown key '" + key + "'");
  }
}

template <class T>
T get(const Json& j, const char* key, const char* what) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string(what) + ": key '" + key + "' missing or of the wrong type");
  }
}

template <class T>
void get_opt(const Json& j, const char* key, T& out, const char* what) {
  if (j.contains(key)) out = get<T>(j, key, what);
}

int get_int(const Json& j, const char* key, const char* what) {
  const Json& v = j.contains(key) ? j.at(key) : Json();
  if (!v.is_number_integer() && !(v.is_number_float() && v.get<double>() == std::floor(v.get<double>()))) {
    throw ConfigError(std::string(what) + ": key '" + key + "' must be an integer");
  }
  return static_cast<int>(v.get<double>());
}

}  // namespace

CpmScheme SchemeFile::build() const { return CpmScheme::make(M, h, pulse, samples_per_symbol, alphabet); }

PulseSpec pulse_spec_from_json(const Json& j) {
  constexpr const char* what = "pulse";
  reject_unknown(j, {"family", "L", "w", "bt", "Ts"}, what);
  PulseSpec s;
  try {
    s.family = parse_pulse_family(get<std::string>(j, "family", what));
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  s.L = get_int(j, "L", what);
  get_opt(j, "w", s.w, what);
  get_opt(j, "bt", s.bt, what);
  get_opt(j, "Ts", s.Ts, what);
  s.validate();
  return s;
}

Json to_json(const PulseSpec& spec) {
  return Json{{"family", std::string(to_string(spec.family))}, {"L", spec.L}, {"w", spec.w}, {"bt", spec.bt}, {"Ts", spec.Ts}};
}

SchemeFile scheme_file_from_json(const Json& j) {
  constexpr const char* what = "scheme";
  reject_unknown(j, {"family", "M", "h", "L", "w", "bt", "Ts", "samples_per_symbol", "alphabet"}, what);
  Json pulse = Json::object();
  for (const char* key : {"family", "L", "w", "bt", "Ts"}) {
    if (j.contains(key)) pulse[key] = j.at(key);
  }
  SchemeFile f;
  f.pulse = pulse_spec_from_json(pulse);
  f.M = get_int(j, "M", what);
  f.h = get<double>(j, "h", what);
  if (j.contains("samples_per_symbol")) f.samples_per_symbol = get_int(j, "samples_per_symbol", what);
  if (j.contains("alphabet")) {
    try {
      f.alphabet = parse_alphabet(get<std::string>(j, "alphabet", what));
    } catch (const InputError& e) {
      throw ConfigError(e.what());
    }
  }
  f.build();  // validates the combination
  return f;
}

Json to_json(const SchemeFile& f) {
  Json j = to_json(f.pulse);
  j["M"] = f.M;
  j["h"] = f.h;
  j["samples_per_symbol"] = f.samples_per_symbol;
  if (f.alphabet) j["alphabet"] = std::string(to_string(*f.alphabet));
  return j;
}

SchemeFile load_scheme_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scheme file '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("scheme file '" + path + "' is not valid JSON: " + e.what());
  }
  return scheme_file_from_json(j);
}

DesignSpace design_space_from_json(const Json& j) {
  constexpr const char* what = "design space";
  reject_unknown(j,
                 {"preset", "h_min", "h_max", "h_step", "L_values", "M_values", "w_min", "w_step", "w_max",
                  "occupancy_fraction", "extra"},
                 what);
  DesignSpace s;
  if (j.contains("preset")) {
    const auto preset = get<std::string>(j, "preset", what);
    if (preset == "desk") {
      s = DesignSpace::desk();
    } else if (preset == "full") {
      s = DesignSpace::full();
    } else {
      throw ConfigError("design space: unknown preset '" + preset + "'");
    }
  }
  get_opt(j, "h_min", s.h_min, what);
  get_opt(j, "h_max", s.h_max, what);
  get_opt(j, "h_step", s.h_step, what);
  get_opt(j, "L_values", s.L_values, what);
  get_opt(j, "M_values", s.M_values, what);
  get_opt(j, "w_min", s.w_min, what);
  get_opt(j, "w_step", s.w_step, what);
  get_opt(j, "w_max", s.w_max, what);
  get_opt(j, "occupancy_fraction", s.occupancy_fraction, what);
  if (j.contains("extra")) {
    const Json& list = j.at("extra");
    if (!list.is_array()) throw ConfigError("design space: 'extra' must be an array");
    for (const Json& e : list) {
      reject_unknown(e, {"M", "h", "L", "w"}, "design space extra");
      s.extra.push_back({get_int(e, "M", what), get<double>(e, "h", what), get_int(e, "L", what), get<double>(e, "w", what)});
    }
  }
  try {
    s.validate();
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  return s;
}

Json to_json(const DesignSpace& s) {
  Json extra = Json::array();
  for (const auto& e : s.extra) extra.push_back({{"M", e.M}, {"h", e.h}, {"L", e.L}, {"w", e.w}});
  return Json{{"h_min", s.h_min},   {"h_max", s.h_max},       {"h_step", s.h_step},
              {"L_values", s.L_values}, {"M_values", s.M_values}, {"w_min", s.w_min},
              {"w_step", s.w_step}, {"w_max", s.w_max},       {"occupancy_fraction", s.occupancy_fraction},
              {"extra", extra}};
}

Json to_json(const DifferenceSequence& g) {
  return Json{{"gamma", g.gamma}, {"sum", g.sum()}};
}

Json to_json(const DistanceResult& r) {
  Json witnesses = Json::array();
  for (const auto& w : r.witnesses) witnesses.push_back(to_json(w));
  Json history = Json::array();
  for (double v : r.history) history.push_back(v);
  return Json{{"d_squared", r.d_squared}, {"achieved_by", to_json(r.achieved_by)}, {"witnesses", witnesses},
              {"N_used", r.N_used},       {"converged", r.converged},             {"bound", r.bound},
              {"history", history}};
}

Json to_json(const OccupiedBand& b) {
  return Json{{"fraction", b.fraction}, {"f_low", b.f_low}, {"f_high", b.f_high}, {"bt_b", b.bt_b}};
}

Json to_json(const OccupancyReport& r) {
  return Json{{"b99", to_json(r.b99)}, {"b999", to_json(r.b999)}, {"ssb_loss_percent", r.ssb_loss_percent}};
}

Json to_json(const ParetoPoint& p) {
  return Json{{"M", p.params.M},     {"h", p.params.h},   {"L", p.params.L},
              {"w", p.params.w},     {"dmin2", p.dmin2},  {"bw", p.bw},
              {"ssb_loss", p.ssb_loss_percent}, {"N_used", p.N_used}, {"converged", p.converged},
              {"f1", p.f1},          {"f2", p.f2}};
}

void write_csv_preamble(std::ostream& out, const std::string& params, const std::vector<std::string>& header) {
  out << "# ssbfsk " << kToolVersion << ' ' << params << '\n';
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
}

std::string describe(const CpmScheme& s) {
  const PulseSpec& p = s.pulse.spec;
  std::string out = "family=" + std::string(to_string(p.family)) + " M=" + std::to_string(s.M) + " h=" + format_double(s.h) +
                    " L=" + std::to_string(p.L);
  if (p.family == PulseFamily::Lorentzian) out += " w=" + format_double(p.w);
  if (p.family == PulseFamily::GaussianGmsk) out += " bt=" + format_double(p.bt);
  out += " Ts=" + format_double(p.Ts) + " sps=" + std::to_string(s.sps()) + " alphabet=" + std::string(to_string(s.alphabet));
  return out;
}

std::string format_double(double x, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, x);
  return buf;
}

}  // namespace ssbfsk
