#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssbfsk/distance.hpp"
#include "ssbfsk/modulator.hpp"
#include "ssbfsk/optimizer.hpp"
#include "ssbfsk/pulses.hpp"
#include "ssbfsk/spectrum.hpp"

namespace ssbfsk {

inline constexpr const char* kToolVersion = "0.1.0";

using Json = nlohmann::json;

// Scheme description as stored on disk.
struct SchemeFile {
  PulseSpec pulse;
  int M = 2;
  double h = 0.5;
  int samples_per_symbol = kDefaultSamplesPerSymbol;
  std::optional<Alphabet> alphabet;

  CpmScheme build() const;
};

// Strict parsers: unknown keys, wrong types and missing required keys raise ConfigError;
// invariant violations raise DomainError or ConfigError from the validators.
PulseSpec pulse_spec_from_json(const Json& j);
Json to_json(const PulseSpec& spec);
SchemeFile scheme_file_from_json(const Json& j);
Json to_json(const SchemeFile& file);
SchemeFile load_scheme_file(const std::string& path);

DesignSpace design_space_from_json(const Json& j);
Json to_json(const DesignSpace& space);

Json to_json(const DifferenceSequence& gamma);
Json to_json(const DistanceResult& result);
Json to_json(const OccupiedBand& band);
Json to_json(const OccupancyReport& report);
Json to_json(const ParetoPoint& point);

// Self-describing CSV: one comment line with the tool version and parameters, then the header.
void write_csv_preamble(std::ostream& out, const std::string& params, const std::vector<std::string>& header);
std::string describe(const CpmScheme& scheme);
std::string format_double(double x, int precision = 10);

}  // namespace ssbfsk
