#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ssbfsk/errors.hpp"
#include "ssbfsk/io.hpp"

using namespace ssbfsk;

TEST_CASE("scheme files round trip") {
  const Json j = Json::parse(R"({"family":"lorentzian","M":2,"h":0.78,"L":5,"w":1.3})");
  const SchemeFile f = scheme_file_from_json(j);
  CHECK(f.M == 2);
  CHECK(f.h == 0.78);
  CHECK(f.pulse.L == 5);
  CHECK(f.pulse.w == 1.3);
  const SchemeFile g = scheme_file_from_json(to_json(f));
  CHECK(g.h == f.h);
  CHECK(g.pulse.w == f.pulse.w);
  CHECK(g.samples_per_symbol == f.samples_per_symbol);
  CHECK(g.build().alphabet == Alphabet::NonNegative);
}

TEST_CASE("comparison families parse") {
  const SchemeFile rc = scheme_file_from_json(Json::parse(R"({"family":"rc","M":4,"h":0.25,"L":2})"));
  CHECK(rc.build().alphabet == Alphabet::Bipolar);
  const SchemeFile g = scheme_file_from_json(Json::parse(R"({"family":"gmsk","M":2,"h":0.5,"L":4,"bt":0.3})"));
  CHECK(g.pulse.bt == 0.3);
}

TEST_CASE("strict parsing rejects malformed schemes") {
  const char* bad[] = {
      R"({"family":"lorentzian","M":2,"h":0.78,"L":5,"w":1.3,"colour":1})",
      R"({"family":"lorentzian","M":2,"L":5,"w":1.3})",
      R"({"family":"lorentzian","M":2,"h":"0.78","L":5,"w":1.3})",
      R"({"family":"sinc","M":2,"h":0.78,"L":5,"w":1.3})",
      R"({"family":"lorentzian","M":2,"h":0.78,"L":5,"w":1.3,"alphabet":"ternary"})",
      R"({"family":"lorentzian","M":2,"h":0.78,"L":2.5,"w":1.3})",
  };
  for (const char* text : bad) {
    INFO(text);
    CHECK_THROWS_AS(scheme_file_from_json(Json::parse(text)), ConfigError);
  }
  CHECK_THROWS_AS(scheme_file_from_json(Json::parse(R"({"family":"lorentzian","M":2,"h":0.78,"L":5,"w":0})")), DomainError);
  CHECK_THROWS_AS(scheme_file_from_json(Json::parse(R"({"family":"lorentzian","M":3,"h":0.78,"L":5,"w":1})")), DomainError);
  CHECK_THROWS_AS(load_scheme_file("/nonexistent/scheme.json"), ConfigError);
}

TEST_CASE("scheme files load from disk") {
  const auto path = std::filesystem::temp_directory_path() / "ssbfsk_io_scheme.json";
  { std::ofstream(path) << R"({"family":"lorentzian","M":2,"h":0.65,"L":5,"w":1.2,"samples_per_symbol":32})"; }
  const SchemeFile f = load_scheme_file(path.string());
  CHECK(f.build().sps() == 32);
  { std::ofstream(path) << "{ not json"; }
  CHECK_THROWS_AS(load_scheme_file(path.string()), ConfigError);
  std::filesystem::remove(path);
}

TEST_CASE("design spaces round trip") {
  const DesignSpace s = design_space_from_json(
      Json::parse(R"({"preset":"desk","extra":[{"M":2,"h":0.78,"L":5,"w":1.3}],"occupancy_fraction":0.999})"));
  CHECK(s.h_step == 0.05);
  CHECK(s.occupancy_fraction == 0.999);
  REQUIRE(s.extra.size() == 1);
  const DesignSpace t = design_space_from_json(to_json(s));
  CHECK(t.enumerate() == s.enumerate());
  CHECK_THROWS_AS(design_space_from_json(Json::parse(R"({"preset":"huge"})")), ConfigError);
  CHECK_THROWS_AS(design_space_from_json(Json::parse(R"({"h_step":-1})")), ConfigError);
  CHECK_THROWS_AS(design_space_from_json(Json::parse(R"({"grid":1})")), ConfigError);
}

TEST_CASE("csv preamble") {
  std::ostringstream out;
  write_csv_preamble(out, "M=2", {"f", "S"});
  CHECK(out.str() == std::string("# ssbfsk ") + kToolVersion + " M=2\nf,S\n");
}

TEST_CASE("result serialisation") {
  DistanceResult r;
  r.d_squared = 2.0;
  r.achieved_by.gamma = {1, -1};
  r.N_used = 7;
  r.converged = true;
  const Json j = to_json(r);
  CHECK(j.at("d_squared") == 2.0);
  CHECK(j.at("achieved_by").at("sum") == 0);
  CHECK(j.at("N_used") == 7);
  const Json p = to_json(make_point({2, 0.78, 5, 1.3}, 2.4, 0.9, 1.8, 15, true));
  CHECK(p.at("M") == 2);
  CHECK(p.at("h") == 0.78);
}
