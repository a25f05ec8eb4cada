#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "harris_kinetics/config.hpp"
#include "harris_kinetics/io.hpp"

using namespace hk;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "hk_test_io";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Io, NumberFormatRoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 0.0}) EXPECT_EQ(std::stod(io::fmt(x)), x);
  EXPECT_EQ(io::fmt(INFINITY), "inf");
  EXPECT_EQ(io::fmt(NAN), "nan");
}

TEST(Io, CsvLayout) {
  const auto p = scratch("a.csv");
  {
    io::CsvWriter w(p, {"t", "tv", "phi_tag"});
    w.row(0.5, 0.25, "one");
    w.row_values({1.0, 2.0});
  }
  EXPECT_EQ(slurp(p), "t,tv,phi_tag\n0.5,0.25,one\n1,2\n");
}

TEST(Io, Sha256KnownVector) {
  const auto p = scratch("abc.txt");
  std::ofstream(p) << "abc";
  EXPECT_EQ(io::sha256_file(p), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Io, ManifestRoundTrip) {
  io::RunManifest m;
  m.subcommand = "rates";
  m.config = {{"doeblin", {{"alpha", 0.5}, {"tau", 1.0}}}};
  m.master_seed = 18446744073709551615ULL;
  m.tool_version = "1.2.3";
  m.started = "2026-01-01T00:00:00Z";
  m.outputs = {{"rates.json", "00ff"}};
  const auto back = io::RunManifest::from_json(m.to_json());
  EXPECT_EQ(back.subcommand, m.subcommand);
  EXPECT_EQ(back.config, m.config);
  EXPECT_EQ(back.master_seed, m.master_seed);
  ASSERT_EQ(back.outputs.size(), 1u);
  EXPECT_EQ(back.outputs[0].sha256, "00ff");
}

TEST(Io, ReadJsonErrors) {
  EXPECT_THROW(io::read_json(scratch("missing.json")), invalid_input);
  const auto p = scratch("bad.json");
  std::ofstream(p) << "{ not json";
  EXPECT_THROW(io::read_json(p), invalid_input);
}

TEST(Io, SvgIsWellFormedEnough) {
  const auto p = scratch("c.svg");
  io::SvgOptions o;
  o.title = "a < b & c";
  io::write_svg(p, {{{0, 1, 2}, {1, 0.5, 0.25}, "measured", "#000", false}, {{0, 1, 2}, {1, 0, -1}, "", "#f00", true}}, o);
  const auto s = slurp(p);
  EXPECT_EQ(s.rfind("<svg", 0), 0u);
  EXPECT_NE(s.find("</svg>"), std::string::npos);
  EXPECT_NE(s.find("a &lt; b &amp; c"), std::string::npos);
  EXPECT_EQ(s.find("nan"), std::string::npos);
}

TEST(Config, PresetsBuildValidModels) {
  for (const auto& [name, j] : config::model_presets()) {
    const ModelSpec m = config::model_from_json(config::resolve_model(name));
    EXPECT_NO_THROW(validate(m)) << name;
  }
  EXPECT_THROW(config::resolve_model("no_such_model"), config::schema_error);
}

TEST(Config, MissingFieldNamesTheField) {
  try {
    config::model_from_json({{"kind", "knudsen_gas"}, {"geometry", {{"kind", "interval"}}}, {"boundary", {{"kind", "diffuse"}}}});
    FAIL();
  } catch (const config::schema_error& e) {
    EXPECT_NE(std::string(e.what()).find("model.wall_temperature"), std::string::npos);
  }
  try {
    config::get<double>(io::json{{"alpha", "x"}}, "alpha", "doeblin.");
    FAIL();
  } catch (const config::schema_error& e) {
    EXPECT_NE(std::string(e.what()).find("doeblin.alpha"), std::string::npos);
  }
  EXPECT_THROW(config::model_from_json({{"kind", "warp_drive"}}), invalid_input);
}

TEST(Config, KnudsenLinearWallTemperature) {
  const auto m = config::model_from_json({{"kind", "knudsen_gas"},
                                          {"geometry", {{"kind", "interval"}}},
                                          {"boundary", {{"kind", "diffuse"}}},
                                          {"wall_temperature", {{"T_min", 1.0}, {"T_max", 4.0}}}});
  const auto& k = std::get<KnudsenGas>(m);
  EXPECT_FALSE(k.uniform_temperature.has_value());
  EXPECT_DOUBLE_EQ(k.wall_temp({0.0, 0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(k.wall_temp({1.0, 0, 0}), 4.0);
}

TEST(Config, TimeGrids) {
  EXPECT_EQ(config::time_grid_from_json(io::json::array({0.0, 0.5, 2.0})), (std::vector<double>{0.0, 0.5, 2.0}));
  const auto t = config::time_grid_from_json({{"step", 0.5}, {"tmax", 2.0}});
  EXPECT_EQ(t, (std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0}));
  const auto c = config::time_grid_from_json({{"step", 0.5}, {"tmax", 5.0}, {"coarse_from", 1.0}, {"coarse_step", 2.0}});
  EXPECT_EQ(c, (std::vector<double>{0.0, 0.5, 1.0, 3.0, 5.0}));
  EXPECT_THROW(config::time_grid_from_json({{"step", 0.5}}), config::schema_error);
}

TEST(Config, SigmaSpec) {
  const auto s = config::SigmaSpec::from_json({{"kind", "strip_bump"}, {"center", 0.1}, {"half_width", 0.2}});
  const auto f = s.fn();
  EXPECT_DOUBLE_EQ(f({0.1, 0, 0}), 1.0);
  EXPECT_NEAR(f({0.95, 0, 0}), f({0.25, 0, 0}), 1e-14);  // periodic distance
  EXPECT_EQ(f({0.5, 0, 0}), 0.0);
  EXPECT_THROW(config::SigmaSpec::from_json({{"kind", "strip_bump"}, {"half_width", 0.7}}), invalid_input);
  EXPECT_THROW(config::SigmaSpec::from_json({{"kind", "gaussian"}}), config::schema_error);
}

TEST(Config, ReportsSerialise) {
  const auto j = config::to_json(doeblin_rate({0.5, 1.0}));
  EXPECT_EQ(j["kind"], "geometric");
  EXPECT_DOUBLE_EQ(j["C"].get<double>(), 2.0);
  EXPECT_TRUE(j["provenance"].contains("theorem"));
}
