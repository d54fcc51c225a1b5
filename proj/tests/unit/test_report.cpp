#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>

#include "diffu/common/error.hpp"
#include "diffu/report/config.hpp"
#include "diffu/report/csv.hpp"
#include "diffu/report/json_io.hpp"
#include "diffu/report/manifest.hpp"
#include "diffu/report/svg.hpp"

using namespace diffu;
using namespace diffu::report;

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("diffu_report_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Csv, RoundTripIsExact) {
  CsvTable t;
  t.header = {"a", "b", "c"};
  t.rows = {{0.1, 1.0 / 3.0, -2.5e-300}, {1e300, std::nextafter(1.0, 2.0), 0.0}};
  const auto back = parse_csv(to_csv_string(t), true);
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.rows, t.rows);
  EXPECT_EQ(back.column("b"), 1);
  EXPECT_THROW(back.column("z"), ValidationError);
  EXPECT_EQ(back.to_matrix()(1, 0), 1e300);
}

TEST(Csv, FormatDoubleRoundTrips) {
  for (double v : {0.1, 2.0 / 3.0, 1e-17, 123456789.125, -0.0}) EXPECT_EQ(std::stod(format_double(v)), v);
  EXPECT_EQ(format_double(0.5), "0.5");
}

TEST(Csv, Errors) {
  EXPECT_THROW(parse_csv("a,b\n1,2,3\n", true), ValidationError);
  EXPECT_THROW(parse_csv("a,b\n1,x\n", true), ValidationError);
  EXPECT_THROW(read_csv("/nonexistent/file.csv", true), Error);
  const auto t = parse_csv("1,2\n3,4\n", false);
  EXPECT_EQ(t.rows.size(), 2u);
  EXPECT_TRUE(t.header.empty());
}

TEST(Json, WriteReadRoundTrip) {
  const auto dir = scratch("json");
  const nlohmann::json j = {{"x", 0.1}, {"third", 1.0 / 3.0}, {"list", {1, 2, 3}}};
  write_json((dir / "a.json").string(), j);
  EXPECT_EQ(read_json((dir / "a.json").string()), j);
  const std::string text = read_text_file((dir / "a.json").string());
  EXPECT_EQ(text.back(), '\n');
  fs::remove_all(dir);
}

TEST(Svg, WellFormed) {
  Series s{"fi <curve>", {0.01, 0.1, 1.0, 10.0}, {5.0, 2.0, 0.5, 0.05}};
  Series gap{"gappy", {1, 2, 3}, {1.0, std::numeric_limits<double>::quiet_NaN(), 2.0}};
  ChartOptions opt;
  opt.title = "A & B";
  const std::string svg = render_svg({s, gap}, opt);
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
  EXPECT_NE(svg.find("<svg xmlns"), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("A &amp; B"), std::string::npos);
  EXPECT_NE(svg.find("fi &lt;curve&gt;"), std::string::npos);
  EXPECT_EQ(svg.find("nan"), std::string::npos);
  EXPECT_EQ(svg.find("inf"), std::string::npos);
  int open = 0, close = 0;
  for (std::size_t p = svg.find('<'); p != std::string::npos; p = svg.find('<', p + 1)) ++open;
  for (std::size_t p = svg.find('>'); p != std::string::npos; p = svg.find('>', p + 1)) ++close;
  EXPECT_EQ(open, close);
  EXPECT_EQ(xml_escape("\"'"), "&quot;&apos;");
}

TEST(Svg, LogAxisRule) {
  EXPECT_TRUE(wants_log_axis({0.01, 1.0, 5.0}));
  EXPECT_FALSE(wants_log_axis({1.0, 50.0}));
  EXPECT_FALSE(wants_log_axis({-1.0, 1000.0}));
  EXPECT_FALSE(wants_log_axis({0.0, 1000.0}));
}

TEST(Config, EmptyGivesDefaults) {
  unsetenv("DIFFU_OUT_DIR");
  const auto s = resolve_config(parse_config_text(""));
  EXPECT_EQ(s.n, 1000u);
  EXPECT_EQ(s.m_probes, 50u);
  EXPECT_EQ(s.grid().size(), 64u);
  EXPECT_EQ(s.out, "out");
  EXPECT_EQ(s.fir_method, "jvp");
}

TEST(Config, PrecedenceFlagsOverFileOverDefaults) {
  unsetenv("DIFFU_OUT_DIR");
  const auto file = parse_config_text("# comment\n n = 300 \nm_probes=7 # trailing\n\nseed = 4\n");
  const auto s = resolve_config(file, {{"n", "500"}});
  EXPECT_EQ(s.n, 500u);
  EXPECT_EQ(s.m_probes, 7u);
  EXPECT_EQ(s.seed, 4u);
  const auto large = resolve_config(parse_config_text("budget = large-model\n"));
  EXPECT_EQ(large.n, 200u);
  EXPECT_EQ(large.m_probes, 20u);
  const auto large_n = resolve_config(parse_config_text("budget = large-model\nn = 50\n"));
  EXPECT_EQ(large_n.n, 50u);
}

TEST(Config, OutDirFromEnvironment) {
  setenv("DIFFU_OUT_DIR", "/tmp/somewhere", 1);
  EXPECT_EQ(resolve_config({}).out, "/tmp/somewhere");
  EXPECT_EQ(resolve_config({}, {{"out", "here"}}).out, "here");
  unsetenv("DIFFU_OUT_DIR");
}

TEST(Config, MalformedLineNamesLine) {
  try {
    parse_config_text("n = 5\njunk line\n", "cfg.txt");
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("cfg.txt:2"), std::string::npos) << e.what();
  }
}

TEST(Config, UnknownKeyListsValidKeys) {
  try {
    parse_config_text("bogus = 1\n");
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("bogus"), std::string::npos);
    EXPECT_NE(msg.find("m_probes"), std::string::npos);
  }
  EXPECT_THROW(parse_config_text("n = many\n"), ValidationError);
  EXPECT_THROW(parse_config_text("probe = uniform\n"), ValidationError);
  EXPECT_THROW(resolve_config({}, {{"spacing", "custom"}}), ValidationError);
}

TEST(Config, GridSelection) {
  auto s = resolve_config({}, {{"taus", "0.1, 0.5,2"}});
  EXPECT_EQ(s.grid().values, (std::vector<double>{0.1, 0.5, 2.0}));
  s = resolve_config({}, {{"spacing", "linear"}, {"sqrt_tau_min", "1"}, {"sqrt_tau_max", "2"}, {"grid_points", "4"}});
  EXPECT_EQ(s.grid().values, (std::vector<double>{1.0, 2.0, 3.0, 4.0}));
  EXPECT_THROW(resolve_config({}, {{"taus", "1,0.5"}}), ValidationError);
}

TEST(Manifest, Sha256KnownValues) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Manifest, WriteAndVerify) {
  const auto dir = scratch("manifest");
  write_text_file((dir / "b.csv").string(), "x\n1\n");
  write_text_file((dir / "a.txt").string(), "hello");
  RunManifest m;
  m.command_line = "diffu test";
  m.config = {{"n", 3}};
  m.seed = 9;
  write_manifest(dir.string(), m, {"b.csv", "a.txt"});
  const auto back = RunManifest::from_json(read_json((dir / "manifest.json").string()));
  ASSERT_EQ(back.files.size(), 2u);
  EXPECT_EQ(back.files[0].path, "a.txt");
  EXPECT_EQ(back.files[0].sha256, sha256_hex("hello"));
  EXPECT_EQ(back.files[0].bytes, 5u);
  EXPECT_EQ(back.seed, 9u);
  EXPECT_EQ(back.version, kArtifactVersion);
  EXPECT_TRUE(verify_manifest(dir.string()).empty());
  write_text_file((dir / "a.txt").string(), "tampered");
  EXPECT_EQ(verify_manifest(dir.string()), std::vector<std::string>{"a.txt"});
  fs::remove_all(dir);
}

TEST(Files, UnwritablePathThrows) {
  EXPECT_THROW(write_text_file("/nonexistent/dir/x.txt", "x"), Error);
}
