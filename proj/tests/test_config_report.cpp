#include "vlab/config.hpp"
#include "vlab/experiments.hpp"
#include "vlab/report.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace vlab;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("vlab-test-" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST(Config, ReadsTypedValues) {
  const Config c = Config::from_string(
      "; comment\n[experiment]\nkind = forward-stokes\nresolution = 8,32\n"
      "[run]\nn = 4\nx = 2.5\nflag = yes\nlist = 1, 2,3\n");
  EXPECT_EQ(c.get_string("experiment.kind", ""), "forward-stokes");
  EXPECT_EQ(c.get_int("run.n", 0), 4);
  EXPECT_DOUBLE_EQ(c.get_double("run.x", 0.0), 2.5);
  EXPECT_TRUE(c.get_bool("run.flag", false));
  EXPECT_EQ(c.get_list("run.list", {}), (std::vector<double>{1, 2, 3}));
  EXPECT_DOUBLE_EQ(c.get_double("run.missing", 7.0), 7.0);
  const Resolution r = get_resolution(c, "experiment.resolution", {});
  EXPECT_EQ(r.radial, 8);
  EXPECT_EQ(r.angular, 32);
  EXPECT_NO_THROW(c.check_consumed());
}

TEST(Config, UnknownKeyIsReported) {
  const Config c = Config::from_string("[experiment]\nkind = bi-dbar\ntypo = 1\n");
  c.get_string("experiment.kind", "");
  try {
    c.check_consumed();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("experiment.typo"), std::string::npos);
  }
}

TEST(Config, BadValuesAreConfigErrors) {
  const Config c = Config::from_string("[a]\nx = abc\nn = 2.5\nb = maybe\nl = 1,,2\n");
  EXPECT_THROW(c.get_double("a.x", 0.0), ConfigError);
  EXPECT_THROW(c.get_int("a.n", 0), ConfigError);
  EXPECT_THROW(c.get_bool("a.b", false), ConfigError);
  EXPECT_THROW(c.get_list("a.l", {}), ConfigError);
  EXPECT_THROW(Config::from_string("[a\nx = 1\n"), ConfigError);
}

TEST(Config, ResolutionBounds) {
  EXPECT_THROW(parse_resolution("16"), ConfigError);
  EXPECT_THROW(parse_resolution("3,16"), ConfigError);
  EXPECT_THROW(parse_resolution("8,33"), ConfigError);
  EXPECT_THROW(parse_resolution("x,y"), ConfigError);
  EXPECT_EQ(parse_resolution("4,8").radial, 4);
}

TEST(Config, ViscosityFamilies) {
  const Config c = Config::from_string(
      "[a]\nfamily = quadratic\na = 2\n[b]\nfamily = gaussian\nc = 0.5\nx0 = 0.1\n[bad]\nfamily = constant\nvalue = -1\n"
      "[odd]\nfamily = wavy\n");
  const ViscositySpec a = get_viscosity(c, "a", {});
  EXPECT_DOUBLE_EQ(a(0.5, 0.3), 1.5);
  EXPECT_EQ(a.tag(), "quadratic(a=2)");
  const ViscositySpec b = get_viscosity(c, "b", {});
  EXPECT_DOUBLE_EQ(b(0.1, 0.0), 1.5);
  EXPECT_THROW(get_viscosity(c, "bad", {}), ConfigError);
  EXPECT_THROW(get_viscosity(c, "odd", {}), ConfigError);
  ViscositySpec bump{"bump"};
  EXPECT_DOUBLE_EQ(bump(0.0, 0.0), 1.3);
  EXPECT_DOUBLE_EQ(bump(1.0, 0.0), 1.0);
}

TEST(Report, IndicatorOperators) {
  EXPECT_TRUE((Indicator{"a", 1.0, "<", 2.0}).passed());
  EXPECT_FALSE((Indicator{"a", 2.0, "<", 2.0}).passed());
  EXPECT_TRUE((Indicator{"a", 2.0, "<=", 2.0}).passed());
  EXPECT_TRUE((Indicator{"a", 1.5, "range", 1.0, 2.0}).passed());
  EXPECT_FALSE((Indicator{"a", NAN, ">", 0.0}).passed());
  EXPECT_TRUE((Indicator{"a", 1.0, "true", 0.0}).passed());
  Report r;
  EXPECT_FALSE(r.passed());
  r.check("x", 1.0, "<", 2.0);
  r.check("y", 3.0, "<", 2.0);
  EXPECT_FALSE(r.passed());
  EXPECT_EQ(r.headline().rfind("y = 3", 0), 0u);
}

TEST(Report, EmptyTableWritesHeaderOnly) {
  const auto dir = scratch_dir("csv");
  std::filesystem::create_directories(dir);
  write_csv(Table{"empty", {"a", "b"}, {}}, dir / "empty.csv");
  EXPECT_EQ(slurp(dir / "empty.csv"), "a,b\n");
}

TEST(Report, SummaryIsDeterministic) {
  Report r;
  r.kind = "k";
  r.check("err", 1e-3, "<", 1e-2);
  r.check("wall", 0.123, ">=", 0.0).timing = true;
  r.scalars["s"] = 2.0;
  const auto a = summary_json(r, {{"x", "1"}}, false).dump();
  r.indicators[1].value = 9.0;
  const auto b = summary_json(r, {{"x", "1"}}, false).dump();
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.find("0.123"), std::string::npos);
  EXPECT_NE(a.find("vlab-report/1"), std::string::npos);
}

TEST(Report, SvgHasOnePolylinePerSeries) {
  Plot p;
  p.name = "p";
  p.title = "a < b";
  p.series.push_back({"one", {1, 10, 100}, {1, 0.1, 0.01}});
  p.series.push_back({"two", {1, 10}, {2, 0.5}, true});
  const std::string svg = render_svg(p);
  std::size_t n = 0;
  for (auto pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) ++n;
  EXPECT_EQ(n, 2u);
  EXPECT_NE(svg.find("a &lt; b"), std::string::npos);
  EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos);
}

TEST(Report, WriteReportLaysOutFiles) {
  const auto dir = scratch_dir("report");
  Report r;
  r.kind = "k";
  r.check("err", 1.0, "<", 2.0);
  r.tables.push_back(Table{"t", {"a"}, {{"1"}}});
  Plot p;
  p.name = "plot";
  r.plots.push_back(p);
  write_report(r, {}, dir);
  for (const char* f : {"summary.json", "timing.json", "t.csv", "plot.svg"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
}

TEST(Experiments, DispatchRejectsUnknownKind) {
  EXPECT_THROW(run_experiment(Config::from_string("[experiment]\nkind = nope\n")), ConfigError);
  EXPECT_THROW(run_experiment(Config::from_string("[experiment]\nseed = 1\n")), ConfigError);
}

TEST(Experiments, SmallForwardStokesRunPasses) {
  const Config c = Config::from_string("[experiment]\nkind = forward-stokes\nresolution = 8,32\n");
  EXPECT_TRUE(run_experiment(c).passed());
}
