#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "monoembed/app/commands.hpp"

using namespace monoembed;
using namespace monoembed::app;

namespace {

RunConfig from(std::initializer_list<std::pair<const char*, const char*>> kv) {
  Settings s;
  for (auto [k, v] : kv) s.set(k, v, "test");
  return resolve(s);
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(ExitCode, TotalOverVerdicts) {
  EXPECT_EQ(exit_code(Verdict::Kind::Certified), 0);
  EXPECT_EQ(exit_code(Verdict::Kind::PseudoPairsFound), 2);
  EXPECT_EQ(exit_code(Verdict::Kind::PseudoCyclesFound), 2);
  EXPECT_EQ(exit_code(Verdict::Kind::Inconclusive), 3);
}

TEST(Analyze, RickerCertified) {
  RunConfig c = from({{"model.name", "ricker"}, {"model.r", "0.5"}, {"model.h", "1"},
                      {"model.delay", "3"}, {"certify.samples", "20"}});
  std::ostringstream os;
  EXPECT_EQ(cmd_analyze(c, os), 0) << os.str();
  EXPECT_NE(os.str().find("attractor: 1.54"), std::string::npos) << os.str();
}

TEST(Analyze, RationalPseudoPairsWithJsonReport) {
  const auto path = (std::filesystem::temp_directory_path() / "monoembed_rational.json").string();
  RunConfig c = from({{"model.name", "rational"}, {"model.a", "1,3,6,1"}, {"model.b", "1,2,4,30"},
                      {"scan.region", "0,2"}, {"output.out", path.c_str()}});
  std::ostringstream os;
  EXPECT_EQ(cmd_analyze(c, os), 2) << os.str();
  EXPECT_NE(os.str().find("0.08333333"), std::string::npos);
  const auto j = nlohmann::json::parse(slurp(path));
  EXPECT_EQ(j["command"], "analyze");
  EXPECT_EQ(j["verdict"]["kind"], std::string(to_string(Verdict::Kind::PseudoPairsFound)));
  EXPECT_EQ(j["verdict"]["exit_code"], 2);
  EXPECT_NEAR(j["rational"]["equilibrium"].get<double>(), 1.0 / 3.0, 1e-12);
  EXPECT_EQ(j["pseudo_pairs"].size(), 2u);
  EXPECT_EQ(j["pattern"]["signs"], "+,+,-");
}

TEST(Analyze, CsvReportListsPairs) {
  const auto path = (std::filesystem::temp_directory_path() / "monoembed_rational.csv").string();
  RunConfig c = from({{"model.name", "rational"}, {"model.a", "1,3,6,1"}, {"model.b", "1,2,4,30"},
                      {"scan.region", "0,2"}, {"output.out", path.c_str()},
                      {"output.format", "csv"}});
  std::ostringstream os;
  cmd_analyze(c, os);
  const auto rows = lines(slurp(path));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], "x,y,kind,residual");
}

TEST(Analyze, MixedRationalIsAConfigError) {
  // D(1,0) = 2 - 1 > 0 but D(1,2) = 0.5 - 1 < 0.
  RunConfig c = from({{"model.name", "rational"}, {"model.a", "1,1,1"}, {"model.b", "2,1,0.5"}});
  std::ostringstream os;
  EXPECT_THROW(cmd_analyze(c, os), ConfigError);
}

TEST(Analyze, PeriodicExampleTwoFindsPseudoCycles) {
  RunConfig c = from({{"model.expr0", "4*x1/(1 + x3^2) + 1.8"},
                      {"model.expr1", "4*x1/(1 + x3^2) + 2.3"},
                      {"model.arity", "3"}, {"model.pattern", "++-"}, {"scan.region", "0,12"},
                      {"certify.seed", "7"}});
  std::ostringstream os;
  EXPECT_EQ(cmd_analyze(c, os), 2) << os.str();
  EXPECT_NE(os.str().find("pseudo"), std::string::npos);
}

TEST(Cycles, SingleMapFallsBackToAnalyze) {
  RunConfig c = from({{"model.name", "ricker"}, {"certify.samples", "10"}});
  std::ostringstream a, b;
  EXPECT_EQ(cmd_cycles(c, a), cmd_analyze(c, b));
  EXPECT_EQ(a.str(), b.str());
}

TEST(Iterate, SpiralRows) {
  RunConfig c = from({{"model.expr", "1 + x1 - x2"}, {"model.arity", "2"}, {"model.pattern", "+-"},
                      {"iterate.x0", "1,0"}, {"iterate.steps", "6"}});
  std::ostringstream os, err;
  ASSERT_EQ(cmd_iterate(c, os, err), 0) << err.str();
  const auto rows = lines(os.str());
  ASSERT_EQ(rows.size(), 7u);
  EXPECT_EQ(rows[0], "n,x");
  // 1, 0 -> 2, 2, 1, 0, 0, 1: period six.
  EXPECT_EQ(rows[1], "1,2");
  EXPECT_EQ(rows[2], "2,2");
  EXPECT_EQ(rows[3], "3,1");
  EXPECT_EQ(rows[4], "4,0");
  EXPECT_EQ(rows[5], "5,0");
  EXPECT_EQ(rows[6], "6,1");
}

TEST(Iterate, EquilibriumIsConstant) {
  RunConfig c = from({{"model.name", "rational"}, {"model.a", "1,3,6,1"}, {"model.b", "1,2,4,30"},
                      {"iterate.steps", "5"}});
  c.x0 = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  std::ostringstream os, err;
  ASSERT_EQ(cmd_iterate(c, os, err), 0);
  const auto rows = lines(os.str());
  ASSERT_EQ(rows.size(), 6u);
  for (std::size_t n = 1; n < rows.size(); ++n) {
    EXPECT_NEAR(std::stod(rows[n].substr(rows[n].find(',') + 1)), 1.0 / 3.0, 1e-15);
  }
}

TEST(Iterate, EmbeddedColumns) {
  RunConfig c = from({{"model.name", "ricker"}, {"model.delay", "1"}, {"iterate.x0", "1,2"},
                      {"iterate.steps", "30"}, {"iterate.embedded", "true"}});
  std::ostringstream os, err;
  ASSERT_EQ(cmd_iterate(c, os, err), 0) << err.str();
  const auto rows = lines(os.str());
  EXPECT_EQ(rows[0], "n,x,p1,p2,p3,p4,q1,q2,q3,q4");
  EXPECT_EQ(rows.size(), 31u);
}

TEST(Iterate, PeriodicTailAlternates) {
  RunConfig c = from({{"model.expr0", "4*x1/(1 + x3) + 1"}, {"model.expr1", "4*x1/(1 + x3) + 3"},
                      {"model.arity", "3"}, {"model.pattern", "++-"}, {"iterate.x0", "5,5,5"},
                      {"iterate.steps", "400"}});
  std::ostringstream os, err;
  ASSERT_EQ(cmd_iterate(c, os, err), 0);
  const auto rows = lines(os.str());
  auto value = [&](std::size_t n) { return std::stod(rows[n].substr(rows[n].find(',') + 1)); };
  const double a = value(399);
  const double b = value(400);
  const double hi = 3.0 + 4.0 * std::sqrt(6.0) / 3.0;
  const double lo = 2.0 + std::sqrt(6.0);
  EXPECT_NEAR(std::max(a, b), hi, 1e-3);
  EXPECT_NEAR(std::min(a, b), lo, 1e-3);
}

TEST(Iterate, DomainFailureStopsWithGoodRows) {
  RunConfig c = from({{"model.expr", "ln(x1 - 1)"}, {"model.arity", "1"}, {"model.pattern", "+"},
                      {"iterate.x0", "3"}, {"iterate.steps", "10"}});
  std::ostringstream os, err;
  EXPECT_EQ(cmd_iterate(c, os, err), 1);
  EXPECT_NE(err.str().find("good rows"), std::string::npos);
  EXPECT_EQ(lines(os.str()).size(), 2u);  // header and ln 2
}

TEST(Sweep, OneCell) {
  RunConfig c = from({{"model.name", "ricker"}, {"sweep.p1_steps", "1"}, {"sweep.p2_steps", "1"},
                      {"sweep.p1_range", "0.5,1.5"}, {"sweep.p2_range", "0.6,1.0"}});
  const auto r = run_sweep(c);
  std::ostringstream os;
  write_cells_csv(os, r);
  const auto rows = lines(os.str());
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1], "1,0.80000000000000004,2");
  EXPECT_TRUE(r.boundary.empty());
}

TEST(Sweep, UnknownParameterRejected) {
  RunConfig c = from({{"model.name", "ricker"}, {"sweep.p1", "zeta"}});
  EXPECT_THROW(run_sweep(c), ConfigError);
}

TEST(Sweep, DeterministicAcrossJobs) {
  RunConfig c = from({{"model.name", "ricker"}, {"sweep.p1_steps", "6"}, {"sweep.p2_steps", "6"},
                      {"scan.grid", "32"}});
  c.jobs = 1;
  std::ostringstream a, b;
  write_cells_csv(a, run_sweep(c));
  c.jobs = 4;
  write_cells_csv(b, run_sweep(c));
  EXPECT_EQ(a.str(), b.str());
}

TEST(Sweep, LocalBoundaryTracksR1) {
  RunConfig c = from({{"model.name", "ricker"}, {"sweep.analysis", "local"},
                      {"sweep.p1_steps", "5"}, {"sweep.p2_steps", "100"},
                      {"sweep.p2_range", "0.1,7"}});
  const auto r = run_sweep(c);
  ASSERT_EQ(r.boundary.size(), 5u);
  const double cell = (7.0 - 0.1) / 99.0;
  for (const auto& [h, rb] : r.boundary) {
    EXPECT_NEAR(rb, ricker_thresholds(h).r1, cell) << "h = " << h;
  }
}

TEST(Sweep, SvgIsSelfContained) {
  RunConfig c = from({{"model.name", "ricker"}, {"sweep.p1_steps", "3"}, {"sweep.p2_steps", "3"}});
  std::ostringstream os;
  write_sweep_svg(os, c, run_sweep(c));
  const std::string svg = os.str();
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
  EXPECT_EQ(svg.substr(svg.size() - 7), "</svg>\n");
  EXPECT_EQ(svg.find("href"), std::string::npos);
  EXPECT_EQ(svg.find("http", svg.find("xmlns") + 40), std::string::npos);
  EXPECT_NE(svg.find("r_inf(h)"), std::string::npos);
}
