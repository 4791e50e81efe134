#include <gtest/gtest.h>

#include <sstream>

#include "commands.hpp"
#include "run_config.hpp"
#include "support.hpp"

namespace coveropt {
namespace {

using testing::TempDir;
using testing::slurp;
using testing::write_file;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

constexpr const char* kFacilities =
    "id,name,lat,lon,state,zip,src_directory,src_doj,src_referral,src_manual,doj_recognized\n"
    "F1,Legal Aid,40,-75,PA,00001,1,0,0,0,1\n";
constexpr const char* kDemand =
    "zcta,lat,lon,weight,state\n"
    "00001,40,-75,10,PA\n"
    "00002,40,-74.9,20,PA\n"
    "00003,41,-75,30,PA\n";

// Arc along a parallel: 2R asin(cos(lat) sin(dlon / 2)).
double parallel_arc(double lat, double dlon) {
  const double r = M_PI / 180.0;
  return 2 * kEarthRadiusMiles * std::asin(std::cos(lat * r) * std::sin(dlon * r / 2));
}

class CliFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    write_file(dir_ / "facilities.csv", kFacilities);
    write_file(dir_ / "demand.csv", kDemand);
  }
  std::vector<std::string> inputs(const std::string& cmd, const std::string& out) {
    return {cmd, "--in-facilities", (dir_ / "facilities.csv").string(), "--in-demand",
            (dir_ / "demand.csv").string(), "--out-dir", (dir_ / out).string()};
  }
  std::vector<std::string> with(std::vector<std::string> base,
                                std::initializer_list<std::string> more) {
    base.insert(base.end(), more);
    return base;
  }
  TempDir dir_{"cli"};
};

TEST_F(CliFixture, CoverageMatchesHandComputedField) {
  const auto r = run_cli(inputs("coverage", "out"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto field = read_field_file(dir_ / "out" / "coverage_field.csv");
  ASSERT_EQ(field.records.size(), 3u);
  EXPECT_EQ(field.radius_miles, 12.0);

  EXPECT_EQ(field.records[0].distance_miles, 0.0);
  EXPECT_TRUE(field.records[0].covered);

  EXPECT_NEAR(*field.records[1].distance_miles, parallel_arc(40, 0.1), 1e-9);
  EXPECT_NEAR(*field.records[1].distance_miles, 5.29, 0.01);
  EXPECT_TRUE(field.records[1].covered);

  EXPECT_NEAR(*field.records[2].distance_miles, M_PI / 180 * kEarthRadiusMiles, 1e-9);
  EXPECT_FALSE(field.records[2].covered);
  for (const auto& rec : field.records) EXPECT_EQ(rec.facility_id, "F1");

  EXPECT_EQ(slurp(dir_ / "out" / "summary.csv"),
            "population,covered,underserved,radius_miles\n60,30,30,12\n");
  EXPECT_NE(r.out.find("covered=30"), std::string::npos);
}

TEST_F(CliFixture, RadiusFifteenPathway) {
  const auto r = run_cli(with(inputs("coverage", "out15"), {"--radius", "15"}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_field_file(dir_ / "out15" / "coverage_field.csv").radius_miles, 15.0);
}

TEST_F(CliFixture, AddOnSaturatedFixtureReportsZero) {
  const auto r = run_cli(with(inputs("add", "sat"), {"--radius", "100"}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("total_gain=0"), std::string::npos);
  const auto csv = slurp(dir_ / "sat" / "greedy.csv");
  EXPECT_EQ(csv.substr(csv.rfind(',') + 1), "0\n");
}

TEST_F(CliFixture, AddPicksUncoveredPoint) {
  const auto r = run_cli(inputs("add", "add"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(dir_ / "add" / "greedy.csv"),
            "rank,zcta,lat,lon,marginal_gain\n1,00003,41,-75,30\n");
}

TEST_F(CliFixture, SameSeedByteIdentical) {
  for (const auto* cmd : {"rearrange", "add"}) {
    const auto extra = {std::string("--seed"), std::string("5"), std::string("--samples"),
                        std::string("200"), std::string("--k"), std::string("2")};
    auto a = inputs(cmd, std::string(cmd) + "_a");
    a.insert(a.end(), extra);
    auto b = inputs(cmd, std::string(cmd) + "_b");
    b.insert(b.end(), extra);
    ASSERT_EQ(run_cli(a).code, 0);
    ASSERT_EQ(run_cli(b).code, 0);
    for (const auto& entry : std::filesystem::directory_iterator(dir_ / (std::string(cmd) + "_a"))) {
      const auto name = entry.path().filename();
      EXPECT_EQ(slurp(entry.path()), slurp(dir_ / (std::string(cmd) + "_b") / name)) << name;
    }
  }
}

TEST_F(CliFixture, UnknownFlagExitsTwo) {
  const auto r = run_cli(with(inputs("coverage", "x"), {"--bogus", "1"}));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("error code=2"), std::string::npos);
}

TEST_F(CliFixture, BadFlagValueExitsTwo) {
  EXPECT_EQ(run_cli(with(inputs("coverage", "x"), {"--radius", "-3"})).code, 2);
  EXPECT_EQ(run_cli(with(inputs("coverage", "x"), {"--scope", "galaxy"})).code, 2);
  EXPECT_EQ(run_cli(with(inputs("add", "x"), {"--k", "0"})).code, 2);
  EXPECT_EQ(run_cli({}).code, 2);
}

TEST_F(CliFixture, MissingFileExitsThree) {
  const auto r = run_cli({"coverage", "--in-facilities", (dir_ / "nope.csv").string(),
                          "--in-demand", (dir_ / "demand.csv").string(), "--out-dir",
                          (dir_ / "x").string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("nope.csv"), std::string::npos);
}

TEST_F(CliFixture, SchemaViolationExitsFour) {
  write_file(dir_ / "bad.csv", "zcta,lat,lon,weight,state\n00001,91,0,1,PA\n");
  const auto r = run_cli({"coverage", "--in-facilities", (dir_ / "facilities.csv").string(),
                          "--in-demand", (dir_ / "bad.csv").string(), "--out-dir",
                          (dir_ / "x").string()});
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.err.find("kind="), std::string::npos);
}

TEST_F(CliFixture, ConfigPrecedence) {
  write_file(dir_ / "run.conf", "# wide radius\nradius_miles = 100\n");
  auto cfg = with(inputs("coverage", "cfg"), {"--config", (dir_ / "run.conf").string()});
  ASSERT_EQ(run_cli(cfg).code, 0);
  EXPECT_EQ(read_field_file(dir_ / "cfg" / "coverage_field.csv").radius_miles, 100.0);

  auto both = with(inputs("coverage", "both"),
                   {"--config", (dir_ / "run.conf").string(), "--radius", "7"});
  ASSERT_EQ(run_cli(both).code, 0);
  EXPECT_EQ(read_field_file(dir_ / "both" / "coverage_field.csv").radius_miles, 7.0);

  ASSERT_EQ(run_cli(inputs("coverage", "def")).code, 0);
  EXPECT_EQ(read_field_file(dir_ / "def" / "coverage_field.csv").radius_miles, 12.0);

  write_file(dir_ / "bad.conf", "no_such_key = 1\n");
  EXPECT_EQ(run_cli(with(inputs("coverage", "x"), {"--config", (dir_ / "bad.conf").string()}))
                .code,
            2);
}

TEST(RunConfig, ApplySettings) {
  cli::RunConfig c;
  std::istringstream in(
      "radius_miles = 15\ncapacity=5000\n seed = 9 \nscope = state\ncandidates = all\n"
      "region_kind = cbsa\n# comment\n\n");
  cli::apply_config_stream(c, in);
  EXPECT_EQ(c.radius_miles, 15.0);
  EXPECT_EQ(c.capacity, 5000);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.scope, cli::ScopeKind::state);
  EXPECT_EQ(c.candidates, CandidatePolicy::all);
  EXPECT_EQ(c.region_kind, RegionKind::cbsa);
  EXPECT_THROW(cli::apply_setting(c, "capacity", "lots"), cli::UsageError);
  cli::RunConfig bad;
  bad.patience = 0;
  EXPECT_THROW(bad.validate(), cli::UsageError);
}

class CliSynth : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto r = run_cli({"synth", "--demand-points", "1500", "--facilities", "80", "--cities",
                            "12", "--seed", "4", "--out-dir", (dir_ / "data").string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  std::vector<std::string> inputs(const std::string& cmd, const std::string& out) {
    return {cmd,
            "--in-facilities",
            (dir_ / "data" / "facilities.csv").string(),
            "--in-demand",
            (dir_ / "data" / "demand.csv").string(),
            "--in-fragments",
            (dir_ / "data" / "fragments.csv").string(),
            "--out-dir",
            (dir_ / out).string(),
            "--samples",
            "300",
            "--patience",
            "50"};
  }
  TempDir dir_{"cli_synth"};
};

TEST_F(CliSynth, FullPipelineWritesEveryOutput) {
  ASSERT_EQ(run_cli(inputs("ingest", "ing")).code, 0);
  for (const auto* f : {"facilities.csv", "demand.csv", "fragments.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(dir_ / "ing" / f)) << f;
  }
  ASSERT_EQ(run_cli(inputs("coverage", "cov")).code, 0);
  for (const auto* f : {"coverage_field.csv", "coverage_field.geojson", "summary.csv",
                        "quantiles.csv", "region_stats.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(dir_ / "cov" / f)) << f;
  }
  auto under = inputs("underserved", "und");
  under.insert(under.end(), {"--region-kind", "cbsa"});
  const auto u = run_cli(under);
  ASSERT_EQ(u.code, 0) << u.err;
  EXPECT_TRUE(std::filesystem::exists(dir_ / "und" / "underserved.csv"));

  auto add_state = inputs("add", "adds");
  add_state.insert(add_state.end(), {"--scope", "state"});
  ASSERT_EQ(run_cli(add_state).code, 0);
  EXPECT_TRUE(std::filesystem::exists(dir_ / "adds" / "greedy_by_state.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir_ / "adds" / "state_gains.csv"));

  auto re_state = inputs("rearrange", "res");
  re_state.insert(re_state.end(), {"--scope", "state"});
  ASSERT_EQ(run_cli(re_state).code, 0);
  EXPECT_TRUE(std::filesystem::exists(dir_ / "res" / "plan_by_state.csv"));

  auto re_nat = inputs("rearrange", "ren");
  re_nat.insert(re_nat.end(), {"--capacity", "1000000000"});
  const auto rn = run_cli(re_nat);
  ASSERT_EQ(rn.code, 0) << rn.err;
  EXPECT_TRUE(std::filesystem::exists(dir_ / "ren" / "plan.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir_ / "ren" / "rearrange_summary.csv"));

  auto cmp = inputs("compare", "cmp");
  cmp.insert(cmp.end(), {"--plan", (dir_ / "ren" / "plan.csv").string()});
  const auto c = run_cli(cmp);
  ASSERT_EQ(c.code, 0) << c.err;
  const auto comparison = slurp(dir_ / "cmp" / "comparison.csv");
  EXPECT_EQ(comparison.rfind("region_id,current,optimal,delta\n", 0), 0u);
  EXPECT_TRUE(std::filesystem::exists(dir_ / "cmp" / "gains.csv"));
}

TEST_F(CliSynth, SynthIsSeedDeterministic) {
  ASSERT_EQ(run_cli({"synth", "--demand-points", "1500", "--facilities", "80", "--cities", "12",
                     "--seed", "4", "--out-dir", (dir_ / "again").string()})
                .code,
            0);
  for (const auto* f : {"demand.csv", "facilities.csv", "fragments.csv"}) {
    EXPECT_EQ(slurp(dir_ / "data" / f), slurp(dir_ / "again" / f)) << f;
  }
}

}  // namespace
}  // namespace coveropt
