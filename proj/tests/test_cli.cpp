#include "immunize/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

namespace {

namespace fs = std::filesystem;
using immunize::cli::kExitDataError;
using immunize::cli::kExitOk;
using immunize::cli::kExitUsage;

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = immunize::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class CliTest : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        dir_ = fs::temp_directory_path() / "immunize_cli_test";
        fs::remove_all(dir_);
        const auto r = cli({"synth", "--days", "30", "--seed", "7", "--out", dir_.string()});
        ASSERT_EQ(r.code, kExitOk) << r.err;
    }
    static void TearDownTestSuite() { fs::remove_all(dir_); }

    static std::string f(const std::string& name) { return (dir_ / name).string(); }

    static inline fs::path dir_;
    static inline const std::string kDate = "2007-06-04";
};

TEST_F(CliTest, SynthWritesFixtureSet) {
    for (const char* name : {"history.csv", "bonds.json", "backtest.json"}) {
        EXPECT_TRUE(fs::exists(dir_ / name)) << name;
    }
    const auto again = fs::temp_directory_path() / "immunize_cli_test_again";
    ASSERT_EQ(cli({"synth", "--days", "30", "--seed", "7", "--out", again.string()}).code, kExitOk);
    EXPECT_EQ(slurp(again / "history.csv"), slurp(dir_ / "history.csv"));
    fs::remove_all(again);
}

TEST_F(CliTest, AnalyzeEmitsTable) {
    const auto r = cli({"analyze", "--bonds", f("bonds.json"), "--curve", f("history.csv"), "--date", kDate});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_NE(r.out.find("id,maturity,yield,price,modified_duration,convexity"), std::string::npos);
    EXPECT_NE(r.out.find("\nB2,5.3,"), std::string::npos) << r.out;
}

TEST_F(CliTest, HedgeThenScenario) {
    const auto h = cli({"hedge", "--strategy", "quadratic", "--target", "B2", "--instruments", "B3,B1", "--curve",
                        f("history.csv"), "--bonds", f("bonds.json"), "--date", kDate});
    ASSERT_EQ(h.code, kExitOk) << h.err;
    const auto plan = nlohmann::json::parse(h.out);
    EXPECT_EQ(plan["strategy"], "quadratic");
    ASSERT_EQ(plan["legs"].size(), 2u);
    EXPECT_LT(plan["legs"][0]["amount"].get<double>(), 0.0);
    std::ofstream(f("plan.json")) << h.out;

    const auto s = cli({"scenario", "--plan", f("plan.json"), "--curve", f("history.csv"), "--bonds",
                        f("bonds.json"), "--date", kDate, "--shock", "a=0.001"});
    ASSERT_EQ(s.code, kExitOk) << s.err;
    const auto res = nlohmann::json::parse(s.out);
    EXPECT_LT(std::abs(res["hedged_pnl"].get<double>()), 0.05 * std::abs(res["unhedged_pnl"].get<double>()));

    const auto sweep = cli({"scenario", "--plan", f("plan.json"), "--curve", f("history.csv"), "--bonds",
                            f("bonds.json"), "--date", kDate, "--shock", "a=0.002", "--sweep", "4"});
    ASSERT_EQ(sweep.code, kExitOk) << sweep.err;
    std::istringstream lines(sweep.out);
    std::string line, last;
    int n = 0;
    while (std::getline(lines, line)) {
        ++n;
        last = line;
    }
    EXPECT_EQ(n, 5);
    EXPECT_NEAR(nlohmann::json::parse(last)["loglog_slope"].get<double>(), 2.0, 0.3);
}

TEST_F(CliTest, HedgePortfolioTarget) {
    const auto r = cli({"hedge", "--strategy", "duration", "--target", "B2:60,B4:40", "--instruments", "B1",
                        "--curve", f("history.csv"), "--bonds", f("bonds.json"), "--date", kDate});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const auto plan = nlohmann::json::parse(r.out);
    EXPECT_EQ(plan["target"]["id"], "B2+B4");
    EXPECT_EQ(plan["target"]["amount"].get<double>(), 100.0);
}

TEST_F(CliTest, BacktestAndStats) {
    const auto out = dir_ / "report";
    const auto r = cli({"backtest", "--history", f("history.csv"), "--bonds", f("bonds.json"), "--config",
                        f("backtest.json"), "--out", out.string()});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_TRUE(fs::exists(out / "summary.csv"));
    EXPECT_TRUE(fs::exists(out / "pnl_cubic.csv"));
    const auto s = cli({"stats", "--history", f("history.csv"), "--diff"});
    ASSERT_EQ(s.code, kExitOk) << s.err;
    EXPECT_NE(s.out.find("tenor_0.5,"), std::string::npos);
}

TEST_F(CliTest, DataErrorsExitTwo) {
    const auto unknown = cli({"hedge", "--strategy", "duration", "--target", "B9", "--instruments", "B1",
                              "--curve", f("history.csv"), "--bonds", f("bonds.json"), "--date", kDate});
    EXPECT_EQ(unknown.code, kExitDataError);
    EXPECT_NE(unknown.err.find("B9"), std::string::npos);

    const auto no_date = cli({"hedge", "--strategy", "duration", "--target", "B2", "--instruments", "B1",
                              "--curve", f("history.csv"), "--bonds", f("bonds.json"), "--date", "1999-01-01"});
    EXPECT_EQ(no_date.code, kExitDataError);

    // B2 at 5.3 lies below the [6.1, 7.6] span of B4 and B1.
    const auto extrap = cli({"hedge", "--strategy", "quadratic", "--target", "B2", "--instruments", "B4,B1",
                             "--curve", f("history.csv"), "--bonds", f("bonds.json"), "--date", kDate});
    EXPECT_EQ(extrap.code, kExitDataError);
    EXPECT_EQ(cli({"hedge", "--strategy", "quadratic", "--target", "B2", "--instruments", "B4,B1", "--curve",
                   f("history.csv"), "--bonds", f("bonds.json"), "--date", kDate, "--allow-extrapolation"})
                  .code,
              kExitOk);

    std::ofstream(f("bad.csv")) << "date,tenor_1,tenor_2\n2007-06-04,0.02,oops\n";
    const auto bad = cli({"stats", "--history", f("bad.csv")});
    EXPECT_EQ(bad.code, kExitDataError);
    EXPECT_NE(bad.err.find(":2"), std::string::npos) << bad.err;
}

TEST_F(CliTest, UsageErrorsExitOne) {
    EXPECT_EQ(cli({}).code, kExitUsage);
    EXPECT_EQ(cli({"stats", "--history", f("history.csv"), "--frobnicate"}).code, kExitUsage);
    EXPECT_EQ(cli({"hedge", "--strategy", "butterfly", "--target", "B2", "--instruments", "B1", "--curve",
                   f("history.csv"), "--bonds", f("bonds.json")})
                  .code,
              kExitUsage);
    EXPECT_EQ(cli({"analyze", "--bonds", f("missing.json"), "--curve", f("history.csv")}).code, kExitUsage);
    EXPECT_EQ(cli({"--help"}).code, kExitOk);
}

}  // namespace
