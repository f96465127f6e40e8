#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "cpmfit/app/app.hpp"
#include "cpmfit/dataio.hpp"
#include "cpmfit/fit.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;

namespace cpmfit {
namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("cpmfit_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        const std::vector<double> speeds{150.0, 200.0, 250.0, 300.0};
        spit(map_path(), write_map_csv(testing::law_map(testing::quartic_law, speeds, 8)));
        spit(config_path(), R"({"init": "none", "local_max_iters": 800})");
        ::unsetenv("CPMFIT_SEED");
    }
    void TearDown() override {
        fs::remove_all(dir_);
        ::unsetenv("CPMFIT_SEED");
    }

    fs::path map_path() const { return dir_ / "map.csv"; }
    fs::path config_path() const { return dir_ / "fast.json"; }
    fs::path out(const std::string& name) const { return dir_ / name; }

    int run(std::vector<std::string> args) {
        out_.str("");
        err_.str("");
        return app::run(args, out_, err_);
    }

    fs::path dir_;
    std::ostringstream out_;
    std::ostringstream err_;
};

TEST_F(CliTest, FitWritesArtifacts) {
    const int code = run({"fit", map_path().string(), "--config", config_path().string(), "--out", out("fit").string()});
    ASSERT_EQ(code, app::kSuccess) << err_.str();
    for (const char* name : {"fit_results.csv", "fit_results.json", "beta_table.csv", "fitted_curves.svg",
                             "scale.json"}) {
        EXPECT_TRUE(fs::exists(out("fit") / name)) << name;
    }
    const auto doc = nlohmann::json::parse(slurp(out("fit") / "fit_results.json"));
    EXPECT_EQ(doc.size(), 4u);
}

TEST_F(CliTest, FitWithDegenerateLineIsPartial) {
    std::string text = slurp(map_path());
    text += "400,0.1,2\n400,0.2,2\n400,0.3,2\n";
    spit(map_path(), text);
    const int code = run({"fit", map_path().string(), "--config", config_path().string(), "--out", out("fit").string()});
    EXPECT_EQ(code, app::kPartial);
    EXPECT_NE(slurp(out("fit") / "fit_results.csv").find("FAILED"), std::string::npos);
}

TEST_F(CliTest, MissingInputIsHardError) {
    EXPECT_EQ(run({"fit", (dir_ / "nope.csv").string(), "--out", out("x").string()}), app::kHardError);
    EXPECT_FALSE(err_.str().empty());
    EXPECT_EQ(run({}), app::kHardError);
    EXPECT_EQ(run({"fit", map_path().string(), "--metric", "bogus"}), app::kHardError);
}

TEST_F(CliTest, MalformedInputNamesLine) {
    spit(map_path(), "speed,m_dot,pi\n300,1,2\n300,abc,2\n");
    EXPECT_EQ(run({"fit", map_path().string(), "--out", out("x").string()}), app::kHardError);
    EXPECT_NE(err_.str().find("3"), std::string::npos);
}

TEST_F(CliTest, CrossvalNeedsThreeLines) {
    const std::vector<double> speeds{150.0, 200.0};
    spit(map_path(), write_map_csv(testing::law_map(testing::quartic_law, speeds, 8)));
    EXPECT_EQ(run({"crossval", map_path().string(), "--config", config_path().string(), "--out", out("cv").string()}),
              app::kHardError);
}

TEST_F(CliTest, CrossvalIsDeterministic) {
    const std::vector<std::string> base{"crossval", map_path().string(), "--config", config_path().string(),
                                        "--seed", "7"};
    auto a = base;
    a.insert(a.end(), {"--out", out("a").string()});
    auto b = base;
    b.insert(b.end(), {"--out", out("b").string()});
    const int ca = run(a);
    ASSERT_NE(ca, app::kHardError) << err_.str();
    EXPECT_EQ(run(b), ca);
    for (const char* name : {"loo_report.csv", "loo_report.json", "summary.csv", "summary.json", "beta_table.csv"}) {
        EXPECT_EQ(slurp(out("a") / name), slurp(out("b") / name)) << name;
    }
    EXPECT_TRUE(fs::exists(out("a") / "loo_interpolation.svg"));
    EXPECT_TRUE(fs::exists(out("a") / "loo_extrapolation.svg"));
    const auto doc = nlohmann::json::parse(slurp(out("a") / "loo_report.json"));
    EXPECT_EQ(doc.size(), 4u);
}

TEST_F(CliTest, PredictHoldoutAndPure) {
    ASSERT_EQ(run({"predict", map_path().string(), "--config", config_path().string(), "--target", "200", "--out",
                   out("hold").string()}),
              app::kSuccess)
        << err_.str();
    const auto hold = nlohmann::json::parse(slurp(out("hold") / "prediction.json"));
    ASSERT_EQ(hold.size(), 1u);
    EXPECT_EQ(hold[0]["kind"], "INTERPOLATION");
    EXPECT_TRUE(fs::exists(out("hold") / "predicted_curve.csv"));

    ASSERT_EQ(run({"predict", map_path().string(), "--config", config_path().string(), "--target", "225", "--out",
                   out("pure").string()}),
              app::kSuccess)
        << err_.str();
    const auto pure = nlohmann::json::parse(slurp(out("pure") / "prediction.json"));
    EXPECT_EQ(pure["no_ground_truth"], true);
    EXPECT_EQ(pure["kind"], "INTERPOLATION");
    EXPECT_NE(slurp(out("pure") / "prediction.csv").find("no_ground_truth"), std::string::npos);

    EXPECT_EQ(run({"predict", map_path().string(), "--out", out("none").string()}), app::kHardError);
}

TEST_F(CliTest, BenchSingleRepeatLeavesSdUndefined) {
    spit(config_path(), R"({"de_population": 10, "de_max_iters": 20, "pso_particles": 10, "pso_iters": 20,
                            "local_max_iters": 400, "bench_baseline": false})");
    const int code = run({"bench", map_path().string(), "--config", config_path().string(), "--repeats", "1",
                          "--out", out("bench").string()});
    ASSERT_NE(code, app::kHardError) << err_.str();
    const std::string summary = slurp(out("bench") / "bench_summary.csv");
    EXPECT_NE(summary.find("sd_undefined"), std::string::npos);
    const auto doc = nlohmann::json::parse(slurp(out("bench") / "bench_summary.json"));
    ASSERT_TRUE(doc.is_array());
    for (const auto& row : doc) EXPECT_TRUE(row["objective_sd"].is_null()) << row.dump();
    std::istringstream runs(slurp(out("bench") / "bench_runs.csv"));
    std::string line;
    std::size_t n = 0;
    while (std::getline(runs, line)) ++n;
    EXPECT_EQ(n, 1u + 3u * 4u);
}

TEST_F(CliTest, FlagsOverrideConfigAndEnvSeedIsFallback) {
    spit(config_path(), R"({"init": "none", "seed": 3, "metric": "rmse"})");
    ASSERT_NE(run({"fit", map_path().string(), "--config", config_path().string(), "--seed", "11", "--metric",
                   "ortho", "--out", out("flag").string()}),
              app::kHardError);
    const auto flag = nlohmann::json::parse(slurp(out("flag") / "fit_results.json"));
    EXPECT_EQ(flag[0]["metric"], "ortho");
    EXPECT_EQ(flag[0]["seed"].get<std::uint64_t>(), line_seed(11, flag[0]["speed"].get<double>()));

    spit(config_path(), R"({"init": "none"})");
    ::setenv("CPMFIT_SEED", "21", 1);
    ASSERT_NE(run({"fit", map_path().string(), "--config", config_path().string(), "--out", out("env").string()}),
              app::kHardError);
    const auto env = nlohmann::json::parse(slurp(out("env") / "fit_results.json"));
    EXPECT_EQ(env[0]["seed"].get<std::uint64_t>(), line_seed(21, env[0]["speed"].get<double>()));

    ::setenv("CPMFIT_SEED", "not-a-number", 1);
    EXPECT_EQ(run({"fit", map_path().string(), "--config", config_path().string(), "--out", out("bad").string()}),
              app::kHardError);
}

TEST_F(CliTest, UnknownConfigKeyIsRejected) {
    spit(config_path(), R"({"initt": "none"})");
    EXPECT_EQ(run({"fit", map_path().string(), "--config", config_path().string(), "--out", out("x").string()}),
              app::kHardError);
    EXPECT_NE(err_.str().find("initt"), std::string::npos);
}

}  // namespace
}  // namespace cpmfit
