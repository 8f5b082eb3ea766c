#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "tissue_optics/cli.hpp"

using namespace tissue_optics;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::istringstream ls(line);
        std::string f;
        while (std::getline(ls, f, ',')) fields.push_back(f);
        rows.push_back(fields);
    }
    return rows;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("tissue_optics_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        unsetenv(cli::kPresetDirEnv);
    }
    void TearDown() override {
        fs::remove_all(dir_);
        unsetenv(cli::kPresetDirEnv);
    }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

// Composition-free slab whose complete-mode loss is a flat 3 dB at 1 mm.
const char* kFlat3Db = R"({"name": "flat", "units": "fraction",
  "composition": {"B": 0, "S": 0, "W": 0, "F": 0, "M": 0},
  "scattering": {"f_ray": 0, "beta": 1e-9, "mu_s_prime_ref": 6.907755278982137, "g": 0}})";

}  // namespace

TEST_F(CliTest, CoeffMelaninRowAt550Reads519) {
    const auto r = run({"coeff", "melanin", "--from", "400", "--to", "1000"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("\n550,519\n"), std::string::npos);
    EXPECT_EQ(csv_rows(r.out).size(), 602u);
}

TEST_F(CliTest, CoeffSkinRowsEqualLibraryCalls) {
    const auto r = run({"coeff", "skin", "--from", "400", "--to", "1000", "--step", "7"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = csv_rows(r.out);
    ASSERT_EQ(rows[0], (std::vector<std::string>{"lambda_nm", "mu_a_cm1", "mu_s_prime_cm1"}));
    const auto skin = lookup_tissue("skin");
    const auto grid = WavelengthGrid{400, 1000, 7}.points();
    ASSERT_EQ(rows.size(), grid.size() + 1);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Wavelength l(grid[i]);
        EXPECT_EQ(rows[i + 1][1], io::format_number(mu_a_tissue(skin.composition, l).value));
        EXPECT_EQ(rows[i + 1][2], io::format_number(reduced_scattering(skin.scattering, l)));
    }
}

TEST_F(CliTest, CoeffMatchesGoldenFile) {
    const auto r = run({"coeff", "skin", "--step", "10"});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.out, io::read_text_file(test_support::data_path("golden/coeff_skin_10nm.csv")));
}

TEST_F(CliTest, PathlossMatchesGoldenFile) {
    const auto r = run({"pathloss", "bone", "-d", "5", "--step", "10"});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.out, io::read_text_file(test_support::data_path("golden/pathloss_bone_5mm_10nm.csv")));
}

TEST_F(CliTest, UnknownNameExitsTwoWithPresetList) {
    const auto r = run({"coeff", "unobtainium"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("skin, breast, bone, brain"), std::string::npos);
}

TEST_F(CliTest, PathlossSkinCompleteArgminRowIs1000) {
    const auto r = run({"pathloss", "skin", "-d", "1", "--mode", "complete"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = csv_rows(r.out);
    ASSERT_EQ(rows[0][4], "loss_db_complete");
    std::size_t best = 1;
    for (std::size_t i = 2; i < rows.size(); ++i) {
        if (std::stod(rows[i][4]) < std::stod(rows[best][4])) best = i;
    }
    EXPECT_EQ(rows[best][0], "1000");
}

TEST_F(CliTest, PathlossDoubleThicknessSquaresLinearLoss) {
    const auto one = csv_rows(run({"pathloss", "breast", "-d", "1", "--step", "25"}).out);
    const auto two = csv_rows(run({"pathloss", "breast", "-d", "2", "--step", "25"}).out);
    ASSERT_EQ(one.size(), two.size());
    for (std::size_t i = 1; i < one.size(); ++i) {
        for (int col : {3, 4}) {
            const double l1 = std::pow(10.0, std::stod(one[i][col]) / 10.0);
            const double l2 = std::pow(10.0, std::stod(two[i][col]) / 10.0);
            // dB values carry 6 significant digits.
            EXPECT_NEAR(std::log(l2) / std::log(l1 * l1), 1.0, 1e-5) << one[i][0];
        }
    }
}

TEST_F(CliTest, ZeroThicknessExitsTwo) { EXPECT_EQ(run({"pathloss", "brain", "-d", "0"}).code, 2); }

TEST_F(CliTest, WindowsPrintsRangesOrNone) {
    const auto skin = run({"windows", "skin", "-d", "1"});
    ASSERT_EQ(skin.code, 0);
    EXPECT_EQ(skin.out, "[613.9, 1000]\n");
    const auto bone = run({"windows", "bone", "-d", "5"});
    EXPECT_EQ(bone.code, 0);
    EXPECT_EQ(bone.out, "none\n");
}

TEST_F(CliTest, FlatThreeDecibelConfigIsOneFullRangeWindow) {
    io::write_text_file(path("flat.json"), kFlat3Db);
    const auto r = run({"windows", "--tissue-file", path("flat.json"), "-d", "1", "--mode", "complete"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "[400, 1000]\n");
}

TEST_F(CliTest, ZeroThresholdExitsTwo) {
    EXPECT_EQ(run({"windows", "skin", "-d", "1", "--threshold-db", "0"}).code, 2);
}

TEST_F(CliTest, OptimumReportsWavelengthAndLoss) {
    const auto r = run({"optimum", "skin", "-d", "1"});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.out.substr(0, r.out.find(',', 18)), "lambda_nm,loss_db\n1000");
    EXPECT_EQ(run({"optimum", "brain", "-d", "1", "--mode", "absorption"}).out.substr(18, 4), "633,");
}

TEST_F(CliTest, FitRoundTripFixtureConverges) {
    ASSERT_EQ(run({"coeff", "dBlood", "--out", path("db.csv")}).code, 0);
    // Default threshold stops early; a tight one must still be reachable from 6-digit CSV data.
    const auto quick = run({"fit", path("db.csv"), "-k", "4", "--out", path("quick.json")});
    ASSERT_EQ(quick.code, 0) << quick.err;
    EXPECT_LT(nlohmann::json::parse(io::read_text_file(path("quick.json")))["nmse"].get<double>(), 1e-3);
    const auto r = run({"fit", path("db.csv"), "-k", "4", "--nmse-threshold", "1e-10", "--out", path("report.json"),
                        "--svg", path("fit.svg")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(io::read_text_file(path("report.json")));
    EXPECT_EQ(j["family"], "gaussian_sum");
    EXPECT_TRUE(j["converged"].get<bool>());
    EXPECT_LT(j["nmse"].get<double>(), 1e-10);
    EXPECT_EQ(j["coefficients"].size(), 12u);
    EXPECT_TRUE(fs::exists(path("fit.svg")));
}

TEST_F(CliTest, FitNotConvergedExitsOneAndStillWritesReport) {
    ASSERT_EQ(run({"coeff", "oBlood", "--out", path("ob.csv")}).code, 0);
    const auto r = run({"fit", path("ob.csv"), "-k", "1", "--nmse-threshold", "1e-12", "--max-iterations", "1",
                        "--out", path("report.json")});
    EXPECT_EQ(r.code, 1);
    const auto j = nlohmann::json::parse(io::read_text_file(path("report.json")));
    EXPECT_FALSE(j["converged"].get<bool>());
}

TEST_F(CliTest, FitInputErrorsExitTwo) {
    io::write_text_file(path("three.csv"), "lambda_nm,mu_a_cm1\n400,1\n500,2\n600,3\n");
    EXPECT_EQ(run({"fit", path("three.csv"), "--family", "gaussian_sum", "-k", "5"}).code, 2);

    io::write_text_file(path("order.csv"), "lambda_nm,mu_a_cm1\n400,1\n500,2\n450,3\n");
    const auto r = run({"fit", path("order.csv")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("line 4"), std::string::npos);

    EXPECT_EQ(run({"fit", path("three.csv"), "--family", "spline"}).code, 2);
}

TEST_F(CliTest, IoFailuresExitThree) {
    EXPECT_EQ(run({"fit", path("missing.csv")}).code, 3);
    EXPECT_EQ(run({"coeff", "melanin", "--out", "/nonexistent/dir/x.csv"}).code, 3);
    EXPECT_EQ(run({"pathloss", "skin", "-d", "1", "--svg", "/nonexistent/dir/x.svg"}).code, 3);
    EXPECT_EQ(run({"windows", "--tissue-file", path("nope.json"), "-d", "1"}).code, 3);
}

TEST_F(CliTest, UsageErrorsExitTwoAndHelpExitsZero) {
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"teleport"}).code, 2);
    EXPECT_EQ(run({"pathloss", "skin"}).code, 2);  // thickness is required
    EXPECT_EQ(run({"pathloss", "skin", "-d", "1", "--mode", "total"}).code, 2);
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, PresetJsonWithoutUnitsExitsTwo) {
    io::write_text_file(path("nounits.json"), R"({"name": "x", "composition": {"B": 0, "S": 0, "W": 0, "F": 0, "M": 0},
      "scattering": {"f_ray": 0.5, "beta": 1, "mu_s_prime_ref": 10, "g": 0.9}})");
    const auto r = run({"pathloss", "--tissue-file", path("nounits.json"), "-d", "1"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("units"), std::string::npos);
}

TEST_F(CliTest, PresetDirectoryFromEnvironment) {
    io::write_text_file(path("flat.json"), kFlat3Db);
    setenv(cli::kPresetDirEnv, dir_.c_str(), 1);
    const auto r = run({"windows", "flat", "-d", "1", "--mode", "complete"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "[400, 1000]\n");
    const auto list = run({"tissues"});
    EXPECT_NE(list.out.find("\nflat,"), std::string::npos);
    const auto miss = run({"windows", "liver", "-d", "1"});
    EXPECT_EQ(miss.code, 2);
    EXPECT_NE(miss.err.find("flat"), std::string::npos);
}

TEST_F(CliTest, TissuesListsBuiltinsAsFractions) {
    const auto r = run({"tissues"});
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("\nskin,0.0041,0.992,0.261,0.225,0.0115,0.409,0.702,48,500,0.92\n"), std::string::npos);
}

TEST_F(CliTest, SvgOutputIsDeterministic) {
    ASSERT_EQ(run({"pathloss", "skin", "-d", "1", "--svg", path("a.svg"), "--out", path("a.csv")}).code, 0);
    ASSERT_EQ(run({"pathloss", "skin", "-d", "1", "--svg", path("b.svg"), "--out", path("b.csv")}).code, 0);
    EXPECT_EQ(io::read_text_file(path("a.svg")), io::read_text_file(path("b.svg")));
    ASSERT_EQ(run({"coeff", "fat", "--svg", path("fat.svg"), "--log-y", "--out", path("fat.csv")}).code, 0);
    // Raw water is negative, so it cannot go on a log axis.
    EXPECT_EQ(run({"coeff", "water", "--svg", path("w.svg"), "--log-y", "--out", path("w.csv")}).code, 2);
}
