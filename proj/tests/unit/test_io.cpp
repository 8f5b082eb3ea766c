#include <filesystem>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "tissue_optics/io/csv.hpp"
#include "tissue_optics/io/json_io.hpp"

using namespace tissue_optics;
using namespace tissue_optics::io;

namespace {

std::string message_of(auto&& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

const char* kSkinPercent = R"({
  "name": "my_skin",
  "units": "percent",
  "composition": {"B": 0.41, "S": 99.2, "W": 26.1, "F": 22.5, "M": 1.15},
  "scattering": {"f_ray": 0.409, "beta": 0.702, "mu_s_prime_ref": 48, "lambda_ref": 500, "g": 0.92}
})";

}  // namespace

TEST(FormatNumber, SixSignificantDigits) {
    EXPECT_EQ(format_number(519.0), "519");
    EXPECT_EQ(format_number(1.0 / 3.0), "0.333333");
    EXPECT_EQ(format_number(123456789.0), "1.23457e+08");
    EXPECT_EQ(format_number(-0.000123456789), "-0.000123457");
}

TEST(SpectrumCsv, ParsesWithCommentsBlankLinesAndCrlf) {
    const auto s = parse_spectrum_csv("# comment\r\nlambda_nm,mu_a_cm1\r\n400, 1.5\r\n\r\n401,2e-1\r\n");
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s.lambda_nm()[1], 401.0);
    EXPECT_EQ(s.values()[1], 0.2);
}

TEST(SpectrumCsv, ErrorsNameTheLine) {
    EXPECT_NE(message_of([] { (void)parse_spectrum_csv("lambda_nm,mu_a_cm1\n400,1\n500,2\n450,3\n"); }).find("line 4"),
              std::string::npos);
    EXPECT_NE(message_of([] { (void)parse_spectrum_csv("lambda_nm,mu_a_cm1\n400,abc\n"); }).find("line 2"),
              std::string::npos);
    EXPECT_NE(message_of([] { (void)parse_spectrum_csv("lambda_nm,mu_a_cm1\n400,1,2\n"); }).find("line 2"),
              std::string::npos);
    EXPECT_NE(message_of([] { (void)parse_spectrum_csv("wavelength,value\n400,1\n"); }).find("line 1"),
              std::string::npos);
    EXPECT_THROW((void)parse_spectrum_csv(""), InvalidArgument);
    EXPECT_THROW((void)parse_spectrum_csv("lambda_nm,mu_a_cm1\n400,1\n400,2\n"), InvalidArgument);
    EXPECT_THROW((void)parse_spectrum_csv("lambda_nm,mu_a_cm1\n400,nan\n"), InvalidArgument);
}

TEST(SpectrumCsv, WriteThenReadRoundTrips) {
    const SampledSpectrum s({400.0, 450.5, 500.0}, {1.25, -2.0, 3e5});
    const auto back = parse_spectrum_csv(spectrum_csv(s));
    EXPECT_EQ(back.lambda_nm(), s.lambda_nm());
    EXPECT_EQ(back.values(), s.values());
}

TEST(Files, MissingOrUnwritablePathsAreIoErrors) {
    EXPECT_THROW((void)read_text_file("/nonexistent/dir/file.csv"), IoError);
    EXPECT_THROW(write_text_file("/nonexistent/dir/file.csv", "x"), IoError);
}

TEST(SweepCsv, HeaderAndRowsComeFromSweeps) {
    const auto skin = lookup_tissue("skin");
    const WavelengthGrid g{400.0, 402.0, 1.0};
    const auto a = sweep(skin, SlabGeometry::from_mm(1.0), g, {LossMode::absorption_only});
    const auto c = sweep(skin, SlabGeometry::from_mm(1.0), g, {LossMode::complete});
    const auto csv = sweep_csv(a, c);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "lambda_nm,mu_a_cm1,mu_s_cm1,loss_db_absorption,loss_db_complete");
    const std::string row0 = "400," + format_number(a[0].mu_a) + ',' + format_number(a[0].mu_s) + ',' +
                             format_number(a[0].loss_db) + ',' + format_number(c[0].loss_db);
    EXPECT_NE(csv.find(row0 + "\n"), std::string::npos);
    EXPECT_THROW((void)sweep_csv(a, std::span<const PathlossPoint>(c).first(2)), InvalidArgument);
}

TEST(PresetJson, PercentUnitsAreConverted) {
    const auto p = parse_preset_json(kSkinPercent);
    const auto skin = lookup_tissue("skin");
    EXPECT_EQ(p.name, "my_skin");
    EXPECT_NEAR(p.composition.B, skin.composition.B, 1e-15);
    EXPECT_NEAR(p.composition.S, skin.composition.S, 1e-15);
    EXPECT_EQ(p.scattering, skin.scattering);
}

TEST(PresetJson, UnitsFieldIsMandatory) {
    std::string text = kSkinPercent;
    text.replace(text.find("\"units\": \"percent\","), std::string("\"units\": \"percent\",").size(), "");
    EXPECT_NE(message_of([&] { (void)parse_preset_json(text); }).find("units"), std::string::npos);

    std::string bad_units = kSkinPercent;
    bad_units.replace(bad_units.find("percent"), 7, "permille");
    EXPECT_THROW((void)parse_preset_json(bad_units), InvalidArgument);
}

TEST(PresetJson, FractionUnitsAreTakenAsIs) {
    const auto json = preset_to_json(lookup_tissue("brain"));
    auto p = parse_preset_json(json.dump());
    EXPECT_EQ(p.composition, lookup_tissue("brain").composition);
    EXPECT_EQ(p.scattering, lookup_tissue("brain").scattering);
}

TEST(PresetJson, PercentValuesUnderFractionUnitsFailValidation) {
    std::string text = kSkinPercent;
    text.replace(text.find("percent"), 7, "fraction");
    EXPECT_NE(message_of([&] { (void)parse_preset_json(text); }).find("S"), std::string::npos);
}

TEST(PresetJson, MalformedOrIncompleteInputIsInvalid) {
    EXPECT_THROW((void)parse_preset_json("{not json"), InvalidArgument);
    EXPECT_THROW((void)parse_preset_json("[]"), InvalidArgument);
    std::string no_g = kSkinPercent;
    no_g.replace(no_g.find(", \"g\": 0.92"), std::string(", \"g\": 0.92").size(), "");
    EXPECT_NE(message_of([&] { (void)parse_preset_json(no_g); }).find("'g'"), std::string::npos);
}

TEST(PresetDir, FindsByFileNameAndListsSorted) {
    const auto dir = std::filesystem::temp_directory_path() / "tissue_optics_presets_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    write_text_file((dir / "my_skin.json").string(), kSkinPercent);
    write_text_file((dir / "a_other.json").string(), kSkinPercent);
    EXPECT_EQ(preset_names_in_dir(dir), (std::vector<std::string>{"a_other", "my_skin"}));
    EXPECT_TRUE(find_preset_in_dir(dir, "my_skin").has_value());
    EXPECT_FALSE(find_preset_in_dir(dir, "liver").has_value());
    EXPECT_THROW((void)find_preset_in_dir(dir, "a_other"), InvalidArgument);
    std::filesystem::remove_all(dir);
}

TEST(FitReportJson, CarriesCoefficientsNmseIterationsAndConvergence) {
    const auto grid = std::vector<double>{400, 500, 600, 700, 800, 900, 1000};
    const auto data = SampledSpectrum::sample(grid, [](double l) { return 519.0 * std::pow(l / 550.0, -3.0); });
    const FitFamily family = PowerLawFamily{};
    const auto r = fit({data, family, {1e-12, 50}});
    const auto j = fit_report_to_json(r, family);
    EXPECT_EQ(j["family"], "power_law");
    EXPECT_EQ(j["coefficients"].size(), 2u);
    EXPECT_EQ(j["parameter_names"][1], "exponent");
    EXPECT_EQ(j["converged"], true);
    EXPECT_EQ(j["nmse"].get<double>(), r.nmse);
    EXPECT_EQ(j["iterations"].get<int>(), r.iterations);
    EXPECT_EQ(j["named_coefficients"]["mu_ref"].get<double>(), r.coefficients[0]);
}
