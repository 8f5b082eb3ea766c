#include <cmath>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "tissue_optics/constituents.hpp"

using namespace tissue_optics;

TEST(Wavelength, RejectsNonPositiveAndNonFinite) {
    EXPECT_THROW(Wavelength(0.0), InvalidArgument);
    EXPECT_THROW(Wavelength(-5.0), InvalidArgument);
    EXPECT_THROW(Wavelength(std::numeric_limits<double>::quiet_NaN()), InvalidArgument);
    EXPECT_THROW(Wavelength(std::numeric_limits<double>::infinity()), InvalidArgument);
    EXPECT_DOUBLE_EQ(Wavelength(633.0).nm(), 633.0);
}

TEST(Wavelength, ValidityRangeIsInclusive) {
    EXPECT_TRUE(Wavelength(400.0).in_validity_range());
    EXPECT_TRUE(Wavelength(1000.0).in_validity_range());
    EXPECT_FALSE(Wavelength(399.9).in_validity_range());
    EXPECT_FALSE(Wavelength(1000.1).in_validity_range());
}

TEST(Melanin, AnchorValues) {
    EXPECT_EQ(mu_a_melanin(Wavelength(550.0)).value, 519.0);
    EXPECT_REL(mu_a_melanin(Wavelength(1100.0)).value, 64.875, 1e-12);
    EXPECT_REL(mu_a_melanin(Wavelength(275.0)).value, 4152.0, 1e-12);
}

TEST(Melanin, OutsideFittedRangeIsFlaggedNotRefused) {
    const auto m = mu_a_melanin(Wavelength(1100.0));
    EXPECT_TRUE(m.out_of_range);
    EXPECT_FALSE(mu_a_melanin(Wavelength(700.0)).out_of_range);
}

TEST(GaussianTables, EveryTermHitsItsAmplitudeAtItsCentre) {
    for (const auto* model : {&coefficients::oxy_blood(), &coefficients::deoxy_blood(), &coefficients::fat()}) {
        for (const auto& t : model->terms) {
            const GaussianSumModel single{{t}};
            EXPECT_EQ(single.value_at(t.center), t.amplitude);
        }
    }
}

TEST(Constituents, MatchIndependentHighPrecisionOracle) {
    const auto& o = test_support::oracle();
    const auto lambdas = o["lambdas_nm"].get<std::vector<double>>();
    for (const auto c : kAllConstituents) {
        const auto want = o["constituents"][std::string(to_string(c))].get<std::vector<double>>();
        for (std::size_t i = 0; i < lambdas.size(); ++i) {
            SCOPED_TRACE(std::string(to_string(c)) + " at " + std::to_string(lambdas[i]));
            EXPECT_REL(mu_a(c, Wavelength(lambdas[i])).value, want[i], 1e-12);
        }
    }
}

TEST(Water, PrintedSeriesIsNegativeAcrossFittedRange) {
    // The embedded series is kept exactly as tabulated; it dips below zero.
    for (double l = 400.0; l <= 1000.0; l += 25.0) EXPECT_LT(mu_a_water(Wavelength(l)).value, 0.0) << l;
    EXPECT_NEAR(mu_a_water(Wavelength(700.0)).value, -50.23, 0.01);
}

TEST(Water, ClampPolicyZeroesNegativeValuesAndFlagsThem) {
    const auto raw = mu_a_water(Wavelength(700.0));
    EXPECT_FALSE(raw.clamped);
    const auto clamped = mu_a_water(Wavelength(700.0), ClampPolicy::non_negative);
    EXPECT_EQ(clamped.value, 0.0);
    EXPECT_TRUE(clamped.clamped);

    const auto positive = mu_a_oxy_blood(Wavelength(420.0), ClampPolicy::non_negative);
    EXPECT_FALSE(positive.clamped);
    EXPECT_EQ(positive.value, mu_a_oxy_blood(Wavelength(420.0)).value);
}

TEST(Constituents, ParseNamesAndAliases) {
    EXPECT_EQ(parse_constituent("oBlood"), Constituent::oxy_blood);
    EXPECT_EQ(parse_constituent("deoxy_blood"), Constituent::deoxy_blood);
    EXPECT_EQ(parse_constituent("melanin"), Constituent::melanin);
    for (const auto c : kAllConstituents) EXPECT_EQ(parse_constituent(to_string(c)), c);
    try {
        (void)parse_constituent("unobtainium");
        FAIL();
    } catch (const NotFound& e) {
        EXPECT_NE(std::string(e.what()).find("dBlood"), std::string::npos);
    }
}

TEST(Coefficients, TableChecksumIsFrozen) {
    EXPECT_EQ(coefficients::kVersion, "1");
    EXPECT_EQ(coefficients::fnv1a64(coefficients::kSource), 0x0e61911fe70a62dfULL);
}

TEST(Coefficients, TextFormMatchesNumericModels) {
    std::istringstream in{std::string(coefficients::kSource)};
    std::string line;
    int checked = 0;
    while (std::getline(in, line)) {
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        const std::string name = line.substr(0, c1);
        const std::string key = line.substr(c1 + 1, c2 - c1 - 1);
        const double value = std::stod(line.substr(c2 + 1));
        const int idx = std::isdigit(static_cast<unsigned char>(key.back())) ? key.back() - '0' : 0;
        double got = 0.0;
        if (name == "water") {
            const auto& w = coefficients::water();
            if (key == "a0") got = w.a0;
            else if (key == "w") got = w.w;
            else if (key[0] == 'a') got = w.harmonics.at(idx - 1).cos_coeff;
            else got = w.harmonics.at(idx - 1).sin_coeff;
        } else if (name == "melanin") {
            got = key == "mu_ref" ? coefficients::melanin().mu_ref : coefficients::melanin().lambda_ref;
        } else {
            const auto& m = name == "oBlood" ? coefficients::oxy_blood()
                            : name == "dBlood" ? coefficients::deoxy_blood()
                                               : coefficients::fat();
            const auto& t = m.terms.at(idx - 1);
            got = key[0] == 'a' ? t.amplitude : key[0] == 'b' ? t.center : t.width;
        }
        EXPECT_EQ(got, value) << line;
        ++checked;
    }
    // 15 + 12 + 15 + 16 Gaussian/Fourier entries plus 2 for melanin.
    EXPECT_EQ(checked, 60);
}

TEST(SpectralModels, NonFiniteWavelengthIsRejectedByCheckedEvaluators) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW((void)eval_gaussian_sum(coefficients::fat(), nan), InvalidArgument);
    EXPECT_THROW((void)eval_fourier_series(coefficients::water(), INFINITY), InvalidArgument);
}
