#pragma once

// Absorption spectra of the five tissue constituents: oxygenated blood,
// de-oxygenated blood, water, fat and melanin. The blood, water and fat
// spectra are fitted analytic shapes whose coefficients are embedded below;
// melanin follows a lambda^-3 power law anchored at 519 cm^-1 for 550 nm.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "tissue_optics/errors.hpp"
#include "tissue_optics/spectral_models.hpp"
#include "tissue_optics/units.hpp"

namespace tissue_optics {

enum class Constituent { oxy_blood, deoxy_blood, water, fat, melanin };

inline constexpr std::array<Constituent, 5> kAllConstituents{
    Constituent::oxy_blood, Constituent::deoxy_blood, Constituent::water, Constituent::fat, Constituent::melanin};

inline std::string_view to_string(Constituent c) {
    switch (c) {
        case Constituent::oxy_blood: return "oBlood";
        case Constituent::deoxy_blood: return "dBlood";
        case Constituent::water: return "water";
        case Constituent::fat: return "fat";
        case Constituent::melanin: return "melanin";
    }
    return "?";
}

/// Accepts the table column names (oBlood, dBlood, water, fat, melanin) and a
/// few spelled-out aliases.
inline Constituent parse_constituent(std::string_view name) {
    if (name == "oBlood" || name == "oxy_blood" || name == "oxyblood") return Constituent::oxy_blood;
    if (name == "dBlood" || name == "deoxy_blood" || name == "deoxyblood") return Constituent::deoxy_blood;
    if (name == "water") return Constituent::water;
    if (name == "fat") return Constituent::fat;
    if (name == "melanin") return Constituent::melanin;
    throw NotFound("unknown constituent '" + std::string(name) + "' (available: oBlood, dBlood, water, fat, melanin)");
}

inline bool is_constituent_name(std::string_view name) {
    try {
        parse_constituent(name);
        return true;
    } catch (const NotFound&) {
        return false;
    }
}

namespace coefficients {

inline constexpr std::string_view kVersion = "1";

// Canonical text form of the embedded coefficient table. The numeric models
// below must parse identically from this text; a checksum over it guards
// against accidental edits.
inline constexpr std::string_view kSource =
    "dBlood,a1,38.63\n"
    "dBlood,a2,60.18\n"
    "dBlood,a3,25.11\n"
    "dBlood,a4,2.988\n"
    "dBlood,b1,423.9\n"
    "dBlood,b2,31.57\n"
    "dBlood,b3,559.3\n"
    "dBlood,b4,664.7\n"
    "dBlood,c1,33.06\n"
    "dBlood,c2,660.8\n"
    "dBlood,c3,59.08\n"
    "dBlood,c4,28.53\n"
    "oBlood,a1,14\n"
    "oBlood,a2,13.75\n"
    "oBlood,a3,29.69\n"
    "oBlood,a4,4.317e15\n"
    "oBlood,a5,-34.3\n"
    "oBlood,b1,419.7\n"
    "oBlood,b2,581.5\n"
    "oBlood,b3,559.9\n"
    "oBlood,b4,-25880\n"
    "oBlood,b5,642.6\n"
    "oBlood,c1,16.97\n"
    "oBlood,c2,11.68\n"
    "oBlood,c3,46.71\n"
    "oBlood,c4,4668\n"
    "oBlood,c5,162.5\n"
    "water,a0,324.1\n"
    "water,a1,102.2\n"
    "water,a2,-568\n"
    "water,a3,-126.6\n"
    "water,a4,236.8\n"
    "water,a5,73\n"
    "water,a6,-40.53\n"
    "water,a7,-12.92\n"
    "water,b1,697.9\n"
    "water,b2,121.7\n"
    "water,b3,-395.3\n"
    "water,b4,-107.1\n"
    "water,b5,115.6\n"
    "water,b6,35.46\n"
    "water,b7,-8.373\n"
    "water,w,0.006663\n"
    "fat,a1,33.53\n"
    "fat,a2,50.09\n"
    "fat,a3,3.66\n"
    "fat,a4,2.5\n"
    "fat,a5,19.86\n"
    "fat,b1,411.5\n"
    "fat,b2,968.7\n"
    "fat,b3,742.9\n"
    "fat,b4,671.2\n"
    "fat,b5,513.8\n"
    "fat,c1,38.38\n"
    "fat,c2,525.9\n"
    "fat,c3,80.22\n"
    "fat,c4,32.97\n"
    "fat,c5,119.2\n"
    "melanin,mu_ref,519\n"
    "melanin,lambda_ref,550\n";

/// 64-bit FNV-1a, used to fingerprint kSource.
constexpr std::uint64_t fnv1a64(std::string_view text) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char ch : text) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline const GaussianSumModel& oxy_blood() {
    static const GaussianSumModel m{{
        {14.0, 419.7, 16.97},
        {13.75, 581.5, 11.68},
        {29.69, 559.9, 46.71},
        {4.317e15, -25880.0, 4668.0},
        {-34.3, 642.6, 162.5},
    }};
    return m;
}

inline const GaussianSumModel& deoxy_blood() {
    static const GaussianSumModel m{{
        {38.63, 423.9, 33.06},
        {60.18, 31.57, 660.8},
        {25.11, 559.3, 59.08},
        {2.988, 664.7, 28.53},
    }};
    return m;
}

inline const FourierSeriesModel& water() {
    static const FourierSeriesModel m{
        324.1,
        {
            {102.2, 697.9},
            {-568.0, 121.7},
            {-126.6, -395.3},
            {236.8, -107.1},
            {73.0, 115.6},
            {-40.53, 35.46},
            {-12.92, -8.373},
        },
        0.006663,
    };
    return m;
}

inline const GaussianSumModel& fat() {
    static const GaussianSumModel m{{
        {33.53, 411.5, 38.38},
        {50.09, 968.7, 525.9},
        {3.66, 742.9, 80.22},
        {2.5, 671.2, 32.97},
        {19.86, 513.8, 119.2},
    }};
    return m;
}

inline const PowerLawModel& melanin() {
    static const PowerLawModel m{519.0, 550.0, -3.0};
    return m;
}

}  // namespace coefficients

inline ParametricSpectralModel constituent_model(Constituent c) {
    switch (c) {
        case Constituent::oxy_blood: return coefficients::oxy_blood();
        case Constituent::deoxy_blood: return coefficients::deoxy_blood();
        case Constituent::water: return coefficients::water();
        case Constituent::fat: return coefficients::fat();
        case Constituent::melanin: return coefficients::melanin();
    }
    throw InvalidArgument("bad constituent");
}

namespace detail {

inline AbsorptionCoefficient finish(double raw, Wavelength lambda, ClampPolicy clamp) {
    AbsorptionCoefficient out{raw, !lambda.in_validity_range(), false};
    if (clamp == ClampPolicy::non_negative && raw < 0.0) {
        out.value = 0.0;
        out.clamped = true;
    }
    return out;
}

}  // namespace detail

inline AbsorptionCoefficient mu_a_oxy_blood(Wavelength lambda, ClampPolicy clamp = ClampPolicy::none) {
    return detail::finish(coefficients::oxy_blood().value_at(lambda.nm()), lambda, clamp);
}

inline AbsorptionCoefficient mu_a_deoxy_blood(Wavelength lambda, ClampPolicy clamp = ClampPolicy::none) {
    return detail::finish(coefficients::deoxy_blood().value_at(lambda.nm()), lambda, clamp);
}

/// Note: the embedded water series evaluates below zero over most of
/// [400, 1000] nm. Use ClampPolicy::non_negative when feeding link budgets.
inline AbsorptionCoefficient mu_a_water(Wavelength lambda, ClampPolicy clamp = ClampPolicy::none) {
    return detail::finish(coefficients::water().value_at(lambda.nm()), lambda, clamp);
}

inline AbsorptionCoefficient mu_a_fat(Wavelength lambda, ClampPolicy clamp = ClampPolicy::none) {
    return detail::finish(coefficients::fat().value_at(lambda.nm()), lambda, clamp);
}

/// 519 * (lambda / 550)^-3. Wavelength already guarantees lambda > 0.
inline AbsorptionCoefficient mu_a_melanin(Wavelength lambda, ClampPolicy clamp = ClampPolicy::none) {
    const auto& m = coefficients::melanin();
    const double ratio = lambda.nm() / m.lambda_ref;
    return detail::finish(m.mu_ref / (ratio * ratio * ratio), lambda, clamp);
}

inline AbsorptionCoefficient mu_a(Constituent c, Wavelength lambda, ClampPolicy clamp = ClampPolicy::none) {
    switch (c) {
        case Constituent::oxy_blood: return mu_a_oxy_blood(lambda, clamp);
        case Constituent::deoxy_blood: return mu_a_deoxy_blood(lambda, clamp);
        case Constituent::water: return mu_a_water(lambda, clamp);
        case Constituent::fat: return mu_a_fat(lambda, clamp);
        case Constituent::melanin: return mu_a_melanin(lambda, clamp);
    }
    throw InvalidArgument("bad constituent");
}

}  // namespace tissue_optics
