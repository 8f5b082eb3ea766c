#pragma once

// Generic tissue: absorption composed from constituent volume fractions,
// reduced scattering from a Rayleigh + Mie power law, and a preset registry.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tissue_optics/constituents.hpp"
#include "tissue_optics/errors.hpp"
#include "tissue_optics/units.hpp"

namespace tissue_optics {

/// Volume fractions (0..1) of blood, water, fat and melanin, plus the oxygen
/// saturation of the blood. Fractions may sum to less than one; the remainder
/// is treated as non-absorbing matrix.
struct TissueComposition {
    double B = 0.0;  // blood
    double S = 0.0;  // hemoglobin oxygen saturation
    double W = 0.0;  // water
    double F = 0.0;  // fat
    double M = 0.0;  // melanin

    friend bool operator==(const TissueComposition&, const TissueComposition&) = default;
};

inline constexpr double kFractionSumTolerance = 1e-9;

inline void validate(const TissueComposition& c) {
    const std::pair<const char*, double> fields[] = {{"B", c.B}, {"S", c.S}, {"W", c.W}, {"F", c.F}, {"M", c.M}};
    for (const auto& [name, v] : fields) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            throw InvalidArgument(std::string("composition field ") + name + " = " + std::to_string(v) +
                                  " outside [0, 1]");
        }
    }
    const double total = c.B + c.W + c.F + c.M;
    if (total > 1.0 + kFractionSumTolerance) {
        throw InvalidArgument("composition volume fractions B + W + F + M = " + std::to_string(total) + " exceed 1");
    }
}

/// Hybrid Rayleigh/Mie reduced scattering parameters.
struct ScatteringParams {
    double f_ray = 0.0;           // Rayleigh fraction
    double beta = 1.0;            // Mie power
    double mu_s_prime_ref = 1.0;  // cm^-1 at lambda_ref
    double lambda_ref = 500.0;    // nm
    double g = 0.0;               // anisotropy

    friend bool operator==(const ScatteringParams&, const ScatteringParams&) = default;
};

inline constexpr double kDefaultScatteringReferenceNm = 500.0;

inline void validate(const ScatteringParams& p) {
    if (!(p.f_ray >= 0.0 && p.f_ray <= 1.0)) throw InvalidArgument("f_ray must lie in [0, 1]");
    if (!(p.beta > 0.0 && p.beta <= 4.0)) throw InvalidArgument("beta must lie in (0, 4]");
    if (!(p.mu_s_prime_ref > 0.0) || !std::isfinite(p.mu_s_prime_ref)) {
        throw InvalidArgument("mu_s_prime_ref must be > 0");
    }
    if (!(p.lambda_ref > 0.0) || !std::isfinite(p.lambda_ref)) throw InvalidArgument("lambda_ref must be > 0");
    if (!(p.g >= 0.0 && p.g < 1.0)) throw InvalidArgument("anisotropy g must lie in [0, 1)");
}

struct TissuePreset {
    std::string name;
    TissueComposition composition;
    ScatteringParams scattering;
    std::string source;
};

/// Per-constituent absorption terms of a tissue at one wavelength.
struct AbsorptionBreakdown {
    double oxy_blood = 0.0;
    double deoxy_blood = 0.0;
    double water = 0.0;
    double fat = 0.0;
    double melanin = 0.0;
    bool out_of_range = false;
    bool any_clamped = false;

    [[nodiscard]] double total() const noexcept { return oxy_blood + deoxy_blood + water + fat + melanin; }
};

/// B S mu_oBl + B (1 - S) mu_dBl + W mu_w + F mu_f + M mu_m, term by term.
/// The clamp policy applies to each constituent spectrum before weighting.
inline AbsorptionBreakdown absorption_breakdown(const TissueComposition& comp, Wavelength lambda,
                                                ClampPolicy clamp = ClampPolicy::none) {
    validate(comp);
    const auto ob = mu_a_oxy_blood(lambda, clamp);
    const auto db = mu_a_deoxy_blood(lambda, clamp);
    const auto w = mu_a_water(lambda, clamp);
    const auto f = mu_a_fat(lambda, clamp);
    const auto m = mu_a_melanin(lambda, clamp);
    AbsorptionBreakdown out;
    out.oxy_blood = comp.B * comp.S * ob.value;
    out.deoxy_blood = comp.B * (1.0 - comp.S) * db.value;
    out.water = comp.W * w.value;
    out.fat = comp.F * f.value;
    out.melanin = comp.M * m.value;
    out.out_of_range = !lambda.in_validity_range();
    out.any_clamped = ob.clamped || db.clamped || w.clamped || f.clamped || m.clamped;
    return out;
}

inline AbsorptionCoefficient mu_a_tissue(const TissueComposition& comp, Wavelength lambda,
                                         ClampPolicy clamp = ClampPolicy::none) {
    const auto b = absorption_breakdown(comp, lambda, clamp);
    return {b.total(), b.out_of_range, b.any_clamped};
}

/// mu_s'(lambda_ref) * (f_ray (lambda/lambda_ref)^-4 + (1 - f_ray) (lambda/lambda_ref)^-beta), cm^-1.
inline double reduced_scattering(const ScatteringParams& p, Wavelength lambda) {
    validate(p);
    const double x = lambda.nm() / p.lambda_ref;
    if (x == 1.0) return p.mu_s_prime_ref;
    const double x2 = x * x;
    return p.mu_s_prime_ref * (p.f_ray / (x2 * x2) + (1.0 - p.f_ray) * std::pow(x, -p.beta));
}

/// mu_s = mu_s' / (1 - g).
inline double scattering_from_reduced(double mu_s_prime, double g) {
    if (!(g >= 0.0 && g < 1.0)) throw InvalidArgument("anisotropy g must lie in [0, 1), got " + std::to_string(g));
    if (!(mu_s_prime >= 0.0) || !std::isfinite(mu_s_prime)) throw InvalidArgument("mu_s' must be finite and >= 0");
    return mu_s_prime / (1.0 - g);
}

inline double scattering_coefficient(const ScatteringParams& p, Wavelength lambda) {
    return scattering_from_reduced(reduced_scattering(p, lambda), p.g);
}

// ---------------------------------------------------------------------------
// Presets

namespace detail {

inline TissuePreset percent_row(std::string name, double B, double S, double W, double F, double M, double f_ray,
                                double beta, double mu_s_prime_ref, double g, std::string source) {
    return {std::move(name),
            {B / 100.0, S / 100.0, W / 100.0, F / 100.0, M / 100.0},
            {f_ray, beta, mu_s_prime_ref, kDefaultScatteringReferenceNm, g},
            std::move(source)};
}

}  // namespace detail

/// The four built-in tissues. Composition columns are tabulated in percent
/// and converted to fractions here.
inline const std::vector<TissuePreset>& builtin_presets() {
    static const std::vector<TissuePreset> presets{
        detail::percent_row("skin", 0.41, 99.2, 26.1, 22.5, 1.15, 0.409, 0.702, 48.0, 0.92,
                            "Tseng 2011; Salomatina 2006; Sandell 2011; Shimojo 2020"),
        detail::percent_row("breast", 0.5, 52.0, 50.0, 13.0, 0.0, 0.288, 0.685, 18.7, 0.96,
                            "Pifferi 2004; Sandell 2011; Spinelli 2004"),
        detail::percent_row("bone", 0.15, 30.0, 30.0, 7.0, 0.0, 0.174, 0.447, 19.3, 0.93,
                            "Sandell 2011; Bashkatov 2006; Ugryumova 2004"),
        detail::percent_row("brain", 1.71, 58.7, 50.0, 20.0, 0.0, 0.32, 1.09, 12.72, 0.9,
                            "Zhao 2005; Yaroslavsky 2002; Zee 1993"),
    };
    return presets;
}

/// Built-in presets plus user-registered ones. Registration is not
/// synchronized: register everything before sharing the registry across
/// threads.
class PresetRegistry {
public:
    PresetRegistry() = default;

    /// Adds a user preset. Names must be unique across built-ins and users.
    void add(TissuePreset preset) {
        if (preset.name.empty()) throw InvalidArgument("preset name must not be empty");
        validate(preset.composition);
        validate(preset.scattering);
        if (find(preset.name)) throw InvalidArgument("preset '" + preset.name + "' already exists");
        user_.emplace(preset.name, std::move(preset));
    }

    [[nodiscard]] std::optional<TissuePreset> find(std::string_view name) const {
        for (const auto& p : builtin_presets()) {
            if (p.name == name) return p;
        }
        if (auto it = user_.find(std::string(name)); it != user_.end()) return it->second;
        return std::nullopt;
    }

    [[nodiscard]] TissuePreset lookup(std::string_view name) const {
        if (auto p = find(name)) return *p;
        std::string list;
        for (const auto& n : names()) list += (list.empty() ? "" : ", ") + n;
        throw NotFound("unknown tissue '" + std::string(name) + "' (available: " + list + ")");
    }

    [[nodiscard]] std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& p : builtin_presets()) out.push_back(p.name);
        for (const auto& [n, p] : user_) out.push_back(n);
        return out;
    }

private:
    std::map<std::string, TissuePreset, std::less<>> user_;
};

/// Looks up a built-in preset.
inline TissuePreset lookup_tissue(std::string_view name) { return PresetRegistry{}.lookup(name); }

}  // namespace tissue_optics
