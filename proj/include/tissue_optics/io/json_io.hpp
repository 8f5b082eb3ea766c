#pragma once

// Tissue preset files and fit reports as JSON.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "tissue_optics/errors.hpp"
#include "tissue_optics/fitting/fit.hpp"
#include "tissue_optics/io/csv.hpp"
#include "tissue_optics/tissue.hpp"

namespace tissue_optics::io {

namespace detail {

inline double number_field(const nlohmann::json& obj, const char* key, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw InvalidArgument(where + ": missing field '" + key + "'");
    if (!it->is_number()) throw InvalidArgument(where + ": field '" + key + "' must be a number");
    return it->get<double>();
}

inline const nlohmann::json& object_field(const nlohmann::json& obj, const char* key, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw InvalidArgument(where + ": missing object '" + key + "'");
    if (!it->is_object()) throw InvalidArgument(where + ": '" + key + "' must be an object");
    return *it;
}

}  // namespace detail

/// Parses a tissue preset. The "units" field is mandatory and says whether
/// the composition is given as fractions or percentages; scattering values
/// are never scaled.
inline TissuePreset parse_preset_json(std::string_view text, const std::string& where = "preset") {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidArgument(where + ": malformed JSON: " + e.what());
    }
    if (!j.is_object()) throw InvalidArgument(where + ": top level must be an object");

    const auto units_it = j.find("units");
    if (units_it == j.end()) {
        throw InvalidArgument(where + ": missing field 'units' (\"fraction\" or \"percent\")");
    }
    if (!units_it->is_string()) throw InvalidArgument(where + ": 'units' must be \"fraction\" or \"percent\"");
    const auto units = units_it->get<std::string>();
    double scale = 1.0;
    if (units == "percent") scale = 0.01;
    else if (units != "fraction") {
        throw InvalidArgument(where + ": 'units' must be \"fraction\" or \"percent\", got \"" + units + "\"");
    }

    TissuePreset p;
    const auto name_it = j.find("name");
    if (name_it == j.end() || !name_it->is_string() || name_it->get<std::string>().empty()) {
        throw InvalidArgument(where + ": missing or empty string field 'name'");
    }
    p.name = name_it->get<std::string>();

    const auto& comp = detail::object_field(j, "composition", where);
    p.composition.B = scale * detail::number_field(comp, "B", where);
    p.composition.S = scale * detail::number_field(comp, "S", where);
    p.composition.W = scale * detail::number_field(comp, "W", where);
    p.composition.F = scale * detail::number_field(comp, "F", where);
    p.composition.M = scale * detail::number_field(comp, "M", where);

    const auto& sc = detail::object_field(j, "scattering", where);
    p.scattering.f_ray = detail::number_field(sc, "f_ray", where);
    p.scattering.beta = detail::number_field(sc, "beta", where);
    p.scattering.mu_s_prime_ref = detail::number_field(sc, "mu_s_prime_ref", where);
    p.scattering.lambda_ref =
        sc.contains("lambda_ref") ? detail::number_field(sc, "lambda_ref", where) : kDefaultScatteringReferenceNm;
    p.scattering.g = detail::number_field(sc, "g", where);

    if (const auto s = j.find("source"); s != j.end() && s->is_string()) p.source = s->get<std::string>();
    else p.source = where;

    try {
        validate(p.composition);
        validate(p.scattering);
    } catch (const InvalidArgument& e) {
        throw InvalidArgument(where + ": " + e.what());
    }
    return p;
}

inline TissuePreset read_preset_json(const std::string& path) { return parse_preset_json(read_text_file(path), path); }

/// Preset as JSON in fraction units.
inline nlohmann::ordered_json preset_to_json(const TissuePreset& p) {
    const auto& c = p.composition;
    const auto& s = p.scattering;
    return {
        {"name", p.name},
        {"units", "fraction"},
        {"composition", {{"B", c.B}, {"S", c.S}, {"W", c.W}, {"F", c.F}, {"M", c.M}}},
        {"scattering",
         {{"f_ray", s.f_ray}, {"beta", s.beta}, {"mu_s_prime_ref", s.mu_s_prime_ref}, {"lambda_ref", s.lambda_ref}, {"g", s.g}}},
        {"source", p.source},
    };
}

/// Looks for `<name>.json` in `dir`; returns nothing when absent.
inline std::optional<TissuePreset> find_preset_in_dir(const std::filesystem::path& dir, std::string_view name) {
    const auto path = dir / (std::string(name) + ".json");
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) return std::nullopt;
    auto p = read_preset_json(path.string());
    if (p.name != name) {
        throw InvalidArgument(path.string() + ": file declares name '" + p.name + "', expected '" + std::string(name) + "'");
    }
    return p;
}

/// Names of the `*.json` files in `dir`, sorted.
inline std::vector<std::string> preset_names_in_dir(const std::filesystem::path& dir) {
    std::vector<std::string> out;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") out.push_back(entry.path().stem().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Fit report: family, canonical coefficients, nmse, iterations, convergence.
inline nlohmann::ordered_json fit_report_to_json(const FitReport& r, const FitFamily& family) {
    nlohmann::ordered_json named = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < r.coefficients.size(); ++i) named[r.parameter_names[i]] = r.coefficients[i];
    nlohmann::ordered_json j{
        {"family", family_name(family)},
        {"parameter_names", r.parameter_names},
        {"coefficients", r.coefficients},
        {"named_coefficients", named},
        {"nmse", r.nmse},
        {"iterations", r.iterations},
        {"lm_iterations", r.lm_iterations},
        {"converged", r.converged},
    };
    if (const auto* g = std::get_if<GaussianSumFamily>(&family)) j["k"] = g->k;
    if (const auto* f = std::get_if<FourierFamily>(&family)) j["k"] = f->k;
    if (const auto* pl = std::get_if<PowerLawFamily>(&family)) j["lambda_ref"] = pl->lambda_ref;
    return j;
}

}  // namespace tissue_optics::io
