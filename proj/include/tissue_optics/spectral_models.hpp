#pragma once

// Closed-form spectral shapes: Gaussian sums, truncated Fourier series and
// power laws. Each family exposes value, parameter-vector packing and the
// analytic gradient with respect to its packed parameters.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tissue_optics/errors.hpp"

namespace tissue_optics {

struct GaussianTerm {
    double amplitude;  // cm^-1
    double center;     // nm
    double width;      // nm

    friend bool operator==(const GaussianTerm&, const GaussianTerm&) = default;
};

/// sum_i a_i exp(-((lambda - b_i) / c_i)^2)
struct GaussianSumModel {
    std::vector<GaussianTerm> terms;

    [[nodiscard]] double value_at(double lambda_nm) const noexcept {
        double sum = 0.0;
        for (const auto& t : terms) {
            const double z = (lambda_nm - t.center) / t.width;
            sum += t.amplitude * std::exp(-z * z);
        }
        return sum;
    }

    friend bool operator==(const GaussianSumModel&, const GaussianSumModel&) = default;
};

struct Harmonic {
    double cos_coeff;  // a_i
    double sin_coeff;  // b_i

    friend bool operator==(const Harmonic&, const Harmonic&) = default;
};

/// a0 + sum_i a_i cos(i w lambda) + b_i sin(i w lambda), i = 1..harmonics.size()
struct FourierSeriesModel {
    double a0 = 0.0;
    std::vector<Harmonic> harmonics;
    double w = 0.0;  // rad / nm

    [[nodiscard]] double value_at(double lambda_nm) const noexcept {
        double sum = a0;
        for (std::size_t i = 0; i < harmonics.size(); ++i) {
            const double phase = static_cast<double>(i + 1) * w * lambda_nm;
            sum += harmonics[i].cos_coeff * std::cos(phase) + harmonics[i].sin_coeff * std::sin(phase);
        }
        return sum;
    }

    friend bool operator==(const FourierSeriesModel&, const FourierSeriesModel&) = default;
};

/// mu_ref * (lambda / lambda_ref)^exponent
struct PowerLawModel {
    double mu_ref = 0.0;
    double lambda_ref = 550.0;
    double exponent = -3.0;

    [[nodiscard]] double value_at(double lambda_nm) const noexcept {
        return mu_ref * std::pow(lambda_nm / lambda_ref, exponent);
    }

    friend bool operator==(const PowerLawModel&, const PowerLawModel&) = default;
};

using ParametricSpectralModel = std::variant<FourierSeriesModel, GaussianSumModel, PowerLawModel>;

inline double value_at(const ParametricSpectralModel& model, double lambda_nm) {
    return std::visit([lambda_nm](const auto& m) { return m.value_at(lambda_nm); }, model);
}

inline void validate(const GaussianSumModel& model) {
    if (model.terms.empty()) throw InvalidArgument("Gaussian sum needs at least one term");
    for (std::size_t i = 0; i < model.terms.size(); ++i) {
        if (model.terms[i].width == 0.0 || !std::isfinite(model.terms[i].width)) {
            throw InvalidArgument("Gaussian term " + std::to_string(i + 1) + " has zero or non-finite width");
        }
    }
}

inline void validate(const FourierSeriesModel& model) {
    if (!(model.w > 0.0) || !std::isfinite(model.w)) throw InvalidArgument("Fourier fundamental w must be > 0");
}

/// Checked evaluation of a Gaussian sum. Throws InvalidArgument on a non-finite
/// wavelength or a zero width.
inline double eval_gaussian_sum(const GaussianSumModel& model, double lambda_nm) {
    if (!std::isfinite(lambda_nm)) throw InvalidArgument("wavelength must be finite");
    validate(model);
    return model.value_at(lambda_nm);
}

inline double eval_fourier_series(const FourierSeriesModel& model, double lambda_nm) {
    if (!std::isfinite(lambda_nm)) throw InvalidArgument("wavelength must be finite");
    validate(model);
    return model.value_at(lambda_nm);
}

// ---------------------------------------------------------------------------
// Parameter packing.
//
//   Gaussian sum : [a1, b1, c1, a2, b2, c2, ...]
//   Fourier      : [a0, a1, b1, ..., ak, bk, w]
//   Power law    : [mu_ref, exponent]            (lambda_ref is held fixed)

inline std::size_t parameter_count(const GaussianSumModel& m) { return 3 * m.terms.size(); }
inline std::size_t parameter_count(const FourierSeriesModel& m) { return 2 + 2 * m.harmonics.size(); }
inline std::size_t parameter_count(const PowerLawModel&) { return 2; }

inline std::vector<double> pack(const GaussianSumModel& m) {
    std::vector<double> p;
    p.reserve(parameter_count(m));
    for (const auto& t : m.terms) {
        p.push_back(t.amplitude);
        p.push_back(t.center);
        p.push_back(t.width);
    }
    return p;
}

inline std::vector<double> pack(const FourierSeriesModel& m) {
    std::vector<double> p;
    p.reserve(parameter_count(m));
    p.push_back(m.a0);
    for (const auto& h : m.harmonics) {
        p.push_back(h.cos_coeff);
        p.push_back(h.sin_coeff);
    }
    p.push_back(m.w);
    return p;
}

inline std::vector<double> pack(const PowerLawModel& m) { return {m.mu_ref, m.exponent}; }

inline void unpack(GaussianSumModel& m, std::span<const double> p) {
    for (std::size_t i = 0; i < m.terms.size(); ++i) {
        m.terms[i] = {p[3 * i], p[3 * i + 1], p[3 * i + 2]};
    }
}

inline void unpack(FourierSeriesModel& m, std::span<const double> p) {
    m.a0 = p[0];
    for (std::size_t i = 0; i < m.harmonics.size(); ++i) {
        m.harmonics[i] = {p[1 + 2 * i], p[2 + 2 * i]};
    }
    m.w = p[p.size() - 1];
}

inline void unpack(PowerLawModel& m, std::span<const double> p) {
    m.mu_ref = p[0];
    m.exponent = p[1];
}

inline std::vector<std::string> parameter_names(const GaussianSumModel& m) {
    std::vector<std::string> names;
    for (std::size_t i = 1; i <= m.terms.size(); ++i) {
        for (const char* s : {"a", "b", "c"}) names.push_back(s + std::to_string(i));
    }
    return names;
}

inline std::vector<std::string> parameter_names(const FourierSeriesModel& m) {
    std::vector<std::string> names{"a0"};
    for (std::size_t i = 1; i <= m.harmonics.size(); ++i) {
        names.push_back("a" + std::to_string(i));
        names.push_back("b" + std::to_string(i));
    }
    names.emplace_back("w");
    return names;
}

inline std::vector<std::string> parameter_names(const PowerLawModel&) { return {"mu_ref", "exponent"}; }

// ---------------------------------------------------------------------------
// Analytic gradients d value / d parameter, written into `out` in pack order.

inline void gradient(const GaussianSumModel& m, double lambda_nm, std::span<double> out) {
    for (std::size_t i = 0; i < m.terms.size(); ++i) {
        const auto& t = m.terms[i];
        const double z = (lambda_nm - t.center) / t.width;
        const double e = std::exp(-z * z);
        out[3 * i] = e;
        out[3 * i + 1] = t.amplitude * e * 2.0 * z / t.width;
        out[3 * i + 2] = t.amplitude * e * 2.0 * z * z / t.width;
    }
}

inline void gradient(const FourierSeriesModel& m, double lambda_nm, std::span<double> out) {
    out[0] = 1.0;
    double dw = 0.0;
    for (std::size_t i = 0; i < m.harmonics.size(); ++i) {
        const double n = static_cast<double>(i + 1);
        const double phase = n * m.w * lambda_nm;
        const double c = std::cos(phase);
        const double s = std::sin(phase);
        out[1 + 2 * i] = c;
        out[2 + 2 * i] = s;
        dw += n * lambda_nm * (m.harmonics[i].sin_coeff * c - m.harmonics[i].cos_coeff * s);
    }
    out[out.size() - 1] = dw;
}

inline void gradient(const PowerLawModel& m, double lambda_nm, std::span<double> out) {
    const double ratio = lambda_nm / m.lambda_ref;
    const double shape = std::pow(ratio, m.exponent);
    out[0] = shape;
    out[1] = m.mu_ref * shape * std::log(ratio);
}

}  // namespace tissue_optics
