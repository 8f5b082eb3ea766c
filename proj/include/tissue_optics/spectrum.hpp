#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "tissue_optics/errors.hpp"

namespace tissue_optics {

/// Ordered (wavelength nm, value) samples. Wavelengths strictly increase and
/// all values are finite; the constructor enforces both.
class SampledSpectrum {
public:
    SampledSpectrum() = default;

    SampledSpectrum(std::vector<double> lambda_nm, std::vector<double> values, std::string source = {})
        : lambda_(std::move(lambda_nm)), values_(std::move(values)), source_(std::move(source)) {
        if (lambda_.size() != values_.size()) throw InvalidArgument("spectrum wavelength/value length mismatch");
        for (std::size_t i = 0; i < lambda_.size(); ++i) {
            if (!std::isfinite(lambda_[i]) || !std::isfinite(values_[i])) {
                throw InvalidArgument("spectrum sample " + std::to_string(i) + " is not finite");
            }
            if (i > 0 && !(lambda_[i] > lambda_[i - 1])) {
                throw InvalidArgument("spectrum wavelengths must strictly increase (sample " + std::to_string(i) + ")");
            }
        }
    }

    /// Samples `f(lambda)` at each wavelength.
    template <class F>
    static SampledSpectrum sample(const std::vector<double>& lambda_nm, F&& f, std::string source = {}) {
        std::vector<double> v;
        v.reserve(lambda_nm.size());
        for (double x : lambda_nm) v.push_back(f(x));
        return SampledSpectrum(lambda_nm, std::move(v), std::move(source));
    }

    [[nodiscard]] std::size_t size() const noexcept { return lambda_.size(); }
    [[nodiscard]] bool empty() const noexcept { return lambda_.empty(); }
    [[nodiscard]] const std::vector<double>& lambda_nm() const noexcept { return lambda_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
    [[nodiscard]] const std::string& source() const noexcept { return source_; }

private:
    std::vector<double> lambda_;
    std::vector<double> values_;
    std::string source_;
};

}  // namespace tissue_optics
