#pragma once

#include <cmath>
#include <string>

#include "tissue_optics/errors.hpp"

namespace tissue_optics {

/// Bounds of the wavelength interval the embedded spectra were fitted on.
inline constexpr double kValidityMinNm = 400.0;
inline constexpr double kValidityMaxNm = 1000.0;

/// Vacuum wavelength in nanometres. Always finite and strictly positive.
class Wavelength {
public:
    explicit Wavelength(double nm) : nm_(nm) {
        if (!std::isfinite(nm) || nm <= 0.0) {
            throw InvalidArgument("wavelength must be finite and > 0 nm, got " + std::to_string(nm));
        }
    }

    [[nodiscard]] double nm() const noexcept { return nm_; }

    [[nodiscard]] bool in_validity_range() const noexcept {
        return nm_ >= kValidityMinNm && nm_ <= kValidityMaxNm;
    }

    friend bool operator==(Wavelength, Wavelength) = default;
    friend auto operator<=>(Wavelength, Wavelength) = default;

private:
    double nm_;
};

/// What to do with a negative model value.
enum class ClampPolicy { none, non_negative };

/// Absorption coefficient in cm^-1 together with evaluation metadata.
///
/// `out_of_range` is set when the wavelength lies outside [400, 1000] nm, where
/// the fitted spectra are extrapolations. `clamped` is set when a negative raw
/// value was replaced by zero under ClampPolicy::non_negative.
struct AbsorptionCoefficient {
    double value = 0.0;
    bool out_of_range = false;
    bool clamped = false;
};

}  // namespace tissue_optics
