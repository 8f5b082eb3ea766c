#pragma once

// Beer-Lambert slab channel: transmittance, pathloss, wavelength sweeps,
// transmission windows and optimal wavelengths.

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tissue_optics/errors.hpp"
#include "tissue_optics/tissue.hpp"
#include "tissue_optics/units.hpp"

namespace tissue_optics {

/// Homogeneous slab thickness in centimetres.
class SlabGeometry {
public:
    explicit SlabGeometry(double thickness_cm) : cm_(thickness_cm) {
        if (!std::isfinite(thickness_cm) || thickness_cm <= 0.0) {
            throw InvalidArgument("slab thickness must be > 0, got " + std::to_string(thickness_cm) + " cm");
        }
    }

    static SlabGeometry from_mm(double thickness_mm) { return SlabGeometry(thickness_mm / 10.0); }

    [[nodiscard]] double cm() const noexcept { return cm_; }

private:
    double cm_;
};

enum class LossMode { absorption_only, complete };

inline std::string_view to_string(LossMode m) {
    return m == LossMode::complete ? "complete" : "absorption";
}

inline LossMode parse_loss_mode(std::string_view s) {
    if (s == "complete") return LossMode::complete;
    if (s == "absorption" || s == "absorption_only") return LossMode::absorption_only;
    throw InvalidArgument("unknown loss mode '" + std::string(s) + "' (expected absorption|complete)");
}

/// dB per neper for power quantities: 10 / ln 10.
inline constexpr double kDbPerNeper = 10.0 / std::numbers::ln10;

struct PathlossPoint {
    double lambda_nm = std::numeric_limits<double>::quiet_NaN();
    double mu_a = 0.0;          // cm^-1
    double mu_s = 0.0;          // cm^-1, reported in both modes
    double loss_linear = 1.0;   // +inf when saturated
    double loss_db = 0.0;
    LossMode mode = LossMode::complete;
    bool saturated = false;     // loss_linear overflowed; loss_db is still exact
    bool negative_absorption = false;  // mu_a < 0 passed through unclamped
};

/// exp(-mu_a * delta).
inline double transmittance(double mu_a, SlabGeometry delta) {
    if (!(mu_a >= 0.0) || !std::isfinite(mu_a)) {
        throw InvalidArgument("absorption coefficient must be finite and >= 0, got " + std::to_string(mu_a));
    }
    return std::exp(-mu_a * delta.cm());
}

namespace detail {

inline PathlossPoint make_point(double mu_a, double mu_s, SlabGeometry delta, LossMode mode) {
    PathlossPoint p;
    p.mu_a = mu_a;
    p.mu_s = mu_s;
    p.mode = mode;
    const double nepers = (mode == LossMode::complete ? mu_a + mu_s : mu_a) * delta.cm();
    p.loss_db = kDbPerNeper * nepers;
    p.loss_linear = std::exp(nepers);
    p.saturated = std::isinf(p.loss_linear);
    p.negative_absorption = mu_a < 0.0;
    return p;
}

}  // namespace detail

/// L = exp((mu_a [+ mu_s]) delta). The dB value is computed from the exponent
/// directly so it stays exact when the linear value overflows.
inline PathlossPoint pathloss(double mu_a, double mu_s, SlabGeometry delta, LossMode mode) {
    if (!(mu_a >= 0.0) || !std::isfinite(mu_a)) {
        throw InvalidArgument("absorption coefficient must be finite and >= 0, got " + std::to_string(mu_a));
    }
    if (!(mu_s >= 0.0) || !std::isfinite(mu_s)) {
        throw InvalidArgument("scattering coefficient must be finite and >= 0, got " + std::to_string(mu_s));
    }
    return detail::make_point(mu_a, mu_s, delta, mode);
}

/// Inclusive wavelength grid lo, lo + step, ... <= hi.
struct WavelengthGrid {
    double lo_nm = kValidityMinNm;
    double hi_nm = kValidityMaxNm;
    double step_nm = 1.0;

    [[nodiscard]] std::vector<double> points() const {
        if (!std::isfinite(lo_nm) || !std::isfinite(hi_nm) || !std::isfinite(step_nm)) {
            throw InvalidArgument("grid bounds must be finite");
        }
        if (!(step_nm > 0.0)) throw InvalidArgument("grid step must be > 0");
        if (lo_nm > hi_nm) throw InvalidArgument("empty grid: lo > hi");
        if (!(lo_nm > 0.0)) throw InvalidArgument("grid must start above 0 nm");
        const auto n = static_cast<std::size_t>(std::floor((hi_nm - lo_nm) / step_nm + 1e-9)) + 1;
        std::vector<double> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) out.push_back(lo_nm + static_cast<double>(i) * step_nm);
        return out;
    }
};

struct SweepOptions {
    LossMode mode = LossMode::complete;
    ClampPolicy clamp = ClampPolicy::non_negative;
};

/// Pathloss of `tissue` over `grid`, one point per wavelength in ascending order.
inline std::vector<PathlossPoint> sweep(const TissuePreset& tissue, SlabGeometry delta, const WavelengthGrid& grid,
                                        SweepOptions options = {}) {
    validate(tissue.composition);
    validate(tissue.scattering);
    const auto lambdas = grid.points();
    std::vector<PathlossPoint> out;
    out.reserve(lambdas.size());
    for (double nm : lambdas) {
        const Wavelength lambda(nm);
        const double mu_a = mu_a_tissue(tissue.composition, lambda, options.clamp).value;
        const double mu_s = scattering_coefficient(tissue.scattering, lambda);
        auto p = detail::make_point(mu_a, mu_s, delta, options.mode);
        p.lambda_nm = nm;
        out.push_back(p);
    }
    return out;
}

struct TransmissionWindow {
    double lo_nm;
    double hi_nm;
    double threshold_db;
};

namespace detail {

inline double round_to_tenth(double x) { return std::round(x * 10.0) / 10.0; }

/// Wavelength where the segment (x0, y0)-(x1, y1) crosses `level`.
inline double crossing(double x0, double y0, double x1, double y1, double level) {
    if (y1 == y0) return 0.5 * (x0 + x1);
    return x0 + (level - y0) * (x1 - x0) / (y1 - y0);
}

}  // namespace detail

/// Maximal contiguous wavelength ranges with loss_db <= threshold_db. Interior
/// edges are placed where the linear interpolant between the bracketing
/// samples crosses the threshold, rounded to 0.1 nm.
inline std::vector<TransmissionWindow> find_windows(std::span<const PathlossPoint> sweep_result, double threshold_db) {
    if (!(threshold_db > 0.0) || !std::isfinite(threshold_db)) {
        throw InvalidArgument("threshold must be > 0 dB");
    }
    std::vector<TransmissionWindow> out;
    const std::size_t n = sweep_result.size();
    std::size_t i = 0;
    while (i < n) {
        if (!(sweep_result[i].loss_db <= threshold_db)) {
            ++i;
            continue;
        }
        const std::size_t first = i;
        while (i + 1 < n && sweep_result[i + 1].loss_db <= threshold_db) ++i;
        const std::size_t last = i;
        const auto& a = sweep_result[first];
        const auto& b = sweep_result[last];
        double lo = a.lambda_nm;
        double hi = b.lambda_nm;
        if (first > 0) {
            const auto& p = sweep_result[first - 1];
            lo = detail::crossing(p.lambda_nm, p.loss_db, a.lambda_nm, a.loss_db, threshold_db);
        }
        if (last + 1 < n) {
            const auto& q = sweep_result[last + 1];
            hi = detail::crossing(b.lambda_nm, b.loss_db, q.lambda_nm, q.loss_db, threshold_db);
        }
        out.push_back({detail::round_to_tenth(lo), detail::round_to_tenth(hi), threshold_db});
        ++i;
    }
    return out;
}

/// Wavelength of minimum loss_db; the smallest wavelength wins ties.
inline Wavelength optimal_wavelength(std::span<const PathlossPoint> sweep_result) {
    if (sweep_result.empty()) throw InvalidArgument("optimal_wavelength needs a non-empty sweep");
    std::size_t best = 0;
    for (std::size_t i = 1; i < sweep_result.size(); ++i) {
        if (sweep_result[i].loss_db < sweep_result[best].loss_db ||
            (sweep_result[i].loss_db == sweep_result[best].loss_db &&
             sweep_result[i].lambda_nm < sweep_result[best].lambda_nm)) {
            best = i;
        }
    }
    return Wavelength(sweep_result[best].lambda_nm);
}

}  // namespace tissue_optics
