#pragma once

// Minimal line-chart SVG writer. Output depends only on the PlotSpec, so the
// same spec always yields the same bytes.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "tissue_optics/errors.hpp"
#include "tissue_optics/io/csv.hpp"
#include "tissue_optics/spectrum.hpp"

namespace tissue_optics::io {

enum class YScale { linear, log10 };

struct SeriesStyle {
    std::string color;  // empty: taken from the palette
    bool dashed = false;
};

struct PlotSeries {
    std::string label;
    SampledSpectrum data;
    SeriesStyle style{};
};

struct PlotSpec {
    std::vector<PlotSeries> series;
    YScale y_scale = YScale::linear;
    std::string title;
    std::string x_label = "wavelength (nm)";
    std::string y_label;
    int width_px = 800;
    int height_px = 500;
};

struct Tick {
    double value;
    std::string label;
};

struct AxisTicks {
    double lo;
    double hi;
    std::vector<Tick> ticks;
};

namespace detail {

inline std::string fmt(const char* f, double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

inline std::string escape_xml(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline double nice_step(double raw) {
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double f = raw / mag;
    if (f <= 1.0) return mag;
    if (f <= 2.0) return 2.0 * mag;
    if (f <= 5.0) return 5.0 * mag;
    return 10.0 * mag;
}

}  // namespace detail

/// Axis rounded out to multiples of a 1-2-5 step. A zero-width range gets a
/// padded axis with one tick at each end.
inline AxisTicks linear_ticks(double lo, double hi, int target = 5) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) throw InvalidArgument("linear_ticks: bad range");
    if (lo == hi) {
        const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.5;
        return {lo - pad, hi + pad, {{lo - pad, format_number(lo - pad)}, {hi + pad, format_number(hi + pad)}}};
    }
    const double step = detail::nice_step((hi - lo) / target);
    const double first = std::floor(lo / step);
    const double last = std::ceil(hi / step);
    AxisTicks out{first * step, last * step, {}};
    for (double i = first; i <= last + 0.5; i += 1.0) {
        double v = i * step;
        if (std::abs(v) < step * 1e-9) v = 0.0;
        out.ticks.push_back({v, format_number(v)});
    }
    return out;
}

/// Decade ticks covering [lo, hi]; both must be positive.
inline AxisTicks log_ticks(double lo, double hi) {
    if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi)) throw InvalidArgument("log scale needs positive values");
    auto e0 = static_cast<int>(std::floor(std::log10(lo) + 1e-12));
    auto e1 = static_cast<int>(std::ceil(std::log10(hi) - 1e-12));
    if (e1 == e0) ++e1;
    AxisTicks out{std::pow(10.0, e0), std::pow(10.0, e1), {}};
    for (int e = e0; e <= e1; ++e) out.ticks.push_back({std::pow(10.0, e), "1e" + std::to_string(e)});
    return out;
}

inline void validate(const PlotSpec& spec) {
    if (spec.series.empty()) throw InvalidArgument("plot needs at least one series");
    if (spec.width_px < 100 || spec.height_px < 100) throw InvalidArgument("plot must be at least 100x100 px");
    const auto& ref = spec.series.front().data;
    for (const auto& s : spec.series) {
        if (s.data.size() < 1) throw InvalidArgument("series '" + s.label + "' is empty");
        if (s.data.lambda_nm().front() != ref.lambda_nm().front() || s.data.lambda_nm().back() != ref.lambda_nm().back()) {
            throw InvalidArgument("series '" + s.label + "' does not share the wavelength range of the first series");
        }
        if (spec.y_scale == YScale::log10) {
            for (double v : s.data.values()) {
                if (!(v > 0.0)) throw InvalidArgument("series '" + s.label + "' has non-positive values on a log axis");
            }
        }
    }
}

inline std::string render_svg(const PlotSpec& spec) {
    validate(spec);
    static constexpr std::array<const char*, 8> palette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                        "#9467bd", "#8c564b", "#e377c2", "#17becf"};
    const double W = spec.width_px;
    const double H = spec.height_px;
    const double left = 80, right = 160, top = 40, bottom = 60;
    const double pw = W - left - right;
    const double ph = H - top - bottom;

    double xlo = spec.series.front().data.lambda_nm().front();
    double xhi = spec.series.front().data.lambda_nm().back();
    double ylo = INFINITY, yhi = -INFINITY;
    for (const auto& s : spec.series) {
        for (double v : s.data.values()) {
            ylo = std::min(ylo, v);
            yhi = std::max(yhi, v);
        }
    }
    const bool log_y = spec.y_scale == YScale::log10;
    const AxisTicks xt = linear_ticks(xlo, xhi);
    const AxisTicks yt = log_y ? log_ticks(ylo, yhi) : linear_ticks(ylo, yhi);

    auto ty = [&](double v) { return log_y ? std::log10(v) : v; };
    auto px = [&](double x) { return left + (x - xt.lo) / (xt.hi - xt.lo) * pw; };
    auto py = [&](double y) { return top + ph - (ty(y) - ty(yt.lo)) / (ty(yt.hi) - ty(yt.lo)) * ph; };
    auto c = [](double v) { return detail::fmt("%.2f", v); };

    std::string o;
    o += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(spec.width_px) + "\" height=\"" +
         std::to_string(spec.height_px) + "\" viewBox=\"0 0 " + std::to_string(spec.width_px) + ' ' +
         std::to_string(spec.height_px) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!spec.title.empty()) {
        o += "<text x=\"" + c(left + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" +
             detail::escape_xml(spec.title) + "</text>\n";
    }

    o += "<g class=\"x-axis\">\n";
    for (const auto& t : xt.ticks) {
        const auto x = c(px(t.value));
        o += "<line x1=\"" + x + "\" y1=\"" + c(top) + "\" x2=\"" + x + "\" y2=\"" + c(top + ph) +
             "\" stroke=\"#dddddd\"/>\n";
        o += "<text x=\"" + x + "\" y=\"" + c(top + ph + 18) + "\" text-anchor=\"middle\">" + t.label + "</text>\n";
    }
    o += "<text x=\"" + c(left + pw / 2) + "\" y=\"" + c(H - 15) + "\" text-anchor=\"middle\">" +
         detail::escape_xml(spec.x_label) + "</text>\n</g>\n";

    o += "<g class=\"y-axis\">\n";
    for (const auto& t : yt.ticks) {
        const auto y = c(py(t.value));
        o += "<line class=\"y-tick\" x1=\"" + c(left) + "\" y1=\"" + y + "\" x2=\"" + c(left + pw) + "\" y2=\"" + y +
             "\" stroke=\"#dddddd\"/>\n";
        o += "<text x=\"" + c(left - 6) + "\" y=\"" + y + "\" text-anchor=\"end\" dominant-baseline=\"middle\">" +
             t.label + "</text>\n";
    }
    o += "<text transform=\"translate(18," + c(top + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
         detail::escape_xml(spec.y_label) + "</text>\n</g>\n";
    o += "<rect x=\"" + c(left) + "\" y=\"" + c(top) + "\" width=\"" + c(pw) + "\" height=\"" + c(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";

    for (std::size_t i = 0; i < spec.series.size(); ++i) {
        const auto& s = spec.series[i];
        const std::string color = s.style.color.empty() ? palette[i % palette.size()] : s.style.color;
        o += "<polyline fill=\"none\" stroke=\"" + detail::escape_xml(color) + "\" stroke-width=\"1.5\"";
        if (s.style.dashed) o += " stroke-dasharray=\"6,4\"";
        o += " points=\"";
        for (std::size_t j = 0; j < s.data.size(); ++j) {
            if (j) o += ' ';
            o += c(px(s.data.lambda_nm()[j])) + ',' + c(py(s.data.values()[j]));
        }
        o += "\"/>\n";
    }

    o += "<g class=\"legend\">\n";
    for (std::size_t i = 0; i < spec.series.size(); ++i) {
        const auto& s = spec.series[i];
        const std::string color = s.style.color.empty() ? palette[i % palette.size()] : s.style.color;
        const double y = top + 10 + 20.0 * static_cast<double>(i);
        o += "<line x1=\"" + c(left + pw + 12) + "\" y1=\"" + c(y) + "\" x2=\"" + c(left + pw + 36) + "\" y2=\"" + c(y) +
             "\" stroke=\"" + detail::escape_xml(color) + "\" stroke-width=\"2\"" +
             (s.style.dashed ? " stroke-dasharray=\"6,4\"" : "") + "/>\n";
        o += "<text x=\"" + c(left + pw + 42) + "\" y=\"" + c(y) + "\" dominant-baseline=\"middle\">" +
             detail::escape_xml(s.label) + "</text>\n";
    }
    o += "</g>\n</svg>\n";
    return o;
}

inline void write_svg(const PlotSpec& spec, const std::string& path) { write_text_file(path, render_svg(spec)); }

}  // namespace tissue_optics::io
