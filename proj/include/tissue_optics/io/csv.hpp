#pragma once

// CSV reading and writing for spectra, coefficient tables and sweeps.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "tissue_optics/channel.hpp"
#include "tissue_optics/errors.hpp"
#include "tissue_optics/spectrum.hpp"

namespace tissue_optics::io {

/// Every number the CLI prints goes through here: 6 significant digits.
inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    for (;;) {
        const auto comma = line.find(',');
        out.push_back(trim(line.substr(0, comma)));
        if (comma == std::string_view::npos) return out;
        line.remove_prefix(comma + 1);
    }
}

inline double parse_field(std::string_view field, std::size_t line_no, const char* what) {
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty() || !std::isfinite(v)) {
        throw InvalidArgument("line " + std::to_string(line_no) + ": " + what + " '" + std::string(field) +
                              "' is not a finite number");
    }
    return v;
}

}  // namespace detail

/// Parses a `lambda_nm,mu_a_cm1` spectrum. Blank lines and lines starting
/// with '#' are skipped. Errors name the 1-based line.
inline SampledSpectrum parse_spectrum_csv(std::string_view text, std::string source = {}) {
    std::vector<double> lambda;
    std::vector<double> values;
    bool header_seen = false;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        const std::string_view raw = text.substr(0, nl);
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
        ++line_no;
        const auto line = detail::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto fields = detail::split(line);
        if (!header_seen) {
            if (fields.size() != 2 || fields[0] != "lambda_nm" || fields[1] != "mu_a_cm1") {
                throw InvalidArgument("line " + std::to_string(line_no) + ": expected header 'lambda_nm,mu_a_cm1'");
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != 2) {
            throw InvalidArgument("line " + std::to_string(line_no) + ": expected 2 fields, found " +
                                  std::to_string(fields.size()));
        }
        const double l = detail::parse_field(fields[0], line_no, "wavelength");
        const double v = detail::parse_field(fields[1], line_no, "value");
        if (!(l > 0.0)) throw InvalidArgument("line " + std::to_string(line_no) + ": wavelength must be > 0");
        if (!lambda.empty() && !(l > lambda.back())) {
            throw InvalidArgument("line " + std::to_string(line_no) + ": wavelength " + format_number(l) +
                                  " does not exceed the previous " + format_number(lambda.back()) +
                                  " (wavelengths must strictly increase)");
        }
        lambda.push_back(l);
        values.push_back(v);
    }
    if (!header_seen) throw InvalidArgument("empty spectrum file: missing header 'lambda_nm,mu_a_cm1'");
    return SampledSpectrum(std::move(lambda), std::move(values), std::move(source));
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("error reading '" + path + "'");
    return ss.str();
}

inline void write_text_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("error writing '" + path + "'");
}

inline SampledSpectrum read_spectrum_csv(const std::string& path) {
    return parse_spectrum_csv(read_text_file(path), path);
}

inline std::string spectrum_csv(const SampledSpectrum& s) {
    std::string out = "lambda_nm,mu_a_cm1\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out += format_number(s.lambda_nm()[i]) + ',' + format_number(s.values()[i]) + '\n';
    }
    return out;
}

/// One row of a coefficient table; `mu_s_prime` is present for tissues only.
struct CoefficientRow {
    double lambda_nm;
    double mu_a;
    std::optional<double> mu_s_prime;
};

inline std::string coefficient_csv(const std::vector<CoefficientRow>& rows) {
    const bool tissue = !rows.empty() && rows.front().mu_s_prime.has_value();
    std::string out = tissue ? "lambda_nm,mu_a_cm1,mu_s_prime_cm1\n" : "lambda_nm,mu_a_cm1\n";
    for (const auto& r : rows) {
        out += format_number(r.lambda_nm) + ',' + format_number(r.mu_a);
        if (tissue) out += ',' + format_number(r.mu_s_prime.value_or(0.0));
        out += '\n';
    }
    return out;
}

/// Sweep table with both loss modes side by side. The two sweeps must share
/// a grid.
inline std::string sweep_csv(std::span<const PathlossPoint> absorption, std::span<const PathlossPoint> complete) {
    if (absorption.size() != complete.size()) throw InvalidArgument("sweep_csv: sweeps differ in length");
    std::string out = "lambda_nm,mu_a_cm1,mu_s_cm1,loss_db_absorption,loss_db_complete\n";
    for (std::size_t i = 0; i < absorption.size(); ++i) {
        const auto& a = absorption[i];
        const auto& c = complete[i];
        if (a.lambda_nm != c.lambda_nm) throw InvalidArgument("sweep_csv: sweeps use different grids");
        out += format_number(a.lambda_nm) + ',' + format_number(a.mu_a) + ',' + format_number(a.mu_s) + ',' +
               format_number(a.loss_db) + ',' + format_number(c.loss_db) + '\n';
    }
    return out;
}

}  // namespace tissue_optics::io
