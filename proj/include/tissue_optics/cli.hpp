#pragma once

// The `tissue-optics` command line. Everything it prints comes straight from
// library calls; this file only parses flags, dispatches and formats.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "tissue_optics/channel.hpp"
#include "tissue_optics/constituents.hpp"
#include "tissue_optics/errors.hpp"
#include "tissue_optics/fitting/fit.hpp"
#include "tissue_optics/io/csv.hpp"
#include "tissue_optics/io/json_io.hpp"
#include "tissue_optics/io/svg.hpp"
#include "tissue_optics/tissue.hpp"

namespace tissue_optics::cli {

enum ExitCode : int { kOk = 0, kNotConverged = 1, kInvalidInput = 2, kIoFailure = 3 };

inline constexpr const char* kPresetDirEnv = "TISSUE_OPTICS_PRESET_DIR";

namespace detail {

struct GridFlags {
    double from = kValidityMinNm;
    double to = kValidityMaxNm;
    double step = 1.0;

    [[nodiscard]] WavelengthGrid grid() const { return {from, to, step}; }
};

struct TissueFlags {
    std::string name;
    std::string tissue_file;
};

inline void add_grid(CLI::App* cmd, GridFlags& g) {
    cmd->add_option("--from", g.from, "first wavelength (nm)")->capture_default_str();
    cmd->add_option("--to", g.to, "last wavelength (nm)")->capture_default_str();
    cmd->add_option("--step", g.step, "grid step (nm)")->capture_default_str();
}

inline std::optional<std::filesystem::path> preset_dir() {
    const char* dir = std::getenv(kPresetDirEnv);
    if (dir == nullptr || *dir == '\0') return std::nullopt;
    return std::filesystem::path(dir);
}

/// Built-ins, then --tissue-file, then `<name>.json` in the preset directory.
inline TissuePreset resolve_tissue(const TissueFlags& f) {
    PresetRegistry registry;
    std::optional<TissuePreset> from_file;
    if (!f.tissue_file.empty()) {
        from_file = io::read_preset_json(f.tissue_file);
        registry.add(*from_file);
    }
    if (f.name.empty()) {
        if (from_file) return *from_file;
        throw InvalidArgument("no tissue given: pass a preset name or --tissue-file");
    }
    if (auto p = registry.find(f.name)) return *p;
    const auto dir = preset_dir();
    if (dir) {
        if (auto p = io::find_preset_in_dir(*dir, f.name)) return *p;
    }
    std::string list;
    for (const auto& n : registry.names()) list += (list.empty() ? "" : ", ") + n;
    if (dir) {
        for (const auto& n : io::preset_names_in_dir(*dir)) list += ", " + n;
    }
    throw NotFound("unknown tissue '" + f.name + "' (available: " + list + ")");
}

inline ClampPolicy parse_clamp(const std::string& s) {
    if (s == "none") return ClampPolicy::none;
    if (s == "non-negative" || s == "non_negative") return ClampPolicy::non_negative;
    throw InvalidArgument("unknown clamp policy '" + s + "' (expected none|non-negative)");
}

inline void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty()) out << text;
    else io::write_text_file(path, text);
}

inline SampledSpectrum series_of(const std::vector<PathlossPoint>& s, const std::string& source) {
    std::vector<double> l, v;
    for (const auto& p : s) {
        l.push_back(p.lambda_nm);
        v.push_back(p.loss_db);
    }
    return SampledSpectrum(std::move(l), std::move(v), source);
}

inline std::string window_lines(const std::vector<TransmissionWindow>& windows) {
    if (windows.empty()) return "none\n";
    std::string s;
    for (const auto& w : windows) s += "[" + io::format_number(w.lo_nm) + ", " + io::format_number(w.hi_nm) + "]\n";
    return s;
}

}  // namespace detail

/// Runs one command. `args` excludes the program name. Returns the exit code.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Tissue optical properties and pathloss calculator", "tissue-optics"};
    app.require_subcommand(1);

    detail::GridFlags grid;
    detail::TissueFlags tissue;
    std::string out_path, svg_path, mode_str, clamp_str;
    double thickness_mm = 0.0;
    double threshold_db = 6.0;
    bool log_y = false;

    auto* coeff = app.add_subcommand("coeff", "absorption (and reduced scattering) coefficients over a grid");
    coeff->add_option("name", tissue.name, "constituent or tissue name");
    detail::add_grid(coeff, grid);
    coeff->add_option("--tissue-file", tissue.tissue_file, "tissue preset JSON");
    coeff->add_option("--clamp", clamp_str, "none|non-negative (default none)");
    coeff->add_option("--out", out_path, "CSV output path (default stdout)");
    coeff->add_option("--svg", svg_path, "SVG plot path");
    coeff->add_flag("--log-y", log_y, "logarithmic y axis in the plot");

    auto* loss = app.add_subcommand("pathloss", "pathloss sweep in both loss modes");
    loss->add_option("name", tissue.name, "tissue name");
    loss->add_option("-d,--thickness", thickness_mm, "slab thickness (mm)")->required();
    detail::add_grid(loss, grid);
    loss->add_option("--mode", mode_str, "absorption|complete: series to plot (default both)");
    loss->add_option("--tissue-file", tissue.tissue_file, "tissue preset JSON");
    loss->add_option("--clamp", clamp_str, "none|non-negative (default non-negative)");
    loss->add_option("--out", out_path, "CSV output path (default stdout)");
    loss->add_option("--svg", svg_path, "SVG plot path");
    loss->add_flag("--log-y", log_y, "logarithmic y axis in the plot");

    auto* windows = app.add_subcommand("windows", "wavelength ranges with pathloss at or below a threshold");
    windows->add_option("name", tissue.name, "tissue name");
    windows->add_option("-d,--thickness", thickness_mm, "slab thickness (mm)")->required();
    detail::add_grid(windows, grid);
    windows->add_option("--mode", mode_str, "absorption|complete (default absorption)");
    windows->add_option("--threshold-db", threshold_db, "loss threshold (dB)")->capture_default_str();
    windows->add_option("--tissue-file", tissue.tissue_file, "tissue preset JSON");
    windows->add_option("--clamp", clamp_str, "none|non-negative (default non-negative)");
    windows->add_option("--out", out_path, "output path (default stdout)");

    auto* optimum = app.add_subcommand("optimum", "wavelength of minimum pathloss");
    optimum->add_option("name", tissue.name, "tissue name");
    optimum->add_option("-d,--thickness", thickness_mm, "slab thickness (mm)")->required();
    detail::add_grid(optimum, grid);
    optimum->add_option("--mode", mode_str, "absorption|complete (default complete)");
    optimum->add_option("--tissue-file", tissue.tissue_file, "tissue preset JSON");
    optimum->add_option("--clamp", clamp_str, "none|non-negative (default non-negative)");
    optimum->add_option("--out", out_path, "output path (default stdout)");

    std::string input_csv, family_str = "gaussian_sum", init_str = "auto_peaks";
    int k = 0;
    StoppingRule stopping;
    double power_ref = 550.0;
    auto* fitcmd = app.add_subcommand("fit", "fit a model family to a lambda_nm,mu_a_cm1 spectrum");
    fitcmd->add_option("input", input_csv, "spectrum CSV")->required();
    fitcmd->add_option("--family", family_str, "gaussian_sum|fourier|power_law")->capture_default_str();
    fitcmd->add_option("-k,--terms", k, "Gaussian terms (default 5) or Fourier harmonics (default 7)");
    fitcmd->add_option("--init", init_str, "auto_peaks|algorithm1_default")->capture_default_str();
    fitcmd->add_option("--nmse-threshold", stopping.nmse_threshold, "convergence threshold")->capture_default_str();
    fitcmd->add_option("--max-iterations", stopping.max_iterations, "refinement budget")->capture_default_str();
    fitcmd->add_option("--lambda-ref", power_ref, "power-law reference wavelength (nm)")->capture_default_str();
    fitcmd->add_option("--out", out_path, "JSON report path (default stdout)");
    fitcmd->add_option("--svg", svg_path, "SVG plot of data and model");

    auto* tissues = app.add_subcommand("tissues", "list available tissue presets");
    tissues->add_option("--tissue-file", tissue.tissue_file, "tissue preset JSON");
    tissues->add_option("--out", out_path, "CSV output path (default stdout)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInvalidInput;
    }

    try {
        if (coeff->parsed()) {
            const auto clamp = clamp_str.empty() ? ClampPolicy::none : detail::parse_clamp(clamp_str);
            const auto lambdas = grid.grid().points();
            std::vector<io::CoefficientRow> rows;
            io::PlotSpec plot;
            plot.y_label = "coefficient (1/cm)";
            plot.y_scale = log_y ? io::YScale::log10 : io::YScale::linear;
            if (tissue.tissue_file.empty() && is_constituent_name(tissue.name)) {
                const auto c = parse_constituent(tissue.name);
                for (double l : lambdas) rows.push_back({l, mu_a(c, Wavelength(l), clamp).value, std::nullopt});
                plot.title = std::string(to_string(c));
            } else {
                const auto t = detail::resolve_tissue(tissue);
                validate(t.composition);
                validate(t.scattering);
                for (double l : lambdas) {
                    const Wavelength w(l);
                    rows.push_back({l, mu_a_tissue(t.composition, w, clamp).value, reduced_scattering(t.scattering, w)});
                }
                plot.title = t.name;
            }
            if (!svg_path.empty()) {
                std::vector<double> a, s;
                for (const auto& r : rows) {
                    a.push_back(r.mu_a);
                    if (r.mu_s_prime) s.push_back(*r.mu_s_prime);
                }
                plot.series.push_back({"mu_a", SampledSpectrum(lambdas, a)});
                if (!s.empty()) plot.series.push_back({"mu_s'", SampledSpectrum(lambdas, s), {"", true}});
                io::write_svg(plot, svg_path);
            }
            detail::emit(out_path, io::coefficient_csv(rows), out);
            return kOk;
        }

        if (loss->parsed() || windows->parsed() || optimum->parsed()) {
            const auto t = detail::resolve_tissue(tissue);
            const auto slab = SlabGeometry::from_mm(thickness_mm);
            const auto clamp = clamp_str.empty() ? ClampPolicy::non_negative : detail::parse_clamp(clamp_str);
            const auto g = grid.grid();

            if (loss->parsed()) {
                const auto absorption = sweep(t, slab, g, {LossMode::absorption_only, clamp});
                const auto complete = sweep(t, slab, g, {LossMode::complete, clamp});
                if (!svg_path.empty()) {
                    io::PlotSpec plot;
                    plot.title = t.name + ", " + io::format_number(thickness_mm) + " mm";
                    plot.y_label = "pathloss (dB)";
                    plot.y_scale = log_y ? io::YScale::log10 : io::YScale::linear;
                    const bool both = mode_str.empty();
                    const auto mode = both ? LossMode::complete : parse_loss_mode(mode_str);
                    if (both || mode == LossMode::complete) {
                        plot.series.push_back({"complete", detail::series_of(complete, t.name)});
                    }
                    if (both || mode == LossMode::absorption_only) {
                        plot.series.push_back({"absorption only", detail::series_of(absorption, t.name), {"", true}});
                    }
                    io::write_svg(plot, svg_path);
                } else if (!mode_str.empty()) {
                    (void)parse_loss_mode(mode_str);
                }
                detail::emit(out_path, io::sweep_csv(absorption, complete), out);
                return kOk;
            }
            if (windows->parsed()) {
                const auto mode = mode_str.empty() ? LossMode::absorption_only : parse_loss_mode(mode_str);
                const auto s = sweep(t, slab, g, {mode, clamp});
                detail::emit(out_path, detail::window_lines(find_windows(s, threshold_db)), out);
                return kOk;
            }
            const auto mode = mode_str.empty() ? LossMode::complete : parse_loss_mode(mode_str);
            const auto s = sweep(t, slab, g, {mode, clamp});
            const auto best = optimal_wavelength(s);
            const auto it = std::find_if(s.begin(), s.end(), [&](const PathlossPoint& p) { return p.lambda_nm == best.nm(); });
            detail::emit(out_path,
                         "lambda_nm,loss_db\n" + io::format_number(best.nm()) + ',' + io::format_number(it->loss_db) + '\n',
                         out);
            return kOk;
        }

        if (fitcmd->parsed()) {
            const auto data = io::read_spectrum_csv(input_csv);
            FitFamily family;
            if (family_str == "gaussian_sum") family = GaussianSumFamily{k == 0 ? 5 : k};
            else if (family_str == "fourier") family = FourierFamily{k == 0 ? 7 : k};
            else if (family_str == "power_law") family = PowerLawFamily{power_ref};
            else throw InvalidArgument("unknown family '" + family_str + "' (expected gaussian_sum|fourier|power_law)");
            FitInit init;
            if (init_str == "auto_peaks") init = AutoPeaksInit{};
            else if (init_str == "algorithm1_default") init = Algorithm1DefaultInit{};
            else throw InvalidArgument("unknown init '" + init_str + "' (expected auto_peaks|algorithm1_default)");

            const auto report = fit(FitProblem{data, family, stopping, init});
            if (!svg_path.empty()) {
                io::PlotSpec plot;
                plot.title = family_name(family) + " fit";
                plot.y_label = "mu_a (1/cm)";
                plot.series.push_back({"data", data});
                plot.series.push_back(
                    {"model", SampledSpectrum(data.lambda_nm(), fitting::detail::model_values(report.model, data)),
                     {"", true}});
                io::write_svg(plot, svg_path);
            }
            detail::emit(out_path, io::fit_report_to_json(report, family).dump(2) + "\n", out);
            if (!report.converged) {
                err << "fit did not reach nmse < " << io::format_number(stopping.nmse_threshold) << " (nmse "
                    << io::format_number(report.nmse) << ")\n";
                return kNotConverged;
            }
            return kOk;
        }

        // tissues
        PresetRegistry registry;
        if (!tissue.tissue_file.empty()) registry.add(io::read_preset_json(tissue.tissue_file));
        std::vector<TissuePreset> presets;
        for (const auto& n : registry.names()) presets.push_back(registry.lookup(n));
        if (const auto dir = detail::preset_dir()) {
            for (const auto& n : io::preset_names_in_dir(*dir)) {
                if (!registry.find(n)) presets.push_back(*io::find_preset_in_dir(*dir, n));
            }
        }
        std::string text = "name,B,S,W,F,M,f_ray,beta,mu_s_prime_ref,lambda_ref,g\n";
        for (const auto& p : presets) {
            const auto& c = p.composition;
            const auto& s = p.scattering;
            text += p.name;
            for (double v : {c.B, c.S, c.W, c.F, c.M, s.f_ray, s.beta, s.mu_s_prime_ref, s.lambda_ref, s.g}) {
                text += ',' + io::format_number(v);
            }
            text += '\n';
        }
        detail::emit(out_path, text, out);
        return kOk;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIoFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidInput;
    }
}

}  // namespace tissue_optics::cli
