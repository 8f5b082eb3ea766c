#pragma once

// Least-squares fitting of constituent absorption spectra.
//
// A fit starts from an initial parameter set, runs a damped Gauss-Newton
// (Levenberg-Marquardt) solve, and keeps refining from new starting points
// until the normalized mean square error
//
//     NMSE = ||X - model(X.lambda)||^2 / ||X||^2
//
// falls below the requested threshold or the refinement budget is spent.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tissue_optics/constituents.hpp"
#include "tissue_optics/errors.hpp"
#include "tissue_optics/fitting/gaussian_search.hpp"
#include "tissue_optics/fitting/levenberg_marquardt.hpp"
#include "tissue_optics/spectral_models.hpp"
#include "tissue_optics/spectrum.hpp"

namespace tissue_optics {

/// sum (x_i - m_i)^2 / sum x_i^2
inline double nmse(std::span<const double> data, std::span<const double> model_values) {
    if (data.size() != model_values.size()) throw InvalidArgument("nmse: data and model lengths differ");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double d = data[i] - model_values[i];
        num += d * d;
        den += data[i] * data[i];
    }
    if (den == 0.0) throw UndefinedNormalization("nmse: reference data is identically zero");
    return num / den;
}

inline double nmse(const SampledSpectrum& data, std::span<const double> model_values) {
    return nmse(std::span<const double>(data.values()), model_values);
}

// ---------------------------------------------------------------------------
// Problem description

struct GaussianSumFamily {
    int k = 1;
};

/// k harmonics sharing one fundamental w.
struct FourierFamily {
    int k = 7;
};

struct PowerLawFamily {
    double lambda_ref = 550.0;
};

using FitFamily = std::variant<GaussianSumFamily, FourierFamily, PowerLawFamily>;

struct StoppingRule {
    double nmse_threshold = 1e-3;
    int max_iterations = 500;
};

/// All-zero amplitudes, zero centres, unit widths and w = 0.
struct Algorithm1DefaultInit {};

/// Explicit starting parameters in pack() order.
struct SeededInit {
    std::vector<double> params;
};

/// Data-driven seeds: Gaussian centres at the largest local maxima, Fourier
/// fundamental from a frequency scan, power law from a log-log regression.
struct AutoPeaksInit {};

using FitInit = std::variant<AutoPeaksInit, Algorithm1DefaultInit, SeededInit>;

struct FitProblem {
    SampledSpectrum data;
    FitFamily family;
    StoppingRule stopping{};
    FitInit init = AutoPeaksInit{};
};

struct FitReport {
    ParametricSpectralModel model;
    std::vector<double> coefficients;  // canonical pack() order
    std::vector<std::string> parameter_names;
    double nmse = 0.0;
    int iterations = 0;     // local solves (first solve plus refinement rounds)
    int lm_iterations = 0;  // damped Gauss-Newton steps over all solves
    bool converged = false;
    SampledSpectrum residuals;        // data - model
    std::vector<double> nmse_trace;   // non-increasing
};

inline std::string family_name(const FitFamily& f) {
    switch (f.index()) {
        case 0: return "gaussian_sum";
        case 1: return "fourier";
        default: return "power_law";
    }
}

inline std::size_t free_parameter_count(const FitFamily& f) {
    return std::visit(
        [](const auto& fam) -> std::size_t {
            using T = std::decay_t<decltype(fam)>;
            if constexpr (std::is_same_v<T, GaussianSumFamily>) return 3 * static_cast<std::size_t>(fam.k);
            else if constexpr (std::is_same_v<T, FourierFamily>) return 2 + 2 * static_cast<std::size_t>(fam.k);
            else return 2;
        },
        f);
}

/// Gaussian terms sorted by centre with positive widths.
inline GaussianSumModel canonicalize(GaussianSumModel m) {
    for (auto& t : m.terms) t.width = std::abs(t.width);
    std::stable_sort(m.terms.begin(), m.terms.end(), [](const GaussianTerm& a, const GaussianTerm& b) {
        return a.center < b.center || (a.center == b.center && a.width < b.width);
    });
    return m;
}

namespace fitting::detail {

/// Residual model(x) - y and Jacobian in published parameters.
template <class Model>
class DirectProblem {
public:
    DirectProblem(Model shape, const SampledSpectrum& data) : shape_(std::move(shape)), data_(data) {}

    bool evaluate(const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& J) const {
        Model m = shape_;
        unpack(m, std::span<const double>(p.data(), static_cast<std::size_t>(p.size())));
        const auto n = static_cast<Eigen::Index>(data_.size());
        r.resize(n);
        J.resize(n, p.size());
        std::vector<double> row(static_cast<std::size_t>(p.size()));
        for (Eigen::Index i = 0; i < n; ++i) {
            const double lambda = data_.lambda_nm()[static_cast<std::size_t>(i)];
            r[i] = m.value_at(lambda) - data_.values()[static_cast<std::size_t>(i)];
            gradient(m, lambda, row);
            for (Eigen::Index j = 0; j < p.size(); ++j) J(i, j) = row[static_cast<std::size_t>(j)];
        }
        return true;
    }

private:
    Model shape_;
    const SampledSpectrum& data_;
};

template <class Model>
Eigen::MatrixXd jacobian(const Model& m, const SampledSpectrum& data) {
    const auto p = pack(m);
    Eigen::MatrixXd J(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(p.size()));
    std::vector<double> row(p.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        gradient(m, data.lambda_nm()[i], row);
        for (std::size_t j = 0; j < p.size(); ++j) J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
    }
    return J;
}

/// Throws DegenerateFit when the Jacobian at `m` does not have full column
/// rank, naming the parameters that cannot be resolved.
template <class Model>
void require_full_rank(const Model& m, const SampledSpectrum& data) {
    const Eigen::MatrixXd J = jacobian(m, data);
    const auto names = parameter_names(m);
    const Eigen::Index p = J.cols();
    Eigen::VectorXd norms = J.colwise().norm().transpose();
    std::vector<std::string> bad;
    Eigen::MatrixXd Jn = J;
    for (Eigen::Index j = 0; j < p; ++j) {
        if (!(norms[j] > 1e-300) || !std::isfinite(norms[j])) {
            Jn.col(j).setZero();
        } else {
            Jn.col(j) /= norms[j];
        }
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Jn);
    qr.setThreshold(1e-10);
    const Eigen::Index rank = qr.rank();
    if (rank == p) return;
    const auto perm = qr.colsPermutation().indices();
    for (Eigen::Index j = rank; j < p; ++j) bad.push_back(names[static_cast<std::size_t>(perm[j])]);
    std::sort(bad.begin(), bad.end());
    std::string list;
    for (const auto& b : bad) list += (list.empty() ? "" : ", ") + b;
    throw DegenerateFit("rank-deficient normal equations (rank " + std::to_string(rank) + " of " + std::to_string(p) +
                        "); collinear or unresolvable parameters: " + list);
}

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

/// Centres at the k largest interior local maxima; widths from the half-height
/// extent around each peak; amplitudes at the peak heights. A maximum inside
/// the extent of a stronger accepted peak (noise ripple) is skipped. Missing
/// seeds are returned as fewer terms.
inline std::vector<GaussianTerm> peak_seeds(const SampledSpectrum& data, int k) {
    const auto& x = data.lambda_nm();
    const auto& y = data.values();
    const std::size_t n = data.size();
    std::vector<std::size_t> peaks;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] > 0.0) peaks.push_back(i);
    }
    std::stable_sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t b) { return y[a] > y[b]; });
    std::vector<GaussianTerm> seeds;
    for (std::size_t i : peaks) {
        if (seeds.size() == static_cast<std::size_t>(k)) break;
        const double half = 0.5 * y[i];
        std::size_t lo = i;
        while (lo > 0 && y[lo] > half) --lo;
        std::size_t hi = i;
        while (hi + 1 < n && y[hi] > half) ++hi;
        const double full_width = std::max(x[hi] - x[lo], x[std::min(i + 1, n - 1)] - x[i - 1]);
        const bool ripple = std::any_of(seeds.begin(), seeds.end(),
                                        [&](const GaussianTerm& t) { return std::abs(x[i] - t.center) < t.width; });
        if (!ripple) seeds.push_back({y[i], x[i], 0.5 * full_width});
    }
    return seeds;
}

inline std::vector<double> model_values(const ParametricSpectralModel& model, const SampledSpectrum& data) {
    std::vector<double> v;
    v.reserve(data.size());
    for (double l : data.lambda_nm()) v.push_back(value_at(model, l));
    return v;
}

/// Runs `levenberg_marquardt` on the published parametrization.
template <class Model>
LmResult polish(const Model& m, const SampledSpectrum& data, int max_iterations = 5000) {
    LmOptions opt;
    opt.max_iterations = max_iterations;
    return levenberg_marquardt(DirectProblem<Model>(m, data), to_eigen(pack(m)), opt);
}

template <class Model>
Model with_params(Model m, const Eigen::VectorXd& p) {
    unpack(m, std::span<const double>(p.data(), static_cast<std::size_t>(p.size())));
    return m;
}

struct Outcome {
    ParametricSpectralModel model;
    int iterations = 0;
    int lm_iterations = 0;
    std::vector<double> cost_trace;
};

inline Outcome fit_gaussian(const FitProblem& problem, const GaussianSumFamily& fam) {
    const auto& data = problem.data;
    const auto k = static_cast<Eigen::Index>(fam.k);
    GaussianSumModel start;
    bool needs_fill = false;
    if (std::holds_alternative<Algorithm1DefaultInit>(problem.init)) {
        start.terms.assign(static_cast<std::size_t>(fam.k), GaussianTerm{0.0, 0.0, 1.0});
    } else if (const auto* seeded = std::get_if<SeededInit>(&problem.init)) {
        start.terms.resize(static_cast<std::size_t>(fam.k));
        unpack(start, seeded->params);
    } else {
        start.terms = peak_seeds(data, fam.k);
        needs_fill = start.terms.size() < static_cast<std::size_t>(fam.k);
    }
    for (const auto& t : start.terms) {
        if (t.width == 0.0) throw InvalidArgument("initial Gaussian width must be non-zero");
    }
    if (!needs_fill) require_full_rank(start, data);

    const NormalizedAxis axis(data.lambda_nm());
    const Eigen::VectorXd y = to_eigen(data.values());
    GaussianSearch search(axis.x, y);
    Eigen::VectorXd q(2 * static_cast<Eigen::Index>(start.terms.size()));
    for (std::size_t i = 0; i < start.terms.size(); ++i) {
        const auto [log_s, t] = to_internal(start.terms[i], axis);
        q[2 * static_cast<Eigen::Index>(i)] = log_s;
        q[2 * static_cast<Eigen::Index>(i) + 1] = t;
    }
    if (needs_fill) q = search.fill(q, k);

    const double yy = y.squaredNorm();
    const auto result = search.run(q, {problem.stopping.nmse_threshold * yy, problem.stopping.max_iterations - 1});

    const Eigen::VectorXd alpha = search.problem().amplitudes(result.q);
    GaussianSumModel fitted;
    for (Eigen::Index i = 0; i < k; ++i) {
        fitted.terms.push_back(to_published(result.q[2 * i], result.q[2 * i + 1], alpha[i], axis));
    }
    Outcome out{canonicalize(std::move(fitted)), 1 + result.rounds, result.lm_iterations, result.cost_trace};
    return out;
}

/// NMSE of the linear least-squares fit of `k` harmonics at fundamental `w`.
inline double fourier_profile_cost(const SampledSpectrum& data, int k, double w) {
    const auto n = static_cast<Eigen::Index>(data.size());
    Eigen::MatrixXd B(n, 1 + 2 * k);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double l = data.lambda_nm()[static_cast<std::size_t>(i)];
        B(i, 0) = 1.0;
        for (int h = 1; h <= k; ++h) {
            B(i, 2 * h - 1) = std::cos(h * w * l);
            B(i, 2 * h) = std::sin(h * w * l);
        }
    }
    const Eigen::VectorXd y = to_eigen(data.values());
    const Eigen::VectorXd c = B.colPivHouseholderQr().solve(y);
    return (B * c - y).squaredNorm();
}

inline FourierSeriesModel fourier_linear_fit(const SampledSpectrum& data, int k, double w) {
    const auto n = static_cast<Eigen::Index>(data.size());
    Eigen::MatrixXd B(n, 1 + 2 * k);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double l = data.lambda_nm()[static_cast<std::size_t>(i)];
        B(i, 0) = 1.0;
        for (int h = 1; h <= k; ++h) {
            B(i, 2 * h - 1) = std::cos(h * w * l);
            B(i, 2 * h) = std::sin(h * w * l);
        }
    }
    const Eigen::VectorXd c = B.colPivHouseholderQr().solve(to_eigen(data.values()));
    FourierSeriesModel m;
    m.a0 = c[0];
    for (int h = 1; h <= k; ++h) m.harmonics.push_back({c[2 * h - 1], c[2 * h]});
    m.w = w;
    return m;
}

/// Local minima of the frequency profile over a fundamental period range of
/// [span / 2, 8 span], best first.
inline std::vector<double> fourier_frequency_candidates(const SampledSpectrum& data, int k) {
    const double span = data.lambda_nm().back() - data.lambda_nm().front();
    const double w_lo = 0.25 * std::numbers::pi / span;
    const double w_hi = 4.0 * std::numbers::pi / span;
    constexpr int kSteps = 2000;
    std::vector<double> ws(kSteps + 1);
    std::vector<double> cost(kSteps + 1);
    for (int i = 0; i <= kSteps; ++i) {
        ws[static_cast<std::size_t>(i)] = w_lo + (w_hi - w_lo) * i / kSteps;
        cost[static_cast<std::size_t>(i)] = fourier_profile_cost(data, k, ws[static_cast<std::size_t>(i)]);
    }
    std::vector<std::size_t> minima;
    for (std::size_t i = 0; i <= kSteps; ++i) {
        const bool left = i == 0 || cost[i] <= cost[i - 1];
        const bool right = i == kSteps || cost[i] <= cost[i + 1];
        if (left && right) minima.push_back(i);
    }
    std::stable_sort(minima.begin(), minima.end(), [&](std::size_t a, std::size_t b) { return cost[a] < cost[b]; });
    std::vector<double> out;
    for (std::size_t i : minima) out.push_back(ws[i]);
    return out;
}

inline Outcome fit_fourier(const FitProblem& problem, const FourierFamily& fam) {
    const auto& data = problem.data;
    const double target = problem.stopping.nmse_threshold * to_eigen(data.values()).squaredNorm();
    std::vector<FourierSeriesModel> starts;
    FourierSeriesModel shape;
    shape.harmonics.resize(static_cast<std::size_t>(fam.k));
    if (std::holds_alternative<Algorithm1DefaultInit>(problem.init)) {
        starts.push_back(shape);  // all zero, w = 0
    } else if (const auto* seeded = std::get_if<SeededInit>(&problem.init)) {
        unpack(shape, seeded->params);
        starts.push_back(shape);
    } else {
        for (double w : fourier_frequency_candidates(data, fam.k)) starts.push_back(fourier_linear_fit(data, fam.k, w));
    }
    require_full_rank(starts.front(), data);

    Outcome out{starts.front(), 0, 0, {}};
    double best = INFINITY;
    for (const auto& s : starts) {
        if (out.iterations >= problem.stopping.max_iterations || best < target) break;
        ++out.iterations;
        const auto res = polish(s, data);
        out.lm_iterations += res.iterations;
        if (res.cost < best) {
            if (out.cost_trace.empty()) {
                out.cost_trace = res.cost_trace;
            } else {
                out.cost_trace.push_back(res.cost);
            }
            best = res.cost;
            out.model = with_params(s, res.params);
        }
    }
    return out;
}

inline Outcome fit_power_law(const FitProblem& problem, const PowerLawFamily& fam) {
    const auto& data = problem.data;
    PowerLawModel start{0.0, fam.lambda_ref, 0.0};
    if (std::holds_alternative<Algorithm1DefaultInit>(problem.init)) {
        // a = 0, exponent = 0
    } else if (const auto* seeded = std::get_if<SeededInit>(&problem.init)) {
        unpack(start, seeded->params);
    } else {
        const auto& x = data.lambda_nm();
        const auto& y = data.values();
        const bool positive = std::all_of(y.begin(), y.end(), [](double v) { return v > 0.0; });
        const bool negative = std::all_of(y.begin(), y.end(), [](double v) { return v < 0.0; });
        if (positive || negative) {
            // ln|y| = ln|mu_ref| + exponent * ln(lambda / lambda_ref)
            const auto n = static_cast<Eigen::Index>(x.size());
            Eigen::MatrixXd A(n, 2);
            Eigen::VectorXd b(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                A(i, 0) = 1.0;
                A(i, 1) = std::log(x[static_cast<std::size_t>(i)] / fam.lambda_ref);
                b[i] = std::log(std::abs(y[static_cast<std::size_t>(i)]));
            }
            const Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
            start.mu_ref = (positive ? 1.0 : -1.0) * std::exp(c[0]);
            start.exponent = c[1];
        } else {
            start.mu_ref = y[y.size() / 2];
            start.exponent = -1.0;
        }
    }
    require_full_rank(start, data);
    const auto res = polish(start, data);
    return {with_params(start, res.params), 1, res.iterations, res.cost_trace};
}

}  // namespace fitting::detail

/// Fits `problem.family` to `problem.data`.
///
/// Throws InvalidArgument on bad stopping rules or too few samples (fewer than
/// twice the free parameter count), UndefinedNormalization on all-zero data,
/// and DegenerateFit when the starting point leaves parameters unresolvable.
inline FitReport fit(const FitProblem& problem) {
    const auto& data = problem.data;
    if (!(problem.stopping.nmse_threshold > 0.0)) throw InvalidArgument("nmse_threshold must be > 0");
    if (problem.stopping.max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");
    if (const auto* g = std::get_if<GaussianSumFamily>(&problem.family); g && g->k < 1) {
        throw InvalidArgument("Gaussian sum needs k >= 1");
    }
    if (const auto* f = std::get_if<FourierFamily>(&problem.family); f && f->k < 1) {
        throw InvalidArgument("Fourier series needs k >= 1");
    }
    if (const auto* p = std::get_if<PowerLawFamily>(&problem.family); p && !(p->lambda_ref > 0.0)) {
        throw InvalidArgument("power law reference wavelength must be > 0");
    }
    const std::size_t p = free_parameter_count(problem.family);
    if (data.size() < 2 * p) {
        throw InvalidArgument("insufficient data: " + std::to_string(data.size()) + " samples for " + std::to_string(p) +
                              " free parameters (need at least " + std::to_string(2 * p) + ")");
    }
    if (std::all_of(data.values().begin(), data.values().end(), [](double v) { return v == 0.0; })) {
        throw UndefinedNormalization("cannot fit all-zero data: NMSE normalization is undefined");
    }
    if (const auto* seeded = std::get_if<SeededInit>(&problem.init); seeded && seeded->params.size() != p) {
        throw InvalidArgument("seeded init has " + std::to_string(seeded->params.size()) + " values, family needs " +
                              std::to_string(p));
    }

    fitting::detail::Outcome outcome = std::visit(
        [&](const auto& fam) -> fitting::detail::Outcome {
            using T = std::decay_t<decltype(fam)>;
            if constexpr (std::is_same_v<T, GaussianSumFamily>) return fitting::detail::fit_gaussian(problem, fam);
            else if constexpr (std::is_same_v<T, FourierFamily>) return fitting::detail::fit_fourier(problem, fam);
            else return fitting::detail::fit_power_law(problem, fam);
        },
        problem.family);

    FitReport report;
    report.model = outcome.model;
    report.coefficients = std::visit([](const auto& m) { return pack(m); }, report.model);
    report.parameter_names = std::visit([](const auto& m) { return parameter_names(m); }, report.model);
    const auto values = fitting::detail::model_values(report.model, data);
    report.nmse = nmse(data, values);
    report.iterations = outcome.iterations;
    report.lm_iterations = outcome.lm_iterations;
    report.converged = report.nmse < problem.stopping.nmse_threshold;

    std::vector<double> res(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) res[i] = data.values()[i] - values[i];
    report.residuals = SampledSpectrum(data.lambda_nm(), std::move(res), data.source() + " residuals");

    const double yy = fitting::detail::to_eigen(data.values()).squaredNorm();
    for (double c : outcome.cost_trace) report.nmse_trace.push_back(c / yy);
    return report;
}

/// Family and term count matching the embedded model of `c`.
inline FitFamily constituent_family(Constituent c) {
    switch (c) {
        case Constituent::oxy_blood: return GaussianSumFamily{5};
        case Constituent::deoxy_blood: return GaussianSumFamily{4};
        case Constituent::water: return FourierFamily{7};
        case Constituent::fat: return GaussianSumFamily{5};
        case Constituent::melanin: break;
    }
    throw InvalidArgument("melanin has a closed-form spectrum and is not refitted");
}

/// Refits one of oBlood, dBlood, water or fat to measured data covering at
/// least 450-950 nm, using the same family and term count as the embedded
/// model.
inline FitReport refit_constituent(Constituent c, const SampledSpectrum& data, StoppingRule stopping = {},
                                   FitInit init = AutoPeaksInit{}) {
    const FitFamily family = constituent_family(c);
    if (data.empty() || data.lambda_nm().front() > 450.0 || data.lambda_nm().back() < 950.0) {
        throw InvalidArgument("refit data must cover at least 450-950 nm");
    }
    return fit(FitProblem{data, family, stopping, std::move(init)});
}

/// Side-by-side entry of a refitted coefficient against the embedded value.
struct CoefficientComparison {
    std::string name;
    double embedded;
    double fitted;
    double relative_difference;
};

inline std::vector<CoefficientComparison> compare_with_embedded(Constituent c, const FitReport& report) {
    const ParametricSpectralModel embedded = std::visit(
        [](const auto& m) -> ParametricSpectralModel {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, GaussianSumModel>) return canonicalize(m);
            else return m;
        },
        constituent_model(c));
    const auto ref = std::visit([](const auto& m) { return pack(m); }, embedded);
    const auto names = std::visit([](const auto& m) { return parameter_names(m); }, embedded);
    if (ref.size() != report.coefficients.size()) throw InvalidArgument("report does not match constituent family");
    std::vector<CoefficientComparison> out;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const double rel = ref[i] == 0.0 ? std::abs(report.coefficients[i])
                                         : std::abs(report.coefficients[i] - ref[i]) / std::abs(ref[i]);
        out.push_back({names[i], ref[i], report.coefficients[i], rel});
    }
    return out;
}

}  // namespace tissue_optics
