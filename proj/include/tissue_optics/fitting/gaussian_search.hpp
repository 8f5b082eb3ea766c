#pragma once

// Global search for Gaussian-sum fits.
//
// Internally each term is written as alpha * exp(-s x^2 + t x) on the
// normalized axis x = (lambda - mid) / half_span, with sigma = ln s. The
// amplitudes alpha enter linearly and are eliminated by variable projection,
// leaving 2k well-scaled nonlinear parameters (sigma_i, t_i). Broad terms
// whose centre lies far outside the data (huge a, b, c in the published
// parametrization) stay O(1) here.
//
// The search runs a local solve from the initial terms, then alternates two
// kinds of refinement round until the NMSE target is met or the round budget
// runs out:
//   * swap: drop one term, re-solve, and try the dictionary atoms that best
//     explain the remaining residual in its place;
//   * hop:  same, after a random perturbation of the surviving terms
//     (fixed-seed generator, so the search is deterministic).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "tissue_optics/fitting/levenberg_marquardt.hpp"
#include "tissue_optics/spectral_models.hpp"

namespace tissue_optics::fitting::detail {

inline constexpr double kMinLogS = -11.512925464970229;  // ln 1e-5
inline constexpr double kMaxLogS = 11.512925464970229;   // ln 1e5

// Largest t^2 / (4 s), the log of the ratio between a term's published
// amplitude and its internal one. Beyond it the published form overflows.
inline constexpr double kMaxLogAmplitudeRatio = 300.0;

inline bool representable(double log_s, double t) {
    return t * t / (4.0 * std::exp(log_s)) <= kMaxLogAmplitudeRatio;
}

struct NormalizedAxis {
    double mid;
    double half_span;
    Eigen::VectorXd x;

    explicit NormalizedAxis(std::span<const double> lambda)
        : mid(0.5 * (lambda.front() + lambda.back())),
          half_span(0.5 * (lambda.back() - lambda.front())),
          x(static_cast<Eigen::Index>(lambda.size())) {
        for (std::size_t i = 0; i < lambda.size(); ++i) x[static_cast<Eigen::Index>(i)] = (lambda[i] - mid) / half_span;
    }
};

inline Eigen::VectorXd gaussian_atom(const Eigen::VectorXd& x, double log_s, double t) {
    return (-std::exp(log_s) * x.array().square() + t * x.array()).exp().matrix();
}

/// (a, b, c) -> (sigma, t); amplitude handled by the linear solve.
inline std::pair<double, double> to_internal(const GaussianTerm& term, const NormalizedAxis& axis) {
    const double s = std::pow(axis.half_span / term.width, 2);
    const double d = (term.center - axis.mid) / axis.half_span;
    return {std::clamp(std::log(s), kMinLogS, kMaxLogS), 2.0 * s * d};
}

inline GaussianTerm to_published(double log_s, double t, double alpha, const NormalizedAxis& axis) {
    const double s = std::exp(log_s);
    const double d = t / (2.0 * s);
    return {alpha * std::exp(s * d * d), axis.mid + axis.half_span * d, axis.half_span / std::sqrt(s)};
}

/// Variable-projection residual for the nonlinear parameters q = [sigma_1, t_1, ...].
class VarProProblem {
public:
    VarProProblem(const Eigen::VectorXd& x, const Eigen::VectorXd& y) : x_(x), y_(y) {}

    [[nodiscard]] Eigen::MatrixXd basis(const Eigen::VectorXd& q) const {
        const Eigen::Index k = q.size() / 2;
        Eigen::MatrixXd P(x_.size(), k);
        for (Eigen::Index i = 0; i < k; ++i) P.col(i) = gaussian_atom(x_, q[2 * i], q[2 * i + 1]);
        return P;
    }

    /// Least-squares amplitudes for the given nonlinear parameters.
    [[nodiscard]] Eigen::VectorXd amplitudes(const Eigen::VectorXd& q) const {
        const Eigen::MatrixXd P = basis(q);
        const Eigen::VectorXd norms = P.colwise().norm().transpose();
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(P * norms.cwiseInverse().asDiagonal());
        return qr.solve(y_).cwiseQuotient(norms);
    }

    bool evaluate(const Eigen::VectorXd& q, Eigen::VectorXd& r, Eigen::MatrixXd& J) const {
        const Eigen::Index k = q.size() / 2;
        for (Eigen::Index i = 0; i < k; ++i) {
            if (!(q[2 * i] >= kMinLogS && q[2 * i] <= kMaxLogS)) return false;
            if (!representable(q[2 * i], q[2 * i + 1])) return false;
        }
        const Eigen::MatrixXd P = basis(q);
        const Eigen::VectorXd norms = P.colwise().norm().transpose();
        if (!norms.allFinite() || (norms.array() <= 0.0).any()) return false;
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(P * norms.cwiseInverse().asDiagonal());
        const Eigen::VectorXd alpha = qr.solve(y_).cwiseQuotient(norms);
        r = P * alpha - y_;
        const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(x_.size(), k);
        // Kaufman's approximation: project the partial derivatives of the
        // model onto the orthogonal complement of the basis.
        J.resize(x_.size(), 2 * k);
        for (Eigen::Index i = 0; i < k; ++i) {
            const double s = std::exp(q[2 * i]);
            const Eigen::VectorXd d_sigma = (-s * x_.array().square() * P.col(i).array()).matrix() * alpha[i];
            const Eigen::VectorXd d_t = (x_.array() * P.col(i).array()).matrix() * alpha[i];
            J.col(2 * i) = d_sigma - Q * (Q.transpose() * d_sigma);
            J.col(2 * i + 1) = d_t - Q * (Q.transpose() * d_t);
        }
        return true;
    }

    /// Caps the change in sigma at one e-fold per step.
    void limit_step(const Eigen::VectorXd&, Eigen::VectorXd& dq) const {
        double largest = 0.0;
        for (Eigen::Index i = 0; i < dq.size(); i += 2) largest = std::max(largest, std::abs(dq[i]));
        if (largest > 1.0) dq /= largest;
    }

private:
    const Eigen::VectorXd& x_;
    const Eigen::VectorXd& y_;
};

/// Candidate single-term atoms on a (sigma, centre) lattice, plus off-range
/// tails for broad atoms.
class AtomDictionary {
public:
    explicit AtomDictionary(const Eigen::VectorXd& x) {
        for (double log_s = std::log(1e-4); log_s <= std::log(3e4); log_s += 0.35) {
            const double s = std::exp(log_s);
            const double step = std::min(0.04, 0.35 / std::sqrt(s));
            for (double d = -1.2; d <= 1.2; d += step) params_.emplace_back(log_s, 2.0 * s * d);
            for (double t : {0.05, 0.1, 0.2, 0.4, 0.7, 1.0, 1.5, 2.0, 3.0, 5.0, 8.0, 12.0, 20.0}) {
                if (t / (2.0 * s) > 1.2 && representable(log_s, t)) {
                    params_.emplace_back(log_s, -t);
                    params_.emplace_back(log_s, t);
                }
            }
        }
        // Atoms are unit-normalized and kept in single precision: scoring is
        // a ranking heuristic and this halves the memory traffic per call.
        atoms_.resize(x.size(), static_cast<Eigen::Index>(params_.size()));
        for (std::size_t j = 0; j < params_.size(); ++j) {
            const Eigen::VectorXd a = gaussian_atom(x, params_[j].first, params_[j].second);
            atoms_.col(static_cast<Eigen::Index>(j)) = (a / a.norm()).cast<float>();
        }
    }

    /// Up to `count` atoms ranked by how much of the residual of `y`, after
    /// projection onto the terms in `q`, each one would remove.
    [[nodiscard]] std::vector<std::pair<double, double>> best_atoms(const VarProProblem& problem, const Eigen::VectorXd& q,
                                                                    const Eigen::VectorXd& y, int count) const {
        const Eigen::Index k = q.size() / 2;
        // Rows 0..k-1: orthonormal basis of the current terms; row k: residual.
        Eigen::MatrixXd probes(y.size(), k + 1);
        if (k > 0) {
            const Eigen::MatrixXd P = problem.basis(q);
            const Eigen::VectorXd norms = P.colwise().norm().transpose();
            Eigen::HouseholderQR<Eigen::MatrixXd> qr(P * norms.cwiseInverse().asDiagonal());
            probes.leftCols(k) = qr.householderQ() * Eigen::MatrixXd::Identity(y.size(), k);
            probes.col(k) = y - probes.leftCols(k) * (probes.leftCols(k).transpose() * y);
        } else {
            probes.col(0) = y;
        }
        const Eigen::MatrixXf proj = probes.cast<float>().transpose() * atoms_;
        const Eigen::VectorXf numer = proj.row(k).transpose();
        Eigen::VectorXf denom = Eigen::VectorXf::Ones(proj.cols());
        if (k > 0) denom -= proj.topRows(k).colwise().squaredNorm().transpose();

        std::vector<std::pair<double, std::size_t>> scored;
        for (std::size_t j = 0; j < params_.size(); ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            // Skip atoms nearly inside the span of the current terms.
            if (!(denom[jj] > 1e-4f)) continue;
            scored.emplace_back(double(numer[jj]) * numer[jj] / denom[jj], j);
        }
        const auto n = std::min<std::size_t>(static_cast<std::size_t>(count), scored.size());
        std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(),
                          [](const auto& a, const auto& b) { return a.first > b.first; });
        std::vector<std::pair<double, double>> out;
        for (std::size_t i = 0; i < n; ++i) out.push_back(params_[scored[i].second]);
        return out;
    }

private:
    std::vector<std::pair<double, double>> params_;
    Eigen::MatrixXf atoms_;
};

inline Eigen::VectorXd append_term(const Eigen::VectorXd& q, std::pair<double, double> atom) {
    Eigen::VectorXd out(q.size() + 2);
    out << q, atom.first, atom.second;
    return out;
}

inline Eigen::VectorXd drop_term(const Eigen::VectorXd& q, Eigen::Index term) {
    Eigen::VectorXd out(q.size() - 2);
    Eigen::Index c = 0;
    for (Eigen::Index j = 0; j < q.size() / 2; ++j) {
        if (j == term) continue;
        out[c++] = q[2 * j];
        out[c++] = q[2 * j + 1];
    }
    return out;
}

struct SearchBudget {
    double target_cost;  // stop once the cost drops below this
    int max_rounds;      // local solves allowed after the first
};

struct SearchResult {
    Eigen::VectorXd q;
    double cost = INFINITY;
    int rounds = 0;
    int lm_iterations = 0;
    std::vector<double> cost_trace;  // incumbent cost, non-increasing
};

class GaussianSearch {
public:
    GaussianSearch(const Eigen::VectorXd& x, const Eigen::VectorXd& y) : x_(x), y_(y), problem_(x_, y_) {}

    [[nodiscard]] const VarProProblem& problem() const noexcept { return problem_; }

    /// Completes `q` to `k` terms with the best dictionary atoms, refining
    /// after each addition.
    Eigen::VectorXd fill(Eigen::VectorXd q, Eigen::Index k) {
        while (q.size() / 2 < k) {
            const auto atoms = dictionary().best_atoms(problem_, q, y_, 1);
            if (atoms.empty()) break;
            q = append_term(q, atoms.front());
            q = local(q, 300).params;
        }
        return q;
    }

    SearchResult run(const Eigen::VectorXd& q0, SearchBudget budget) {
        SearchResult best;
        auto first = local(q0, 5000);
        best.q = first.params;
        best.cost = first.cost;
        best.cost_trace = first.cost_trace;
        best.lm_iterations = first.iterations;
        const Eigen::Index k = q0.size() / 2;

        auto done = [&] { return best.cost < budget.target_cost || best.rounds >= budget.max_rounds; };
        auto offer = [&](const Eigen::VectorXd& candidate) {
            ++best.rounds;
            auto res = local(candidate, 1000);
            best.lm_iterations += res.iterations;
            if (res.cost < best.cost * (1.0 - 1e-6)) {
                best.q = res.params;
                best.cost = res.cost;
                best.cost_trace.push_back(best.cost);
                return true;
            }
            return false;
        };

        // Swap rounds until a full pass brings no improvement.
        for (bool improved = true; improved && !done();) {
            improved = false;
            for (Eigen::Index i = 0; i < k && !done(); ++i) {
                Eigen::VectorXd reduced = local(drop_term(best.q, i), 300).params;
                for (const auto& atom : dictionary().best_atoms(problem_, reduced, y_, 4)) {
                    if (done()) break;
                    improved |= offer(append_term(reduced, atom));
                }
            }
        }

        // Perturbed hops.
        std::mt19937_64 rng(0x7155'0e07'1c5ULL);
        std::normal_distribution<double> jitter(0.0, 0.3);
        for (int hop = 0; !done(); ++hop) {
            const auto term = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(k));
            Eigen::VectorXd reduced = drop_term(best.q, term);
            if (hop % 2 == 1) {
                for (Eigen::Index j = 0; j < reduced.size(); ++j) {
                    reduced[j] += (j % 2 == 0) ? jitter(rng) : jitter(rng) * std::max(1.0, 0.2 * std::abs(reduced[j]));
                }
            }
            reduced = local(reduced, 200).params;
            const auto atoms = dictionary().best_atoms(problem_, reduced, y_, 8);
            if (atoms.empty()) {
                ++best.rounds;
                continue;
            }
            offer(append_term(reduced, atoms[rng() % atoms.size()]));
        }
        return best;
    }

private:
    LmResult local(const Eigen::VectorXd& q, int max_iterations) const {
        if (q.size() == 0) return {q, y_.squaredNorm(), 0, {y_.squaredNorm()}};
        LmOptions opt;
        opt.max_iterations = max_iterations;
        return levenberg_marquardt(problem_, q, opt);
    }

    const AtomDictionary& dictionary() {
        if (dictionary_.empty()) dictionary_.emplace_back(x_);
        return dictionary_.front();
    }

    const Eigen::VectorXd& x_;
    const Eigen::VectorXd& y_;
    VarProProblem problem_;
    std::vector<AtomDictionary> dictionary_;  // built on first use
};

}  // namespace tissue_optics::fitting::detail
