#pragma once

// Levenberg-Marquardt with multiplicative damping on the Marquardt-scaled
// normal equations. Uphill steps are never accepted, so the recorded cost
// trace is non-increasing.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

namespace tissue_optics::fitting {

struct LmOptions {
    double initial_damping = 1e-3;
    double damping_factor = 10.0;  // multiply on reject, divide on accept
    double max_damping = 1e16;
    int max_iterations = 2000;
    // Stop after `stall_limit` consecutive accepted steps whose relative cost
    // decrease is below `stall_tolerance`.
    double stall_tolerance = 1e-10;
    int stall_limit = 5;
};

struct LmResult {
    Eigen::VectorXd params;
    double cost = 0.0;  // sum of squared residuals
    int iterations = 0;
    std::vector<double> cost_trace;  // cost after the start and every accepted step
};

/// `Problem` must provide
///   bool evaluate(const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd& J) const;
/// returning false when `x` is outside the feasible set, and may provide
///   void limit_step(const Eigen::VectorXd& x, Eigen::VectorXd& dx) const;
template <class Problem>
LmResult levenberg_marquardt(const Problem& problem, Eigen::VectorXd x, const LmOptions& opt = {}) {
    Eigen::VectorXd r;
    Eigen::MatrixXd J;
    LmResult out;
    if (!problem.evaluate(x, r, J) || !r.allFinite()) {
        out.params = std::move(x);
        out.cost = INFINITY;
        return out;
    }
    double cost = r.squaredNorm();
    out.cost_trace.push_back(cost);
    double mu = opt.initial_damping;
    int stall = 0;

    Eigen::VectorXd r_new;
    Eigen::MatrixXd J_new;
    for (int it = 0; it < opt.max_iterations && cost > 0.0; ++it) {
        ++out.iterations;
        const Eigen::MatrixXd A = J.transpose() * J;
        const Eigen::VectorXd g = J.transpose() * r;
        const double floor = 1e-30 * std::max(A.diagonal().maxCoeff(), 1e-300);
        const Eigen::VectorXd D = A.diagonal().cwiseMax(floor);

        bool accepted = false;
        while (mu < opt.max_damping) {
            Eigen::MatrixXd B = A;
            B.diagonal() += mu * D;
            Eigen::VectorXd dx = B.ldlt().solve(-g);
            if (!dx.allFinite()) {
                mu *= opt.damping_factor;
                continue;
            }
            if constexpr (requires { problem.limit_step(x, dx); }) problem.limit_step(x, dx);
            Eigen::VectorXd x_new = x + dx;
            if (problem.evaluate(x_new, r_new, J_new) && r_new.allFinite()) {
                const double c = r_new.squaredNorm();
                if (c < cost) {
                    const double rel = (cost - c) / cost;
                    x.swap(x_new);
                    r.swap(r_new);
                    J.swap(J_new);
                    cost = c;
                    out.cost_trace.push_back(cost);
                    mu = std::max(mu / opt.damping_factor, 1e-20);
                    stall = rel < opt.stall_tolerance ? stall + 1 : 0;
                    accepted = true;
                    break;
                }
            }
            mu *= opt.damping_factor;
        }
        if (!accepted || stall >= opt.stall_limit) break;
    }
    out.params = std::move(x);
    out.cost = cost;
    return out;
}

}  // namespace tissue_optics::fitting
