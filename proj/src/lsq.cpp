#include "kmarket/lsq.hpp"

#include "kmarket/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace kmarket::lsq {

std::string to_string(Termination t) {
    switch (t) {
        case Termination::ZeroResidual: return "zero_residual";
        case Termination::Gradient: return "gradient";
        case Termination::Step: return "step";
        case Termination::MaxIterations: return "max_iterations";
        case Termination::Stalled: return "stalled";
    }
    return "?";
}

namespace {

double sum_sq(const Eigen::VectorXd& r) {
    if (!r.allFinite()) return std::numeric_limits<double>::infinity();
    return r.squaredNorm();
}

}  // namespace

Result solve(const ResidualFn& residual, const Eigen::VectorXd& x0, const Eigen::VectorXd& lower,
             const Eigen::VectorXd& upper, const Options& options) {
    const auto n = x0.size();
    require(lower.size() == n && upper.size() == n, "bounds arity mismatch");
    for (Eigen::Index i = 0; i < n; ++i) require(lower[i] <= upper[i], "empty box");

    Result out;
    out.x = x0;
    for (Eigen::Index i = 0; i < n; ++i) out.x[i] = std::clamp(out.x[i], lower[i], upper[i]);

    Eigen::VectorXd r, r_trial;
    Eigen::MatrixXd J;
    residual(out.x, r, &J);
    out.sse = sum_sq(r);
    if (!std::isfinite(out.sse)) {
        out.termination = Termination::Stalled;
        return out;
    }

    Eigen::VectorXd scale = Eigen::VectorXd::Zero(n);
    double mu = -1;
    double growth = 2;

    for (out.iterations = 0; out.iterations < options.max_iterations; ++out.iterations) {
        if (out.sse == 0) {
            out.termination = Termination::ZeroResidual;
            return out;
        }
        if (!J.allFinite()) {
            out.termination = Termination::Stalled;
            return out;
        }
        const Eigen::VectorXd g = J.transpose() * r;

        // Free set: coordinates not pinned at a bound by an outward gradient.
        std::vector<Eigen::Index> free;
        for (Eigen::Index i = 0; i < n; ++i) {
            const bool at_lo = out.x[i] <= lower[i] && g[i] > 0;
            const bool at_hi = out.x[i] >= upper[i] && g[i] < 0;
            if (!at_lo && !at_hi) free.push_back(i);
        }

        const double rnorm = std::sqrt(out.sse);
        double cosine = 0;
        for (auto i : free) {
            const double cn = J.col(i).norm();
            if (cn > 0) cosine = std::max(cosine, std::abs(g[i]) / (cn * rnorm));
        }
        if (free.empty() || cosine <= options.gradient_tolerance) {
            out.termination = Termination::Gradient;
            return out;
        }

        for (Eigen::Index i = 0; i < n; ++i) scale[i] = std::max(scale[i], J.col(i).norm());
        const auto m = static_cast<Eigen::Index>(free.size());
        Eigen::MatrixXd Jf(J.rows(), m);
        Eigen::VectorXd d(m);
        for (Eigen::Index j = 0; j < m; ++j) {
            Jf.col(j) = J.col(free[static_cast<std::size_t>(j)]);
            d[j] = scale[free[static_cast<std::size_t>(j)]] > 0 ? scale[free[static_cast<std::size_t>(j)]] : 1.0;
        }
        if (mu < 0) mu = 1e-3;

        bool accepted = false;
        while (!accepted) {
            // min ||Jf δ + r||² + mu ||D δ||², solved as an augmented least-squares system.
            Eigen::MatrixXd A(J.rows() + m, m);
            A.topRows(J.rows()) = Jf;
            A.bottomRows(m) = (std::sqrt(mu) * d).asDiagonal();
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(J.rows() + m);
            rhs.head(J.rows()) = -r;
            const Eigen::VectorXd delta = A.colPivHouseholderQr().solve(rhs);

            Eigen::VectorXd trial = out.x;
            for (Eigen::Index j = 0; j < m; ++j) {
                const auto i = free[static_cast<std::size_t>(j)];
                trial[i] = std::clamp(out.x[i] + delta[j], lower[i], upper[i]);
            }
            const Eigen::VectorXd step = trial - out.x;

            double scaled_step = 0, scaled_x = 0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double s = scale[i] > 0 ? scale[i] : 1.0;
                scaled_step += (s * step[i]) * (s * step[i]);
                scaled_x += (s * out.x[i]) * (s * out.x[i]);
            }
            scaled_step = std::sqrt(scaled_step);
            scaled_x = std::sqrt(scaled_x);

            if (scaled_step <= options.step_tolerance * (scaled_x + options.step_tolerance)) {
                out.termination = Termination::Step;
                return out;
            }

            residual(trial, r_trial, nullptr);
            const double sse_trial = sum_sq(r_trial);
            const double predicted = out.sse - (r + J * step).squaredNorm();
            const double actual = out.sse - sse_trial;
            const double rho = predicted > 0 ? actual / predicted : (actual > 0 ? 1.0 : -1.0);

            if (std::isfinite(sse_trial) && actual > 0 && rho > 1e-4) {
                out.x = trial;
                const double prev = out.sse;
                out.sse = sse_trial;
                residual(out.x, r, &J);
                mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
                growth = 2;
                accepted = true;
                if (prev - out.sse <= 1e-15 * prev && scaled_step <= 1e-8 * (scaled_x + 1e-8)) {
                    out.termination = Termination::Step;
                    return out;
                }
            } else {
                mu *= growth;
                growth *= 2;
                if (!std::isfinite(mu) || mu > 1e30) {
                    out.termination = Termination::Stalled;
                    return out;
                }
            }
        }
    }
    out.termination = Termination::MaxIterations;
    return out;
}

}  // namespace kmarket::lsq
