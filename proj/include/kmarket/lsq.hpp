#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>

namespace kmarket::lsq {

/// Fills residuals r(x) and, when the pointer is non-null, the Jacobian dr/dx.
using ResidualFn = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* jacobian)>;

struct Options {
    double gradient_tolerance = 1e-8;  // max |cos| between r and a free Jacobian column
    double step_tolerance = 1e-10;     // scaled step relative to scaled x
    int max_iterations = 200;
};

enum class Termination { ZeroResidual, Gradient, Step, MaxIterations, Stalled };

std::string to_string(Termination t);

struct Result {
    Eigen::VectorXd x;
    double sse = 0;
    int iterations = 0;
    Termination termination = Termination::MaxIterations;

    bool converged() const {
        return termination == Termination::ZeroResidual || termination == Termination::Gradient ||
               termination == Termination::Step;
    }
};

/// Box-constrained Levenberg-Marquardt with Marquardt column scaling.
///
/// Trial points are projected onto the box, and coordinates pinned at a bound
/// whose gradient pushes outward are frozen for the iteration. Every returned x lies inside
/// [lower, upper]; infinite bounds are allowed.
Result solve(const ResidualFn& residual, const Eigen::VectorXd& x0, const Eigen::VectorXd& lower,
             const Eigen::VectorXd& upper, const Options& options = {});

}  // namespace kmarket::lsq
