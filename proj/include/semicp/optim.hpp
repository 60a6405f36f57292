#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "semicp/error.hpp"

namespace semicp {

/// Loss callable: returns (loss, gradient) at the given parameter vector.
using LossAndGrad = std::function<std::pair<double, Eigen::VectorXd>(const Eigen::VectorXd&)>;

struct AdamState {
    Eigen::VectorXd x;
    Eigen::VectorXd m;
    Eigen::VectorXd v;
    long step = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState init(Eigen::VectorXd x0, double lr);
};

/// One bias-corrected Adam update in place. Throws NonFiniteGradientError.
void adam_step_inplace(AdamState& state, const Eigen::VectorXd& gradient);

/// Value-semantics variant of adam_step_inplace.
AdamState adam_step(const AdamState& state, const Eigen::VectorXd& gradient);

struct ConvergencePolicy {
    int max_iterations = 500;
    double rel_improvement = 1e-5;  // vs. the best loss seen
    int patience = 20;              // iterations without significant improvement
};

struct MinimizeResult {
    Eigen::VectorXd x;          // best-loss iterate seen, not the last
    std::vector<double> trace;  // loss per iteration
    int iterations = 0;
    bool converged_early = false;
    bool error = false;  // non-finite loss or gradient; x is best-so-far
    std::string error_message;
};

/// Adam descent with best-iterate tracking and a relative-improvement /
/// patience early stop. One loss evaluation per iteration; the step taken at
/// the final iteration is never evaluated.
MinimizeResult minimize(const LossAndGrad& f, const Eigen::VectorXd& x0,
                        const ConvergencePolicy& policy, double lr);

/// Max relative error between the analytic gradient and central finite
/// differences, denominator max(|analytic|, |numeric|, 1e-8).
double check_gradient(const LossAndGrad& f, const Eigen::VectorXd& x, double h);

}  // namespace semicp
