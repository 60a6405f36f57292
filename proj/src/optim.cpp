#include "semicp/optim.hpp"

#include <cmath>
#include <limits>

namespace semicp {

namespace {

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

AdamState AdamState::init(Eigen::VectorXd x0, double lr) {
    AdamState s;
    s.m = Eigen::VectorXd::Zero(x0.size());
    s.v = Eigen::VectorXd::Zero(x0.size());
    s.x = std::move(x0);
    s.lr = lr;
    return s;
}

void adam_step_inplace(AdamState& state, const Eigen::VectorXd& gradient) {
    if (gradient.size() != state.x.size())
        throw Error("gradient length " + std::to_string(gradient.size()) +
                    " does not match parameter length " + std::to_string(state.x.size()));
    if (!all_finite(gradient)) throw NonFiniteGradientError();

    state.step += 1;
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * gradient;
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * gradient.cwiseProduct(gradient);
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    const Eigen::ArrayXd m_hat = state.m.array() / bc1;
    const Eigen::ArrayXd v_hat = state.v.array() / bc2;
    state.x.array() -= state.lr * m_hat / (v_hat.sqrt() + state.eps);
}

AdamState adam_step(const AdamState& state, const Eigen::VectorXd& gradient) {
    AdamState next = state;
    adam_step_inplace(next, gradient);
    return next;
}

MinimizeResult minimize(const LossAndGrad& f, const Eigen::VectorXd& x0,
                        const ConvergencePolicy& policy, double lr) {
    MinimizeResult result;
    AdamState state = AdamState::init(x0, lr);
    double best = std::numeric_limits<double>::infinity();
    result.x = x0;
    int bad = 0;

    for (int it = 0; it < policy.max_iterations; ++it) {
        const auto [loss, grad] = f(state.x);
        if (!std::isfinite(loss) || !all_finite(grad)) {
            result.error = true;
            result.error_message = std::isfinite(loss) ? "non-finite gradient" : "non-finite loss";
            break;
        }
        result.trace.push_back(loss);
        result.iterations = it + 1;

        const bool significant =
            !std::isfinite(best) ||
            (best - loss) > policy.rel_improvement * std::max(std::abs(best), 1e-30);
        if (loss < best) {
            best = loss;
            result.x = state.x;
        }
        if (significant) {
            bad = 0;
        } else if (++bad >= policy.patience) {
            result.converged_early = true;
            break;
        }
        adam_step_inplace(state, grad);
    }
    return result;
}

double check_gradient(const LossAndGrad& f, const Eigen::VectorXd& x, double h) {
    const auto [loss0, analytic] = f(x);
    (void)loss0;
    Eigen::VectorXd probe = x;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + h;
        const double lp = f(probe).first;
        probe[i] = x[i] - h;
        const double lm = f(probe).first;
        probe[i] = x[i];
        const double numeric = (lp - lm) / (2.0 * h);
        const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
        worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
    }
    return worst;
}

}  // namespace semicp
