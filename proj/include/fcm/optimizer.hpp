#pragma once

#include <cctype>
#include <cmath>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "fcm/errors.hpp"
#include "fcm/loss.hpp"

namespace fcm {

enum class OptimizerKind { SGD, RMSProp, Adam };

inline std::string to_string(OptimizerKind k) {
    switch (k) {
    case OptimizerKind::SGD: return "sgd";
    case OptimizerKind::RMSProp: return "rmsprop";
    case OptimizerKind::Adam: return "adam";
    }
    return "?";
}

inline OptimizerKind parse_optimizer(std::string_view text) {
    std::string low;
    for (char c : text) {
        low.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (low == "sgd") {
        return OptimizerKind::SGD;
    }
    if (low == "rmsprop") {
        return OptimizerKind::RMSProp;
    }
    if (low == "adam") {
        return OptimizerKind::Adam;
    }
    throw ConfigError("unknown optimizer '" + std::string(text) + "' (expected sgd, rmsprop or adam)");
}

struct OptimizerConstants {
    double rmsprop_decay = 0.9;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Accumulators for one (W, b) pair. `first` holds Adam's first moment,
/// `second` the mean square (RMSProp) or second moment (Adam).
struct OptimizerState {
    OptimizerKind kind;
    Gradients first;
    Gradients second;
    long steps = 0;
    OptimizerConstants constants{};

    OptimizerState(OptimizerKind k, Eigen::Index r)
        : kind(k), first(Gradients::zeros(r)), second(Gradients::zeros(r)) {}
};

namespace detail {

template <typename Param>
void apply_update(OptimizerState& state, Param& theta, const Param& g, Param& first, Param& second, double lr) {
    const auto& c = state.constants;
    switch (state.kind) {
    case OptimizerKind::SGD:
        theta -= lr * g;
        break;
    case OptimizerKind::RMSProp:
        second = c.rmsprop_decay * second + (1.0 - c.rmsprop_decay) * g.cwiseAbs2();
        theta.array() -= lr * g.array() / (second.array().sqrt() + c.epsilon);
        break;
    case OptimizerKind::Adam: {
        first = c.adam_beta1 * first + (1.0 - c.adam_beta1) * g;
        second = c.adam_beta2 * second + (1.0 - c.adam_beta2) * g.cwiseAbs2();
        const double t = static_cast<double>(state.steps);
        const double correct1 = 1.0 - std::pow(c.adam_beta1, t);
        const double correct2 = 1.0 - std::pow(c.adam_beta2, t);
        theta.array() -= lr * (first.array() / correct1) / ((second.array() / correct2).sqrt() + c.epsilon);
        break;
    }
    }
}

} // namespace detail

/// Applies one update to (W, b) in place.
inline void optimizer_step(OptimizerState& state, Eigen::MatrixXd& weights, Eigen::VectorXd& bias,
                           const Gradients& grads, double lr) {
    if (grads.weights.rows() != weights.rows() || grads.weights.cols() != weights.cols() ||
        grads.bias.size() != bias.size() || state.first.bias.size() != bias.size()) {
        throw ShapeError("gradient and optimizer shapes must match the parameters");
    }
    if (!grads.all_finite()) {
        throw NumericalError("non-finite gradient at optimizer step " + std::to_string(state.steps + 1));
    }
    ++state.steps;
    detail::apply_update(state, weights, grads.weights, state.first.weights, state.second.weights, lr);
    detail::apply_update(state, bias, grads.bias, state.first.bias, state.second.bias, lr);
}

} // namespace fcm
