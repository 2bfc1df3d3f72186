#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "fcm/errors.hpp"

namespace fcm {

/// Slope of the shifted sigmoid used as the concept activation function.
class ActivationConfig {
public:
    explicit ActivationConfig(double lambda = 1.0) : lambda_(lambda) {
        if (!(lambda > 0.0) || !std::isfinite(lambda)) {
            throw ConfigError("activation slope lambda must be a positive finite number, got " +
                              std::to_string(lambda));
        }
    }

    double lambda() const { return lambda_; }

    friend bool operator==(const ActivationConfig&, const ActivationConfig&) = default;

private:
    double lambda_;
};

namespace detail {

// |exponent| is clamped here; exp(500) is still finite.
inline constexpr double kExpClamp = 500.0;
// Saturated outputs are pushed back into the open interval (0, 1).
inline constexpr double kStateCeil = 1.0 - 0x1.0p-53;
inline constexpr double kStateFloor = std::numeric_limits<double>::min();

/// 1 / (1 + exp(-slope * (z - threshold))), kept strictly inside (0, 1).
inline double squash(double z, double slope, double threshold) {
    const double arg = std::clamp(-slope * (z - threshold), -kExpClamp, kExpClamp);
    return std::clamp(1.0 / (1.0 + std::exp(arg)), kStateFloor, kStateCeil);
}

} // namespace detail

/// f(z) = 1 / (1 + exp(-lambda (z - 0.5))). Fixed point at 0.5.
inline double activate(double z, const ActivationConfig& cfg) {
    return detail::squash(z, cfg.lambda(), 0.5);
}

inline Eigen::MatrixXd activate(const Eigen::MatrixXd& z, const ActivationConfig& cfg) {
    return z.unaryExpr([&](double v) { return activate(v, cfg); });
}

/// f'(H) recovered from A = f(H): lambda * A * (1 - A), elementwise.
inline Eigen::MatrixXd activation_derivative(const Eigen::MatrixXd& a, const ActivationConfig& cfg) {
    return (cfg.lambda() * a.array() * (1.0 - a.array())).matrix();
}

inline double activation_derivative(double a, const ActivationConfig& cfg) {
    return cfg.lambda() * a * (1.0 - a);
}

} // namespace fcm
