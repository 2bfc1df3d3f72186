#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fcm/activation.hpp"
#include "fcm/errors.hpp"
#include "fcm/model.hpp"

namespace fcm {

/// Gradient of the cost with respect to (W, b).
struct Gradients {
    Eigen::MatrixXd weights;
    Eigen::VectorXd bias;

    static Gradients zeros(Eigen::Index r) {
        return {Eigen::MatrixXd::Zero(r, r), Eigen::VectorXd::Zero(r)};
    }

    Gradients& operator+=(const Gradients& other) {
        weights += other.weights;
        bias += other.bias;
        return *this;
    }

    bool all_finite() const { return weights.allFinite() && bias.allFinite(); }
};

/// Log loss pairs with FCMB, softmax cross-entropy with FCMMC.
enum class LossKind { LogLoss, SoftmaxCrossEntropy };

inline LossKind loss_kind_for(Variant v) {
    return v == Variant::FCMB ? LossKind::LogLoss : LossKind::SoftmaxCrossEntropy;
}

inline constexpr double kLogLossEpsilon = 1e-12;

/// Column-wise softmax with per-column max subtraction.
inline Eigen::MatrixXd softmax(const Eigen::MatrixXd& y) {
    Eigen::MatrixXd out(y.rows(), y.cols());
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
        const double top = y.col(j).maxCoeff();
        out.col(j) = (y.col(j).array() - top).exp().matrix();
        out.col(j) /= out.col(j).sum();
    }
    return out;
}

namespace detail {

inline void check_label_count(Eigen::Index columns, std::span<const int> labels) {
    if (static_cast<std::size_t>(columns) != labels.size()) {
        throw ShapeError("got " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(columns) + " observations");
    }
    if (labels.empty()) {
        throw ShapeError("loss needs at least one observation");
    }
}

} // namespace detail

/// Mean binary log loss of 1 x m predictions; predictions are clipped to [eps, 1 - eps].
inline double logloss(const Eigen::MatrixXd& y_tilde, std::span<const int> labels) {
    if (y_tilde.rows() != 1) {
        throw ShapeError("log loss expects a single output row");
    }
    detail::check_label_count(y_tilde.cols(), labels);
    double total = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int y = labels[i];
        if (y != 0 && y != 1) {
            throw DataError("log loss labels must be 0 or 1, got " + std::to_string(y));
        }
        const double p = std::clamp(y_tilde(0, static_cast<Eigen::Index>(i)), kLogLossEpsilon,
                                    1.0 - kLogLossEpsilon);
        total += y == 1 ? std::log(p) : std::log(1.0 - p);
    }
    return -total / static_cast<double>(labels.size());
}

/// Mean cross-entropy of softmax(y_tilde) against integer labels.
inline double softmax_cross_entropy(const Eigen::MatrixXd& y_tilde, std::span<const int> labels) {
    detail::check_label_count(y_tilde.cols(), labels);
    double total = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int y = labels[i];
        if (y < 0 || y >= y_tilde.rows()) {
            throw DataError("label " + std::to_string(y) + " outside 0.." + std::to_string(y_tilde.rows() - 1));
        }
        const auto col = y_tilde.col(static_cast<Eigen::Index>(i));
        const double top = col.maxCoeff();
        const double log_norm = top + std::log((col.array() - top).exp().sum());
        total += log_norm - col(y);
    }
    return total / static_cast<double>(labels.size());
}

inline void check_loss_pairing(LossKind kind, const FcmModel& model) {
    if (kind != loss_kind_for(model.variant())) {
        throw ConfigError(kind == LossKind::LogLoss ? "log loss requires an FCMB model"
                                                    : "softmax cross-entropy requires an FCMMC model");
    }
}

/// Loss of the output concepts of a final state.
inline double loss_value(const Eigen::MatrixXd& final_state, std::span<const int> labels, LossKind kind,
                         const FcmModel& model) {
    check_loss_pairing(kind, model);
    const Eigen::MatrixXd y_tilde = extract(final_state, model);
    return kind == LossKind::LogLoss ? logloss(y_tilde, labels) : softmax_cross_entropy(y_tilde, labels);
}

/// Cost J(X, W, b): forward pass then loss.
inline double cost(const Eigen::MatrixXd& x, std::span<const int> labels, LossKind kind, const FcmModel& model) {
    return loss_value(forward(x, model).final(), labels, kind, model);
}

/// dL/dH^(d): derivative of the loss with respect to the last pre-activation.
///
/// Input-concept rows are zero. For log loss the output row simplifies to
/// lambda (y~ - y) / m. For softmax cross-entropy the chain runs through the
/// softmax and then the sigmoid: lambda A (1 - A) (softmax(y~) - onehot) / m.
inline Eigen::MatrixXd loss_output_gradient(const Eigen::MatrixXd& final_state, std::span<const int> labels,
                                            LossKind kind, const FcmModel& model) {
    check_loss_pairing(kind, model);
    if (final_state.rows() != model.state_size()) {
        throw ShapeError("final state must have " + std::to_string(model.state_size()) + " rows");
    }
    detail::check_label_count(final_state.cols(), labels);
    const Eigen::Index n = model.inputs();
    const Eigen::Index m = final_state.cols();
    const double inv_m = 1.0 / static_cast<double>(m);
    const double lambda = model.activation().lambda();

    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(final_state.rows(), m);
    if (kind == LossKind::LogLoss) {
        for (Eigen::Index j = 0; j < m; ++j) {
            const int y = labels[static_cast<std::size_t>(j)];
            if (y != 0 && y != 1) {
                throw DataError("log loss labels must be 0 or 1, got " + std::to_string(y));
            }
            e(n, j) = lambda * (final_state(n, j) - y) * inv_m;
        }
        return e;
    }

    const Eigen::MatrixXd y_tilde = final_state.bottomRows(model.outputs());
    Eigen::MatrixXd dl = softmax(y_tilde);
    for (Eigen::Index j = 0; j < m; ++j) {
        const int y = labels[static_cast<std::size_t>(j)];
        if (y < 0 || y >= model.outputs()) {
            throw DataError("label " + std::to_string(y) + " outside 0.." + std::to_string(model.outputs() - 1));
        }
        dl(y, j) -= 1.0;
    }
    e.bottomRows(model.outputs()) =
        (activation_derivative(y_tilde, model.activation()).array() * dl.array() * inv_m).matrix();
    return e;
}

/// Per-step gradient terms (dW_t, db_t) for t = 0 .. d-1 of the unrolled map.
///
/// E starts as dL/dH^(d). Walking t from d-1 down to 0, dW_t = E A^(t)^T and
/// db_t = row sums of E; E is then pushed back through the shared W and
/// multiplied by f'(H^(t)) = lambda A^(t) (1 - A^(t)). A^(0) is the encoded
/// input, so no activation derivative is taken there.
inline std::vector<Gradients> backprop_layers(const Trajectory& trajectory, std::span<const int> labels,
                                              LossKind kind, const FcmModel& model) {
    if (trajectory.depth() != model.depth()) {
        throw ShapeError("trajectory depth " + std::to_string(trajectory.depth()) + " does not match model depth " +
                         std::to_string(model.depth()));
    }
    for (const auto& s : trajectory.states) {
        if (s.rows() != model.state_size() || s.cols() != trajectory.initial().cols()) {
            throw ShapeError("trajectory states do not conform to the model");
        }
    }
    const int d = model.depth();
    std::vector<Gradients> layers(static_cast<std::size_t>(d));
    Eigen::MatrixXd e = loss_output_gradient(trajectory.final(), labels, kind, model);
    for (int t = d - 1; t >= 0; --t) {
        const Eigen::MatrixXd& a = trajectory.states[static_cast<std::size_t>(t)];
        auto& g = layers[static_cast<std::size_t>(t)];
        g.weights = e * a.transpose();
        g.bias = e.rowwise().sum();
        if (t > 0) {
            e = ((model.weights().transpose() * e).array() *
                 activation_derivative(a, model.activation()).array())
                    .matrix();
        }
    }
    return layers;
}

/// Gradient of the cost: the per-step terms summed over the shared weights.
inline Gradients backprop(const Trajectory& trajectory, std::span<const int> labels, LossKind kind,
                          const FcmModel& model) {
    Gradients total = Gradients::zeros(model.state_size());
    for (const auto& g : backprop_layers(trajectory, labels, kind, model)) {
        total += g;
    }
    return total;
}

/// Central finite differences (J(theta + h) - J(theta - h)) / 2h per parameter.
inline Gradients finite_diff_gradient(const Eigen::MatrixXd& x, std::span<const int> labels, LossKind kind,
                                      const FcmModel& model, double h = 1e-5) {
    if (!(h > 0.0)) {
        throw ConfigError("finite difference step must be positive");
    }
    const Eigen::Index r = model.state_size();
    Gradients g = Gradients::zeros(r);
    Eigen::MatrixXd w = model.weights();
    Eigen::VectorXd b = model.bias();
    auto j_at = [&](const Eigen::MatrixXd& wp, const Eigen::VectorXd& bp) {
        return cost(x, labels, kind, model.with_parameters(wp, bp));
    };
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index k = 0; k < r; ++k) {
            const double orig = w(i, k);
            w(i, k) = orig + h;
            const double up = j_at(w, b);
            w(i, k) = orig - h;
            const double down = j_at(w, b);
            w(i, k) = orig;
            g.weights(i, k) = (up - down) / (2.0 * h);
        }
        const double orig = b(i);
        b(i) = orig + h;
        const double up = j_at(w, b);
        b(i) = orig - h;
        const double down = j_at(w, b);
        b(i) = orig;
        g.bias(i) = (up - down) / (2.0 * h);
    }
    return g;
}

/// |a - b| / max(|a|, |b|, floor). The floor keeps round-off on near-zero
/// entries from dominating.
inline double relative_error(double a, double b, double floor = 1e-6) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline double max_relative_error(const Gradients& a, const Gradients& b, double floor = 1e-6) {
    if (a.weights.rows() != b.weights.rows() || a.weights.cols() != b.weights.cols() || a.bias.size() != b.bias.size()) {
        throw ShapeError("gradient shapes differ");
    }
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.weights.size(); ++i) {
        worst = std::max(worst, relative_error(a.weights.data()[i], b.weights.data()[i], floor));
    }
    for (Eigen::Index i = 0; i < a.bias.size(); ++i) {
        worst = std::max(worst, relative_error(a.bias(i), b.bias(i), floor));
    }
    return worst;
}

} // namespace fcm
