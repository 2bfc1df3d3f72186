#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "fcm/errors.hpp"
#include "fcm/loss.hpp"
#include "fcm/model.hpp"

namespace fcm {

/// Index of the largest entry per column; ties go to the lowest index.
inline std::vector<int> argmax_columns(const Eigen::MatrixXd& y) {
    std::vector<int> out(static_cast<std::size_t>(y.cols()));
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < y.rows(); ++i) {
            if (y(i, j) > y(best, j)) {
                best = i;
            }
        }
        out[static_cast<std::size_t>(j)] = static_cast<int>(best);
    }
    return out;
}

/// Label 1 iff y^(d) >= 0.5.
inline std::vector<int> binary_labels(const Eigen::MatrixXd& y_final) {
    std::vector<int> out(static_cast<std::size_t>(y_final.cols()));
    for (Eigen::Index j = 0; j < y_final.cols(); ++j) {
        out[static_cast<std::size_t>(j)] = y_final(0, j) >= 0.5 ? 1 : 0;
    }
    return out;
}

inline std::vector<int> predict_binary(const FcmModel& model, const Eigen::MatrixXd& x) {
    if (model.variant() != Variant::FCMB) {
        throw ConfigError("predict_binary requires an FCMB model");
    }
    return binary_labels(extract(forward(x, model).final(), model));
}

inline std::vector<int> predict_multiclass(const FcmModel& model, const Eigen::MatrixXd& x) {
    if (model.variant() != Variant::FCMMC) {
        throw ConfigError("predict_multiclass requires an FCMMC model");
    }
    // softmax is monotone per column, so the argmax of the raw outputs is the same
    return argmax_columns(extract(forward(x, model).final(), model));
}

inline std::vector<int> predict(const FcmModel& model, const Eigen::MatrixXd& x) {
    return model.variant() == Variant::FCMB ? predict_binary(model, x) : predict_multiclass(model, x);
}

/// FCMB: the raw output y^(d). FCMMC: softmax(y^(d)), columns sum to 1.
inline Eigen::MatrixXd predict_proba(const FcmModel& model, const Eigen::MatrixXd& x) {
    const Eigen::MatrixXd y = extract(forward(x, model).final(), model);
    return model.variant() == Variant::FCMB ? y : softmax(y);
}

/// The state A^(d-1): all r concepts just before the final step.
inline Eigen::MatrixXd transform(const FcmModel& model, const Eigen::MatrixXd& x) {
    Trajectory trajectory;
    trajectory.states.push_back(encode(x, model));
    advance(trajectory, model, model.depth() - 1);
    return trajectory.final();
}

/// Largest deviation between a depth-1 FCMB output and the logistic form
/// 1 / (1 + exp(-(w'x + b'))) with w' = lambda W[r, 0..n-1] and
/// b' = lambda (0.5 W_rr + b_r - 0.5).
inline double d1_equivalence_check(const FcmModel& model, const Eigen::MatrixXd& x) {
    if (model.variant() != Variant::FCMB || model.depth() != 1) {
        throw ConfigError("the logistic equivalence holds for depth-1 FCMB models only");
    }
    const int n = model.inputs();
    const int last = model.state_size() - 1;
    const double lambda = model.activation().lambda();
    const Eigen::RowVectorXd w_prime = lambda * model.weights().row(last).head(n);
    const double b_prime = lambda * (0.5 * model.weights()(last, last) + model.bias()(last) - 0.5);

    const Eigen::MatrixXd y = extract(forward(x, model).final(), model);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double z = w_prime.dot(x.col(j)) + b_prime;
        const double logistic = 1.0 / (1.0 + std::exp(-z));
        worst = std::max(worst, std::abs(logistic - y(0, j)));
    }
    return worst;
}

} // namespace fcm
