#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fcm/errors.hpp"
#include "fcm/loss.hpp"
#include "fcm/model.hpp"
#include "fcm/random.hpp"

namespace fcm {

struct GradcheckOptions {
    int n = 4;
    int k = 3;
    int depth = 3;
    Variant variant = Variant::FCMMC;
    int trials = 50;
    int observations = 6;
    double lambda = 1.0;
    double step = 1e-5;
    std::uint64_t seed = 0;
};

struct GradcheckResult {
    int trials = 0;
    double max_error = 0.0;
    /// Depth-1 FCMB only: backprop against the closed-form logistic gradient.
    std::optional<double> analytic_error;
};

/// Random small model, inputs and labels for one gradient comparison.
struct GradcheckInstance {
    FcmModel model;
    Eigen::MatrixXd x;
    std::vector<int> labels;
};

inline GradcheckInstance random_instance(Rng& rng, Variant variant, int n, int k, int depth, int m, double lambda) {
    const int r = state_size(variant, n, k);
    Eigen::MatrixXd w(r, r);
    Eigen::VectorXd b(r);
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        w.data()[i] = rng.uniform(-1.0, 1.0);
    }
    for (Eigen::Index i = 0; i < r; ++i) {
        b(i) = rng.uniform(-1.0, 1.0);
    }
    Eigen::MatrixXd x(n, m);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        x.data()[i] = rng.uniform();
    }
    std::vector<int> labels(static_cast<std::size_t>(m));
    for (auto& y : labels) {
        y = static_cast<int>(rng.index(static_cast<std::size_t>(k)));
    }
    return {FcmModel(variant, n, k, std::move(w), std::move(b), depth, ActivationConfig{lambda}), std::move(x),
            std::move(labels)};
}

/// Closed-form gradient of a depth-1 FCMB under log loss. Only the output
/// row is nonzero: lambda (y~ - y) / m times the encoded input.
inline Gradients logistic_gradient(const FcmModel& model, const Eigen::MatrixXd& x, std::span<const int> labels) {
    if (model.variant() != Variant::FCMB || model.depth() != 1) {
        throw ConfigError("the logistic gradient applies to depth-1 FCMB models only");
    }
    const Eigen::MatrixXd a0 = encode(x, model);
    const Eigen::MatrixXd y = extract(forward(x, model).final(), model);
    const int out = model.inputs();
    const double scale = model.activation().lambda() / static_cast<double>(x.cols());
    Gradients g = Gradients::zeros(model.state_size());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double e = scale * (y(0, j) - labels[static_cast<std::size_t>(j)]);
        g.weights.row(out) += e * a0.col(j).transpose();
        g.bias(out) += e;
    }
    return g;
}

inline GradcheckResult run_gradcheck(const GradcheckOptions& opt) {
    if (opt.n < 1 || opt.n > 16) {
        throw ConfigError("gradcheck: n must be in 1..16, got " + std::to_string(opt.n));
    }
    if (opt.variant == Variant::FCMB && opt.k != 2) {
        throw ConfigError("gradcheck: FCMB needs k = 2");
    }
    if (opt.k < 2 || opt.depth < 1 || opt.trials < 1 || opt.observations < 1) {
        throw ConfigError("gradcheck: k >= 2, d >= 1, trials >= 1 and m >= 1 are required");
    }
    Rng rng(opt.seed);
    const LossKind kind = loss_kind_for(opt.variant);
    const bool analytic = opt.variant == Variant::FCMB && opt.depth == 1;
    GradcheckResult result;
    result.trials = opt.trials;
    if (analytic) {
        result.analytic_error = 0.0;
    }
    for (int t = 0; t < opt.trials; ++t) {
        const auto inst = random_instance(rng, opt.variant, opt.n, opt.k, opt.depth, opt.observations, opt.lambda);
        const Gradients bp = backprop(forward(inst.x, inst.model), inst.labels, kind, inst.model);
        const Gradients fd = finite_diff_gradient(inst.x, inst.labels, kind, inst.model, opt.step);
        result.max_error = std::max(result.max_error, max_relative_error(bp, fd));
        if (analytic) {
            const Gradients lg = logistic_gradient(inst.model, inst.x, inst.labels);
            result.analytic_error = std::max(*result.analytic_error, max_relative_error(bp, lg));
        }
    }
    return result;
}

} // namespace fcm
