#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fcm/dataset.hpp"
#include "fcm/errors.hpp"
#include "fcm/loss.hpp"
#include "fcm/model.hpp"
#include "fcm/optimizer.hpp"
#include "fcm/random.hpp"

namespace fcm {

/// Batch size sentinel: the whole dataset is one batch.
inline constexpr int kFullBatch = -1;

struct TrainConfig {
    Variant variant = Variant::FCMMC;
    int depth = 3;
    double lambda = 1.0;
    int epochs = 1000;
    int batch_size = kFullBatch;
    OptimizerKind optimizer = OptimizerKind::Adam;
    double learning_rate = 0.001;
    std::uint64_t seed = 0;

    void validate() const {
        if (epochs < 1) {
            throw ConfigError("epochs must be at least 1, got " + std::to_string(epochs));
        }
        if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
            throw ConfigError("learning rate must be positive, got " + std::to_string(learning_rate));
        }
        if (batch_size != kFullBatch && batch_size < 1) {
            throw ConfigError("batch size must be -1 (full batch) or at least 1, got " + std::to_string(batch_size));
        }
        if (depth < 1) {
            throw ConfigError("depth must be at least 1, got " + std::to_string(depth));
        }
        static_cast<void>(ActivationConfig{lambda});
    }
};

/// Uniform [-0.5, 0.5] weights and bias, W drawn row by row and then b.
inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> init_weights(int n, int k, Variant variant, std::uint64_t seed) {
    Rng rng(seed);
    const int r = state_size(variant, n, k);
    Eigen::MatrixXd w(r, r);
    Eigen::VectorXd b(r);
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < r; ++j) {
            w(i, j) = rng.uniform(-0.5, 0.5);
        }
    }
    for (int i = 0; i < r; ++i) {
        b(i) = rng.uniform(-0.5, 0.5);
    }
    return {std::move(w), std::move(b)};
}

/// floor(m / bs) batches from a fresh permutation; the remainder sits out
/// this epoch. A full batch keeps the natural order.
inline std::vector<std::vector<int>> make_batches(int m, int batch_size, Rng& rng) {
    if (m < 1) {
        throw DataError("cannot batch an empty dataset");
    }
    std::vector<int> order(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        order[static_cast<std::size_t>(i)] = i;
    }
    if (batch_size == kFullBatch) {
        return {std::move(order)};
    }
    if (batch_size < 1) {
        throw ConfigError("batch size must be -1 or positive");
    }
    if (batch_size > m) {
        throw ConfigError("batch size " + std::to_string(batch_size) + " exceeds dataset size " + std::to_string(m));
    }
    rng.shuffle(order);
    const int count = m / batch_size;
    std::vector<std::vector<int>> batches(static_cast<std::size_t>(count));
    for (int s = 0; s < count; ++s) {
        auto first = order.begin() + static_cast<std::ptrdiff_t>(s) * batch_size;
        batches[static_cast<std::size_t>(s)].assign(first, first + batch_size);
    }
    return batches;
}

struct FitResult {
    FcmModel model;
    /// Batch loss before each update, epochs * floor(m / bs) entries.
    std::vector<double> loss_history;
};

/// Gradient training of a fully connected FCM: per batch, a forward pass,
/// the loss, backpropagation through the shared weights, one optimizer update.
inline FitResult fit(const LabeledDataset& data, const TrainConfig& cfg) {
    cfg.validate();
    const int n = data.inputs();
    const int k = data.classes();
    const int m = data.observations();
    if (static_cast<int>(data.labels.size()) != m) {
        throw ShapeError("label count does not match observation count");
    }
    for (int y : data.labels) {
        if (y < 0 || y >= k) {
            throw DataError("label " + std::to_string(y) + " outside 0.." + std::to_string(k - 1));
        }
    }
    if (cfg.variant == Variant::FCMB && k != 2) {
        throw ConfigError("FCMB needs exactly 2 classes, dataset has " + std::to_string(k));
    }

    auto [w, b] = init_weights(n, k, cfg.variant, cfg.seed);
    FcmModel model(cfg.variant, n, k, w, b, cfg.depth, ActivationConfig{cfg.lambda}, data.label_names, data.scaler);
    const LossKind kind = loss_kind_for(cfg.variant);
    OptimizerState opt(cfg.optimizer, model.state_size());
    Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

    const bool full = cfg.batch_size == kFullBatch;
    std::vector<double> history;
    history.reserve(static_cast<std::size_t>(cfg.epochs) *
                    static_cast<std::size_t>(full ? 1 : m / std::max(cfg.batch_size, 1)));

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto batches = make_batches(m, cfg.batch_size, rng);
        for (std::size_t s = 0; s < batches.size(); ++s) {
            const auto& idx = batches[s];
            Eigen::MatrixXd xb;
            std::vector<int> yb;
            const Eigen::MatrixXd* xp = &data.features;
            std::span<const int> ys(data.labels);
            if (!full) {
                xb = select_columns(data.features, idx);
                yb = select(data.labels, idx);
                xp = &xb;
                ys = yb;
            }
            const Trajectory traj = forward(*xp, model);
            const double loss = loss_value(traj.final(), ys, kind, model);
            if (!std::isfinite(loss)) {
                throw NumericalError("loss became non-finite at epoch " + std::to_string(epoch + 1) + ", batch " +
                                     std::to_string(s + 1));
            }
            history.push_back(loss);
            const Gradients g = backprop(traj, ys, kind, model);
            if (!g.all_finite()) {
                throw NumericalError("non-finite gradient at epoch " + std::to_string(epoch + 1) + ", batch " +
                                     std::to_string(s + 1));
            }
            optimizer_step(opt, w, b, g, cfg.learning_rate);
            if (!w.allFinite() || !b.allFinite()) {
                throw NumericalError("weights became non-finite at epoch " + std::to_string(epoch + 1) + ", batch " +
                                     std::to_string(s + 1));
            }
            model = model.with_parameters(w, b);
        }
    }
    return {std::move(model), std::move(history)};
}

} // namespace fcm
