#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fcm/errors.hpp"

namespace fcm {

struct LogRegConfig {
    int iterations = 2000;
    double learning_rate = 1.0;
    /// Inverse L2 strength: minimizes 0.5 |theta|^2 + C * sum(log loss).
    /// The intercept is penalized like any other weight.
    double inverse_regularization = 1.0;
};

/// Linear classifier: a single sigmoid for k = 2, one-vs-rest sigmoids otherwise.
/// Each row of `theta` is [w, intercept].
struct LogRegModel {
    Eigen::MatrixXd theta;
    int classes = 2;

    Eigen::MatrixXd scores(const Eigen::MatrixXd& x) const {
        if (x.rows() + 1 != theta.cols()) {
            throw ShapeError("logistic regression expects " + std::to_string(theta.cols() - 1) + " features, got " +
                             std::to_string(x.rows()));
        }
        Eigen::MatrixXd s = theta.leftCols(theta.cols() - 1) * x;
        s.colwise() += theta.col(theta.cols() - 1);
        return s;
    }

    std::vector<int> predict(const Eigen::MatrixXd& x) const {
        const Eigen::MatrixXd s = scores(x);
        std::vector<int> out(static_cast<std::size_t>(x.cols()));
        for (Eigen::Index j = 0; j < s.cols(); ++j) {
            if (classes == 2) {
                out[static_cast<std::size_t>(j)] = s(0, j) >= 0.0 ? 1 : 0;
                continue;
            }
            Eigen::Index best = 0;
            for (Eigen::Index i = 1; i < s.rows(); ++i) {
                if (s(i, j) > s(best, j)) {
                    best = i;
                }
            }
            out[static_cast<std::size_t>(j)] = static_cast<int>(best);
        }
        return out;
    }
};

namespace detail {

/// Full-batch gradient descent on the mean log loss plus |theta|^2 / (2 C m).
inline Eigen::RowVectorXd fit_sigmoid(const Eigen::MatrixXd& xa, const Eigen::RowVectorXd& target, const LogRegConfig& cfg) {
    const double m = static_cast<double>(xa.cols());
    const double penalty = 1.0 / (cfg.inverse_regularization * m);
    Eigen::RowVectorXd theta = Eigen::RowVectorXd::Zero(xa.rows());
    for (int it = 0; it < cfg.iterations; ++it) {
        const Eigen::RowVectorXd z = theta * xa;
        const Eigen::RowVectorXd p = z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
        const Eigen::RowVectorXd grad = (p - target) * xa.transpose() / m + penalty * theta;
        theta -= cfg.learning_rate * grad;
    }
    return theta;
}

} // namespace detail

/// X is features x observations, labels in 0..k-1. Zero-initialized, so the
/// result is deterministic.
inline LogRegModel logreg_fit(const Eigen::MatrixXd& x, std::span<const int> labels, int k, const LogRegConfig& cfg = {}) {
    if (static_cast<std::size_t>(x.cols()) != labels.size() || labels.empty()) {
        throw ShapeError("logistic regression needs one label per observation");
    }
    if (k < 2) {
        throw ConfigError("logistic regression needs at least 2 classes");
    }
    if (cfg.iterations < 1 || !(cfg.learning_rate > 0.0) || !(cfg.inverse_regularization > 0.0)) {
        throw ConfigError("invalid logistic regression settings");
    }
    Eigen::MatrixXd xa(x.rows() + 1, x.cols());
    xa.topRows(x.rows()) = x;
    xa.row(x.rows()).setOnes();

    LogRegModel model;
    model.classes = k;
    const int rows = k == 2 ? 1 : k;
    model.theta.resize(rows, xa.rows());
    for (int c = 0; c < rows; ++c) {
        const int positive = k == 2 ? 1 : c;
        Eigen::RowVectorXd target(x.cols());
        for (std::size_t j = 0; j < labels.size(); ++j) {
            if (labels[j] < 0 || labels[j] >= k) {
                throw DataError("label " + std::to_string(labels[j]) + " outside 0.." + std::to_string(k - 1));
            }
            target(static_cast<Eigen::Index>(j)) = labels[j] == positive ? 1.0 : 0.0;
        }
        model.theta.row(c) = detail::fit_sigmoid(xa, target, cfg);
    }
    return model;
}

/// Majority label among the k nearest training points (Euclidean). Distance
/// ties prefer the lower training index, vote ties the lower label.
inline std::vector<int> knn_predict(const Eigen::MatrixXd& train_x, std::span<const int> train_y,
                                    const Eigen::MatrixXd& query_x, int k) {
    if (train_x.cols() == 0) {
        throw DataError("k-NN needs a non-empty training set");
    }
    if (static_cast<std::size_t>(train_x.cols()) != train_y.size()) {
        throw ShapeError("k-NN needs one label per training point");
    }
    if (train_x.rows() != query_x.rows()) {
        throw ShapeError("k-NN query has " + std::to_string(query_x.rows()) + " features, training set has " +
                         std::to_string(train_x.rows()));
    }
    if (k < 1 || k > train_x.cols()) {
        throw ConfigError("k-NN: k must be in 1.." + std::to_string(train_x.cols()));
    }
    if (*std::min_element(train_y.begin(), train_y.end()) < 0) {
        throw DataError("k-NN labels must be non-negative");
    }
    const int top_label = *std::max_element(train_y.begin(), train_y.end());
    std::vector<int> out(static_cast<std::size_t>(query_x.cols()));
    std::vector<std::pair<double, Eigen::Index>> dist(static_cast<std::size_t>(train_x.cols()));
    std::vector<int> votes(static_cast<std::size_t>(top_label) + 1);
    for (Eigen::Index q = 0; q < query_x.cols(); ++q) {
        for (Eigen::Index j = 0; j < train_x.cols(); ++j) {
            dist[static_cast<std::size_t>(j)] = {(train_x.col(j) - query_x.col(q)).squaredNorm(), j};
        }
        std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
        std::fill(votes.begin(), votes.end(), 0);
        for (int i = 0; i < k; ++i) {
            ++votes[static_cast<std::size_t>(train_y[static_cast<std::size_t>(dist[static_cast<std::size_t>(i)].second)])];
        }
        out[static_cast<std::size_t>(q)] =
            static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
    }
    return out;
}

} // namespace fcm
