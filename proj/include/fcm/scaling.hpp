#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fcm/errors.hpp"

namespace fcm {

/// Per-feature (min, max) pairs fitted on a training split.
struct MinMaxScaler {
    std::vector<double> mins;
    std::vector<double> maxs;

    bool empty() const { return mins.empty(); }
    std::size_t size() const { return mins.size(); }

    friend bool operator==(const MinMaxScaler&, const MinMaxScaler&) = default;
};

/// Fits the scaler on X (features x observations).
inline MinMaxScaler minmax_fit(const Eigen::MatrixXd& x) {
    if (x.cols() == 0) {
        throw DataError("cannot fit a scaler on zero observations");
    }
    MinMaxScaler s;
    s.mins.resize(static_cast<std::size_t>(x.rows()));
    s.maxs.resize(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        s.mins[static_cast<std::size_t>(i)] = x.row(i).minCoeff();
        s.maxs[static_cast<std::size_t>(i)] = x.row(i).maxCoeff();
    }
    return s;
}

/// (x - min) / (max - min), clamped into [0, 1]. Constant features map to 0.
inline Eigen::MatrixXd minmax_apply(const MinMaxScaler& s, const Eigen::MatrixXd& x) {
    if (static_cast<std::size_t>(x.rows()) != s.size()) {
        throw ShapeError("scaler expects " + std::to_string(s.size()) + " features, got " +
                         std::to_string(x.rows()));
    }
    Eigen::MatrixXd out(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double lo = s.mins[static_cast<std::size_t>(i)];
        const double span = s.maxs[static_cast<std::size_t>(i)] - lo;
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            out(i, j) = span > 0.0 ? std::clamp((x(i, j) - lo) / span, 0.0, 1.0) : 0.0;
        }
    }
    return out;
}

} // namespace fcm
