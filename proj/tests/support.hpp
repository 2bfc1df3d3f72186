#pragma once

// Shared fixtures and a loop-based reference implementation of the forward
// pass and losses, written without the library so it can serve as an
// independent oracle.

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "fcm/model.hpp"
#include "fcm/random.hpp"

namespace fcm::test {

inline FcmModel table1_fcmb() {
    Eigen::MatrixXd w(3, 3);
    w << 0.28, -0.31, -0.09, 1.17, 0.45, -0.66, -2.43, 3.65, -1.92;
    Eigen::VectorXd b(3);
    b << 0.28, 0.57, -1.62;
    return FcmModel(Variant::FCMB, 2, 2, w, b, 3, ActivationConfig{5.0});
}

inline FcmModel table1_fcmmc() {
    Eigen::MatrixXd w(4, 4);
    w << 2.89, -1.50, -0.29, -1.01, 5.77, -1.43, 5.61, -4.42, 3.31, -6.80, 0.96, 0.75, 5.03, 6.75, -1.02, -0.46;
    Eigen::VectorXd b(4);
    b << -3.14, -1.38, 3.01, -2.18;
    return FcmModel(Variant::FCMMC, 2, 2, w, b, 3, ActivationConfig{2.0});
}

using Matrix = std::vector<std::vector<double>>;

/// Final state per observation, computed with plain loops.
inline std::vector<std::vector<double>> naive_forward(const Matrix& w, const std::vector<double>& b, double lambda,
                                                      int depth, const Matrix& columns, int outputs) {
    const std::size_t r = b.size();
    std::vector<std::vector<double>> finals;
    for (const auto& x : columns) {
        std::vector<double> a(x);
        a.resize(r, 0.5);
        for (int t = 0; t < depth; ++t) {
            std::vector<double> next(r);
            for (std::size_t i = 0; i < r; ++i) {
                double h = b[i];
                for (std::size_t j = 0; j < r; ++j) {
                    h += w[i][j] * a[j];
                }
                next[i] = 1.0 / (1.0 + std::exp(-lambda * (h - 0.5)));
            }
            a = next;
        }
        finals.emplace_back(a.end() - outputs, a.end());
    }
    return finals;
}

inline double naive_loss(const Matrix& w, const std::vector<double>& b, double lambda, int depth,
                         const Matrix& columns, const std::vector<int>& labels, bool binary) {
    const int outputs = binary ? 1 : static_cast<int>(b.size() - columns.front().size());
    const auto finals = naive_forward(w, b, lambda, depth, columns, outputs);
    double total = 0.0;
    for (std::size_t j = 0; j < finals.size(); ++j) {
        const auto& y = finals[j];
        if (binary) {
            const double p = std::min(std::max(y[0], 1e-12), 1.0 - 1e-12);
            total -= labels[j] == 1 ? std::log(p) : std::log(1.0 - p);
        } else {
            double norm = 0.0;
            for (double v : y) {
                norm += std::exp(v);
            }
            total -= y[static_cast<std::size_t>(labels[j])] - std::log(norm);
        }
    }
    return total / static_cast<double>(finals.size());
}

inline Matrix to_rows(const Eigen::MatrixXd& m) {
    Matrix out(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
        }
    }
    return out;
}

inline Matrix to_columns(const Eigen::MatrixXd& x) { return to_rows(x.transpose()); }

inline Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double lo, double hi) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        m.data()[i] = rng.uniform(lo, hi);
    }
    return m;
}

inline FcmModel random_model(Rng& rng, Variant v, int n, int k, int depth, double lambda, double scale = 1.0) {
    const int r = state_size(v, n, k);
    return FcmModel(v, n, k, random_matrix(rng, r, r, -scale, scale), random_matrix(rng, r, 1, -scale, scale), depth,
                    ActivationConfig{lambda});
}

inline std::vector<int> random_labels(Rng& rng, int m, int k) {
    std::vector<int> y(static_cast<std::size_t>(m));
    for (auto& v : y) {
        v = static_cast<int>(rng.index(static_cast<std::size_t>(k)));
    }
    return y;
}

} // namespace fcm::test
