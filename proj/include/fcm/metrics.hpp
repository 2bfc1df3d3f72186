#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fcm/errors.hpp"

namespace fcm {

inline double accuracy(std::span<const int> pred, std::span<const int> truth) {
    if (pred.size() != truth.size()) {
        throw ShapeError("accuracy: " + std::to_string(pred.size()) + " predictions for " +
                         std::to_string(truth.size()) + " labels");
    }
    if (pred.empty()) {
        throw ShapeError("accuracy needs at least one observation");
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        hits += pred[i] == truth[i] ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(pred.size());
}

/// Unweighted mean of per-class F1 over classes 0..k-1. A class with
/// precision + recall = 0 (including one never predicted nor present)
/// contributes 0.
inline double f1_macro(std::span<const int> pred, std::span<const int> truth, int k) {
    if (pred.size() != truth.size()) {
        throw ShapeError("f1_macro: " + std::to_string(pred.size()) + " predictions for " +
                         std::to_string(truth.size()) + " labels");
    }
    if (k < 1) {
        throw ConfigError("f1_macro needs k >= 1");
    }
    std::vector<double> tp(static_cast<std::size_t>(k)), fp(static_cast<std::size_t>(k)), fn(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const int p = pred[i];
        const int t = truth[i];
        if (p < 0 || p >= k || t < 0 || t >= k) {
            throw DataError("f1_macro: label outside 0.." + std::to_string(k - 1));
        }
        if (p == t) {
            tp[static_cast<std::size_t>(p)] += 1;
        } else {
            fp[static_cast<std::size_t>(p)] += 1;
            fn[static_cast<std::size_t>(t)] += 1;
        }
    }
    double total = 0.0;
    for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
        const double precision = tp[c] + fp[c] > 0 ? tp[c] / (tp[c] + fp[c]) : 0.0;
        const double recall = tp[c] + fn[c] > 0 ? tp[c] / (tp[c] + fn[c]) : 0.0;
        total += precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    }
    return total / k;
}

/// Davies-Bouldin (lower is better), silhouette in [-1, 1] and
/// Calinski-Harabasz (higher is better) of one labeled point set.
struct ClusterScoreTriple {
    double davies_bouldin = 0.0;
    double silhouette = 0.0;
    double calinski_harabasz = 0.0;
};

namespace detail {

/// Points grouped by label; `members[c]` are column indices of cluster c.
struct Clusters {
    std::vector<std::vector<Eigen::Index>> members;
    Eigen::MatrixXd centroids; // features x clusters
};

inline Clusters group(const Eigen::MatrixXd& x, std::span<const int> z, const char* who) {
    if (static_cast<std::size_t>(x.cols()) != z.size()) {
        throw ShapeError(std::string(who) + ": " + std::to_string(z.size()) + " labels for " +
                         std::to_string(x.cols()) + " points");
    }
    std::map<int, std::size_t> slot;
    Clusters c;
    for (std::size_t j = 0; j < z.size(); ++j) {
        auto [it, inserted] = slot.try_emplace(z[j], c.members.size());
        if (inserted) {
            c.members.emplace_back();
        }
        c.members[it->second].push_back(static_cast<Eigen::Index>(j));
    }
    if (c.members.size() < 2) {
        throw DataError(std::string(who) + " needs at least 2 clusters");
    }
    c.centroids = Eigen::MatrixXd::Zero(x.rows(), static_cast<Eigen::Index>(c.members.size()));
    for (std::size_t k = 0; k < c.members.size(); ++k) {
        for (Eigen::Index j : c.members[k]) {
            c.centroids.col(static_cast<Eigen::Index>(k)) += x.col(j);
        }
        c.centroids.col(static_cast<Eigen::Index>(k)) /= static_cast<double>(c.members[k].size());
    }
    return c;
}

} // namespace detail

/// Mean over clusters of max_j (s_i + s_j) / d(c_i, c_j), where s is the mean
/// Euclidean distance to the centroid. Coincident centroids contribute 0.
inline double davies_bouldin(const Eigen::MatrixXd& x, std::span<const int> z) {
    const auto c = detail::group(x, z, "davies_bouldin");
    const std::size_t k = c.members.size();
    std::vector<double> scatter(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        for (Eigen::Index j : c.members[i]) {
            scatter[i] += (x.col(j) - c.centroids.col(static_cast<Eigen::Index>(i))).norm();
        }
        scatter[i] /= static_cast<double>(c.members[i].size());
    }
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        double worst = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) {
                continue;
            }
            const double dist =
                (c.centroids.col(static_cast<Eigen::Index>(i)) - c.centroids.col(static_cast<Eigen::Index>(j))).norm();
            if (dist > 0.0) {
                worst = std::max(worst, (scatter[i] + scatter[j]) / dist);
            }
        }
        total += worst;
    }
    return total / static_cast<double>(k);
}

/// Mean of (b - a) / max(a, b); points in singleton clusters score 0.
inline double silhouette(const Eigen::MatrixXd& x, std::span<const int> z) {
    const auto c = detail::group(x, z, "silhouette");
    const Eigen::Index m = x.cols();
    if (m < 3) {
        throw DataError("silhouette needs at least 3 points");
    }
    std::vector<int> slot(static_cast<std::size_t>(m));
    for (std::size_t k = 0; k < c.members.size(); ++k) {
        for (Eigen::Index j : c.members[k]) {
            slot[static_cast<std::size_t>(j)] = static_cast<int>(k);
        }
    }
    const std::size_t k = c.members.size();
    double total = 0.0;
    std::vector<double> sums(k);
    for (Eigen::Index p = 0; p < m; ++p) {
        std::fill(sums.begin(), sums.end(), 0.0);
        for (Eigen::Index q = 0; q < m; ++q) {
            if (q != p) {
                sums[static_cast<std::size_t>(slot[static_cast<std::size_t>(q)])] += (x.col(p) - x.col(q)).norm();
            }
        }
        const auto own = static_cast<std::size_t>(slot[static_cast<std::size_t>(p)]);
        const std::size_t own_size = c.members[own].size();
        if (own_size < 2) {
            continue;
        }
        const double a = sums[own] / static_cast<double>(own_size - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t other = 0; other < k; ++other) {
            if (other != own) {
                b = std::min(b, sums[other] / static_cast<double>(c.members[other].size()));
            }
        }
        const double denom = std::max(a, b);
        total += denom > 0.0 ? (b - a) / denom : 0.0;
    }
    return total / static_cast<double>(m);
}

/// (B / (k - 1)) / (W / (m - k)) with B and W the between- and within-cluster
/// dispersion traces. Zero within-dispersion returns +infinity.
inline double calinski_harabasz(const Eigen::MatrixXd& x, std::span<const int> z) {
    const auto c = detail::group(x, z, "calinski_harabasz");
    const auto k = static_cast<double>(c.members.size());
    const auto m = static_cast<double>(x.cols());
    if (!(m > k)) {
        throw DataError("calinski_harabasz needs more points than clusters");
    }
    const Eigen::VectorXd mean = x.rowwise().mean();
    double between = 0.0;
    double within = 0.0;
    for (std::size_t i = 0; i < c.members.size(); ++i) {
        const auto centroid = c.centroids.col(static_cast<Eigen::Index>(i));
        between += static_cast<double>(c.members[i].size()) * (centroid - mean).squaredNorm();
        for (Eigen::Index j : c.members[i]) {
            within += (x.col(j) - centroid).squaredNorm();
        }
    }
    if (within == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return (between / (k - 1.0)) / (within / (m - k));
}

inline ClusterScoreTriple cluster_scores(const Eigen::MatrixXd& x, std::span<const int> z) {
    return {davies_bouldin(x, z), silhouette(x, z), calinski_harabasz(x, z)};
}

enum class Vote { Improved, NotImproved };

inline std::string to_string(Vote v) { return v == Vote::Improved ? "improved" : "not_improved"; }

struct VoteResult {
    Vote outcome = Vote::NotImproved;
    int wins = 0; ///< scores strictly better after the transformation
};

/// Majority vote over the three scores with their own polarity. Only strict
/// improvements count, so identical triples are not an improvement.
inline VoteResult majority_vote_improvement(const ClusterScoreTriple& original, const ClusterScoreTriple& transformed) {
    VoteResult r;
    r.wins += transformed.davies_bouldin < original.davies_bouldin ? 1 : 0;
    r.wins += transformed.silhouette > original.silhouette ? 1 : 0;
    r.wins += transformed.calinski_harabasz > original.calinski_harabasz ? 1 : 0;
    r.outcome = r.wins >= 2 ? Vote::Improved : Vote::NotImproved;
    return r;
}

} // namespace fcm
