#pragma once

#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fcm/activation.hpp"
#include "fcm/errors.hpp"
#include "fcm/scaling.hpp"

namespace fcm {

/// Output head. FCMB has one output concept and a 0.5 threshold; FCMMC has
/// one output concept per class and a softmax/argmax readout.
enum class Variant { FCMB, FCMMC };

inline std::string to_string(Variant v) { return v == Variant::FCMB ? "FCMB" : "FCMMC"; }

inline Variant parse_variant(std::string_view text) {
    std::string up;
    for (char c : text) {
        up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
    if (up == "FCMB") {
        return Variant::FCMB;
    }
    if (up == "FCMMC") {
        return Variant::FCMMC;
    }
    throw ConfigError("unknown classifier variant '" + std::string(text) + "' (expected FCMB or FCMMC)");
}

/// Number of concepts for n inputs and k classes.
inline int state_size(Variant v, int n, int k) { return v == Variant::FCMB ? n + 1 : n + k; }

/// A fully connected FCM classifier. Immutable once constructed.
///
/// The state vector is [x; y]: n input concepts followed by the output
/// concepts (one for FCMB, k for FCMMC). W is r x r and b has length r.
class FcmModel {
public:
    FcmModel(Variant variant, int n, int k, Eigen::MatrixXd weights, Eigen::VectorXd bias, int depth,
             ActivationConfig activation, std::vector<std::string> class_labels = {},
             MinMaxScaler scaler = {})
        : variant_(variant), n_(n), k_(k), weights_(std::move(weights)), bias_(std::move(bias)),
          depth_(depth), activation_(activation), class_labels_(std::move(class_labels)),
          scaler_(std::move(scaler)) {
        if (n_ < 1) {
            throw ShapeError("model needs at least one input concept");
        }
        if (k_ < 2) {
            throw ShapeError("model needs at least two classes, got " + std::to_string(k_));
        }
        if (variant_ == Variant::FCMB && k_ != 2) {
            throw ConfigError("FCMB is a binary classifier; got " + std::to_string(k_) + " classes");
        }
        if (depth_ < 1) {
            throw ConfigError("depth must be at least 1, got " + std::to_string(depth_));
        }
        const Eigen::Index r = state_size();
        if (weights_.rows() != r || weights_.cols() != r) {
            throw ShapeError("weight matrix must be " + std::to_string(r) + "x" + std::to_string(r) +
                             ", got " + std::to_string(weights_.rows()) + "x" +
                             std::to_string(weights_.cols()));
        }
        if (bias_.size() != r) {
            throw ShapeError("bias must have length " + std::to_string(r) + ", got " +
                             std::to_string(bias_.size()));
        }
        if (!weights_.allFinite() || !bias_.allFinite()) {
            throw NumericalError("model parameters contain non-finite values");
        }
        if (class_labels_.empty()) {
            for (int c = 0; c < k_; ++c) {
                class_labels_.push_back(std::to_string(c));
            }
        }
        if (static_cast<int>(class_labels_.size()) != k_) {
            throw ShapeError("expected " + std::to_string(k_) + " class labels, got " +
                             std::to_string(class_labels_.size()));
        }
        if (!scaler_.empty() && (static_cast<int>(scaler_.size()) != n_ || scaler_.maxs.size() != scaler_.mins.size())) {
            throw ShapeError("scaler must cover " + std::to_string(n_) + " features");
        }
    }

    Variant variant() const { return variant_; }
    int inputs() const { return n_; }
    int classes() const { return k_; }
    int state_size() const { return fcm::state_size(variant_, n_, k_); }
    /// Number of output concepts, r - n.
    int outputs() const { return state_size() - n_; }
    int depth() const { return depth_; }
    const Eigen::MatrixXd& weights() const { return weights_; }
    const Eigen::VectorXd& bias() const { return bias_; }
    const ActivationConfig& activation() const { return activation_; }
    const std::vector<std::string>& class_labels() const { return class_labels_; }
    const MinMaxScaler& scaler() const { return scaler_; }

    /// Same structure and metadata with new (W, b).
    FcmModel with_parameters(Eigen::MatrixXd weights, Eigen::VectorXd bias) const {
        return FcmModel(variant_, n_, k_, std::move(weights), std::move(bias), depth_, activation_,
                        class_labels_, scaler_);
    }

    FcmModel with_depth(int depth) const {
        return FcmModel(variant_, n_, k_, weights_, bias_, depth, activation_, class_labels_, scaler_);
    }

private:
    Variant variant_;
    int n_;
    int k_;
    Eigen::MatrixXd weights_;
    Eigen::VectorXd bias_;
    int depth_;
    ActivationConfig activation_;
    std::vector<std::string> class_labels_;
    MinMaxScaler scaler_;
};

/// States A^(0) .. A^(d); each is r x m with one column per observation.
struct Trajectory {
    std::vector<Eigen::MatrixXd> states;

    int depth() const { return static_cast<int>(states.size()) - 1; }
    const Eigen::MatrixXd& initial() const { return states.front(); }
    const Eigen::MatrixXd& final() const { return states.back(); }
};

/// Initial state: rows 0..n-1 copy X, output rows are the undecided 0.5.
inline Eigen::MatrixXd encode(const Eigen::MatrixXd& x, const FcmModel& model) {
    if (x.rows() != model.inputs()) {
        throw ShapeError("expected " + std::to_string(model.inputs()) + " feature rows, got " +
                         std::to_string(x.rows()));
    }
    Eigen::MatrixXd a(model.state_size(), x.cols());
    a.topRows(model.inputs()) = x;
    a.bottomRows(model.outputs()).setConstant(0.5);
    return a;
}

/// One application of the state equation: f(W A + b).
inline Eigen::MatrixXd step(const Eigen::MatrixXd& a, const FcmModel& model) {
    if (a.rows() != model.state_size()) {
        throw ShapeError("state must have " + std::to_string(model.state_size()) + " rows, got " +
                         std::to_string(a.rows()));
    }
    if (!a.allFinite()) {
        throw NumericalError("state matrix contains non-finite values");
    }
    Eigen::MatrixXd h = model.weights() * a;
    h.colwise() += model.bias();
    return activate(h, model.activation());
}

/// Appends `steps` more states to an existing trajectory.
inline void advance(Trajectory& trajectory, const FcmModel& model, int steps) {
    trajectory.states.reserve(trajectory.states.size() + static_cast<std::size_t>(steps));
    for (int t = 0; t < steps; ++t) {
        trajectory.states.push_back(step(trajectory.states.back(), model));
    }
}

/// Encodes X and runs d steps.
inline Trajectory forward(const Eigen::MatrixXd& x, const FcmModel& model) {
    Trajectory trajectory;
    trajectory.states.reserve(static_cast<std::size_t>(model.depth()) + 1);
    trajectory.states.push_back(encode(x, model));
    advance(trajectory, model, model.depth());
    return trajectory;
}

/// Output-concept rows n..r-1 of a state.
inline Eigen::MatrixXd extract(const Eigen::MatrixXd& a, const FcmModel& model) {
    if (a.rows() != model.state_size()) {
        throw ShapeError("state must have " + std::to_string(model.state_size()) + " rows, got " +
                         std::to_string(a.rows()));
    }
    return a.bottomRows(model.outputs());
}

/// Row-normalized parameters with one activation per concept.
///
/// Row i is divided by s_i = max(|W_i1|, .., |W_ir|, |b_i|). Concept i then
/// uses slope lambda_i = lambda * s_i and threshold 0.5 / s_i, which gives
/// exactly the original state equation.
struct NormalizedWeights {
    Eigen::MatrixXd weights;
    Eigen::VectorXd bias;
    Eigen::VectorXd slopes;
    Eigen::VectorXd scales;

    Eigen::VectorXd thresholds() const { return (0.5 / scales.array()).matrix(); }
};

inline NormalizedWeights normalize_weights(const FcmModel& model) {
    const Eigen::Index r = model.state_size();
    NormalizedWeights nw{model.weights(), model.bias(), Eigen::VectorXd(r), Eigen::VectorXd(r)};
    for (Eigen::Index i = 0; i < r; ++i) {
        double s = std::max(model.weights().row(i).cwiseAbs().maxCoeff(), std::abs(model.bias()(i)));
        if (s == 0.0) {
            s = 1.0;
        }
        nw.weights.row(i) /= s;
        nw.bias(i) /= s;
        nw.scales(i) = s;
        nw.slopes(i) = model.activation().lambda() * s;
    }
    return nw;
}

/// State equation with per-concept activations.
inline Eigen::MatrixXd step_normalized(const Eigen::MatrixXd& a, const NormalizedWeights& nw) {
    if (a.rows() != nw.weights.rows()) {
        throw ShapeError("state must have " + std::to_string(nw.weights.rows()) + " rows");
    }
    Eigen::MatrixXd h = nw.weights * a;
    h.colwise() += nw.bias;
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
        const double slope = nw.slopes(i);
        const double threshold = 0.5 / nw.scales(i);
        for (Eigen::Index j = 0; j < h.cols(); ++j) {
            h(i, j) = detail::squash(h(i, j), slope, threshold);
        }
    }
    return h;
}

inline Trajectory forward_normalized(const Eigen::MatrixXd& x, const FcmModel& model) {
    const NormalizedWeights nw = normalize_weights(model);
    Trajectory trajectory;
    trajectory.states.push_back(encode(x, model));
    for (int t = 0; t < model.depth(); ++t) {
        trajectory.states.push_back(step_normalized(trajectory.states.back(), nw));
    }
    return trajectory;
}

} // namespace fcm
