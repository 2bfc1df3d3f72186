#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "fcm/baselines.hpp"
#include "fcm/dataset.hpp"
#include "fcm/errors.hpp"
#include "fcm/inference.hpp"
#include "fcm/metrics.hpp"
#include "fcm/model.hpp"
#include "fcm/trainer.hpp"

namespace fcm {

/// Classifier trained on the original and on the FCM-transformed features.
struct Downstream {
    enum class Kind { LogReg, Knn };
    Kind kind = Kind::LogReg;
    int neighbors = 3;

    std::string name() const { return kind == Kind::LogReg ? "logreg" : "knn" + std::to_string(neighbors); }
};

inline Downstream parse_downstream(std::string_view text) {
    if (text == "logreg") {
        return {Downstream::Kind::LogReg, 0};
    }
    if (text.starts_with("knn") && text.size() > 3) {
        int k = 0;
        for (char c : text.substr(3)) {
            if (c < '0' || c > '9') {
                throw ConfigError("unknown downstream classifier '" + std::string(text) + "'");
            }
            k = k * 10 + (c - '0');
        }
        if (k >= 1) {
            return {Downstream::Kind::Knn, k};
        }
    }
    throw ConfigError("unknown downstream classifier '" + std::string(text) + "' (expected logreg, knn3, knn5)");
}

struct CvOptions {
    TrainConfig fcm;
    int folds = 5;
    std::uint64_t seed = 0;
    std::optional<Downstream> downstream;
    LogRegConfig logreg;
    std::string dataset_name;
};

struct DownstreamScores {
    double accuracy_original = 0.0;
    double f1_original = 0.0;
    double accuracy_transformed = 0.0;
    double f1_transformed = 0.0;
};

struct FoldResult {
    int fold = 0;
    int train_size = 0;
    int test_size = 0;
    double final_loss = 0.0;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
    double test_f1 = 0.0;
    std::optional<ClusterScoreTriple> original_train;
    std::optional<ClusterScoreTriple> transformed_train;
    std::optional<ClusterScoreTriple> original_test;
    std::optional<ClusterScoreTriple> transformed_test;
    std::optional<DownstreamScores> downstream;
};

struct CvReport {
    std::string dataset;
    TrainConfig config;
    int folds = 0;
    std::uint64_t seed = 0;
    bool stratified = true;
    int inputs = 0;
    int classes = 0;
    /// Dimension of the exported space: all r concepts of A^(d-1).
    int transformed_features = 0;
    std::optional<Downstream> downstream;
    std::vector<std::string> notes;
    std::vector<FoldResult> fold_results;

    double mean(const std::function<double(const FoldResult&)>& get) const {
        double total = 0.0;
        for (const auto& f : fold_results) {
            total += get(f);
        }
        return fold_results.empty() ? 0.0 : total / static_cast<double>(fold_results.size());
    }

    /// Mean clustering scores over folds where they could be computed.
    std::optional<ClusterScoreTriple> mean_scores(std::optional<ClusterScoreTriple> FoldResult::*member) const {
        ClusterScoreTriple sum;
        int count = 0;
        for (const auto& f : fold_results) {
            if (const auto& s = f.*member) {
                sum.davies_bouldin += s->davies_bouldin;
                sum.silhouette += s->silhouette;
                sum.calinski_harabasz += s->calinski_harabasz;
                ++count;
            }
        }
        if (count == 0) {
            return std::nullopt;
        }
        sum.davies_bouldin /= count;
        sum.silhouette /= count;
        sum.calinski_harabasz /= count;
        return sum;
    }
};

namespace detail {

inline std::optional<ClusterScoreTriple> try_scores(const Eigen::MatrixXd& x, const std::vector<int>& z) {
    try {
        return cluster_scores(x, z);
    } catch (const DataError&) {
        return std::nullopt;
    }
}

inline std::vector<int> run_downstream(const Downstream& ds, const LogRegConfig& lr_cfg, const Eigen::MatrixXd& train_x,
                                       const std::vector<int>& train_y, const Eigen::MatrixXd& test_x, int k) {
    if (ds.kind == Downstream::Kind::LogReg) {
        return logreg_fit(train_x, train_y, k, lr_cfg).predict(test_x);
    }
    return knn_predict(train_x, train_y, test_x, ds.neighbors);
}

} // namespace detail

/// k-fold evaluation on one fold plan. Per fold: min-max scaling fitted on
/// the train split, FCM training (seed + fold index), test accuracy and F1,
/// clustering scores of the original and transformed spaces on both splits,
/// and optionally a downstream classifier on original vs transformed features.
inline CvReport cross_validate(const RawTable& table, const CvOptions& options) {
    CvReport report;
    report.dataset = options.dataset_name;
    report.config = options.fcm;
    report.folds = options.folds;
    report.seed = options.seed;
    report.inputs = static_cast<int>(table.features.rows());
    report.classes = table.classes();
    report.downstream = options.downstream;

    if (report.config.variant == Variant::FCMB && report.classes != 2) {
        report.config.variant = Variant::FCMMC;
        report.notes.push_back("classifier FCMB requested for a " + std::to_string(report.classes) +
                               "-class dataset; using FCMMC instead");
    }
    report.config.seed = options.seed;
    report.transformed_features = state_size(report.config.variant, report.inputs, report.classes);

    const FoldPlan plan = kfold_split(table.observations(), options.folds, options.seed, table.labels);
    report.stratified = plan.stratified;
    if (!plan.stratified) {
        report.notes.push_back("a class has fewer members than folds; folds are not stratified");
    }

    for (std::size_t f = 0; f < plan.folds.size(); ++f) {
        const Fold& fold = plan.folds[f];
        const LabeledDataset train = fit_scaled(table, fold.train);
        const Eigen::MatrixXd test_x = minmax_apply(train.scaler, select_columns(table.features, fold.test));
        const std::vector<int> test_y = select(table.labels, fold.test);

        TrainConfig cfg = report.config;
        cfg.seed = options.seed + f;
        const FitResult fitted = fit(train, cfg);
        const FcmModel& model = fitted.model;

        FoldResult r;
        r.fold = static_cast<int>(f);
        r.train_size = static_cast<int>(fold.train.size());
        r.test_size = static_cast<int>(fold.test.size());
        r.final_loss = fitted.loss_history.back();
        r.train_accuracy = accuracy(predict(model, train.features), train.labels);
        const std::vector<int> test_pred = predict(model, test_x);
        r.test_accuracy = accuracy(test_pred, test_y);
        r.test_f1 = f1_macro(test_pred, test_y, report.classes);

        const Eigen::MatrixXd train_t = transform(model, train.features);
        const Eigen::MatrixXd test_t = transform(model, test_x);
        r.original_train = detail::try_scores(train.features, train.labels);
        r.transformed_train = detail::try_scores(train_t, train.labels);
        r.original_test = detail::try_scores(test_x, test_y);
        r.transformed_test = detail::try_scores(test_t, test_y);

        if (options.downstream) {
            DownstreamScores s;
            const auto orig = detail::run_downstream(*options.downstream, options.logreg, train.features, train.labels,
                                                     test_x, report.classes);
            const auto tran = detail::run_downstream(*options.downstream, options.logreg, train_t, train.labels, test_t,
                                                     report.classes);
            s.accuracy_original = accuracy(orig, test_y);
            s.f1_original = f1_macro(orig, test_y, report.classes);
            s.accuracy_transformed = accuracy(tran, test_y);
            s.f1_transformed = f1_macro(tran, test_y, report.classes);
            r.downstream = s;
        }
        report.fold_results.push_back(std::move(r));
    }
    return report;
}

/// FCM transformer followed by a downstream classifier, compared with the
/// same classifier on the original features over identical folds.
inline CvReport pipeline_fit_eval(const RawTable& table, const TrainConfig& fcm_cfg, const Downstream& downstream,
                                  int folds, std::uint64_t seed, const LogRegConfig& logreg = {}) {
    CvOptions options;
    options.fcm = fcm_cfg;
    options.folds = folds;
    options.seed = seed;
    options.downstream = downstream;
    options.logreg = logreg;
    return cross_validate(table, options);
}

namespace detail {

inline nlohmann::ordered_json number(double v) {
    if (std::isfinite(v)) {
        return v;
    }
    return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

inline nlohmann::ordered_json scores_json(const std::optional<ClusterScoreTriple>& s) {
    if (!s) {
        return nullptr;
    }
    nlohmann::ordered_json j;
    j["davies_bouldin"] = number(s->davies_bouldin);
    j["silhouette"] = number(s->silhouette);
    j["calinski_harabasz"] = number(s->calinski_harabasz);
    return j;
}

inline nlohmann::ordered_json vote_json(const std::optional<ClusterScoreTriple>& orig,
                                        const std::optional<ClusterScoreTriple>& tran) {
    if (!orig || !tran) {
        return nullptr;
    }
    const VoteResult v = majority_vote_improvement(*orig, *tran);
    nlohmann::ordered_json j;
    j["outcome"] = to_string(v.outcome);
    j["wins"] = v.wins;
    return j;
}

} // namespace detail

inline nlohmann::ordered_json report_to_json(const CvReport& report) {
    using detail::number;
    nlohmann::ordered_json j;
    j["format"] = "fcm-cv-report v1";
    j["dataset"] = report.dataset;
    auto& cfg = j["config"];
    cfg["classifier"] = to_string(report.config.variant);
    cfg["d"] = report.config.depth;
    cfg["lambda"] = report.config.lambda;
    cfg["epochs"] = report.config.epochs;
    cfg["bs"] = report.config.batch_size;
    cfg["optimizer"] = to_string(report.config.optimizer);
    cfg["lr"] = report.config.learning_rate;
    j["folds"] = report.folds;
    j["seed"] = report.seed;
    j["stratified"] = report.stratified;
    j["inputs"] = report.inputs;
    j["classes"] = report.classes;
    j["transformed_features"] = report.transformed_features;
    j["transformed_space"] = "A^(d-1), all input and output concepts";
    j["downstream"] = report.downstream ? nlohmann::ordered_json(report.downstream->name()) : nullptr;
    j["notes"] = report.notes;

    auto& folds = j["per_fold"];
    folds = nlohmann::ordered_json::array();
    for (const auto& f : report.fold_results) {
        nlohmann::ordered_json fj;
        fj["fold"] = f.fold;
        fj["train_size"] = f.train_size;
        fj["test_size"] = f.test_size;
        fj["final_loss"] = number(f.final_loss);
        fj["train_accuracy"] = f.train_accuracy;
        fj["accuracy"] = f.test_accuracy;
        fj["f1_macro"] = f.test_f1;
        fj["clustering"]["train"]["original"] = detail::scores_json(f.original_train);
        fj["clustering"]["train"]["transformed"] = detail::scores_json(f.transformed_train);
        fj["clustering"]["test"]["original"] = detail::scores_json(f.original_test);
        fj["clustering"]["test"]["transformed"] = detail::scores_json(f.transformed_test);
        if (f.downstream) {
            fj["downstream"]["accuracy_original"] = f.downstream->accuracy_original;
            fj["downstream"]["f1_original"] = f.downstream->f1_original;
            fj["downstream"]["accuracy_transformed"] = f.downstream->accuracy_transformed;
            fj["downstream"]["f1_transformed"] = f.downstream->f1_transformed;
        }
        folds.push_back(std::move(fj));
    }

    auto& mean = j["mean"];
    mean["accuracy"] = report.mean([](const FoldResult& f) { return f.test_accuracy; });
    mean["f1_macro"] = report.mean([](const FoldResult& f) { return f.test_f1; });
    mean["train_accuracy"] = report.mean([](const FoldResult& f) { return f.train_accuracy; });
    const auto otr = report.mean_scores(&FoldResult::original_train);
    const auto ttr = report.mean_scores(&FoldResult::transformed_train);
    const auto ote = report.mean_scores(&FoldResult::original_test);
    const auto tte = report.mean_scores(&FoldResult::transformed_test);
    mean["clustering"]["train"]["original"] = detail::scores_json(otr);
    mean["clustering"]["train"]["transformed"] = detail::scores_json(ttr);
    mean["clustering"]["train"]["vote"] = detail::vote_json(otr, ttr);
    mean["clustering"]["test"]["original"] = detail::scores_json(ote);
    mean["clustering"]["test"]["transformed"] = detail::scores_json(tte);
    mean["clustering"]["test"]["vote"] = detail::vote_json(ote, tte);
    if (report.downstream) {
        auto get = [&](double DownstreamScores::*m) {
            return report.mean([m](const FoldResult& f) { return f.downstream ? (*f.downstream).*m : 0.0; });
        };
        mean["downstream"]["accuracy_original"] = get(&DownstreamScores::accuracy_original);
        mean["downstream"]["f1_original"] = get(&DownstreamScores::f1_original);
        mean["downstream"]["accuracy_transformed"] = get(&DownstreamScores::accuracy_transformed);
        mean["downstream"]["f1_transformed"] = get(&DownstreamScores::f1_transformed);
    }
    return j;
}

inline std::string render_report(const CvReport& report) { return report_to_json(report).dump(2) + "\n"; }

} // namespace fcm
