// fcm: train, evaluate and apply fuzzy cognitive map classifiers.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "fcm/fcm.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw fcm::DataError("cannot open '" + path + "' for writing");
    }
    out << text;
    out.flush();
    if (!out) {
        throw fcm::DataError("failed writing '" + path + "'");
    }
}

std::optional<int> label_column(int col) { return col < 0 ? std::nullopt : std::optional<int>(col); }

struct TrainArgs {
    std::string data;
    std::string config;
    std::string model_out;
    std::uint64_t seed = 0;
    int label_col = -1;
};

int cmd_train(const TrainArgs& a) {
    fcm::TrainConfig cfg = fcm::load_train_config(a.config);
    cfg.seed = a.seed;
    const fcm::RawTable table = fcm::load_csv(a.data, label_column(a.label_col));
    const fcm::LabeledDataset ds = fcm::fit_scaled(table);
    const fcm::FitResult result = fcm::fit(ds, cfg);
    fcm::save_model(result.model, a.model_out);
    const double acc = fcm::accuracy(fcm::predict(result.model, ds.features), ds.labels);
    std::cout << std::setprecision(6) << "initial loss: " << result.loss_history.front() << '\n'
              << "final loss: " << result.loss_history.back() << '\n'
              << "training accuracy: " << acc << '\n'
              << "model written to " << a.model_out << '\n';
    return kOk;
}

struct CrossvalArgs {
    std::string data;
    std::string config;
    int folds = 5;
    std::uint64_t seed = 0;
    std::string report;
    std::string pipeline;
    int label_col = -1;
};

int cmd_crossval(const CrossvalArgs& a) {
    fcm::CvOptions opt;
    opt.fcm = fcm::load_train_config(a.config);
    opt.folds = a.folds;
    opt.seed = a.seed;
    if (!a.pipeline.empty()) {
        opt.downstream = fcm::parse_downstream(a.pipeline);
    }
    opt.dataset_name = std::filesystem::path(a.data).stem().string();
    const fcm::RawTable table = fcm::load_csv(a.data, label_column(a.label_col));
    const fcm::CvReport report = fcm::cross_validate(table, opt);
    const std::string text = fcm::render_report(report);
    if (a.report.empty()) {
        std::cout << text;
    } else {
        write_text(a.report, text);
        std::cout << std::setprecision(6) << "mean accuracy: "
                  << report.mean([](const fcm::FoldResult& f) { return f.test_accuracy; }) << '\n'
                  << "report written to " << a.report << '\n';
    }
    return kOk;
}

struct ApplyArgs {
    std::string model;
    std::string data;
    std::string out;
    int label_col = -1;
};

/// Raw features for the model: the stored scaler is applied when present.
Eigen::MatrixXd model_inputs(const fcm::FcmModel& model, const ApplyArgs& a) {
    const Eigen::MatrixXd raw = fcm::load_feature_csv(a.data, model.inputs(), label_column(a.label_col));
    return model.scaler().empty() ? raw : fcm::minmax_apply(model.scaler(), raw);
}

void emit(const std::string& out, const std::string& text) {
    if (out.empty()) {
        std::cout << text;
    } else {
        write_text(out, text);
    }
}

int cmd_predict(const ApplyArgs& a) {
    const fcm::FcmModel model = fcm::load_model(a.model);
    const auto labels = fcm::predict(model, model_inputs(model, a));
    std::ostringstream text;
    text << "label\n";
    for (int y : labels) {
        text << model.class_labels()[static_cast<std::size_t>(y)] << '\n';
    }
    emit(a.out, text.str());
    return kOk;
}

int cmd_transform(const ApplyArgs& a) {
    const fcm::FcmModel model = fcm::load_model(a.model);
    const Eigen::MatrixXd t = fcm::transform(model, model_inputs(model, a));
    std::ostringstream text;
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
        text << (i ? "," : "") << "c" << i;
    }
    text << '\n';
    for (Eigen::Index j = 0; j < t.cols(); ++j) {
        for (Eigen::Index i = 0; i < t.rows(); ++i) {
            text << (i ? "," : "") << fcm::detail::format_double(t(i, j));
        }
        text << '\n';
    }
    emit(a.out, text.str());
    return kOk;
}

struct GradcheckArgs {
    fcm::GradcheckOptions opt;
    std::string variant = "FCMMC";
};

int cmd_gradcheck(GradcheckArgs a) {
    a.opt.variant = fcm::parse_variant(a.variant);
    const fcm::GradcheckResult r = fcm::run_gradcheck(a.opt);
    constexpr double kTolerance = 1e-4;
    std::cout << std::scientific << std::setprecision(3) << "trials: " << r.trials << '\n'
              << "max relative error (backprop vs finite differences): " << r.max_error << '\n';
    bool ok = r.max_error < kTolerance;
    if (r.analytic_error) {
        std::cout << "max relative error (backprop vs logistic gradient): " << *r.analytic_error << '\n';
        ok = ok && *r.analytic_error < kTolerance;
    }
    std::cout << (ok ? "PASS" : "FAIL") << '\n';
    return ok ? kOk : kNumerical;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fuzzy cognitive map classifier and feature transformer"};
    app.require_subcommand(1);

    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "Train on a whole CSV file and save the model");
    train_cmd->add_option("--data", train.data, "CSV file with a header; labels in the last column")->required();
    train_cmd->add_option("--config", train.config, "key = value training config")->required();
    train_cmd->add_option("--model-out", train.model_out, "Output model file")->required();
    train_cmd->add_option("--seed", train.seed, "Random seed");
    train_cmd->add_option("--label-col", train.label_col, "Zero-based label column (default: last)");

    CrossvalArgs cv;
    auto* cv_cmd = app.add_subcommand("crossval", "k-fold cross-validation with a JSON report");
    cv_cmd->add_option("--data", cv.data, "CSV file with a header; labels in the last column")->required();
    cv_cmd->add_option("--config", cv.config, "key = value training config")->required();
    cv_cmd->add_option("--folds", cv.folds, "Number of folds")->check(CLI::Range(2, 1000));
    cv_cmd->add_option("--seed", cv.seed, "Random seed");
    cv_cmd->add_option("--report", cv.report, "Report file (default: stdout)");
    cv_cmd->add_option("--pipeline", cv.pipeline, "Downstream classifier: logreg, knn3 or knn5");
    cv_cmd->add_option("--label-col", cv.label_col, "Zero-based label column (default: last)");

    ApplyArgs predict;
    auto* predict_cmd = app.add_subcommand("predict", "Predict class labels with a saved model");
    ApplyArgs transform;
    auto* transform_cmd = app.add_subcommand("transform", "Export the transformed feature space");
    for (auto [cmd, args] : {std::pair{predict_cmd, &predict}, std::pair{transform_cmd, &transform}}) {
        cmd->add_option("--model", args->model, "Model file")->required();
        cmd->add_option("--data", args->data, "CSV file with n feature columns and an optional label column")
            ->required();
        cmd->add_option("--out", args->out, "Output CSV (default: stdout)");
        cmd->add_option("--label-col", args->label_col, "Zero-based column to skip");
    }

    GradcheckArgs gc;
    auto* gc_cmd = app.add_subcommand("gradcheck", "Compare backpropagation with finite differences");
    gc_cmd->add_option("--n", gc.opt.n, "Input concepts (at most 16)")->check(CLI::Range(1, 16));
    gc_cmd->add_option("--k", gc.opt.k, "Classes");
    gc_cmd->add_option("--d", gc.opt.depth, "Depth");
    gc_cmd->add_option("--variant", gc.variant, "FCMB or FCMMC");
    gc_cmd->add_option("--trials", gc.opt.trials, "Random instances");
    gc_cmd->add_option("--seed", gc.opt.seed, "Random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*train_cmd) {
            return cmd_train(train);
        }
        if (*cv_cmd) {
            return cmd_crossval(cv);
        }
        if (*predict_cmd) {
            return cmd_predict(predict);
        }
        if (*transform_cmd) {
            return cmd_transform(transform);
        }
        if (*gc_cmd) {
            if (fcm::parse_variant(gc.variant) == fcm::Variant::FCMB && gc_cmd->count("--k") == 0) {
                gc.opt.k = 2;
            }
            return cmd_gradcheck(gc);
        }
    } catch (const fcm::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const fcm::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kNumerical;
    } catch (const fcm::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kData;
    }
    return kUsage;
}
