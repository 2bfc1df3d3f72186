#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "fcm/config.hpp"
#include "fcm/dataset.hpp"
#include "fcm/errors.hpp"
#include "fcm/inference.hpp"
#include "fcm/metrics.hpp"
#include "fcm/trainer.hpp"
#include "support.hpp"

namespace fcm {
namespace {

LabeledDataset small_dataset(std::uint64_t seed, int m, int n, int k) {
    Rng rng(seed);
    LabeledDataset ds;
    ds.features = test::random_matrix(rng, n, m, 0, 1);
    ds.labels = test::random_labels(rng, m, k);
    for (int c = 0; c < k; ++c) {
        ds.label_names.push_back("c" + std::to_string(c));
    }
    return ds;
}

TEST(InitWeights, DeterministicShapedAndBounded) {
    const auto [w1, b1] = init_weights(2, 2, Variant::FCMB, 5);
    const auto [w2, b2] = init_weights(2, 2, Variant::FCMB, 5);
    const auto [w3, b3] = init_weights(2, 2, Variant::FCMB, 6);
    EXPECT_EQ(w1.rows(), 3);
    EXPECT_EQ(b1.size(), 3);
    EXPECT_EQ(w1, w2);
    EXPECT_EQ(b1, b2);
    EXPECT_NE(w1, w3);
    const auto [w, b] = init_weights(6, 4, Variant::FCMMC, 1);
    EXPECT_EQ(w.rows(), 10);
    EXPECT_LE(w.cwiseAbs().maxCoeff(), 0.5);
    EXPECT_LE(b.cwiseAbs().maxCoeff(), 0.5);
}

TEST(MakeBatches, FullBatchKeepsOrder) {
    Rng rng(0);
    const auto batches = make_batches(10, kFullBatch, rng);
    ASSERT_EQ(batches.size(), 1u);
    EXPECT_EQ(batches[0], (std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}));
}

TEST(MakeBatches, DropsRemainder) {
    Rng rng(1);
    const auto batches = make_batches(10, 3, rng);
    ASSERT_EQ(batches.size(), 3u);
    std::set<int> seen;
    for (const auto& b : batches) {
        EXPECT_EQ(b.size(), 3u);
        seen.insert(b.begin(), b.end());
    }
    EXPECT_EQ(seen.size(), 9u);
}

TEST(MakeBatches, EpochsCoverEveryIndex) {
    Rng rng(2);
    std::set<int> seen;
    for (int epoch = 0; epoch < 50; ++epoch) {
        for (const auto& b : make_batches(10, 3, rng)) {
            seen.insert(b.begin(), b.end());
        }
    }
    EXPECT_EQ(seen.size(), 10u);
}

TEST(MakeBatches, RejectsOversizedBatch) {
    Rng rng(3);
    EXPECT_THROW(make_batches(5, 6, rng), ConfigError);
}

TEST(TrainConfig, Validation) {
    TrainConfig c;
    c.epochs = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.learning_rate = -1;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.batch_size = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.lambda = 0;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Fit, HistoryLengthMatchesBatchCount) {
    const auto ds = small_dataset(1, 23, 3, 3);
    TrainConfig c;
    c.epochs = 7;
    c.batch_size = 5;
    EXPECT_EQ(fit(ds, c).loss_history.size(), 7u * 4u);
    c.batch_size = kFullBatch;
    EXPECT_EQ(fit(ds, c).loss_history.size(), 7u);
}

TEST(Fit, DeterministicPerSeed) {
    const auto ds = small_dataset(2, 30, 3, 2);
    TrainConfig c;
    c.variant = Variant::FCMB;
    c.epochs = 20;
    c.batch_size = 4;
    c.seed = 99;
    const auto a = fit(ds, c);
    const auto b = fit(ds, c);
    EXPECT_EQ(a.model.weights(), b.model.weights());
    EXPECT_EQ(a.model.bias(), b.model.bias());
    EXPECT_EQ(a.loss_history, b.loss_history);
    c.seed = 100;
    EXPECT_NE(fit(ds, c).model.weights(), a.model.weights());
}

TEST(Fit, DoesNotMutateDataset) {
    const auto ds = small_dataset(3, 20, 2, 2);
    const auto copy = ds;
    TrainConfig c;
    c.epochs = 5;
    c.batch_size = 3;
    static_cast<void>(fit(ds, c));
    EXPECT_EQ(ds.features, copy.features);
    EXPECT_EQ(ds.labels, copy.labels);
}

TEST(Fit, SgdTinyStepsDescend) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto ds = small_dataset(10 + seed, 12, 3, 3);
        TrainConfig c;
        c.optimizer = OptimizerKind::SGD;
        c.learning_rate = 1e-3;
        c.epochs = 10;
        c.seed = seed;
        const auto h = fit(ds, c).loss_history;
        for (std::size_t i = 1; i < h.size(); ++i) {
            EXPECT_LT(h[i], h[i - 1]);
        }
    }
}

TEST(Fit, BinaryVariantNeedsTwoClasses) {
    const auto ds = small_dataset(4, 10, 2, 3);
    TrainConfig c;
    c.variant = Variant::FCMB;
    EXPECT_THROW(fit(ds, c), ConfigError);
}

TEST(Fit, NonFiniteInputAborts) {
    auto ds = small_dataset(5, 10, 2, 2);
    ds.features(1, 3) = std::nan("");
    TrainConfig c;
    c.epochs = 3;
    EXPECT_THROW(fit(ds, c), NumericalError);
}

TEST(Fit, KeepsLabelNamesAndScaler) {
    auto ds = small_dataset(6, 10, 2, 2);
    ds.scaler = minmax_fit(ds.features);
    TrainConfig c;
    c.epochs = 2;
    const auto r = fit(ds, c);
    EXPECT_EQ(r.model.class_labels(), ds.label_names);
    EXPECT_EQ(r.model.scaler(), ds.scaler);
}

TEST(Fit, IrisTableConfigLowersLoss) {
    const RawTable table = load_csv(std::string(FCM_DATA_DIR) + "/iris.csv");
    const TrainConfig cfg = load_train_config(std::string(FCM_CONFIG_DIR) + "/iris.cfg");
    const auto r = fit(fit_scaled(table), cfg);
    EXPECT_LT(r.loss_history.back(), r.loss_history.front());
}

TEST(Fit, TwoMoonsReachesHighTrainingAccuracy) {
    const LabeledDataset ds = fit_scaled(make_moons(200, 0.1, 0));
    const TrainConfig cfg = load_train_config(std::string(FCM_CONFIG_DIR) + "/moons.cfg");
    EXPECT_EQ(cfg.variant, Variant::FCMMC);
    EXPECT_EQ(cfg.depth, 3);
    EXPECT_EQ(cfg.lambda, 2.0);
    const auto r = fit(ds, cfg);
    EXPECT_GE(accuracy(predict(r.model, ds.features), ds.labels), 0.95);
}

TEST(Config, ParsesTableRow) {
    const TrainConfig c = parse_train_config(
        "# iris\nclassifier = FCMMC\nd = 4\nlambda = 3\nepochs = 3000\nbs = -1\noptimizer = rmsprop\nlr = 0.0005\n");
    EXPECT_EQ(c.variant, Variant::FCMMC);
    EXPECT_EQ(c.depth, 4);
    EXPECT_EQ(c.lambda, 3.0);
    EXPECT_EQ(c.epochs, 3000);
    EXPECT_EQ(c.batch_size, kFullBatch);
    EXPECT_EQ(c.optimizer, OptimizerKind::RMSProp);
    EXPECT_EQ(c.learning_rate, 0.0005);
}

TEST(Config, UnknownKeyIsNamed) {
    try {
        parse_train_config("depth = 3\n");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("'depth'"), std::string::npos);
    }
}

TEST(Config, RejectsMalformedValues) {
    EXPECT_THROW(parse_train_config("epochs = many\n"), ConfigError);
    EXPECT_THROW(parse_train_config("lr = -0.1\n"), ConfigError);
    EXPECT_THROW(parse_train_config("just text\n"), ConfigError);
    EXPECT_THROW(parse_train_config("classifier = tree\n"), ConfigError);
}

} // namespace
} // namespace fcm
