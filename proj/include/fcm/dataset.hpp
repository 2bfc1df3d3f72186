#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <Eigen/Dense>

#include "fcm/errors.hpp"
#include "fcm/random.hpp"
#include "fcm/scaling.hpp"

namespace fcm {

/// Unscaled features (n x m, one column per row of the file) and encoded labels.
struct RawTable {
    Eigen::MatrixXd features;
    std::vector<int> labels;
    std::vector<std::string> label_names;
    std::vector<std::string> feature_names;

    int classes() const { return static_cast<int>(label_names.size()); }
    int observations() const { return static_cast<int>(features.cols()); }
};

/// Features scaled into [0, 1] together with the scaler that produced them.
/// The labels double as the ground-truth clustering assignment.
struct LabeledDataset {
    Eigen::MatrixXd features;
    std::vector<int> labels;
    std::vector<std::string> label_names;
    MinMaxScaler scaler;

    int inputs() const { return static_cast<int>(features.rows()); }
    int observations() const { return static_cast<int>(features.cols()); }
    int classes() const { return static_cast<int>(label_names.size()); }
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(trim(cell));
            cell.clear();
        } else {
            cell.push_back(c);
        }
    }
    cells.push_back(trim(cell));
    return cells;
}

inline std::optional<double> parse_double(std::string_view text) {
    double v = 0.0;
    const char* begin = text.data();
    const char* end = text.data() + text.size();
    if (begin != end && *begin == '+') {
        ++begin;
    }
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || begin == end) {
        return std::nullopt;
    }
    return v;
}

} // namespace detail

/// Parses CSV text with a header row. `label_column` defaults to the last
/// column; label values are indexed in order of first appearance.
inline RawTable parse_csv(std::istream& in, std::optional<int> label_column = std::nullopt,
                          const std::string& source = "<csv>") {
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        if (!detail::trim(line).empty()) {
            header = detail::split_csv_line(line);
            break;
        }
    }
    if (header.empty()) {
        throw DataError(source + ": empty file, expected a header row");
    }
    const int columns = static_cast<int>(header.size());
    if (columns < 2) {
        throw DataError(source + ": need at least one feature column and a label column");
    }
    const int label_col = label_column.value_or(columns - 1);
    if (label_col < 0 || label_col >= columns) {
        throw DataError(source + ": label column " + std::to_string(label_col) + " does not exist (file has " +
                        std::to_string(columns) + " columns)");
    }

    RawTable table;
    for (int c = 0; c < columns; ++c) {
        if (c != label_col) {
            table.feature_names.push_back(header[static_cast<std::size_t>(c)]);
        }
    }
    std::map<std::string, int> label_index;
    std::vector<std::vector<double>> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) {
            continue;
        }
        const auto cells = detail::split_csv_line(line);
        if (static_cast<int>(cells.size()) != columns) {
            throw DataError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                            " cells, got " + std::to_string(cells.size()));
        }
        std::vector<double> row;
        row.reserve(static_cast<std::size_t>(columns - 1));
        for (int c = 0; c < columns; ++c) {
            const auto& cell = cells[static_cast<std::size_t>(c)];
            if (c == label_col) {
                auto [it, inserted] = label_index.try_emplace(cell, static_cast<int>(table.label_names.size()));
                if (inserted) {
                    table.label_names.push_back(cell);
                }
                table.labels.push_back(it->second);
                continue;
            }
            const auto v = detail::parse_double(cell);
            if (!v || !std::isfinite(*v)) {
                throw DataError(source + ":" + std::to_string(line_no) + ": column " + std::to_string(c + 1) + " ('" +
                                header[static_cast<std::size_t>(c)] + "') is not a finite number: '" + cell + "'");
            }
            row.push_back(*v);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw DataError(source + ": dataset is empty (header only)");
    }
    table.features.resize(columns - 1, static_cast<Eigen::Index>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j) {
        for (int i = 0; i < columns - 1; ++i) {
            table.features(i, static_cast<Eigen::Index>(j)) = rows[j][static_cast<std::size_t>(i)];
        }
    }
    return table;
}

inline RawTable load_csv(const std::string& path, std::optional<int> label_column = std::nullopt) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path + "'");
    }
    return parse_csv(in, label_column, path);
}

/// Features for a model with `inputs` columns. A file with exactly `inputs`
/// columns is all features; one extra column (the last, or `label_column`)
/// is skipped. Any other width is a shape error naming the expected n.
inline Eigen::MatrixXd parse_feature_csv(std::istream& in, int inputs, std::optional<int> label_column = std::nullopt,
                                         const std::string& source = "<csv>") {
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        if (!detail::trim(line).empty()) {
            header = detail::split_csv_line(line);
            break;
        }
    }
    if (header.empty()) {
        throw DataError(source + ": empty file, expected a header row");
    }
    const int columns = static_cast<int>(header.size());
    int skip = -1;
    if (label_column) {
        skip = *label_column;
        if (skip < 0 || skip >= columns) {
            throw DataError(source + ": label column " + std::to_string(skip) + " does not exist");
        }
    } else if (columns == inputs + 1) {
        skip = columns - 1;
    }
    if (columns - (skip >= 0 ? 1 : 0) != inputs) {
        throw ShapeError(source + ": model expects n = " + std::to_string(inputs) + " feature columns, file has " +
                         std::to_string(columns - (skip >= 0 ? 1 : 0)));
    }
    std::vector<double> values;
    int line_no = 1;
    int rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) {
            continue;
        }
        const auto cells = detail::split_csv_line(line);
        if (static_cast<int>(cells.size()) != columns) {
            throw DataError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                            " cells, got " + std::to_string(cells.size()));
        }
        for (int c = 0; c < columns; ++c) {
            if (c == skip) {
                continue;
            }
            const auto v = detail::parse_double(cells[static_cast<std::size_t>(c)]);
            if (!v || !std::isfinite(*v)) {
                throw DataError(source + ":" + std::to_string(line_no) + ": column " + std::to_string(c + 1) +
                                " is not a finite number: '" + cells[static_cast<std::size_t>(c)] + "'");
            }
            values.push_back(*v);
        }
        ++rows;
    }
    if (rows == 0) {
        throw DataError(source + ": dataset is empty (header only)");
    }
    Eigen::MatrixXd x(inputs, rows);
    for (int j = 0; j < rows; ++j) {
        for (int i = 0; i < inputs; ++i) {
            x(i, j) = values[static_cast<std::size_t>(j) * static_cast<std::size_t>(inputs) + static_cast<std::size_t>(i)];
        }
    }
    return x;
}

inline Eigen::MatrixXd load_feature_csv(const std::string& path, int inputs, std::optional<int> label_column = std::nullopt) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path + "'");
    }
    return parse_feature_csv(in, inputs, label_column, path);
}

/// Selects columns (observations) of a matrix.
inline Eigen::MatrixXd select_columns(const Eigen::MatrixXd& x, const std::vector<int>& idx) {
    Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) {
        out.col(static_cast<Eigen::Index>(j)) = x.col(idx[j]);
    }
    return out;
}

inline std::vector<int> select(const std::vector<int>& v, const std::vector<int>& idx) {
    std::vector<int> out;
    out.reserve(idx.size());
    for (int i : idx) {
        out.push_back(v[static_cast<std::size_t>(i)]);
    }
    return out;
}

/// Scales a subset of the table with a scaler fitted on that same subset.
inline LabeledDataset fit_scaled(const RawTable& table, const std::vector<int>& idx) {
    const Eigen::MatrixXd x = select_columns(table.features, idx);
    LabeledDataset ds;
    ds.scaler = minmax_fit(x);
    ds.features = minmax_apply(ds.scaler, x);
    ds.labels = select(table.labels, idx);
    ds.label_names = table.label_names;
    return ds;
}

/// Scales the whole table with a scaler fitted on all of it.
inline LabeledDataset fit_scaled(const RawTable& table) {
    std::vector<int> all(static_cast<std::size_t>(table.observations()));
    for (std::size_t i = 0; i < all.size(); ++i) {
        all[i] = static_cast<int>(i);
    }
    return fit_scaled(table, all);
}

struct Fold {
    std::vector<int> train;
    std::vector<int> test;
};

struct FoldPlan {
    std::vector<Fold> folds;
    std::uint64_t seed = 0;
    bool stratified = true;
};

/// Seeded k-fold split, stratified by label when every class has at least
/// `k_folds` members; otherwise a plain shuffled split.
///
/// Stratification shuffles each class, concatenates the classes and deals the
/// sequence round-robin, so per-fold class counts and fold sizes differ by at
/// most one.
inline FoldPlan kfold_split(int m, int k_folds, std::uint64_t seed, const std::vector<int>& labels = {},
                            std::ostream* warnings = &std::cerr) {
    if (k_folds < 2) {
        throw ConfigError("need at least 2 folds, got " + std::to_string(k_folds));
    }
    if (k_folds > m) {
        throw ConfigError("cannot split " + std::to_string(m) + " observations into " + std::to_string(k_folds) +
                          " folds");
    }
    if (!labels.empty() && static_cast<int>(labels.size()) != m) {
        throw ShapeError("label count does not match observation count");
    }
    Rng rng(seed);
    FoldPlan plan;
    plan.seed = seed;

    std::map<int, std::vector<int>> by_class;
    for (int i = 0; i < static_cast<int>(labels.size()); ++i) {
        by_class[labels[static_cast<std::size_t>(i)]].push_back(i);
    }
    bool stratify = !labels.empty();
    for (const auto& [label, members] : by_class) {
        if (static_cast<int>(members.size()) < k_folds) {
            stratify = false;
            if (warnings != nullptr) {
                *warnings << "warning: class " << label << " has " << members.size() << " members, fewer than "
                          << k_folds << " folds; using an unstratified split\n";
            }
            break;
        }
    }

    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(m));
    if (stratify) {
        for (auto& [label, members] : by_class) {
            rng.shuffle(members);
            order.insert(order.end(), members.begin(), members.end());
        }
    } else {
        for (int i = 0; i < m; ++i) {
            order.push_back(i);
        }
        rng.shuffle(order);
    }
    plan.stratified = stratify;

    std::vector<int> fold_of(static_cast<std::size_t>(m));
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        fold_of[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos % static_cast<std::size_t>(k_folds));
    }
    plan.folds.resize(static_cast<std::size_t>(k_folds));
    for (int i = 0; i < m; ++i) {
        for (int f = 0; f < k_folds; ++f) {
            auto& fold = plan.folds[static_cast<std::size_t>(f)];
            (fold_of[static_cast<std::size_t>(i)] == f ? fold.test : fold.train).push_back(i);
        }
    }
    return plan;
}

/// Two interleaving half circles with Gaussian noise; label 0 is the upper moon.
inline RawTable make_moons(int samples, double noise, std::uint64_t seed) {
    if (samples < 2) {
        throw ConfigError("make_moons needs at least 2 samples");
    }
    Rng rng(seed);
    const int outer = samples / 2;
    const int inner = samples - outer;
    RawTable table;
    table.features.resize(2, samples);
    table.feature_names = {"x1", "x2"};
    table.label_names = {"0", "1"};
    auto angle = [](int i, int count) {
        return count > 1 ? std::numbers::pi * i / (count - 1) : 0.0;
    };
    for (int i = 0; i < outer; ++i) {
        const double t = angle(i, outer);
        table.features(0, i) = std::cos(t);
        table.features(1, i) = std::sin(t);
        table.labels.push_back(0);
    }
    for (int i = 0; i < inner; ++i) {
        const double t = angle(i, inner);
        table.features(0, outer + i) = 1.0 - std::cos(t);
        table.features(1, outer + i) = 1.0 - std::sin(t) - 0.5;
        table.labels.push_back(1);
    }
    for (Eigen::Index j = 0; j < table.features.cols(); ++j) {
        table.features(0, j) += noise * rng.normal();
        table.features(1, j) += noise * rng.normal();
    }
    return table;
}

} // namespace fcm
