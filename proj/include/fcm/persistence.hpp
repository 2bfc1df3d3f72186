#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <Eigen/Dense>

#include "fcm/errors.hpp"
#include "fcm/model.hpp"

namespace fcm {

/// Model file format v1: a line-oriented text document.
///
///     fcm-model v1
///     variant FCMMC
///     inputs <n>
///     classes <k>
///     depth <d>
///     lambda <value>
///     labels <k>
///     <one class label per line>
///     scaler <n or 0>
///     <min> <max>            one line per feature
///     weights <r>
///     <r values>             one line per row of W
///     bias
///     <r values>
///     end
///
/// Numbers use the shortest representation that reads back to the same double.
inline constexpr std::string_view kModelMagic = "fcm-model";
inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

class ModelReader {
public:
    explicit ModelReader(std::istream& in) : in_(in) {}

    std::string line(const char* what) {
        std::string s;
        if (!std::getline(in_, s)) {
            throw DataError("model file truncated: expected " + std::string(what) + " at line " +
                            std::to_string(line_no_ + 1));
        }
        ++line_no_;
        if (!s.empty() && s.back() == '\r') {
            s.pop_back();
        }
        return s;
    }

    std::vector<std::string_view> fields(const std::string& s) const {
        std::vector<std::string_view> out;
        std::string_view rest(s);
        while (!rest.empty()) {
            const auto start = rest.find_first_not_of(" \t");
            if (start == std::string_view::npos) {
                break;
            }
            rest.remove_prefix(start);
            const auto end = rest.find_first_of(" \t");
            out.push_back(rest.substr(0, end));
            rest.remove_prefix(end == std::string_view::npos ? rest.size() : end);
        }
        return out;
    }

    std::string keyed(const char* key) {
        const std::string s = line(key);
        const auto f = fields(s);
        if (f.size() != 2 || f[0] != key) {
            fail("expected '" + std::string(key) + " <value>'");
        }
        return std::string(f[1]);
    }

    int keyed_int(const char* key) {
        const std::string v = keyed(key);
        int out = 0;
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || ptr != v.data() + v.size()) {
            fail("'" + std::string(key) + "' is not an integer: '" + v + "'");
        }
        return out;
    }

    double number(std::string_view text) {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc() || ptr != text.data() + text.size()) {
            fail("not a number: '" + std::string(text) + "'");
        }
        if (!std::isfinite(v)) {
            throw NumericalError("model file line " + std::to_string(line_no_) + ": non-finite value");
        }
        return v;
    }

    std::vector<double> numbers(const char* what, std::size_t expected, const char* shape_hint) {
        const std::string s = line(what);
        const auto f = fields(s);
        if (f.size() != expected) {
            throw ShapeError("model file line " + std::to_string(line_no_) + ": " + shape_hint + " expected " +
                             std::to_string(expected) + " values, got " + std::to_string(f.size()));
        }
        std::vector<double> out;
        out.reserve(f.size());
        for (auto t : f) {
            out.push_back(number(t));
        }
        return out;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw DataError("model file line " + std::to_string(line_no_) + ": " + msg);
    }

private:
    std::istream& in_;
    int line_no_ = 0;
};

} // namespace detail

inline void write_model(const FcmModel& model, std::ostream& out) {
    using detail::format_double;
    const int r = model.state_size();
    out << kModelMagic << " v" << kModelFormatVersion << '\n';
    out << "variant " << to_string(model.variant()) << '\n';
    out << "inputs " << model.inputs() << '\n';
    out << "classes " << model.classes() << '\n';
    out << "depth " << model.depth() << '\n';
    out << "lambda " << format_double(model.activation().lambda()) << '\n';
    out << "labels " << model.class_labels().size() << '\n';
    for (const auto& label : model.class_labels()) {
        out << label << '\n';
    }
    out << "scaler " << model.scaler().size() << '\n';
    for (std::size_t i = 0; i < model.scaler().size(); ++i) {
        out << format_double(model.scaler().mins[i]) << ' ' << format_double(model.scaler().maxs[i]) << '\n';
    }
    out << "weights " << r << '\n';
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < r; ++j) {
            out << (j ? " " : "") << format_double(model.weights()(i, j));
        }
        out << '\n';
    }
    out << "bias\n";
    for (int i = 0; i < r; ++i) {
        out << (i ? " " : "") << format_double(model.bias()(i));
    }
    out << "\nend\n";
}

inline FcmModel read_model(std::istream& in) {
    detail::ModelReader rd(in);
    {
        const std::string head = rd.line("header");
        const auto f = rd.fields(head);
        if (f.size() != 2 || f[0] != kModelMagic) {
            rd.fail("not an FCM model file");
        }
        if (f[1] != "v" + std::to_string(kModelFormatVersion)) {
            throw DataError("unsupported model format version '" + std::string(f[1]) + "' (this build reads v" +
                            std::to_string(kModelFormatVersion) + ")");
        }
    }
    Variant variant = Variant::FCMMC;
    try {
        variant = parse_variant(rd.keyed("variant"));
    } catch (const ConfigError& e) {
        rd.fail(e.what());
    }
    const int n = rd.keyed_int("inputs");
    const int k = rd.keyed_int("classes");
    const int depth = rd.keyed_int("depth");
    const double lambda = rd.number(rd.keyed("lambda"));
    if (n < 1 || k < 2 || depth < 1 || !(lambda > 0.0)) {
        rd.fail("invalid model dimensions or hyperparameters");
    }

    const int label_count = rd.keyed_int("labels");
    if (label_count != k) {
        throw ShapeError("model file lists " + std::to_string(label_count) + " labels for " + std::to_string(k) +
                         " classes");
    }
    std::vector<std::string> labels;
    for (int i = 0; i < label_count; ++i) {
        labels.push_back(rd.line("class label"));
    }

    const int scaled = rd.keyed_int("scaler");
    if (scaled != 0 && scaled != n) {
        throw ShapeError("model file scaler covers " + std::to_string(scaled) + " features, expected 0 or " +
                         std::to_string(n));
    }
    MinMaxScaler scaler;
    for (int i = 0; i < scaled; ++i) {
        const auto pair = rd.numbers("scaler row", 2, "scaler row");
        scaler.mins.push_back(pair[0]);
        scaler.maxs.push_back(pair[1]);
    }

    const int r = state_size(variant, n, k);
    const int rows = rd.keyed_int("weights");
    if (rows != r) {
        throw ShapeError("model file declares " + std::to_string(rows) + " weight rows; expected r = " +
                         std::to_string(r) + " for " + to_string(variant) + " with n = " + std::to_string(n) +
                         ", k = " + std::to_string(k));
    }
    Eigen::MatrixXd w(r, r);
    const std::string hint = "weight row (r = " + std::to_string(r) + ")";
    for (int i = 0; i < r; ++i) {
        const auto row = rd.numbers("weight row", static_cast<std::size_t>(r), hint.c_str());
        for (int j = 0; j < r; ++j) {
            w(i, j) = row[static_cast<std::size_t>(j)];
        }
    }
    if (rd.line("'bias'") != "bias") {
        rd.fail("expected 'bias'");
    }
    const std::string bias_hint = "bias (r = " + std::to_string(r) + ")";
    const auto bias_values = rd.numbers("bias values", static_cast<std::size_t>(r), bias_hint.c_str());
    Eigen::VectorXd b(r);
    for (int i = 0; i < r; ++i) {
        b(i) = bias_values[static_cast<std::size_t>(i)];
    }
    if (rd.line("'end'") != "end") {
        rd.fail("expected 'end'");
    }
    return FcmModel(variant, n, k, std::move(w), std::move(b), depth, ActivationConfig{lambda}, std::move(labels),
                    std::move(scaler));
}

inline void save_model(const FcmModel& model, const std::string& path) {
    std::ostringstream buf;
    write_model(model, buf);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot open '" + path + "' for writing");
    }
    out << buf.str();
    out.flush();
    if (!out) {
        throw DataError("failed writing model to '" + path + "'");
    }
}

inline FcmModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open model file '" + path + "'");
    }
    return read_model(in);
}

} // namespace fcm
