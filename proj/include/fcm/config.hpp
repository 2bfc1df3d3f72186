#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>

#include "fcm/dataset.hpp"
#include "fcm/errors.hpp"
#include "fcm/model.hpp"
#include "fcm/optimizer.hpp"
#include "fcm/trainer.hpp"

namespace fcm {

/// Reads a flat `key = value` training config. Keys follow the
/// hyperparameter table columns: classifier, d, lambda, epochs, bs (-1 for a
/// full batch), optimizer, lr. Blank lines and `#` comments are ignored;
/// missing keys keep the TrainConfig defaults.
inline TrainConfig parse_train_config(std::istream& in, const std::string& source = "<config>") {
    TrainConfig cfg;
    std::string line;
    int line_no = 0;
    auto as_int = [&](const std::string& key, const std::string& v) {
        int out = 0;
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || ptr != v.data() + v.size()) {
            throw ConfigError(source + ":" + std::to_string(line_no) + ": '" + key + "' must be an integer, got '" + v +
                              "'");
        }
        return out;
    };
    auto as_double = [&](const std::string& key, const std::string& v) {
        const auto parsed = detail::parse_double(v);
        if (!parsed || !std::isfinite(*parsed)) {
            throw ConfigError(source + ":" + std::to_string(line_no) + ": '" + key + "' must be a number, got '" + v +
                              "'");
        }
        return *parsed;
    };
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        const std::string body = detail::trim(line.substr(0, hash));
        if (body.empty()) {
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'key = value', got '" + body + "'");
        }
        const std::string key = detail::trim(body.substr(0, eq));
        const std::string value = detail::trim(body.substr(eq + 1));
        if (key == "classifier") {
            cfg.variant = parse_variant(value);
        } else if (key == "d") {
            cfg.depth = as_int(key, value);
        } else if (key == "lambda") {
            cfg.lambda = as_double(key, value);
        } else if (key == "epochs") {
            cfg.epochs = as_int(key, value);
        } else if (key == "bs") {
            cfg.batch_size = as_int(key, value);
        } else if (key == "optimizer") {
            cfg.optimizer = parse_optimizer(value);
        } else if (key == "lr") {
            cfg.learning_rate = as_double(key, value);
        } else {
            throw ConfigError(source + ":" + std::to_string(line_no) + ": unknown config key '" + key +
                              "' (expected classifier, d, lambda, epochs, bs, optimizer, lr)");
        }
    }
    cfg.validate();
    return cfg;
}

inline TrainConfig parse_train_config(const std::string& text) {
    std::istringstream in(text);
    return parse_train_config(in);
}

inline TrainConfig load_train_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    return parse_train_config(in, path);
}

} // namespace fcm
