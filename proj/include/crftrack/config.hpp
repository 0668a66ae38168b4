// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 crftrack contributors

#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "crftrack/errors.hpp"

namespace crftrack {

/// Flat `key = value` text configuration (UTF-8, one pair per line,
/// '#' starts a comment). Insertion order is preserved for serialization.
class Config {
public:
    Config() = default;

    static Config parse(std::istream& in, const std::string& origin = "<stream>") {
        Config cfg;
        std::string line;
        int lineNo = 0;
        while (std::getline(in, line)) {
            ++lineNo;
            const std::string stripped = strip(stripComment(line));
            if (stripped.empty()) continue;
            const auto eq = stripped.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(lineNo) + ": expected `key = value`, got `" + stripped + "`");
            const std::string key = strip(stripped.substr(0, eq));
            const std::string value = strip(stripped.substr(eq + 1));
            if (key.empty())
                throw ConfigError(origin + ":" + std::to_string(lineNo) + ": empty key");
            cfg.set(key, value);
        }
        return cfg;
    }

    static Config load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open config file: " + path);
        return parse(in, path);
    }

    void set(const std::string& key, const std::string& value) {
        auto it = index_.find(key);
        if (it == index_.end()) {
            index_[key] = entries_.size();
            entries_.push_back({key, value});
        } else {
            entries_[it->second].second = value;
        }
    }

    bool has(const std::string& key) const { return index_.count(key) != 0; }

    const std::string& getString(const std::string& key) const {
        auto it = index_.find(key);
        if (it == index_.end()) throw ConfigError("missing config key: " + key);
        return entries_[it->second].second;
    }

    std::string getString(const std::string& key, const std::string& fallback) const {
        return has(key) ? getString(key) : fallback;
    }

    double getDouble(const std::string& key) const { return toDouble(key, getString(key)); }
    double getDouble(const std::string& key, double fallback) const {
        return has(key) ? getDouble(key) : fallback;
    }

    int getInt(const std::string& key) const {
        const double v = getDouble(key);
        const int i = static_cast<int>(v);
        if (static_cast<double>(i) != v)
            throw ConfigError("config key `" + key + "`: expected integer, got " + getString(key));
        return i;
    }
    int getInt(const std::string& key, int fallback) const { return has(key) ? getInt(key) : fallback; }

    bool getBool(const std::string& key) const {
        std::string v = getString(key);
        std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
        if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
        if (v == "false" || v == "0" || v == "no" || v == "off") return false;
        throw ConfigError("config key `" + key + "`: expected boolean, got " + getString(key));
    }
    bool getBool(const std::string& key, bool fallback) const { return has(key) ? getBool(key) : fallback; }

    /// Comma-separated list of doubles, e.g. `camera.pan = 2,0`.
    std::vector<double> getDoubleList(const std::string& key) const {
        const std::string& raw = getString(key);
        std::vector<double> out;
        std::stringstream ss(raw);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(toDouble(key, strip(item)));
        return out;
    }

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    std::vector<std::string> keysWithPrefix(const std::string& prefix) const {
        std::vector<std::string> out;
        for (const auto& [k, v] : entries_)
            if (k.rfind(prefix, 0) == 0) out.push_back(k);
        return out;
    }

    std::string serialize() const {
        std::ostringstream out;
        for (const auto& [k, v] : entries_) out << k << " = " << v << "\n";
        return out.str();
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw IoError("cannot write config file: " + path);
        out << serialize();
    }

private:
    static std::string stripComment(const std::string& s) {
        const auto pos = s.find('#');
        return pos == std::string::npos ? s : s.substr(0, pos);
    }

    static std::string strip(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    static double toDouble(const std::string& key, const std::string& raw) {
        try {
            std::size_t used = 0;
            const double v = std::stod(raw, &used);
            if (used != raw.size()) throw std::invalid_argument(raw);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key `" + key + "`: expected number, got `" + raw + "`");
        }
    }

    std::vector<std::pair<std::string, std::string>> entries_;
    std::map<std::string, std::size_t> index_;
};

}  // namespace crftrack
