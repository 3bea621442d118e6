// config.hpp — Flat key=value configuration files and deterministic CSV
// assembly for the experiment front end.

#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ergo/quantum.hpp"

namespace ergo {

/// Flat, typed key-value configuration: one `key = value` per line, '#'
/// comments, no nesting. Typed getters consume keys; finish() rejects
/// anything left over, with line diagnostics.
class KeyValueConfig {
public:
    static KeyValueConfig parse_string(const std::string& text) {
        KeyValueConfig cfg;
        std::istringstream in(text);
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            std::string stripped = line.substr(0, line.find('#'));
            auto first = stripped.find_first_not_of(" \t\r");
            if (first == std::string::npos) continue;
            auto eq = stripped.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
            auto trim = [](std::string s) {
                auto b = s.find_first_not_of(" \t\r");
                auto e = s.find_last_not_of(" \t\r");
                return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
            };
            std::string key = trim(stripped.substr(0, eq));
            std::string value = trim(stripped.substr(eq + 1));
            if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
            if (cfg.values_.count(key))
                throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
            cfg.values_[key] = value;
            cfg.lines_[key] = line_no;
        }
        return cfg;
    }

    static KeyValueConfig parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file '" + path + "'");
        std::stringstream buffer;
        buffer << in.rdbuf();
        return parse_string(buffer.str());
    }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) {
        consumed_.insert(key);
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) {
        consumed_.insert(key);
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            std::size_t pos = 0;
            double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw ConfigError(where(key) + ": '" + it->second + "' is not a number");
        }
    }

    int get_int(const std::string& key, int fallback) {
        consumed_.insert(key);
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            std::size_t pos = 0;
            int v = std::stoi(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw ConfigError(where(key) + ": '" + it->second + "' is not an integer");
        }
    }

    long get_long(const std::string& key, long fallback) {
        consumed_.insert(key);
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            return std::stol(it->second);
        } catch (const std::exception&) {
            throw ConfigError(where(key) + ": '" + it->second + "' is not an integer");
        }
    }

    bool get_bool(const std::string& key, bool fallback) {
        consumed_.insert(key);
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
        if (it->second == "false" || it->second == "0" || it->second == "no") return false;
        throw ConfigError(where(key) + ": '" + it->second + "' is not a boolean");
    }

    /// Reject unconsumed keys.
    void finish() const {
        std::string unknown;
        for (const auto& [key, value] : values_) {
            if (consumed_.count(key)) continue;
            if (!unknown.empty()) unknown += ", ";
            unknown += "'" + key + "'" + (lines_.count(key) ? " (line " + std::to_string(lines_.at(key)) + ")" : "");
        }
        if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);
    }

    /// Resolved view for the run manifest (insertion keys sorted).
    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::string where(const std::string& key) const {
        auto it = lines_.find(key);
        if (it == lines_.end()) return "config key '" + key + "'";
        return "config key '" + key + "' (line " + std::to_string(it->second) + ")";
    }

    std::map<std::string, std::string> values_;
    std::map<std::string, int> lines_;
    std::set<std::string> consumed_;
};

// ---------------------------------------------------------------------------

/// CSV assembly: comma-separated, '.' decimal, 17 significant digits, LF line
/// endings, '#'-prefixed header comments, a trailing string-valued `flags`
/// column on every row.
class CsvBuilder {
public:
    CsvBuilder(std::vector<std::string> columns, std::vector<std::string> comments)
        : columns_(std::move(columns)), comments_(std::move(comments)) {}

    void add_row(const std::vector<double>& values, const std::string& flags = "") {
        if (values.size() != columns_.size())
            throw Error("CsvBuilder: row width " + std::to_string(values.size()) + " != " +
                        std::to_string(columns_.size()) + " columns");
        rows_.push_back(values);
        row_flags_.push_back(flags);
    }

    std::string str() const {
        std::string out;
        for (const std::string& c : comments_) out += "# " + c + "\n";
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            out += columns_[i];
            out += ",";
        }
        out += "flags\n";
        char buf[40];
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            for (double v : rows_[r]) {
                std::snprintf(buf, sizeof(buf), "%.17g", v);
                out += buf;
                out += ",";
            }
            out += row_flags_[r];
            out += "\n";
        }
        return out;
    }

private:
    std::vector<std::string> columns_;
    std::vector<std::string> comments_;
    std::vector<std::vector<double>> rows_;
    std::vector<std::string> row_flags_;
};

}  // namespace ergo
