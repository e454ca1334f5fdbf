#ifndef RANGESHIFT_CONFIG_HPP
#define RANGESHIFT_CONFIG_HPP

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rangeshift/common.hpp"

namespace rangeshift {

/// Flat dotted-key configuration ("kernel.preset = uniform"), '#'/';'
/// comments. Every lookup records the resolved value (defaults included) so
/// the manifest can echo the complete effective configuration.
class Config {
  public:
    Config() = default;

    static Config from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw Error("cli.run: cannot open config " + path);
        return from_stream(in);
    }

    static Config from_string(const std::string& text) {
        std::istringstream in(text);
        return from_stream(in);
    }

    static Config from_stream(std::istream& in) {
        Config c;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find_first_of("#;");
            if (hash != std::string::npos) line = line.substr(0, hash);
            const std::string t = trim(line);
            if (t.empty()) continue;
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw Error("cli.run: config line " + fmt_int(lineno) + " is not 'key = value'");
            const std::string key = trim(t.substr(0, eq));
            const std::string value = trim(t.substr(eq + 1));
            if (key.empty() || value.empty())
                throw Error("cli.run: config line " + fmt_int(lineno) + " has empty key or value");
            if (c.raw_.count(key))
                throw Error("cli.run: duplicate config key '" + key + "'");
            c.raw_[key] = value;
        }
        return c;
    }

    bool has(const std::string& key) const { return raw_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = raw_.find(key);
        const std::string v = it == raw_.end() ? fallback : it->second;
        resolved_[key] = v;
        used_.insert(key);
        return v;
    }
    std::string require_string(const std::string& key) const {
        auto it = raw_.find(key);
        if (it == raw_.end()) throw Error("cli.run: missing required config key '" + key + "'");
        resolved_[key] = it->second;
        used_.insert(key);
        return it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = raw_.find(key);
        if (it == raw_.end()) {
            resolved_[key] = fmt_g17(fallback);
            used_.insert(key);
            return fallback;
        }
        used_.insert(key);
        resolved_[key] = it->second;
        return parse_double(key, it->second);
    }
    double require_double(const std::string& key) const {
        return parse_double(key, require_string(key));
    }
    long long get_int(const std::string& key, long long fallback) const {
        auto it = raw_.find(key);
        if (it == raw_.end()) {
            resolved_[key] = fmt_int(fallback);
            used_.insert(key);
            return fallback;
        }
        used_.insert(key);
        resolved_[key] = it->second;
        try {
            return std::stoll(it->second);
        } catch (const std::exception&) {
            throw Error("cli.run: config key '" + key + "' is not an integer: " + it->second);
        }
    }

    /// Comma-separated list of reals.
    Vec get_schedule(const std::string& key) const {
        auto it = raw_.find(key);
        if (it == raw_.end()) return {};
        used_.insert(key);
        resolved_[key] = it->second;
        Vec out;
        std::stringstream ss(it->second);
        std::string cell;
        while (std::getline(ss, cell, ','))
            out.push_back(parse_double(key, trim(cell)));
        if (out.empty()) throw Error("cli.run: config key '" + key + "' is an empty schedule");
        return out;
    }

    /// Keys the task never read are configuration mistakes; name them.
    void reject_unused() const {
        for (const auto& [k, v] : raw_)
            if (!used_.count(k))
                throw Error("cli.run: config key '" + k + "' is unknown or unused by this task");
    }

    const std::map<std::string, std::string>& resolved() const { return resolved_; }

  private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }
    static double parse_double(const std::string& key, const std::string& v) {
        try {
            std::size_t pos = 0;
            const double x = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return x;
        } catch (const std::exception&) {
            throw Error("cli.run: config key '" + key + "' is not a number: " + v);
        }
    }

    std::map<std::string, std::string> raw_;
    mutable std::map<std::string, std::string> resolved_;
    mutable std::set<std::string> used_;
};

}  // namespace rangeshift

#endif
