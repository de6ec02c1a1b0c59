#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdsim/units.hpp"

namespace qdsim {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

// Line-oriented key-value configuration with [section] headers, '#' comments
// and UTF-8 text. Values may carry a unit suffix (ueV, ns, us) which the
// typed getters convert; the schema is documented in the README.
class Config {
public:
    Config() = default;

    static Config parse_string(const std::string& text, const std::string& origin = "<string>") {
        Config cfg;
        std::istringstream in(text);
        std::string line;
        std::string section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header");
                section = detail::trim(line.substr(1, line.size() - 2));
                if (section.empty())
                    throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty section name");
                continue;
            }
            auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
            std::string key = detail::trim(line.substr(0, eq));
            std::string value = detail::trim(line.substr(eq + 1));
            if (key.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
            cfg.values_[section][key] = value;
        }
        return cfg;
    }

    static Config load(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ConfigError("cannot open config file: " + path.string());
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse_string(ss.str(), path.string());
    }

    bool has(const std::string& section, const std::string& key) const {
        auto s = values_.find(section);
        return s != values_.end() && s->second.count(key) > 0;
    }

    bool has_section(const std::string& section) const { return values_.count(section) > 0; }

    // Dotted path "section.key"; an override with the same path replaces the value.
    void set(const std::string& dotted_path, const std::string& value) {
        auto dot = dotted_path.find('.');
        if (dot == std::string::npos || dot == 0 || dot + 1 == dotted_path.size())
            throw ConfigError("override path must be section.key: " + dotted_path);
        values_[dotted_path.substr(0, dot)][dotted_path.substr(dot + 1)] = detail::trim(value);
    }

    const std::string& get_string(const std::string& section, const std::string& key) const {
        auto s = values_.find(section);
        if (s == values_.end() || !s->second.count(key))
            throw ConfigError("missing config key [" + section + "] " + key);
        return s->second.at(key);
    }

    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
        return has(section, key) ? get_string(section, key) : fallback;
    }

    double get_number(const std::string& section, const std::string& key) const {
        auto [v, unit] = parse_scalar(get_string(section, key), section, key);
        if (!unit.empty())
            throw ConfigError("key [" + section + "] " + key + " must be a plain number, got unit '" + unit + "'");
        return v;
    }

    double get_number(const std::string& section, const std::string& key, double fallback) const {
        return has(section, key) ? get_number(section, key) : fallback;
    }

    long get_integer(const std::string& section, const std::string& key) const {
        double v = get_number(section, key);
        long n = static_cast<long>(v);
        if (static_cast<double>(n) != v)
            throw ConfigError("key [" + section + "] " + key + " must be an integer");
        return n;
    }

    long get_integer(const std::string& section, const std::string& key, long fallback) const {
        return has(section, key) ? get_integer(section, key) : fallback;
    }

    // Energy-like value in ueV; a bare number is taken as ueV already.
    double get_energy_uev(const std::string& section, const std::string& key) const {
        auto [v, unit] = parse_scalar(get_string(section, key), section, key);
        if (unit.empty() || unit == "ueV") return v;
        throw ConfigError("key [" + section + "] " + key + " expects ueV, got '" + unit + "'");
    }

    double get_energy_uev(const std::string& section, const std::string& key, double fallback) const {
        return has(section, key) ? get_energy_uev(section, key) : fallback;
    }

    // Time in ns; accepts 'ns' and 'us' suffixes.
    double get_time_ns(const std::string& section, const std::string& key) const {
        auto [v, unit] = parse_scalar(get_string(section, key), section, key);
        if (unit.empty() || unit == "ns") return v;
        if (unit == "us") return us_to_ns(v);
        throw ConfigError("key [" + section + "] " + key + " expects a time, got '" + unit + "'");
    }

    double get_time_ns(const std::string& section, const std::string& key, double fallback) const {
        return has(section, key) ? get_time_ns(section, key) : fallback;
    }

    std::vector<double> get_numbers(const std::string& section, const std::string& key) const {
        const std::string& raw = get_string(section, key);
        std::vector<double> out;
        std::size_t start = 0;
        while (start <= raw.size()) {
            auto comma = raw.find(',', start);
            std::string item = detail::trim(
                comma == std::string::npos ? raw.substr(start) : raw.substr(start, comma - start));
            if (!item.empty()) {
                auto [v, unit] = parse_scalar(item, section, key);
                if (!unit.empty())
                    throw ConfigError("list key [" + section + "] " + key + " must hold plain numbers");
                out.push_back(v);
            }
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (out.empty()) throw ConfigError("empty list for key [" + section + "] " + key);
        return out;
    }

    // FNV-1a over sorted canonical "section.key=value" lines: invariant under
    // key reordering, comments and whitespace.
    std::uint64_t hash() const {
        std::vector<std::string> lines;
        for (const auto& [sec, kv] : values_)
            for (const auto& [k, v] : kv) lines.push_back(sec + "." + k + "=" + v);
        std::sort(lines.begin(), lines.end());
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (const auto& l : lines) {
            for (unsigned char c : l) {
                h ^= c;
                h *= 0x100000001b3ull;
            }
            h ^= '\n';
            h *= 0x100000001b3ull;
        }
        return h;
    }

    std::string hash_hex() const {
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash()));
        return buf;
    }

private:
    static std::pair<double, std::string> parse_scalar(const std::string& raw,
                                                       const std::string& section,
                                                       const std::string& key) {
        const std::string s = detail::trim(raw);
        if (s.empty()) throw ConfigError("empty value for key [" + section + "] " + key);
        std::size_t pos = 0;
        double v = 0;
        try {
            v = std::stod(s, &pos);
        } catch (const std::exception&) {
            throw ConfigError("key [" + section + "] " + key + " is not a number: '" + s + "'");
        }
        std::string unit = detail::trim(s.substr(pos));
        if (!unit.empty() && unit != "ueV" && unit != "ns" && unit != "us")
            throw ConfigError("key [" + section + "] " + key + " has unknown unit '" + unit + "'");
        return {v, unit};
    }

    std::map<std::string, std::map<std::string, std::string>> values_;
};

}  // namespace qdsim
