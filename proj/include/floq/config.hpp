#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "floq/errors.hpp"

namespace floq {

// Flat sectioned key = value text; '#' starts a comment, whitespace is free.
class KeyValueConfig {
public:
    static KeyValueConfig parse(const std::string& text) {
        KeyValueConfig cfg;
        std::istringstream in(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string t = trim(line);
            if (t.empty()) continue;
            if (t.front() == '[') {
                if (t.back() != ']') throw ConfigError("config line " + std::to_string(lineno) + ": unterminated section header");
                section = trim(t.substr(1, t.size() - 2));
                if (section.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty section name");
                cfg.sections_[section];
                continue;
            }
            const auto eq = t.find('=');
            if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
            const std::string key = trim(t.substr(0, eq));
            const std::string value = trim(t.substr(eq + 1));
            if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
            if (section.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": key outside any section");
            cfg.sections_[section][key] = value;
        }
        return cfg;
    }

    static KeyValueConfig parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot read config file: " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse(buf.str());
    }

    bool has(const std::string& section, const std::string& key) const {
        const auto s = sections_.find(section);
        return s != sections_.end() && s->second.count(key) > 0;
    }

    std::string get_string(const std::string& section, const std::string& key) const {
        const auto s = sections_.find(section);
        if (s == sections_.end() || !s->second.count(key))
            throw ConfigError("missing config key [" + section + "] " + key);
        return s->second.at(key);
    }

    std::string get_string(const std::string& section, const std::string& key, const std::string& dflt) const {
        return has(section, key) ? get_string(section, key) : dflt;
    }

    double get_double(const std::string& section, const std::string& key) const {
        return to_double(get_string(section, key), section, key);
    }
    double get_double(const std::string& section, const std::string& key, double dflt) const {
        return has(section, key) ? get_double(section, key) : dflt;
    }

    long long get_int(const std::string& section, const std::string& key) const {
        const double v = get_double(section, key);
        const long long i = static_cast<long long>(v);
        if (static_cast<double>(i) != v) throw ConfigError("config key [" + section + "] " + key + " must be an integer");
        return i;
    }
    long long get_int(const std::string& section, const std::string& key, long long dflt) const {
        return has(section, key) ? get_int(section, key) : dflt;
    }

    std::uint64_t get_seed(const std::string& section, const std::string& key) const {
        const std::string s = get_string(section, key);
        try {
            return std::stoull(s);
        } catch (const std::exception&) {
            throw ConfigError("config key [" + section + "] " + key + " must be an unsigned integer");
        }
    }
    std::uint64_t get_seed(const std::string& section, const std::string& key, std::uint64_t dflt) const {
        return has(section, key) ? get_seed(section, key) : dflt;
    }

    std::vector<double> get_list(const std::string& section, const std::string& key) const {
        std::istringstream in(get_string(section, key));
        std::vector<double> out;
        std::string tok;
        while (in >> tok) out.push_back(to_double(tok, section, key));
        if (out.empty()) throw ConfigError("config key [" + section + "] " + key + " is an empty list");
        return out;
    }

    // Overlay: values in `over` replace or extend this configuration.
    void merge(const KeyValueConfig& over) {
        for (const auto& [sec, kv] : over.sections_)
            for (const auto& [k, v] : kv) sections_[sec][k] = v;
    }

    void set(const std::string& section, const std::string& key, const std::string& value) {
        sections_[section][key] = value;
    }

private:
    static std::string trim(const std::string& s) {
        std::size_t b = 0, e = s.size();
        while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
        return s.substr(b, e - b);
    }

    static double to_double(const std::string& s, const std::string& section, const std::string& key) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key [" + section + "] " + key + ": cannot parse number from '" + s + "'");
        }
    }

    std::map<std::string, std::map<std::string, std::string>> sections_;
};

}  // namespace floq
