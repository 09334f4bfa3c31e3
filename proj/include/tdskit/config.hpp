// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "tdskit/io_util.hpp"

namespace tdskit {

/// Raised for malformed or incomplete configuration input (a usage error).
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Flat sectioned `key = value` configuration.
///
///   [grain]
///   E_d_eV = 1.07        # comment
///
/// Keys are unique per section; later assignments override earlier ones.
class Config {
  public:
    Config() = default;

    static Config parse(const std::string& text, const std::string& origin = "<string>") {
        Config cfg;
        std::istringstream in(text);
        std::string line;
        std::string section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string s = io::strip(line);
            if (s.empty()) continue;
            if (s.front() == '[') {
                if (s.back() != ']' || s.size() < 3) {
                    throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header");
                }
                section = io::strip(s.substr(1, s.size() - 2));
                cfg.sections_[section]; // section may legitimately stay empty
                continue;
            }
            const auto eq = s.find('=');
            if (eq == std::string::npos) {
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
            }
            const std::string key = io::strip(s.substr(0, eq));
            const std::string value = io::strip(s.substr(eq + 1));
            if (key.empty()) {
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
            }
            cfg.sections_[section][key] = value;
        }
        return cfg;
    }

    static Config parse_file(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path.string());
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse(buf.str(), path.string());
    }

    bool has(const std::string& section, const std::string& key) const {
        const auto sec = sections_.find(section);
        return sec != sections_.end() && sec->second.count(key) > 0;
    }

    void set(const std::string& section, const std::string& key, const std::string& value) {
        sections_[section][key] = value;
    }

    std::string get_string(const std::string& section, const std::string& key) const {
        const auto sec = sections_.find(section);
        if (sec == sections_.end() || !sec->second.count(key)) {
            throw ConfigError("missing config key [" + section + "] " + key);
        }
        return sec->second.at(key);
    }

    std::string get_string_or(const std::string& section, const std::string& key,
                              const std::string& fallback) const {
        return has(section, key) ? get_string(section, key) : fallback;
    }

    double get_double(const std::string& section, const std::string& key) const {
        try {
            return io::parse_double(get_string(section, key));
        } catch (const std::runtime_error& e) {
            throw ConfigError("config key [" + section + "] " + key + ": " + e.what());
        }
    }

    double get_double_or(const std::string& section, const std::string& key, double fallback) const {
        return has(section, key) ? get_double(section, key) : fallback;
    }

    long get_long(const std::string& section, const std::string& key) const {
        try {
            return io::parse_long(get_string(section, key));
        } catch (const std::runtime_error& e) {
            throw ConfigError("config key [" + section + "] " + key + ": " + e.what());
        }
    }

    long get_long_or(const std::string& section, const std::string& key, long fallback) const {
        return has(section, key) ? get_long(section, key) : fallback;
    }

    const std::map<std::string, std::map<std::string, std::string>>& sections() const {
        return sections_;
    }

  private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

} // namespace tdskit
