#pragma once

// Flat key=value run configuration with [section] headers. Keys are
// addressed as "section.key"; unknown keys are rejected by the consumers
// so a typo never silently falls back to a default.

#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

namespace ehl {

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class RunConfig {
public:
    static RunConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in)
            throw config_error("cannot open config file '" + path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        return from_text(ss.str());
    }

    static RunConfig from_text(const std::string& text) {
        RunConfig cfg;
        cfg.text_ = text;
        std::istringstream in(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string s = trim(strip_comment(line));
            if (s.empty()) continue;
            if (s.front() == '[') {
                if (s.back() != ']')
                    throw config_error("malformed section header at line " +
                                       std::to_string(lineno) + ": '" + s + "'");
                section = trim(s.substr(1, s.size() - 2));
                continue;
            }
            auto eq = s.find('=');
            if (eq == std::string::npos)
                throw config_error("expected key=value at line " + std::to_string(lineno) +
                                   ": '" + s + "'");
            std::string key = trim(s.substr(0, eq));
            std::string val = trim(s.substr(eq + 1));
            if (key.empty())
                throw config_error("empty key at line " + std::to_string(lineno));
            std::string full = section.empty() ? key : section + "." + key;
            cfg.kv_[full] = val;
        }
        return cfg;
    }

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& def) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return def;
        used_.insert(key);
        return it->second;
    }
    std::string require_string(const std::string& key) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) throw config_error("missing required key '" + key + "'");
        used_.insert(key);
        return it->second;
    }

    double get_double(const std::string& key, double def) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return def;
        used_.insert(key);
        return parse_double(key, it->second);
    }
    int get_int(const std::string& key, int def) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return def;
        used_.insert(key);
        try {
            size_t pos = 0;
            int v = std::stoi(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw config_error("key '" + key + "': not an integer: '" + it->second + "'");
        }
    }
    bool get_bool(const std::string& key, bool def) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return def;
        used_.insert(key);
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw config_error("key '" + key + "': not a boolean: '" + it->second + "'");
    }

    // any keys never consumed by the run are configuration mistakes
    void check_all_used() const {
        for (const auto& [k, v] : kv_)
            if (!used_.count(k))
                throw config_error("unknown config key '" + k + "'");
    }

    const std::string& text() const { return text_; }

private:
    static std::string strip_comment(const std::string& s) {
        auto pos = s.find('#');
        return pos == std::string::npos ? s : s.substr(0, pos);
    }
    static std::string trim(const std::string& s) {
        size_t b = 0, e = s.size();
        while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
        return s.substr(b, e - b);
    }
    static double parse_double(const std::string& key, const std::string& v) {
        try {
            size_t pos = 0;
            double d = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("");
            return d;
        } catch (...) {
            throw config_error("key '" + key + "': not a number: '" + v + "'");
        }
    }

    std::map<std::string, std::string> kv_;
    mutable std::set<std::string> used_;
    std::string text_;
};

} // namespace ehl
