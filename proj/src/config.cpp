#include "kg2d/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "kg2d/common.hpp"

namespace kg2d {
namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

/// Strips a trailing comment, respecting double-quoted strings.
std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' &&
            c != '-' && c != '.') {
            return false;
        }
    }
    return true;
}

bool parse_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

ConfigValue parse_value(const std::string& raw, int lineno) {
    const std::string v = trim(raw);
    require(!v.empty(), "config line " + std::to_string(lineno) + ": empty value");
    if (v == "true") return true;
    if (v == "false") return false;
    if (v.front() == '"') {
        require(v.size() >= 2 && v.back() == '"',
                "config line " + std::to_string(lineno) + ": unterminated string");
        return v.substr(1, v.size() - 2);
    }
    if (v.front() == '[') {
        require(v.back() == ']',
                "config line " + std::to_string(lineno) + ": unterminated array");
        std::vector<double> list;
        std::string body = v.substr(1, v.size() - 2);
        std::stringstream ss(body);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty() && list.empty() && ss.eof()) break;  // []
            double d = 0.0;
            require(parse_number(item, d), "config line " + std::to_string(lineno) +
                                               ": bad array entry '" + item + "'");
            list.push_back(d);
        }
        return list;
    }
    double d = 0.0;
    if (parse_number(v, d)) return d;
    return v;  // bare string
}

std::string format_double(double d) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", d);
    return buf;
}

std::string format_value(const ConfigValue& v) {
    if (std::holds_alternative<bool>(v)) return std::get<bool>(v) ? "true" : "false";
    if (std::holds_alternative<double>(v)) return format_double(std::get<double>(v));
    if (std::holds_alternative<std::string>(v)) {
        return '"' + std::get<std::string>(v) + '"';
    }
    const auto& list = std::get<std::vector<double>>(v);
    std::string out = "[";
    for (std::size_t i = 0; i < list.size(); ++i) {
        if (i) out += ", ";
        out += format_double(list[i]);
    }
    return out + "]";
}

void flatten_json(const nlohmann::json& j, const std::string& prefix,
                  std::map<std::string, ConfigValue>& out) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
        const nlohmann::json& v = it.value();
        if (v.is_object()) {
            flatten_json(v, key, out);
        } else if (v.is_boolean()) {
            out[key] = v.get<bool>();
        } else if (v.is_number()) {
            out[key] = v.get<double>();
        } else if (v.is_string()) {
            out[key] = v.get<std::string>();
        } else if (v.is_array()) {
            std::vector<double> list;
            for (const auto& e : v) {
                require(e.is_number(), "config key " + key +
                                           ": arrays must be numeric");
                list.push_back(e.get<double>());
            }
            out[key] = std::move(list);
        } else {
            fail("config key " + key + ": unsupported JSON value");
        }
    }
}

const char* type_name(const ConfigValue& v) {
    switch (v.index()) {
        case 0: return "bool";
        case 1: return "number";
        case 2: return "string";
        default: return "array";
    }
}

}  // namespace

ConfigMap ConfigMap::parse_toml(const std::string& text) {
    ConfigMap cfg;
    std::stringstream ss(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            require(line.back() == ']',
                    "config line " + std::to_string(lineno) + ": bad section header");
            section = trim(line.substr(1, line.size() - 2));
            require(valid_key(section),
                    "config line " + std::to_string(lineno) + ": bad section name");
            continue;
        }
        const std::size_t eq = line.find('=');
        require(eq != std::string::npos,
                "config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        require(valid_key(key),
                "config line " + std::to_string(lineno) + ": bad key '" + key + "'");
        if (!section.empty()) key = section + "." + key;
        require(!cfg.entries_.count(key),
                "config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        cfg.entries_[key] = parse_value(line.substr(eq + 1), lineno);
    }
    return cfg;
}

ConfigMap ConfigMap::parse_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        fail(std::string("config JSON: ") + e.what());
    }
    require(j.is_object(), "config JSON must be an object");
    ConfigMap cfg;
    flatten_json(j, "", cfg.entries_);
    return cfg;
}

ConfigMap ConfigMap::load_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const bool json = path.size() >= 5 &&
                      path.compare(path.size() - 5, 5, ".json") == 0;
    return json ? parse_json(ss.str()) : parse_toml(ss.str());
}

bool ConfigMap::has(const std::string& key) const { return entries_.count(key) != 0; }

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    require(std::holds_alternative<bool>(it->second),
            "config key " + key + ": expected bool, got " + type_name(it->second));
    return std::get<bool>(it->second);
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    require(std::holds_alternative<double>(it->second),
            "config key " + key + ": expected number, got " + type_name(it->second));
    return std::get<double>(it->second);
}

int ConfigMap::get_int(const std::string& key, int fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    require(std::holds_alternative<double>(it->second),
            "config key " + key + ": expected integer, got " + type_name(it->second));
    const double d = std::get<double>(it->second);
    require(d == std::floor(d) && std::abs(d) < 2147483647.0,
            "config key " + key + ": expected integer, got " + format_double(d));
    return static_cast<int>(d);
}

std::string ConfigMap::get_string(const std::string& key,
                                  const std::string& fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    require(std::holds_alternative<std::string>(it->second),
            "config key " + key + ": expected string, got " + type_name(it->second));
    return std::get<std::string>(it->second);
}

std::vector<double> ConfigMap::get_list(
    const std::string& key, const std::vector<double>& fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    require(std::holds_alternative<std::vector<double>>(it->second),
            "config key " + key + ": expected array, got " + type_name(it->second));
    return std::get<std::vector<double>>(it->second);
}

void ConfigMap::set(const std::string& key, ConfigValue v) {
    require(valid_key(key), "bad config key '" + key + "'");
    entries_[key] = std::move(v);
}

void ConfigMap::require_known(const std::vector<std::string>& known) const {
    std::string bad;
    for (const auto& [key, value] : entries_) {
        (void)value;
        bool ok = false;
        for (const auto& k : known) {
            if (key == k) {
                ok = true;
                break;
            }
        }
        if (!ok) bad += (bad.empty() ? "" : ", ") + key;
    }
    require(bad.empty(), "unknown config keys: " + bad);
}

std::string ConfigMap::to_toml() const {
    std::string out;
    for (const auto& [key, value] : entries_) {
        out += key + " = " + format_value(value) + "\n";
    }
    return out;
}

std::string ConfigMap::to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [key, value] : entries_) {
        if (std::holds_alternative<bool>(value)) {
            j[key] = std::get<bool>(value);
        } else if (std::holds_alternative<double>(value)) {
            j[key] = std::get<double>(value);
        } else if (std::holds_alternative<std::string>(value)) {
            j[key] = std::get<std::string>(value);
        } else {
            j[key] = std::get<std::vector<double>>(value);
        }
    }
    return j.dump(2) + "\n";
}

}  // namespace kg2d
