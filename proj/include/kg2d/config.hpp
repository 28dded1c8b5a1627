#pragma once
/**
 * @file config.hpp
 * @brief Human-editable key = value configuration with a JSON mirror.
 *
 * The text format is TOML-style: `key = value` lines, `#` comments,
 * `[section]` headers that prefix subsequent keys with "section.".
 * Values are booleans (true/false), numbers, quoted or bare strings, and
 * flat numeric arrays `[a, b, c]`.  Serialization is lossless: numbers are
 * printed with enough digits to round-trip exactly and keys come out
 * sorted, so a parse/serialize cycle is a fixed point.
 */

#include <map>
#include <string>
#include <variant>
#include <vector>

namespace kg2d {

using ConfigValue =
    std::variant<bool, double, std::string, std::vector<double>>;

class ConfigMap {
public:
    /// Parses the TOML-style text form.  Duplicate keys error.
    static ConfigMap parse_toml(const std::string& text);
    /// Parses the JSON mirror; nested objects flatten to dotted keys.
    static ConfigMap parse_json(const std::string& text);
    /// Reads a file, dispatching on the .json extension (TOML otherwise).
    static ConfigMap load_file(const std::string& path);

    bool has(const std::string& key) const;
    /// Typed getters; the fallback is returned when the key is absent and
    /// a type mismatch errors.  Integers are stored as doubles and
    /// round-checked on the way out.
    bool get_bool(const std::string& key, bool fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    std::string get_string(const std::string& key,
                           const std::string& fallback) const;
    std::vector<double> get_list(const std::string& key,
                                 const std::vector<double>& fallback) const;

    void set(const std::string& key, ConfigValue v);

    /// Errors (listing the offenders) when any key is not in `known` —
    /// the typo guard behind "invalid config is a usage error".
    void require_known(const std::vector<std::string>& known) const;

    std::string to_toml() const;
    std::string to_json() const;

    const std::map<std::string, ConfigValue>& entries() const {
        return entries_;
    }
    bool operator==(const ConfigMap&) const = default;

private:
    std::map<std::string, ConfigValue> entries_;
};

}  // namespace kg2d
