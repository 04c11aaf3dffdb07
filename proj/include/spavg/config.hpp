#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace spavg {

/// Flat `section.key -> raw value` store read from a TOML-style file:
///
///     [system]
///     name = "example"
///     x0 = [2.0]
///
/// Only keys from the known set are accepted; set() from the command line
/// replaces whatever the file held.
class ConfigMap {
public:
    /// Parses and merges `text`. Throws Error(Config) with the line number.
    void load_string(std::string_view text);
    void load_file(const std::string& path);
    /// `key` is `section.name`. Throws Error(Config) for unknown keys.
    void set(const std::string& key, const std::string& value);

    [[nodiscard]] bool has(const std::string& key) const { return values_.count(key) != 0; }
    [[nodiscard]] double get_double(const std::string& key, double fallback) const;
    [[nodiscard]] long get_long(const std::string& key, long fallback) const;
    [[nodiscard]] bool get_bool(const std::string& key, bool fallback) const;
    [[nodiscard]] std::string get_string(const std::string& key, const std::string& fallback) const;
    [[nodiscard]] std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

    /// Canonical `[section]` / `key = value` rendering, sorted.
    [[nodiscard]] std::string dump() const;

    [[nodiscard]] static const std::vector<std::string>& known_keys();

private:
    std::map<std::string, std::string> values_;
};

}  // namespace spavg
