#include "spavg/config.hpp"

#include "spavg/error.hpp"
#include "spavg/numfmt.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace spavg {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string unquote(const std::string& v) {
    if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front())
        return v.substr(1, v.size() - 2);
    return v;
}

// strips a trailing comment that is not inside quotes
std::string_view strip_comment(std::string_view line) {
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quote) {
            if (c == quote) quote = 0;
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '#') {
            return line.substr(0, i);
        }
    }
    return line;
}

}  // namespace

const std::vector<std::string>& ConfigMap::known_keys() {
    static const std::vector<std::string> keys{
        "seed",
        "system.name", "system.x0", "system.z0",
        "domain.R", "domain.eps1",
        "integrator.method", "integrator.h", "integrator.rel_tol", "integrator.abs_tol",
        "integrator.max_steps", "integrator.max_step",
        "sweep.T", "sweep.t_a", "sweep.eps", "sweep.min_points", "sweep.timing",
        "constants.file", "constants.L", "constants.P", "constants.L_av", "constants.r_y", "constants.beta_y",
        "constants.delta_y", "constants.n_pairs", "constants.n_samples", "constants.decay_runs",
        "simulate.eps", "simulate.tau_end",
        "average.T_av", "average.x", "average.tol", "average.s_grid", "average.tau_prime", "average.max_dtau",
        "grid.eps", "grid.L", "grid.T", "grid.max_intervals",
        "bounds.eps", "bounds.r_prime", "bounds.alpha1",
        "figures.eps_a", "figures.eps_b",
    };
    return keys;
}

void ConfigMap::set(const std::string& key, const std::string& value) {
    const auto& k = known_keys();
    if (std::find(k.begin(), k.end(), key) == k.end()) fail(ErrorKind::Config, "unknown config key '" + key + "'");
    values_[key] = unquote(trim(value));
}

void ConfigMap::load_string(std::string_view text) {
    std::string section;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos <= text.size()) {
        const auto end = std::min(text.find('\n', pos), text.size());
        const std::string line = trim(strip_comment(text.substr(pos, end - pos)));
        pos = end + 1;
        ++line_no;
        if (line.empty()) continue;
        const std::string where = "config line " + std::to_string(line_no) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') fail(ErrorKind::Config, where + "unterminated section header");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (section.empty()) fail(ErrorKind::Config, where + "empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(ErrorKind::Config, where + "expected key = value");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        if (key.empty()) fail(ErrorKind::Config, where + "empty key");
        try {
            set(section.empty() ? key : section + "." + key, line.substr(eq + 1));
        } catch (const Error& e) {
            fail(ErrorKind::Config, where + e.what());
        }
    }
}

void ConfigMap::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Config, "cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    load_string(ss.str());
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        return parse_double(it->second);
    } catch (const Error&) {
        fail(ErrorKind::Config, "config key '" + key + "': expected a number, got '" + it->second + "'");
    }
}

long ConfigMap::get_long(const std::string& key, long fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string& s = it->second;
    long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        fail(ErrorKind::Config, "config key '" + key + "': expected an integer, got '" + s + "'");
    return v;
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    fail(ErrorKind::Config, "config key '" + key + "': expected true or false, got '" + it->second + "'");
}

std::string ConfigMap::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

std::vector<double> ConfigMap::get_list(const std::string& key, const std::vector<double>& fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::string s = trim(it->second);
    if (!s.empty() && s.front() == '[') {
        if (s.back() != ']') fail(ErrorKind::Config, "config key '" + key + "': unterminated list");
        s = s.substr(1, s.size() - 2);
    }
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto end = std::min(s.find(',', pos), s.size());
        const std::string item = trim(std::string_view(s).substr(pos, end - pos));
        pos = end + 1;
        if (item.empty()) {
            if (pos > s.size()) break;
            fail(ErrorKind::Config, "config key '" + key + "': empty list item");
        }
        try {
            out.push_back(parse_double(item));
        } catch (const Error&) {
            fail(ErrorKind::Config, "config key '" + key + "': bad list item '" + item + "'");
        }
    }
    return out;
}

std::string ConfigMap::dump() const {
    std::ostringstream os;
    for (const auto& [k, v] : values_)
        if (k.find('.') == std::string::npos) os << k << " = " << v << '\n';
    std::string current;
    for (const auto& [k, v] : values_) {
        const auto dot = k.find('.');
        if (dot == std::string::npos) continue;
        const std::string sec = k.substr(0, dot);
        if (sec != current) {
            os << '[' << sec << "]\n";
            current = sec;
        }
        os << k.substr(dot + 1) << " = " << v << '\n';
    }
    return os.str();
}

}  // namespace spavg
