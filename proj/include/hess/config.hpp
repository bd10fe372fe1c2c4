#pragma once

// Simulation config files.
//
// The format is the TOML subset needed for flat parameter tables:
//
//   # comment
//   [section]
//   key = 1.5            # number
//   key = "text"         # string
//   key = true           # boolean
//   key = [3, 5, 7]      # array of numbers
//
// Every key must be known; a typo is an error rather than a silently ignored value.

#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "hess/detail/text.hpp"
#include "hess/ems_core.hpp"
#include "hess/errors.hpp"

namespace hess {

using ConfigValue = std::variant<double, bool, std::string, std::vector<double>>;

struct ConfigEntry {
    ConfigValue value;
    std::size_t line = 0;
};

// section -> key -> value; keys outside any table live in section "".
using ConfigTable = std::map<std::string, std::map<std::string, ConfigEntry>>;

namespace detail {

inline std::string_view strip_comment(std::string_view line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

inline ConfigValue parse_config_value(std::string_view v, std::size_t line) {
    v = trim(v);
    if (v.empty()) throw ParseError(line, "missing value");
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"') throw ParseError(line, "unterminated string");
        return std::string(v.substr(1, v.size() - 2));
    }
    if (v == "true") return true;
    if (v == "false") return false;
    if (v.front() == '[') {
        if (v.back() != ']') throw ParseError(line, "unterminated array");
        std::vector<double> out;
        const auto body = trim(v.substr(1, v.size() - 2));
        if (!body.empty()) {
            for (auto item : split(body, ',')) {
                if (trim(item).empty()) continue; // trailing comma
                const auto d = parse_double(item);
                if (!d) throw ParseError(line, "non-numeric array element '" + std::string(trim(item)) + "'");
                out.push_back(*d);
            }
        }
        return out;
    }
    // TOML allows '_' digit separators.
    std::string digits;
    for (char c : v) {
        if (c != '_') digits.push_back(c);
    }
    const auto d = parse_double(digits);
    if (!d) throw ParseError(line, "cannot parse value '" + std::string(v) + "'");
    return *d;
}

} // namespace detail

inline ConfigTable parse_config_table(std::istream& in) {
    ConfigTable table;
    std::string section;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        auto line = detail::trim(detail::strip_comment(detail::clean_line(raw, line_no == 1)));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError(line_no, "malformed table header");
            section = std::string(detail::trim(line.substr(1, line.size() - 2)));
            if (section.empty()) throw ParseError(line_no, "empty table name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
        const auto key = std::string(detail::trim(line.substr(0, eq)));
        if (key.empty()) throw ParseError(line_no, "missing key");
        auto& sec = table[section];
        if (sec.count(key) != 0) throw ParseError(line_no, "duplicate key '" + key + "'");
        sec[key] = {detail::parse_config_value(line.substr(eq + 1), line_no), line_no};
    }
    return table;
}

namespace detail {

class ConfigReader {
public:
    explicit ConfigReader(ConfigTable t) : table_(std::move(t)) {}

    void number(const std::string& sec, const std::string& key, double& out) {
        if (const auto* e = take(sec, key)) {
            const auto* d = std::get_if<double>(&e->value);
            if (d == nullptr) throw ParseError(e->line, sec + "." + key + " must be a number");
            out = *d;
        }
    }

    void integer(const std::string& sec, const std::string& key, int& out) {
        if (const auto* e = take(sec, key)) {
            const auto* d = std::get_if<double>(&e->value);
            if (d == nullptr || *d != std::floor(*d) || std::abs(*d) > 1e9) {
                throw ParseError(e->line, sec + "." + key + " must be an integer");
            }
            out = static_cast<int>(*d);
        }
    }

    void boolean(const std::string& sec, const std::string& key, bool& out) {
        if (const auto* e = take(sec, key)) {
            const auto* b = std::get_if<bool>(&e->value);
            if (b == nullptr) throw ParseError(e->line, sec + "." + key + " must be true or false");
            out = *b;
        }
    }

    void string(const std::string& sec, const std::string& key, std::string& out) {
        if (const auto* e = take(sec, key)) {
            const auto* s = std::get_if<std::string>(&e->value);
            if (s == nullptr) throw ParseError(e->line, sec + "." + key + " must be a quoted string");
            out = *s;
        }
    }

    bool array(const std::string& sec, const std::string& key, std::vector<double>& out) {
        if (const auto* e = take(sec, key)) {
            const auto* a = std::get_if<std::vector<double>>(&e->value);
            if (a == nullptr) throw ParseError(e->line, sec + "." + key + " must be an array of numbers");
            out = *a;
            return true;
        }
        return false;
    }

    // Anything not consumed is unknown.
    void finish() const {
        for (const auto& [sec, keys] : table_) {
            if (!keys.empty()) {
                const auto& [key, entry] = *keys.begin();
                throw ParseError(entry.line, "unknown config key '" + (sec.empty() ? key : sec + "." + key) + "'");
            }
        }
    }

private:
    const ConfigEntry* take(const std::string& sec, const std::string& key) {
        auto s = table_.find(sec);
        if (s == table_.end()) return nullptr;
        auto k = s->second.find(key);
        if (k == s->second.end()) return nullptr;
        taken_.push_back(k->second);
        s->second.erase(k);
        return &taken_.back();
    }

    ConfigTable table_;
    std::deque<ConfigEntry> taken_;
};

} // namespace detail

// `base_dir` resolves a relative `simulation.rules` path.
inline SimConfig load_config(std::istream& in, const std::filesystem::path& base_dir = {}) {
    detail::ConfigReader r(parse_config_table(in));
    SimConfig c;

    std::string mode = to_string(c.mode);
    r.string("simulation", "mode", mode);
    c.mode = parse_mode(mode);
    r.number("simulation", "p_peak", c.p_peak);
    r.number("simulation", "soc_bat0", c.soc_bat0);
    r.number("simulation", "soc_sc0", c.soc_sc0);
    r.number("simulation", "dt", c.dt);
    std::string rules = "builtin";
    r.string("simulation", "rules", rules);

    auto& v = c.vehicle;
    r.number("vehicle", "mass", v.mass);
    r.number("vehicle", "frontal_area", v.frontal_area);
    r.number("vehicle", "tire_radius", v.tire_radius);
    r.number("vehicle", "drag_coeff", v.drag_coeff);
    r.number("vehicle", "rolling_coeff", v.rolling_coeff);
    r.number("vehicle", "drivetrain_eff", v.drivetrain_eff);
    r.number("vehicle", "air_density", v.air_density);
    r.number("vehicle", "gravity", v.gravity);

    auto& b = c.battery;
    r.number("battery", "u_oc", b.u_oc);
    std::vector<double> ocv_soc;
    std::vector<double> ocv_volts;
    const bool has_soc = r.array("battery", "ocv_soc", ocv_soc);
    const bool has_volts = r.array("battery", "ocv_volts", ocv_volts);
    if (has_soc != has_volts || ocv_soc.size() != ocv_volts.size()) {
        throw InputError("battery.ocv_soc and battery.ocv_volts must be given together with equal lengths");
    }
    for (std::size_t i = 0; i < ocv_soc.size(); ++i) b.ocv_table.emplace_back(ocv_soc[i], ocv_volts[i]);
    r.number("battery", "r_ohm", b.r_ohm);
    r.number("battery", "r_pol", b.r_pol);
    r.number("battery", "c_pol", b.c_pol);
    r.number("battery", "c_bulk", b.c_bulk);
    r.number("battery", "q_rated", b.q_rated);
    r.integer("battery", "n_parallel", b.n_parallel);
    r.number("battery", "eta_coulomb", b.eta_coulomb);
    r.number("battery", "eta_discharge", b.eta_discharge);
    r.number("battery", "i_max", b.i_max);
    r.number("battery", "soc_min", b.soc_min);
    r.number("battery", "soc_max", b.soc_max);

    r.number("thermal", "heat_capacity", c.thermal.heat_capacity);
    r.number("thermal", "h_conv", c.thermal.h_conv);
    r.number("thermal", "t_ambient", c.thermal.t_ambient);

    auto& s = c.supercap;
    r.number("supercap", "c_bulk", s.c_bulk);
    r.number("supercap", "c_fast", s.c_fast);
    r.number("supercap", "r_term", s.r_term);
    r.number("supercap", "r_fast", s.r_fast);
    r.number("supercap", "r_bulk", s.r_bulk);
    r.number("supercap", "u_min", s.u_min);
    r.number("supercap", "u_max", s.u_max);
    r.number("supercap", "eta_coulomb", s.eta_coulomb);
    r.number("supercap", "dcdc_eff", s.dcdc_eff);
    r.number("supercap", "p_max", s.p_max);

    auto& f = c.filter;
    r.integer("filter", "mode1_half_width", f.mode1_half_width);
    r.integer("filter", "mode1_max_order", f.mode1_max_order);
    r.integer("filter", "mode2_order", f.mode2_order);
    std::vector<double> widths;
    if (r.array("filter", "mode2_half_widths", widths)) {
        f.mode2_half_widths.clear();
        for (double w : widths) {
            if (w != std::floor(w)) throw InputError("filter.mode2_half_widths must hold integers");
            f.mode2_half_widths.push_back(static_cast<int>(w));
        }
    }
    r.boolean("filter", "history_commanded", f.history_commanded);

    auto& fd = c.fade;
    r.number("fade", "e_a0", fd.e_a0);
    r.number("fade", "b_rate", fd.b_rate);
    r.number("fade", "ln_a_amp", fd.ln_a_amp);
    r.number("fade", "ln_a_decay", fd.ln_a_decay);
    r.number("fade", "ln_a_floor", fd.ln_a_floor);
    r.number("fade", "tau_exp", fd.tau_exp);
    r.number("fade", "r_gas", fd.r_gas);
    r.number("fade", "eol_loss_pct", fd.eol_loss_pct);
    r.number("fade", "c_rate_bin", fd.c_rate_bin);

    r.number("analysis", "delta_i_bin", c.delta_i_bin);
    r.finish();

    if (rules != "builtin") {
        std::filesystem::path p(rules);
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        c.rules = load_rule_base_file(p.string());
        // echo the path as written so reports do not depend on where the config lives
        c.rules_source = rules;
    }
    c.validate();
    return c;
}

inline SimConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file '" + path + "'");
    return load_config(in, std::filesystem::path(path).parent_path());
}

} // namespace hess
