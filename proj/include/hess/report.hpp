#pragma once

// Machine-readable output: report/compare JSON, trace and sweep CSV.
// Payloads carry no timestamps or host data, so identical inputs give identical bytes.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "hess/analysis_sizing.hpp"
#include "hess/detail/text.hpp"
#include "hess/ems_core.hpp"
#include "hess/errors.hpp"

namespace hess {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kReportSchemaId = "hess-report";
inline constexpr const char* kCompareSchemaId = "hess-compare";

using json = nlohmann::ordered_json;

inline json config_to_json(const SimConfig& c) {
    json j;
    j["simulation"] = {{"mode", to_string(c.mode)},
                       {"p_peak", c.p_peak},
                       {"soc_bat0", c.soc_bat0},
                       {"soc_sc0", c.soc_sc0},
                       {"dt", c.dt},
                       {"rules", c.rules_source}};
    const auto& v = c.vehicle;
    j["vehicle"] = {{"mass", v.mass},
                    {"frontal_area", v.frontal_area},
                    {"tire_radius", v.tire_radius},
                    {"drag_coeff", v.drag_coeff},
                    {"rolling_coeff", v.rolling_coeff},
                    {"drivetrain_eff", v.drivetrain_eff},
                    {"air_density", v.air_density},
                    {"gravity", v.gravity}};
    const auto& b = c.battery;
    json ocv_soc = json::array();
    json ocv_volts = json::array();
    for (const auto& [s, u] : b.ocv_table) {
        ocv_soc.push_back(s);
        ocv_volts.push_back(u);
    }
    j["battery"] = {{"u_oc", b.u_oc},           {"ocv_soc", ocv_soc},
                    {"ocv_volts", ocv_volts},   {"r_ohm", b.r_ohm},
                    {"r_pol", b.r_pol},         {"c_pol", b.c_pol},
                    {"c_bulk", b.c_bulk},       {"q_rated", b.q_rated},
                    {"n_parallel", b.n_parallel}, {"eta_coulomb", b.eta_coulomb},
                    {"eta_discharge", b.eta_discharge}, {"i_max", b.i_max},
                    {"soc_min", b.soc_min},     {"soc_max", b.soc_max}};
    j["thermal"] = {{"heat_capacity", c.thermal.heat_capacity},
                    {"h_conv", c.thermal.h_conv},
                    {"t_ambient", c.thermal.t_ambient}};
    const auto& s = c.supercap;
    j["supercap"] = {{"c_bulk", s.c_bulk}, {"c_fast", s.c_fast},           {"r_term", s.r_term},
                     {"r_fast", s.r_fast}, {"r_bulk", s.r_bulk},           {"u_min", s.u_min},
                     {"u_max", s.u_max},   {"eta_coulomb", s.eta_coulomb}, {"dcdc_eff", s.dcdc_eff},
                     {"p_max", s.p_max}};
    const auto& f = c.filter;
    j["filter"] = {{"mode1_half_width", f.mode1_half_width},
                   {"mode1_max_order", f.mode1_max_order},
                   {"mode2_order", f.mode2_order},
                   {"mode2_half_widths", f.mode2_half_widths},
                   {"history_commanded", f.history_commanded}};
    const auto& fd = c.fade;
    j["fade"] = {{"e_a0", fd.e_a0},           {"b_rate", fd.b_rate},         {"ln_a_amp", fd.ln_a_amp},
                 {"ln_a_decay", fd.ln_a_decay}, {"ln_a_floor", fd.ln_a_floor}, {"tau_exp", fd.tau_exp},
                 {"r_gas", fd.r_gas},         {"eol_loss_pct", fd.eol_loss_pct}, {"c_rate_bin", fd.c_rate_bin}};
    j["analysis"] = {{"delta_i_bin", c.delta_i_bin}};
    return j;
}

inline json metrics_to_json(const MetricsBlock& m) {
    json j;
    j["q_bat_loss_kj"] = m.q_bat_loss;
    j["q_sc_loss_kj"] = m.q_sc_loss;
    j["q_total_loss_kj"] = m.q_total_loss;
    j["q_dcdc_loss_kj"] = m.q_dcdc_loss;
    j["soc_bat_final"] = m.soc_bat_final;
    j["soc_sc_final"] = m.soc_sc_final;
    j["i_bat_max_a"] = m.i_bat_max;
    j["temp_max_k"] = m.temp_max;
    j["temp_final_k"] = m.temp_final;
    j["delta_i_max_a"] = m.delta_i_max;
    j["delta_i_bin_a"] = m.delta_i_bin;
    j["delta_i_histogram"] = m.delta_i_histogram;
    j["per_cycle_fade_pct"] = m.per_cycle_fade;
    j["est_life_cycles"] = m.est_life ? json(*m.est_life) : json(nullptr);
    j["energy_demand_kj"] = m.energy_demand;
    j["curtailed_energy_kj"] = m.curtailed_energy;
    j["steps"] = m.steps;
    return j;
}

inline json tag_counts(const SimulationReport& rep) {
    std::map<std::string, std::size_t> counts;
    for (const auto& s : rep.steps) ++counts[to_string(s.split.tag)];
    json j = json::object();
    for (const auto& [k, n] : counts) j[k] = n;
    return j;
}

inline json report_to_json(const SimulationReport& rep, const MetricsBlock& m, const SimConfig& cfg,
                           const DriveCycle& cycle) {
    json j;
    j["schema"] = kReportSchemaId;
    j["schema_version"] = kReportSchemaVersion;
    j["mode"] = to_string(rep.mode);
    j["cycle"] = {{"name", cycle.name}, {"samples", cycle.size()}, {"duration_s", cycle.duration()}};
    j["metrics"] = metrics_to_json(m);
    j["tags"] = tag_counts(rep);
    j["config"] = config_to_json(cfg);
    j["warnings"] = rep.warnings;
    return j;
}

inline json comparison_to_json(const ComparisonReport& c, const std::string& baseline_label,
                               const std::string& candidate_label, const MetricsBlock& a, const MetricsBlock& b,
                               const DriveCycle& cycle) {
    json j;
    j["schema"] = kCompareSchemaId;
    j["schema_version"] = kReportSchemaVersion;
    j["cycle"] = {{"name", cycle.name}, {"samples", cycle.size()}};
    j["baseline"] = {{"label", baseline_label}, {"metrics", metrics_to_json(a)}};
    j["candidate"] = {{"label", candidate_label}, {"metrics", metrics_to_json(b)}};
    json deltas = json::object();
    for (const auto& d : c.deltas) {
        json e;
        e["baseline"] = d.baseline;
        e["candidate"] = d.candidate;
        if (d.absolute) {
            e["abs_change"] = d.pct_reduction;
            e["pct_change"] = nullptr;
            e["pct_reduction"] = nullptr;
        } else {
            e["pct_change"] = -d.pct_reduction;
            e["pct_reduction"] = d.pct_reduction;
        }
        deltas[d.name] = e;
    }
    j["deltas"] = deltas;
    return j;
}

inline std::string trace_csv(const SimulationReport& rep) {
    std::ostringstream os;
    os << "t,v,p_req,k_bat,p_bat,p_sc,i_bat,soc_bat,soc_sc,temp,tag\n";
    using detail::format_double;
    for (const auto& s : rep.steps) {
        const auto& p = s.split;
        os << format_double(p.t) << ',' << format_double(s.speed) << ',' << format_double(p.p_req) << ','
           << format_double(p.k_bat) << ',' << format_double(p.p_bat) << ',' << format_double(p.p_sc) << ','
           << format_double(s.i_bat) << ',' << format_double(s.soc_bat) << ',' << format_double(s.soc_sc) << ','
           << format_double(s.temp) << ',' << to_string(p.tag) << '\n';
    }
    return os.str();
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os << "label,cell_count,q_bat_loss,q_sc_loss,q_total_loss,pct_vs_ref\n";
    using detail::format_double;
    for (const auto& r : rows) {
        os << r.spec.label << ',' << r.cell_count << ',' << format_double(r.metrics.q_bat_loss) << ','
           << format_double(r.metrics.q_sc_loss) << ',' << format_double(r.metrics.q_total_loss) << ','
           << format_double(r.pct_vs_ref) << '\n';
    }
    return os.str();
}

inline std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

// Write to a sibling temp file, then rename over the target.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw InputError("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw InputError("cannot rename into '" + path.string() + "'");
    }
}

} // namespace hess
