#pragma once

// Post-run metrics, strategy comparison and supercapacitor monomer sizing.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hess/battery_life.hpp"
#include "hess/detail/text.hpp"
#include "hess/ems_core.hpp"
#include "hess/errors.hpp"

namespace hess {

struct DeltaIStats {
    std::vector<double> series; // |I(t) - I(t-1)| for t >= 1
    double max = 0.0;
    double bin_width = 5.0;
    std::vector<std::size_t> histogram; // bin k counts values in [k w, (k+1) w)
};

inline DeltaIStats delta_i_series(std::span<const double> current, double bin_width = 5.0) {
    if (current.size() < 2) throw ContractError("delta_i_series: need at least 2 samples");
    if (!(bin_width > 0.0)) throw ContractError("delta_i_series: bin width must be positive");
    DeltaIStats st;
    st.bin_width = bin_width;
    st.series.reserve(current.size() - 1);
    for (std::size_t i = 1; i < current.size(); ++i) {
        const double d = std::abs(current[i] - current[i - 1]);
        st.series.push_back(d);
        st.max = std::max(st.max, d);
        const auto bin = static_cast<std::size_t>(std::floor(d / bin_width));
        if (st.histogram.size() <= bin) st.histogram.resize(bin + 1, 0);
        ++st.histogram[bin];
    }
    return st;
}

struct MetricsBlock {
    double q_bat_loss = 0.0;   // kJ
    double q_sc_loss = 0.0;    // kJ
    double q_total_loss = 0.0; // kJ, battery + supercap bank
    double q_dcdc_loss = 0.0;  // kJ, converter, reported separately
    double soc_bat_final = 0.0;
    double soc_sc_final = 0.0;
    double i_bat_max = 0.0; // A, peak |I|
    double temp_max = 0.0;   // K
    double temp_final = 0.0; // K
    double delta_i_max = 0.0; // A
    double delta_i_bin = 5.0;
    std::vector<std::size_t> delta_i_histogram;
    double per_cycle_fade = 0.0;   // percent capacity
    std::optional<long> est_life; // cycles; empty when the cycle causes no fade
    double energy_demand = 0.0;    // kJ, positive bus demand served
    double curtailed_energy = 0.0; // kJ
    std::size_t steps = 0;
};

inline MetricsBlock summarize(const SimulationReport& rep, const SimConfig& cfg) {
    MetricsBlock m;
    m.steps = rep.steps.size();
    m.q_bat_loss = rep.battery_final.q_loss_acc / 1000.0;
    m.q_sc_loss = rep.supercap_final.q_loss_acc / 1000.0;
    m.q_total_loss = m.q_bat_loss + m.q_sc_loss;
    m.q_dcdc_loss = rep.supercap_final.q_dcdc_acc / 1000.0;
    m.soc_bat_final = rep.battery_final.soc;
    m.soc_sc_final = sc_soc(rep.supercap_final, cfg.supercap);
    m.temp_final = rep.battery_final.temp;
    m.temp_max = rep.battery_initial.temp;
    m.delta_i_bin = cfg.delta_i_bin;

    std::vector<double> current;
    std::vector<double> temp;
    std::vector<double> dts;
    current.reserve(rep.steps.size());
    for (const auto& s : rep.steps) {
        current.push_back(s.i_bat);
        temp.push_back(s.temp);
        dts.push_back(s.dt);
        m.i_bat_max = std::max(m.i_bat_max, std::abs(s.i_bat));
        m.temp_max = std::max(m.temp_max, s.temp);
        m.energy_demand += std::max(0.0, s.split.p_req) * s.dt / 1000.0;
        m.curtailed_energy += std::abs(s.split.p_curtailed) * s.dt / 1000.0;
    }
    if (current.size() >= 2) {
        auto di = delta_i_series(current, cfg.delta_i_bin);
        m.delta_i_max = di.max;
        m.delta_i_histogram = std::move(di.histogram);
    }
    const auto buckets =
        bucketize(current, temp, dts, cfg.battery.q_rated, cfg.battery.n_parallel, cfg.fade);
    m.per_cycle_fade = accumulate_loss({}, buckets, cfg.fade).q_loss_pct;
    if (m.per_cycle_fade > 0.0) m.est_life = estimate_cycle_life(m.per_cycle_fade, cfg.fade.eol_loss_pct);
    return m;
}

struct MetricDelta {
    std::string name;
    double baseline = 0.0;
    double candidate = 0.0;
    // 100 (baseline - candidate) / baseline; a reduction is positive.
    // With a zero baseline this holds candidate - baseline instead and `absolute` is set.
    double pct_reduction = 0.0;
    bool absolute = false;
};

struct ComparisonReport {
    std::vector<MetricDelta> deltas;

    const MetricDelta* find(const std::string& name) const {
        for (const auto& d : deltas) {
            if (d.name == name) return &d;
        }
        return nullptr;
    }
};

inline MetricDelta metric_delta(std::string name, double baseline, double candidate) {
    MetricDelta d{std::move(name), baseline, candidate, 0.0, false};
    if (baseline == 0.0) {
        d.pct_reduction = candidate - baseline;
        d.absolute = true;
    } else {
        d.pct_reduction = 100.0 * (baseline - candidate) / baseline;
    }
    return d;
}

inline ComparisonReport compare(const MetricsBlock& a, const MetricsBlock& b) {
    ComparisonReport r;
    r.deltas.push_back(metric_delta("q_bat_loss", a.q_bat_loss, b.q_bat_loss));
    r.deltas.push_back(metric_delta("q_sc_loss", a.q_sc_loss, b.q_sc_loss));
    r.deltas.push_back(metric_delta("q_total_loss", a.q_total_loss, b.q_total_loss));
    r.deltas.push_back(metric_delta("q_dcdc_loss", a.q_dcdc_loss, b.q_dcdc_loss));
    r.deltas.push_back(metric_delta("i_bat_max", a.i_bat_max, b.i_bat_max));
    r.deltas.push_back(metric_delta("temp_max", a.temp_max, b.temp_max));
    r.deltas.push_back(metric_delta("temp_final", a.temp_final, b.temp_final));
    r.deltas.push_back(metric_delta("delta_i_max", a.delta_i_max, b.delta_i_max));
    r.deltas.push_back(metric_delta("per_cycle_fade", a.per_cycle_fade, b.per_cycle_fade));
    r.deltas.push_back(metric_delta("est_life", a.est_life ? double(*a.est_life) : 0.0,
                                    b.est_life ? double(*b.est_life) : 0.0));
    r.deltas.push_back(metric_delta("soc_bat_final", a.soc_bat_final, b.soc_bat_final));
    r.deltas.push_back(metric_delta("soc_sc_final", a.soc_sc_final, b.soc_sc_final));
    return r;
}

struct MonomerSpec {
    std::string label;
    double cell_voltage = 0.0;  // V
    double cell_capacity = 0.0; // F
    std::optional<long> cell_count;
};

// Cells needed to store the reference bank's charge: ceil(C1 U1 N1 / (C2 U2)).
inline long cell_count(const MonomerSpec& ref, const MonomerSpec& candidate) {
    if (!ref.cell_count || *ref.cell_count <= 0) throw ContractError("cell_count: reference needs a cell count");
    if (!(ref.cell_voltage > 0 && ref.cell_capacity > 0 && candidate.cell_voltage > 0 && candidate.cell_capacity > 0)) {
        throw ContractError("cell_count: voltages and capacities must be positive");
    }
    const double exact = ref.cell_capacity * ref.cell_voltage * static_cast<double>(*ref.cell_count) /
                         (candidate.cell_capacity * candidate.cell_voltage);
    // Guard against 95.000000000001 rounding up to 96.
    return static_cast<long>(std::ceil(exact - 1e-9 * exact));
}

// CSV: label,cell_voltage,cell_capacity[,cell_count]. The first row is the
// reference and must carry cell_count.
inline std::vector<MonomerSpec> load_monomers(std::istream& in) {
    std::vector<MonomerSpec> specs;
    std::string raw;
    std::size_t line_no = 0;
    bool header_seen = false;
    bool has_count = false;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = detail::trim(detail::clean_line(raw, line_no == 1));
        if (line.empty()) continue;
        if (!header_seen) {
            if (line == "label,cell_voltage,cell_capacity,cell_count") {
                has_count = true;
            } else if (line != "label,cell_voltage,cell_capacity") {
                throw ParseError(line_no, "expected header 'label,cell_voltage,cell_capacity[,cell_count]'");
            }
            header_seen = true;
            continue;
        }
        const auto f = detail::split(line, ',');
        if (f.size() != (has_count ? 4u : 3u)) throw ParseError(line_no, "wrong number of fields");
        MonomerSpec s;
        s.label = std::string(detail::trim(f[0]));
        const auto v = detail::parse_double(f[1]);
        const auto c = detail::parse_double(f[2]);
        if (!v || !(*v > 0)) throw ParseError(line_no, "cell_voltage must be a positive number");
        if (!c || !(*c > 0)) throw ParseError(line_no, "cell_capacity must be a positive number");
        s.cell_voltage = *v;
        s.cell_capacity = *c;
        if (has_count && !detail::trim(f[3]).empty()) {
            const auto n = detail::parse_int(f[3]);
            if (!n || *n <= 0) throw ParseError(line_no, "cell_count must be a positive integer");
            s.cell_count = *n;
        }
        specs.push_back(std::move(s));
    }
    if (specs.empty()) throw InputError("monomer table has no rows");
    if (!specs.front().cell_count) throw InputError("reference monomer '" + specs.front().label + "' needs cell_count");
    return specs;
}

inline std::vector<MonomerSpec> load_monomers_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open monomer file '" + path + "'");
    return load_monomers(in);
}

// Series bank of `count` cells. Capacitances split bulk/fast like the base bank;
// resistances scale so each branch keeps the base bank's RC time constant
// (cell ESR inversely proportional to cell capacitance, series resistances add).
inline SupercapParams pack_from_monomer(const SupercapParams& base, const MonomerSpec& cell, long count) {
    SupercapParams p = base;
    const double c_pack = cell.cell_capacity / static_cast<double>(count);
    const double scale = base.total_capacitance() / c_pack;
    const double bulk_share = base.c_bulk / base.total_capacitance();
    p.c_bulk = c_pack * bulk_share;
    p.c_fast = c_pack * (1.0 - bulk_share);
    p.r_term = base.r_term * scale;
    p.r_fast = base.r_fast * scale;
    p.r_bulk = base.r_bulk * scale;
    p.u_max = cell.cell_voltage * static_cast<double>(count);
    p.u_min = base.u_min / base.u_max * p.u_max;
    return p;
}

struct SweepRow {
    MonomerSpec spec;
    long cell_count = 0;
    MetricsBlock metrics;
    double pct_vs_ref = 0.0; // 100 (ref - this) / ref on q_total_loss
};

inline std::vector<SweepRow> monomer_sweep(const std::vector<MonomerSpec>& specs, const DriveCycle& cycle,
                                           const SimConfig& cfg) {
    if (specs.empty()) throw InputError("monomer sweep needs at least one spec");
    const auto& ref = specs.front();
    std::vector<std::future<SweepRow>> jobs;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        jobs.push_back(std::async(std::launch::async, [&, i] {
            const auto& spec = specs[i];
            SweepRow row;
            row.spec = spec;
            row.cell_count = i == 0 ? *ref.cell_count : cell_count(ref, spec);
            SimConfig c = cfg;
            c.mode = Mode::hess;
            c.supercap = pack_from_monomer(cfg.supercap, spec, row.cell_count);
            row.metrics = summarize(run_simulation(cycle, c), c);
            return row;
        }));
    }
    std::vector<SweepRow> rows;
    for (auto& j : jobs) rows.push_back(j.get());
    for (auto& r : rows) {
        r.pct_vs_ref = metric_delta("q_total_loss", rows.front().metrics.q_total_loss, r.metrics.q_total_loss)
                           .pct_reduction;
    }
    return rows;
}

} // namespace hess
