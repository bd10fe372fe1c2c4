#pragma once

// Per-step energy management and whole-cycle simulation.
//
// Each step: demand -> fuzzy battery share -> Savitzky-Golay fits over the
// battery-command history -> rule-based selection -> limit-aware redispatch
// -> plant models. In single-ESS mode the battery takes the whole demand.

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hess/battery_life.hpp"
#include "hess/battery_pngv.hpp"
#include "hess/drive_cycle.hpp"
#include "hess/errors.hpp"
#include "hess/fuzzy_controller.hpp"
#include "hess/sg_filter.hpp"
#include "hess/supercap_rc.hpp"

namespace hess {

enum class Mode { hess, single_ess };

inline const char* to_string(Mode m) { return m == Mode::hess ? "hess" : "single_ess"; }

inline Mode parse_mode(const std::string& s) {
    if (s == "hess") return Mode::hess;
    if (s == "single_ess" || s == "single-ess") return Mode::single_ess;
    throw InputError("unknown mode '" + s + "' (expected hess or single_ess)");
}

enum class SplitTag { filtered, fuzzy_fallback, fuzzy_raw, constraint_redispatch, single_ess };

inline const char* to_string(SplitTag t) {
    switch (t) {
    case SplitTag::filtered: return "filtered";
    case SplitTag::fuzzy_fallback: return "fuzzy-fallback";
    case SplitTag::fuzzy_raw: return "fuzzy-raw";
    case SplitTag::constraint_redispatch: return "constraint-redispatch";
    case SplitTag::single_ess: return "single-ess";
    }
    return "?";
}

struct FilterConfig {
    int mode1_half_width = 5;
    int mode1_max_order = 4;
    int mode2_order = 2;
    std::vector<int> mode2_half_widths{3, 5, 7};
    // true: history holds the commanded (post-selection) battery power;
    // false: history holds the raw fuzzy battery power.
    bool history_commanded = true;

    std::size_t max_window() const {
        int m = mode1_half_width;
        for (int w : mode2_half_widths) m = std::max(m, w);
        return static_cast<std::size_t>(2 * m + 1);
    }

    void validate() const {
        if (mode1_half_width < 1) throw InputError("filter mode1_half_width must be >= 1");
        if (mode1_max_order < 1 || mode1_max_order > 2 * mode1_half_width - 1) {
            throw InputError("filter mode1_max_order must be in [1, 2*mode1_half_width - 1]");
        }
        if (mode2_order < 1) throw InputError("filter mode2_order must be >= 1");
        if (mode2_half_widths.empty()) throw InputError("filter mode2_half_widths must not be empty");
        for (int w : mode2_half_widths) {
            if (w < 1 || 2 * w + 1 <= mode2_order + 1) {
                throw InputError("filter mode2 half-width " + std::to_string(w) + " too small for order " +
                                 std::to_string(mode2_order));
            }
        }
    }
};

struct SimConfig {
    Mode mode = Mode::hess;
    VehicleParams vehicle;
    BatteryParams battery;
    ThermalParams thermal;
    SupercapParams supercap;
    FilterConfig filter;
    FadeParams fade;
    FuzzyRuleBase rules = default_rule_base();
    std::string rules_source = "builtin";
    double p_peak = 50000.0; // W, demand normalization for the controller
    double soc_bat0 = 0.9;
    double soc_sc0 = 0.9;
    double dt = 0.0; // s; 0 = take the step from the cycle timestamps
    double delta_i_bin = 5.0; // A

    void validate() const {
        vehicle.validate();
        battery.validate();
        thermal.validate();
        supercap.validate();
        filter.validate();
        fade.validate();
        if (!(p_peak > 0)) throw InputError("simulation p_peak must be positive");
        if (!(soc_bat0 >= battery.soc_min && soc_bat0 <= battery.soc_max)) {
            throw InputError("simulation soc_bat0 must lie within the battery soc limits");
        }
        if (!(soc_sc0 >= 0 && soc_sc0 <= 1)) throw InputError("simulation soc_sc0 must be in [0, 1]");
        if (dt < 0) throw InputError("simulation dt must be >= 0");
        if (!(delta_i_bin > 0)) throw InputError("analysis delta_i_bin must be positive");
    }
};

// Bus-side power magnitudes each device can take over the next step.
struct DispatchLimits {
    double bat_discharge = 0.0;
    double bat_charge = 0.0;
    double sc_discharge = 0.0;
    double sc_charge = 0.0;
};

inline DispatchLimits compute_limits(const BatteryState& bat, const BatteryParams& bp, const SupercapState& sc,
                                     const SupercapParams& sp, double dt) {
    DispatchLimits lim;
    const double v_eff = effective_voltage(bat, bp);
    if (v_eff > 0.0) {
        const double i_dis = std::min(bp.i_max, v_eff / (2.0 * bp.r_ohm));
        lim.bat_discharge = bat.soc > bp.soc_min ? i_dis * (v_eff - bp.r_ohm * i_dis) : 0.0;
        lim.bat_charge = bat.soc < bp.soc_max ? bp.i_max * (v_eff + bp.r_ohm * bp.i_max) : 0.0;
    }
    lim.sc_discharge = sc_discharge_limit(sc, sp, dt);
    lim.sc_charge = sc_charge_limit(sc, sp, dt);
    return lim;
}

struct DispatchResult {
    double p_bat = 0.0;
    double p_sc = 0.0;
    double p_curtailed = 0.0; // demand that neither device could serve
    bool changed = false;
    bool bat_limited = false;
    bool sc_limited = false;
};

// Moves any share a device cannot take to the other one. Regeneration goes to
// the supercap first, the remainder to battery charging. What neither can take
// is curtailed (mechanical braking on regen).
inline DispatchResult redispatch(double p_bat, double p_sc, const DispatchLimits& lim) {
    const double p_req = p_bat + p_sc;
    DispatchResult r{p_bat, p_sc, 0.0, false, false, false};
    if (p_req < 0.0) {
        r.p_sc = std::max(p_req, -lim.sc_charge);
        r.sc_limited = r.p_sc != p_req;
        r.p_bat = p_req - r.p_sc;
    } else {
        if (r.p_sc > lim.sc_discharge || r.p_sc < -lim.sc_charge) {
            r.p_sc = std::clamp(r.p_sc, -lim.sc_charge, lim.sc_discharge);
            r.sc_limited = true;
            r.p_bat = p_req - r.p_sc;
        }
    }
    if (r.p_bat > lim.bat_discharge || r.p_bat < -lim.bat_charge) {
        const double clamped = std::clamp(r.p_bat, -lim.bat_charge, lim.bat_discharge);
        const double excess = r.p_bat - clamped;
        r.p_bat = clamped;
        r.bat_limited = true;
        const double sc_target = std::clamp(r.p_sc + excess, -lim.sc_charge, lim.sc_discharge);
        r.p_curtailed = r.p_sc + excess - sc_target;
        r.p_sc = sc_target;
    }
    r.changed = r.p_bat != p_bat || r.p_sc != p_sc;
    return r;
}

struct PowerSplit {
    double t = 0.0;
    double p_req = 0.0;
    double k_bat = 0.0;
    double p_bat = 0.0;
    double p_sc = 0.0;
    double p_curtailed = 0.0;
    SplitTag tag = SplitTag::fuzzy_raw;
    int filter_source = 0; // 1 = Mode I, 2 = Mode II
    bool bat_limited = false;
    bool sc_limited = false;
    bool curtailed() const { return p_curtailed != 0.0; }
};

inline PowerSplit single_ess_split(double t, double p_req, const DispatchLimits& lim) {
    PowerSplit s;
    s.t = t;
    s.p_req = p_req;
    s.k_bat = 1.0;
    s.tag = SplitTag::single_ess;
    s.p_bat = std::clamp(p_req, -lim.bat_charge, lim.bat_discharge);
    s.bat_limited = s.p_bat != p_req;
    s.p_curtailed = p_req - s.p_bat;
    return s;
}

// One HESS control step. `history` carries the battery-command series between
// calls and is trimmed to the largest filter window.
inline PowerSplit split_step(double t, double p_req, double soc_bat, double soc_sc, const FuzzyRuleBase& rules,
                             double p_peak, const FilterConfig& fc, std::vector<double>& history,
                             const DispatchLimits& lim) {
    PowerSplit s;
    s.t = t;
    s.p_req = p_req;
    s.k_bat = rules.evaluate(normalize_demand(p_req, p_peak), soc_bat, soc_sc);
    const double raw = s.k_bat * p_req;

    history.push_back(raw);
    if (history.size() > fc.max_window()) history.erase(history.begin());

    std::optional<FitResult> fit1;
    std::optional<FitResult> fit2;
    const auto n1 = static_cast<std::size_t>(2 * fc.mode1_half_width + 1);
    const std::span<const double> hist(history);
    if (hist.size() >= n1) fit1 = mode1_select(hist.subspan(hist.size() - n1), fc.mode1_max_order);
    try {
        fit2 = mode2_select(hist, fc.mode2_half_widths, fc.mode2_order);
    } catch (const InsufficientHistoryError&) {
    }

    double p_bat = raw;
    if (fit1 || fit2) {
        const auto sel = rule_select(raw, fit1, fit2, p_req, EvalPoint::latest);
        p_bat = sel.power;
        s.tag = sel.tag == SelectionTag::filtered ? SplitTag::filtered : SplitTag::fuzzy_fallback;
        s.filter_source = sel.tag == SelectionTag::filtered ? sel.source : 0;
    } else {
        s.tag = SplitTag::fuzzy_raw;
    }
    if (fc.history_commanded) history.back() = p_bat;

    const auto d = redispatch(p_bat, p_req - p_bat, lim);
    s.p_bat = d.p_bat;
    s.p_sc = d.p_sc;
    s.p_curtailed = d.p_curtailed;
    s.bat_limited = d.bat_limited;
    s.sc_limited = d.sc_limited;
    if (d.changed) s.tag = SplitTag::constraint_redispatch;
    return s;
}

struct StepRecord {
    PowerSplit split;
    double speed = 0.0;
    double dt = 0.0; // integration interval ending at this sample (0 for the first)
    double i_bat = 0.0;
    double u_bat = 0.0;
    double i_sc = 0.0;
    double u_sc = 0.0;
    double soc_bat = 0.0;
    double soc_sc = 0.0;
    double temp = 0.0;
};

struct SimulationReport {
    Mode mode = Mode::hess;
    std::string cycle_name;
    std::vector<StepRecord> steps;
    BatteryState battery_initial;
    BatteryState battery_final;
    SupercapState supercap_initial;
    SupercapState supercap_final;
    std::vector<std::string> warnings;
};

inline std::string describe_state(std::size_t step, const BatteryState& b, const SupercapState& s) {
    std::ostringstream os;
    os << "step " << step << ": soc_bat=" << b.soc << " i_pol=" << b.i_pol << " u_bulk=" << b.u_bulk
       << " temp=" << b.temp << " u_b=" << s.u_b << " u_s=" << s.u_s;
    return os.str();
}

// Deterministic: the same cycle and config give bit-identical reports.
inline SimulationReport run_simulation(const DriveCycle& cycle, const SimConfig& cfg) {
    cfg.validate();
    const PowerTrace demand = demand_power(cycle, cfg.vehicle);

    SimulationReport rep;
    rep.mode = cfg.mode;
    rep.cycle_name = cycle.name;

    BatteryState bat;
    bat.soc = cfg.soc_bat0;
    bat.temp = cfg.thermal.t_ambient;
    const auto& sp = cfg.supercap;
    SupercapState sc = supercap_at_voltage(sp.u_min + cfg.soc_sc0 * (sp.u_max - sp.u_min));
    rep.battery_initial = bat;
    rep.supercap_initial = sc;

    Diagnostics diag;
    std::vector<double> history;
    history.reserve(cfg.filter.max_window() + 1);
    rep.steps.reserve(demand.size());

    for (std::size_t k = 0; k < demand.size(); ++k) {
        const auto& d = demand.samples[k];
        const double dt = k == 0 ? 0.0 : d.time - demand.samples[k - 1].time;
        if (cfg.dt > 0.0 && k > 0 && std::abs(dt - cfg.dt) > 1e-9 * cfg.dt) {
            throw InputError("cycle interval " + std::to_string(dt) + " s at sample " + std::to_string(k) +
                             " does not match configured dt " + std::to_string(cfg.dt) + " s");
        }
        // Limits for the first sample use the first interval; nothing is integrated there.
        const double dt_lim = k == 0 ? demand.samples[1].time - demand.samples[0].time : dt;
        const auto lim = compute_limits(bat, cfg.battery, sc, sp, dt_lim);

        StepRecord rec;
        rec.speed = d.speed;
        rec.dt = dt;
        rec.split = cfg.mode == Mode::single_ess
                        ? single_ess_split(d.time, d.power, lim)
                        : split_step(d.time, d.power, bat.soc, sc_soc(sc, sp), cfg.rules, cfg.p_peak, cfg.filter,
                                     history, lim);

        try {
            const auto i_bat = current_from_power(bat, cfg.battery, rec.split.p_bat);
            rec.i_bat = i_bat.current;
            if (dt > 0.0) {
                const auto adv = battery_advance(bat, cfg.battery, cfg.thermal, rec.i_bat, dt, &diag);
                rec.u_bat = adv.u_terminal;
                bat = adv.state;
                if (cfg.mode == Mode::hess) {
                    const auto sca = sc_advance(sc, sp, rec.split.p_sc, dt, &diag);
                    rec.i_sc = sca.current;
                    rec.u_sc = sca.u_terminal;
                    sc = sca.state;
                }
            } else {
                rec.u_bat = terminal_voltage(bat, cfg.battery, rec.i_bat);
                rec.u_sc = sc_terminal_voltage(sc, sp, 0.0);
            }
        } catch (const SimulationError& e) {
            throw SimulationError(std::string(e.what()) + " at " + describe_state(k, bat, sc));
        }
        if (cfg.mode == Mode::single_ess) rec.u_sc = sc_terminal_voltage(sc, sp, 0.0);
        rec.soc_bat = bat.soc;
        rec.soc_sc = sc_soc(sc, sp);
        rec.temp = bat.temp;
        rep.steps.push_back(rec);
    }

    rep.battery_final = bat;
    rep.supercap_final = sc;
    // Repeated warnings (same condition every step) are reported once.
    for (auto& w : diag.warnings) {
        if (std::find(rep.warnings.begin(), rep.warnings.end(), w) == rep.warnings.end()) {
            rep.warnings.push_back(std::move(w));
        }
    }
    return rep;
}

} // namespace hess
