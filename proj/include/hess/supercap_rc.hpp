#pragma once

// Two-branch RC supercapacitor bank behind a single DC/DC converter.
//
// Circuit: terminal --R_t-- node N; from N to ground two branches in parallel,
//   bulk:  R_e in series with C_b (voltage U_b)
//   fast:  R_s in series with C_s (voltage U_s)
// With I the bank current (positive = discharge), Kirchhoff at N gives
//
//   U_N  = (R_s U_b + R_e U_s - R_e R_s I) / (R_e + R_s)
//   i_b  = ((U_b - U_s) + R_s I) / (R_e + R_s)      current leaving C_b
//   i_s  = ((U_s - U_b) + R_e I) / (R_e + R_s)      current leaving C_s
//
//   dU_b/dt = [-(U_b - U_s) - R_s I] / (C_b (R_e + R_s))
//   dU_s/dt = [ (U_b - U_s) - R_e I] / (C_s (R_e + R_s))
//
//   U_sc = R_s/(R_e+R_s) U_b + R_e/(R_e+R_s) U_s - (R_t + R_e R_s/(R_e+R_s)) I
//
// i_b + i_s = I, so C_b dU_b + C_s dU_s = -I dt holds exactly under explicit Euler.
// The branch-difference mode decays with tau = (R_e + R_s) C_b C_s / (C_b + C_s).

#include <algorithm>
#include <cmath>
#include <string>

#include "hess/battery_pngv.hpp"
#include "hess/errors.hpp"

namespace hess {

struct SupercapParams {
    double c_bulk = 32.0;  // F, C_b
    double c_fast = 2.0;   // F, C_s
    double r_term = 0.05;  // ohm, R_t
    double r_fast = 1.0;   // ohm, R_s
    double r_bulk = 0.02;  // ohm, R_e
    double u_min = 120.0;  // V
    double u_max = 240.0;  // V
    double eta_coulomb = 0.95;
    double dcdc_eff = 0.95;
    double p_max = 40000.0; // W, bus side

    double total_capacitance() const { return c_bulk + c_fast; }
    double branch_weight_bulk() const { return r_fast / (r_bulk + r_fast); }
    double branch_weight_fast() const { return r_bulk / (r_bulk + r_fast); }
    double parallel_resistance() const { return r_bulk * r_fast / (r_bulk + r_fast); }
    double internal_resistance() const { return r_term + parallel_resistance(); }
    double fastest_time_constant() const { return (r_bulk + r_fast) * c_bulk * c_fast / (c_bulk + c_fast); }

    void validate() const {
        if (!(c_bulk > 0 && c_fast > 0 && r_term > 0 && r_fast > 0 && r_bulk > 0)) {
            throw InputError("supercap capacitances and resistances must be positive");
        }
        if (!(u_min >= 0 && u_min < u_max)) throw InputError("supercap requires 0 <= u_min < u_max");
        if (!(eta_coulomb > 0 && eta_coulomb <= 1 && dcdc_eff > 0 && dcdc_eff <= 1)) {
            throw InputError("supercap efficiencies must be in (0, 1]");
        }
        if (!(p_max > 0)) throw InputError("supercap p_max must be positive");
    }
};

struct SupercapState {
    double u_b = 240.0;      // V
    double u_s = 240.0;      // V
    double q_loss_acc = 0.0; // J, bank losses (resistive + coulombic)
    double q_dcdc_acc = 0.0; // J, converter losses, kept apart from the bank account
};

inline SupercapState supercap_at_voltage(double volts) { return {volts, volts, 0.0, 0.0}; }

inline double stored_charge(const SupercapState& s, const SupercapParams& p) {
    return p.c_bulk * s.u_b + p.c_fast * s.u_s;
}

inline double stored_energy(const SupercapState& s, const SupercapParams& p) {
    return 0.5 * (p.c_bulk * s.u_b * s.u_b + p.c_fast * s.u_s * s.u_s);
}

inline double open_circuit_voltage(const SupercapState& s, const SupercapParams& p) {
    return p.branch_weight_bulk() * s.u_b + p.branch_weight_fast() * s.u_s;
}

inline double sc_terminal_voltage(const SupercapState& s, const SupercapParams& p, double current) {
    return open_circuit_voltage(s, p) - p.internal_resistance() * current;
}

// Voltage-linear SOC at zero current.
inline double sc_soc(const SupercapState& s, const SupercapParams& p) {
    const double soc = (open_circuit_voltage(s, p) - p.u_min) / (p.u_max - p.u_min);
    return std::clamp(soc, 0.0, 1.0);
}

// Instantaneous resistive dissipation in R_t and both branches.
inline double sc_resistive_power(const SupercapState& s, const SupercapParams& p, double current) {
    const double rsum = p.r_bulk + p.r_fast;
    const double du = s.u_b - s.u_s;
    const double i_b = (du + p.r_fast * current) / rsum;
    const double i_s = (-du + p.r_bulk * current) / rsum;
    return current * current * p.r_term + i_b * i_b * p.r_bulk + i_s * i_s * p.r_fast;
}

inline SupercapState sc_step(SupercapState s, const SupercapParams& p, double current, double dt,
                             Diagnostics* diag = nullptr) {
    if (!(dt > 0.0)) throw ContractError("sc_step: dt must be positive");
    const double tau = p.fastest_time_constant();
    if (dt > tau) {
        warn(diag, "sc_step: dt " + std::to_string(dt) + " s exceeds branch time constant " + std::to_string(tau) +
                       " s");
    }
    const double u_term = sc_terminal_voltage(s, p, current);
    s.q_loss_acc += dt * (sc_resistive_power(s, p, current) + std::abs(u_term * current) * (1.0 - p.eta_coulomb));

    const double rsum = p.r_bulk + p.r_fast;
    const double du = s.u_b - s.u_s;
    const double d_ub = (-du - p.r_fast * current) / (p.c_bulk * rsum);
    const double d_us = (du - p.r_bulk * current) / (p.c_fast * rsum);
    s.u_b += dt * d_ub;
    s.u_s += dt * d_us;
    return s;
}

// Bus-side power as seen by the bank after the converter.
inline double bank_power(const SupercapParams& p, double p_bus) {
    return p_bus > 0.0 ? p_bus / p.dcdc_eff : p_bus * p.dcdc_eff;
}

struct ScCurrentSolution {
    double current = 0.0;
    double bank_power = 0.0; // W at the bank terminals
    bool saturated = false;
};

inline ScCurrentSolution sc_current_from_power(const SupercapState& s, const SupercapParams& p, double p_bus) {
    if (p_bus == 0.0) {
        return {};
    }
    const double u0 = open_circuit_voltage(s, p);
    if (p_bus > 0.0 && u0 <= p.u_min) {
        throw SupercapUnavailableError("supercap bank depleted: open-circuit " + std::to_string(u0) +
                                       " V <= u_min " + std::to_string(p.u_min) + " V");
    }
    bool saturated = false;
    if (std::abs(p_bus) > p.p_max) {
        p_bus = std::copysign(p.p_max, p_bus);
        saturated = true;
    }
    ScCurrentSolution out;
    out.bank_power = bank_power(p, p_bus);
    const auto sol = solve_power_current(u0, p.internal_resistance(), out.bank_power);
    out.current = sol.current;
    out.saturated = saturated || sol.saturated;
    return out;
}

// Largest bus power the bank can deliver over dt without its mean voltage
// (stored charge / total capacitance) falling below u_min.
inline double sc_discharge_limit(const SupercapState& s, const SupercapParams& p, double dt) {
    const double u0 = open_circuit_voltage(s, p);
    if (u0 <= p.u_min) return 0.0;
    const double i_avail = (stored_charge(s, p) - p.total_capacitance() * p.u_min) / dt;
    if (!(i_avail > 0.0)) return 0.0;
    const double r = p.internal_resistance();
    const double i = std::min(i_avail, u0 / (2.0 * r));
    const double bank = i * (u0 - r * i);
    return std::min(p.p_max, bank * p.dcdc_eff);
}

// Largest bus power the bank can absorb over dt without exceeding u_max.
inline double sc_charge_limit(const SupercapState& s, const SupercapParams& p, double dt) {
    const double i_room = (p.total_capacitance() * p.u_max - stored_charge(s, p)) / dt;
    if (!(i_room > 0.0)) return 0.0;
    const double bank = i_room * (open_circuit_voltage(s, p) + p.internal_resistance() * i_room);
    return std::min(p.p_max, bank / p.dcdc_eff);
}

struct SupercapAdvance {
    SupercapState state;
    double current = 0.0;
    double u_terminal = 0.0;
    double converter_loss = 0.0; // J over the step
    bool saturated = false;
};

// Bus power in, bank current out. Converter loss goes to q_dcdc_acc.
inline SupercapAdvance sc_advance(const SupercapState& s, const SupercapParams& p, double p_bus, double dt,
                                  Diagnostics* diag = nullptr) {
    SupercapAdvance out;
    const auto sol = sc_current_from_power(s, p, p_bus);
    out.current = sol.current;
    out.saturated = sol.saturated;
    out.u_terminal = sc_terminal_voltage(s, p, sol.current);
    const double delivered = std::abs(p_bus) > p.p_max ? std::copysign(p.p_max, p_bus) : p_bus;
    out.converter_loss = dt * std::abs(sol.bank_power - delivered);
    out.state = sc_step(s, p, sol.current, dt, diag);
    out.state.q_dcdc_acc += out.converter_loss;
    return out;
}

} // namespace hess
