#pragma once

// PNGV equivalent-circuit battery pack.
//
//   U_L = U_oc - U_bulk - R_pol * I_pol - R_ohm * I
//
// U_bulk is the charge accumulated on the bulk capacitance (integral of I / C_bulk),
// I_pol is the polarization-branch current relaxing toward I with tau = R_pol * C_pol.
// Currents are positive on discharge.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "hess/errors.hpp"

namespace hess {

struct BatteryParams {
    double u_oc = 330.0; // V, used when ocv_table is empty
    // Optional (soc, volts) pairs, ascending in soc, linearly interpolated.
    std::vector<std::pair<double, double>> ocv_table;
    double r_ohm = 0.08;      // ohm
    double r_pol = 0.02;      // ohm
    double c_pol = 1000.0;    // F
    double c_bulk = 20000.0;  // F
    double q_rated = 40.0;    // Ah, whole pack
    int n_parallel = 2;
    double eta_coulomb = 0.85; // charge efficiency, also the coulombic loss factor
    double eta_discharge = 1.0; // SOC efficiency applied on discharge
    double i_max = 250.0;      // A, either direction
    double soc_min = 0.1;
    double soc_max = 1.0;

    double tau() const { return r_pol * c_pol; }

    double open_circuit(double soc) const {
        if (ocv_table.empty()) {
            return u_oc;
        }
        if (soc <= ocv_table.front().first) return ocv_table.front().second;
        if (soc >= ocv_table.back().first) return ocv_table.back().second;
        const auto hi = std::lower_bound(ocv_table.begin(), ocv_table.end(), soc,
                                         [](const auto& p, double s) { return p.first < s; });
        const auto lo = hi - 1;
        const double w = (soc - lo->first) / (hi->first - lo->first);
        return lo->second + w * (hi->second - lo->second);
    }

    void validate() const {
        if (!(r_ohm > 0 && r_pol > 0 && c_pol > 0 && c_bulk > 0 && q_rated > 0 && u_oc > 0 && i_max > 0)) {
            throw InputError("battery resistances, capacitances, capacity, u_oc and i_max must be positive");
        }
        if (n_parallel < 1) throw InputError("battery n_parallel must be >= 1");
        if (!(eta_coulomb > 0 && eta_coulomb <= 1) || !(eta_discharge > 0 && eta_discharge <= 1)) {
            throw InputError("battery efficiencies must be in (0, 1]");
        }
        if (!(soc_min >= 0 && soc_min < soc_max && soc_max <= 1)) {
            throw InputError("battery soc limits must satisfy 0 <= soc_min < soc_max <= 1");
        }
        for (std::size_t i = 1; i < ocv_table.size(); ++i) {
            if (!(ocv_table[i].first > ocv_table[i - 1].first)) {
                throw InputError("battery ocv_table soc values must be strictly increasing");
            }
        }
    }
};

struct ThermalParams {
    double heat_capacity = 40000.0; // J/K
    double h_conv = 5.0;            // W/K
    double t_ambient = 298.15;      // K

    void validate() const {
        if (!(heat_capacity > 0 && h_conv > 0 && t_ambient > 0)) {
            throw InputError("thermal parameters must be positive");
        }
    }
};

struct BatteryState {
    double soc = 0.9;
    double i_pol = 0.0;        // A
    double u_bulk = 0.0;       // V
    double temp = 298.15;      // K
    double q_loss_acc = 0.0;   // J
    double ah_throughput = 0.0; // Ah, pack
    double last_current = 0.0; // A
};

// Source voltage seen behind the ohmic resistance.
inline double effective_voltage(const BatteryState& s, const BatteryParams& p) {
    return p.open_circuit(s.soc) - s.u_bulk - p.r_pol * s.i_pol;
}

inline double terminal_voltage(const BatteryState& s, const BatteryParams& p, double current) {
    return effective_voltage(s, p) - p.r_ohm * current;
}

struct CurrentSolution {
    double current = 0.0;
    bool saturated = false;
};

// Smaller root of r*I^2 - V*I + P = 0. Written as 2P / (V + sqrt(V^2 - 4rP)) so that
// P = 0 gives exactly 0 and small P keeps full precision.
inline CurrentSolution solve_power_current(double v_source, double resistance, double power) {
    const double disc = v_source * v_source - 4.0 * resistance * power;
    if (disc < 0.0) {
        return {v_source / (2.0 * resistance), true};
    }
    return {2.0 * power / (v_source + std::sqrt(disc)), false};
}

inline CurrentSolution current_from_power(const BatteryState& s, const BatteryParams& p, double power) {
    const double v_eff = effective_voltage(s, p);
    if (!(v_eff > 0.0)) {
        throw DepletedPackError("battery effective voltage " + std::to_string(v_eff) + " V is not positive");
    }
    return solve_power_current(v_eff, p.r_ohm, power);
}

inline BatteryState battery_step(BatteryState s, const BatteryParams& p, double current, double dt,
                                 Diagnostics* diag = nullptr) {
    if (!(dt > 0.0)) throw ContractError("battery_step: dt must be positive");
    const double tau = p.tau();
    if (dt >= tau) {
        warn(diag, "battery_step: dt " + std::to_string(dt) + " s >= polarization tau " + std::to_string(tau) +
                       " s, step is coarse for the circuit dynamics");
    }
    // Zero-order hold: exact when the current is constant over the step.
    s.i_pol += (current - s.i_pol) * -std::expm1(-dt / tau);
    s.u_bulk += dt * current / p.c_bulk;
    s.last_current = current;
    s.ah_throughput += std::abs(current) * dt / 3600.0;
    return s;
}

struct SocUpdate {
    double soc = 0.0;
    bool saturated = false;
};

inline SocUpdate soc_update(const BatteryState& s, const BatteryParams& p, double current, double dt) {
    if (!(dt > 0.0)) throw ContractError("soc_update: dt must be positive");
    const double eta = current > 0.0 ? p.eta_discharge : p.eta_coulomb;
    const double next = s.soc - eta * current * dt / (3600.0 * p.q_rated);
    const double clamped = std::clamp(next, 0.0, 1.0);
    return {clamped, clamped != next};
}

// Ohmic loss of the parallel pack plus the coulombic-inefficiency share of the terminal power.
inline double loss_increment(const BatteryParams& p, double current, double u_terminal, double dt) {
    if (!(dt > 0.0)) throw ContractError("loss_increment: dt must be positive");
    return dt * (current * current * p.r_ohm / p.n_parallel +
                 std::abs(u_terminal * current) * (1.0 - p.eta_coulomb));
}

// Lumped heat balance: ohmic heating against convection to ambient.
inline double thermal_step(const BatteryState& s, const ThermalParams& th, const BatteryParams& p, double current,
                           double dt) {
    if (!(dt > 0.0)) throw ContractError("thermal_step: dt must be positive");
    const double heat = current * current * p.r_ohm / p.n_parallel;
    return s.temp + dt * (heat - th.h_conv * (s.temp - th.t_ambient)) / th.heat_capacity;
}

struct BatteryAdvance {
    BatteryState state;
    double u_terminal = 0.0;
    double loss = 0.0; // J over the step
    bool soc_saturated = false;
};

// One full plant step at a given current: terminal voltage and loss are taken at the
// start-of-step state, then SOC, temperature and the circuit states advance together.
inline BatteryAdvance battery_advance(const BatteryState& s, const BatteryParams& p, const ThermalParams& th,
                                      double current, double dt, Diagnostics* diag = nullptr) {
    BatteryAdvance out;
    out.u_terminal = terminal_voltage(s, p, current);
    out.loss = loss_increment(p, current, out.u_terminal, dt);
    const auto soc = soc_update(s, p, current, dt);
    const double temp = thermal_step(s, th, p, current, dt);

    out.state = battery_step(s, p, current, dt, diag);
    out.state.soc = soc.soc;
    out.state.temp = temp;
    out.state.q_loss_acc += out.loss;
    out.soc_saturated = soc.saturated;
    return out;
}

} // namespace hess
