#pragma once

// Drive-cycle loading and longitudinal vehicle dynamics.
//
// A cycle is a speed-vs-time series; demand_power turns it into the power the
// energy storage must deliver at the DC bus (positive = traction, negative =
// regenerative braking).

#include <cmath>
#include <fstream>
#include <istream>
#include <string>
#include <vector>

#include "hess/detail/text.hpp"
#include "hess/errors.hpp"

namespace hess {

enum class SpeedUnit { mps, mph, kmh };

inline constexpr double kMphToMps = 0.44704;
inline constexpr double kKmhToMps = 1.0 / 3.6;

inline SpeedUnit parse_speed_unit(const std::string& s) {
    if (s == "mps") return SpeedUnit::mps;
    if (s == "mph") return SpeedUnit::mph;
    if (s == "kmh") return SpeedUnit::kmh;
    throw InputError("unknown speed unit '" + s + "' (expected mps, mph or kmh)");
}

inline double to_mps(double speed, SpeedUnit unit) {
    switch (unit) {
    case SpeedUnit::mph: return speed * kMphToMps;
    case SpeedUnit::kmh: return speed * kKmhToMps;
    case SpeedUnit::mps: break;
    }
    return speed;
}

struct CycleSample {
    double time = 0.0;  // s
    double speed = 0.0; // m/s
};

struct DriveCycle {
    std::string name;
    std::vector<CycleSample> samples;

    std::size_t size() const noexcept { return samples.size(); }
    double duration() const { return samples.empty() ? 0.0 : samples.back().time - samples.front().time; }

    friend bool operator==(const DriveCycle& a, const DriveCycle& b) {
        if (a.samples.size() != b.samples.size()) return false;
        for (std::size_t i = 0; i < a.samples.size(); ++i) {
            if (a.samples[i].time != b.samples[i].time || a.samples[i].speed != b.samples[i].speed) return false;
        }
        return true;
    }
};

inline void validate(const DriveCycle& cycle) {
    if (cycle.samples.size() < 2) {
        throw InputError("drive cycle '" + cycle.name + "' needs at least 2 samples, got " +
                         std::to_string(cycle.samples.size()));
    }
    for (std::size_t i = 0; i < cycle.samples.size(); ++i) {
        const auto& s = cycle.samples[i];
        if (!std::isfinite(s.time) || !std::isfinite(s.speed) || s.speed < 0.0) {
            throw InputError("drive cycle sample " + std::to_string(i) + " has invalid time/speed");
        }
        if (i > 0 && !(s.time > cycle.samples[i - 1].time)) {
            throw InputError("drive cycle time is not strictly increasing at sample " + std::to_string(i));
        }
    }
}

// CSV with header exactly `time,speed`. Rows are rejected, not reordered, when
// time fails to increase.
inline DriveCycle load_cycle(std::istream& in, SpeedUnit unit, std::string name = "cycle") {
    DriveCycle cycle;
    cycle.name = std::move(name);

    std::string raw;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = detail::clean_line(raw, line_no == 1);
        if (!header_seen) {
            if (detail::trim(line) != "time,speed") {
                throw ParseError(line_no, "expected header 'time,speed'");
            }
            header_seen = true;
            continue;
        }
        if (detail::trim(line).empty()) {
            continue;
        }
        const auto fields = detail::split(line, ',');
        if (fields.size() != 2) {
            throw ParseError(line_no, "expected 2 fields, got " + std::to_string(fields.size()));
        }
        const auto t = detail::parse_double(fields[0]);
        const auto v = detail::parse_double(fields[1]);
        if (!t || !v) {
            throw ParseError(line_no, "non-numeric value in '" + std::string(line) + "'");
        }
        if (*v < 0.0) {
            throw ParseError(line_no, "negative speed");
        }
        if (!cycle.samples.empty() && !(*t > cycle.samples.back().time)) {
            throw ParseError(line_no, "time not strictly increasing");
        }
        cycle.samples.push_back({*t, to_mps(*v, unit)});
    }
    if (!header_seen) {
        throw ParseError(1, "empty cycle file");
    }
    if (cycle.samples.size() < 2) {
        throw InputError("drive cycle '" + cycle.name + "' needs at least 2 samples");
    }
    return cycle;
}

inline DriveCycle load_cycle_file(const std::string& path, SpeedUnit unit) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open cycle file '" + path + "'");
    }
    return load_cycle(in, unit, path);
}

struct VehicleParams {
    double mass = 1635.0;        // kg
    double frontal_area = 2.04;  // m^2
    double tire_radius = 0.28;   // m (informational, no gear model)
    double drag_coeff = 0.41;
    double rolling_coeff = 0.03;
    double drivetrain_eff = 0.9;
    double air_density = 1.225;  // kg/m^3
    double gravity = 9.81;       // m/s^2

    void validate() const {
        if (!(mass > 0 && frontal_area > 0 && tire_radius > 0 && drag_coeff > 0 && rolling_coeff > 0 &&
              air_density > 0 && gravity > 0)) {
            throw InputError("vehicle parameters must all be positive");
        }
        if (!(drivetrain_eff > 0 && drivetrain_eff <= 1)) {
            throw InputError("vehicle drivetrain_eff must be in (0, 1]");
        }
    }
};

struct WheelForce {
    double inertial = 0.0; // N
    double aero = 0.0;     // N
    double rolling = 0.0;  // N

    double total() const { return inertial + aero + rolling; }
};

inline WheelForce wheel_force(double speed, double accel, const VehicleParams& p) {
    WheelForce f;
    f.inertial = p.mass * accel;
    f.aero = 0.5 * p.air_density * p.drag_coeff * p.frontal_area * speed * speed;
    // No rolling resistance at standstill.
    f.rolling = speed > 0.0 ? p.mass * p.gravity * p.rolling_coeff : 0.0;
    return f;
}

// Bus power for a wheel power: traction pays the drivetrain loss, regeneration is reduced by it.
inline double bus_power(double wheel_power, double drivetrain_eff) {
    return wheel_power >= 0.0 ? wheel_power / drivetrain_eff : wheel_power * drivetrain_eff;
}

struct PowerSample {
    double time = 0.0;  // s
    double power = 0.0; // W
    double speed = 0.0; // m/s
    double accel = 0.0; // m/s^2
};

struct PowerTrace {
    std::vector<PowerSample> samples;

    std::size_t size() const noexcept { return samples.size(); }
};

// Causal: acceleration is the backward difference, zero at the first sample.
inline PowerTrace demand_power(const DriveCycle& cycle, const VehicleParams& params) {
    validate(cycle);
    params.validate();

    PowerTrace trace;
    trace.samples.reserve(cycle.size());
    for (std::size_t i = 0; i < cycle.size(); ++i) {
        const auto& s = cycle.samples[i];
        double accel = 0.0;
        if (i > 0) {
            const auto& prev = cycle.samples[i - 1];
            accel = (s.speed - prev.speed) / (s.time - prev.time);
        }
        const double wheel = wheel_force(s.speed, accel, params).total() * s.speed;
        trace.samples.push_back({s.time, bus_power(wheel, params.drivetrain_eff), s.speed, accel});
    }
    return trace;
}

} // namespace hess
