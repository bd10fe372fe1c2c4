#pragma once

// Semi-empirical capacity-fade model:
//
//   Q_loss = A(c) * exp(-E(c) / (R T)) * Ah^tau        [percent]
//   E(c)   = E_a + B c          (E_a = 31500 J/mol, B = -370.3 J/mol per C)
//   ln A(c) = a exp(-b c) + c0   (a = 1.251, b = 0.2539, c0 = 9.21)
//
// The loss of a drive cycle is summed over C-rate buckets. Within a bucket the
// throughput is applied incrementally, Ah_new^tau - Ah_old^tau, so splitting a
// bucket into several additions gives the same total.

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hess/errors.hpp"

namespace hess {

struct FadeParams {
    double e_a0 = 31500.0;   // J/mol
    double b_rate = -370.3;  // J/mol per C
    double ln_a_amp = 1.251;
    double ln_a_decay = 0.2539;
    double ln_a_floor = 9.21;
    double tau_exp = 0.824;
    double r_gas = 8.314;       // J/(mol K)
    double eol_loss_pct = 20.0; // percent
    double c_rate_bin = 0.25;   // C
    double max_calibrated_c_rate = 10.0;

    void validate() const {
        if (!(std::isfinite(e_a0) && std::isfinite(b_rate) && std::isfinite(ln_a_amp) && std::isfinite(ln_a_decay) &&
              std::isfinite(ln_a_floor) && std::isfinite(tau_exp) && r_gas > 0)) {
            throw InputError("fade parameters must be finite with r_gas > 0");
        }
        if (!(eol_loss_pct > 0 && eol_loss_pct < 100)) throw InputError("fade eol_loss_pct must be in (0, 100)");
        if (!(c_rate_bin > 0)) throw InputError("fade c_rate_bin must be positive");
    }
};

inline double activation_energy(double c_rate, const FadeParams& p = {}, Diagnostics* diag = nullptr) {
    if (c_rate > p.max_calibrated_c_rate) {
        warn(diag, "activation_energy: C-rate " + std::to_string(c_rate) + " beyond calibrated range");
    }
    return p.e_a0 + p.b_rate * c_rate;
}

inline double ln_pre_exponential(double c_rate, const FadeParams& p = {}) {
    return p.ln_a_amp * std::exp(-p.ln_a_decay * c_rate) + p.ln_a_floor;
}

// A(c) * exp(-E(c)/(R T)), combined in log space.
inline double fade_rate_factor(double c_rate, double t_bat, const FadeParams& p = {}, Diagnostics* diag = nullptr) {
    if (!(t_bat > 0.0)) throw ContractError("fade: battery temperature must be positive");
    return std::exp(ln_pre_exponential(c_rate, p) - activation_energy(c_rate, p, diag) / (p.r_gas * t_bat));
}

inline double capacity_loss_step(double c_rate, double t_bat, double ah, const FadeParams& p = {},
                                 Diagnostics* diag = nullptr) {
    if (ah < 0.0) throw ContractError("capacity_loss_step: negative Ah throughput");
    if (ah == 0.0) return 0.0;
    return fade_rate_factor(c_rate, t_bat, p, diag) * std::pow(ah, p.tau_exp);
}

// One item of a C-rate-binned usage record.
struct FadeBucket {
    double c_rate = 0.0; // C
    double t_bat = 0.0;  // K
    double ah = 0.0;     // Ah
};

struct FadeState {
    double q_loss_pct = 0.0;
    // Cumulative throughput per C-rate bin index (c_rate = bin * c_rate_bin).
    std::map<long, double> ah_by_rate;
};

inline long c_rate_bin_index(double c_rate, const FadeParams& p) {
    return std::lround(std::abs(c_rate) / p.c_rate_bin);
}

inline FadeState accumulate_loss(FadeState state, std::span<const FadeBucket> buckets, const FadeParams& p = {},
                                 Diagnostics* diag = nullptr) {
    for (const auto& b : buckets) {
        if (b.ah < 0.0) throw ContractError("accumulate_loss: negative Ah throughput");
        if (b.ah == 0.0) continue;
        const long bin = c_rate_bin_index(b.c_rate, p);
        const double c = bin * p.c_rate_bin;
        double& acc = state.ah_by_rate[bin];
        const double before = std::pow(acc, p.tau_exp);
        acc += b.ah;
        state.q_loss_pct += fade_rate_factor(c, b.t_bat, p, diag) * (std::pow(acc, p.tau_exp) - before);
    }
    return state;
}

// Groups a per-step current/temperature record into C-rate bins. Each bin carries
// its cell-level Ah throughput and the throughput-weighted mean temperature.
inline std::vector<FadeBucket> bucketize(std::span<const double> current, std::span<const double> temperature,
                                         std::span<const double> dt, double q_rated, int n_parallel,
                                         const FadeParams& p = {}) {
    if (current.size() != temperature.size() || current.size() != dt.size()) {
        throw ContractError("bucketize: trace lengths differ");
    }
    struct Acc {
        double ah = 0.0;
        double temp_ah = 0.0;
    };
    std::map<long, Acc> bins;
    for (std::size_t i = 0; i < current.size(); ++i) {
        const double ah = std::abs(current[i]) * dt[i] / 3600.0 / n_parallel;
        if (ah == 0.0) continue;
        auto& a = bins[c_rate_bin_index(current[i] / q_rated, p)];
        a.ah += ah;
        a.temp_ah += temperature[i] * ah;
    }
    std::vector<FadeBucket> out;
    out.reserve(bins.size());
    for (const auto& [bin, a] : bins) out.push_back({bin * p.c_rate_bin, a.temp_ah / a.ah, a.ah});
    return out;
}

// Whole cycles until the end-of-life loss is reached, assuming every cycle
// fades the same as the simulated one.
inline long estimate_cycle_life(double per_cycle_loss, double eol_loss_pct = 20.0) {
    if (!(per_cycle_loss > 0.0)) throw ContractError("estimate_cycle_life: per-cycle loss must be positive");
    return static_cast<long>(std::floor(eol_loss_pct / per_cycle_loss));
}

} // namespace hess
