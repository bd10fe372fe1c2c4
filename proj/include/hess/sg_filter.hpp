#pragma once

// Savitzky-Golay style windowed least-squares fitting with model selection.
//
// A window holds n = 2m+1 samples at abscissae x = -m..m. fit_window fits a
// polynomial of the given order; mode1_select varies the order on a fixed
// window, mode2_select varies the window at a fixed order, both keep the fit
// with the best R^2. rule_select then decides whether the fitted battery power
// may be commanded or the raw fuzzy value has to be used instead.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hess/errors.hpp"

namespace hess {

class FitError : public ContractError {
public:
    using ContractError::ContractError;
};

class InsufficientHistoryError : public ContractError {
public:
    using ContractError::ContractError;
};

// R^2 values closer than this are treated as equal during selection, so that
// float noise does not defeat the lowest-order / smallest-window preference.
inline constexpr double kR2TieTolerance = 1e-12;

struct FitResult {
    std::vector<double> coeffs;      // a_0..a_order in the window abscissa x
    std::vector<double> predictions; // fitted values at x = -m..m
    double r2 = 0.0;
    int order = 0;
    int half_width = 0;
    // Coefficients in the scaled abscissa x/m; used for evaluation.
    std::vector<long double> scaled_coeffs;

    double predict(double x) const {
        const long double t = static_cast<long double>(x) / half_width;
        long double acc = 0.0L;
        for (auto it = scaled_coeffs.rbegin(); it != scaled_coeffs.rend(); ++it) acc = acc * t + *it;
        return static_cast<double>(acc);
    }
    // Offline smoothing value.
    double center() const { return predict(0.0); }
    // Causal value: the fit evaluated at the newest sample.
    double latest() const { return predict(static_cast<double>(half_width)); }
};

inline double r_squared(std::span<const double> observed, std::span<const double> predicted) {
    if (observed.size() != predicted.size()) {
        throw ContractError("r_squared: observed and predicted lengths differ");
    }
    if (observed.size() < 2) throw ContractError("r_squared: need at least 2 values");

    long double ss_res = 0.0L;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const long double d = static_cast<long double>(observed[i]) - predicted[i];
        ss_res += d * d;
    }
    const bool constant =
        std::all_of(observed.begin(), observed.end(), [&](double v) { return v == observed.front(); });
    if (constant) {
        // 0/0 in the definition: a constant signal reproduced to round-off counts as a perfect fit.
        const long double scale = 1e-12L * std::max(1.0L, std::abs(static_cast<long double>(observed.front())));
        return ss_res <= observed.size() * scale * scale ? 1.0 : 0.0;
    }
    long double mean = 0.0L;
    for (double v : observed) mean += v;
    mean /= static_cast<long double>(observed.size());
    long double ss_tot = 0.0L;
    for (double v : observed) ss_tot += (v - mean) * (v - mean);
    return static_cast<double>(1.0L - ss_res / ss_tot);
}

struct FitOptions {
    // Require n > k (more samples than coefficients). With false, n == k is allowed.
    bool strict = true;
};

inline FitResult fit_window(std::span<const double> y, int order, FitOptions opts = {}) {
    const auto n = static_cast<int>(y.size());
    if (n < 3 || n % 2 == 0) throw ContractError("fit_window: window length must be odd and >= 3");
    if (order < 0) throw ContractError("fit_window: order must be >= 0");
    const int k = order + 1;
    const int m = (n - 1) / 2;
    if (opts.strict ? n <= k : n < k) {
        throw FitError("fit_window: order " + std::to_string(order) + " too high for window of " + std::to_string(n));
    }

    using Mat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    using Vec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
    // Vandermonde design matrix in t = x/m, which keeps the columns comparably scaled.
    Mat design(n, k);
    Vec rhs(n);
    for (int i = 0; i < n; ++i) {
        const long double t = static_cast<long double>(i - m) / m;
        long double pw = 1.0L;
        for (int j = 0; j < k; ++j) {
            design(i, j) = pw;
            pw *= t;
        }
        rhs(i) = y[static_cast<std::size_t>(i)];
    }
    Eigen::ColPivHouseholderQR<Mat> qr(design);
    if (qr.rank() < k) throw FitError("fit_window: rank-deficient design matrix");
    const Vec b = qr.solve(rhs);

    FitResult fit;
    fit.order = order;
    fit.half_width = m;
    fit.scaled_coeffs.assign(b.data(), b.data() + k);
    fit.coeffs.resize(static_cast<std::size_t>(k));
    long double scale = 1.0L;
    for (int j = 0; j < k; ++j) {
        fit.coeffs[static_cast<std::size_t>(j)] = static_cast<double>(b(j) / scale);
        scale *= m;
    }
    const Vec pred = design * b;
    fit.predictions.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) fit.predictions[static_cast<std::size_t>(i)] = static_cast<double>(pred(i));
    fit.r2 = r_squared(y, fit.predictions);
    return fit;
}

// Best R^2 wins; among fits within kR2TieTolerance of the best, the first
// (lowest order / smallest window, as ordered by the caller) is returned.
inline std::size_t select_best_fit(const std::vector<FitResult>& fits) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& f : fits) best = std::max(best, f.r2);
    for (std::size_t i = 0; i < fits.size(); ++i) {
        if (fits[i].r2 >= best - kR2TieTolerance) return i;
    }
    return 0;
}

// Mode I: fixed window, polynomial order 1..max_order.
inline FitResult mode1_select(std::span<const double> window, int max_order) {
    const auto n = static_cast<int>(window.size());
    if (max_order < 1 || max_order > n - 2) {
        throw ContractError("mode1_select: max_order must be in [1, n-2]");
    }
    std::vector<FitResult> fits;
    fits.reserve(static_cast<std::size_t>(max_order));
    for (int order = 1; order <= max_order; ++order) fits.push_back(fit_window(window, order));
    return fits[select_best_fit(fits)];
}

// Mode II: fixed order, trailing windows of the given half-widths.
// Windows that are too short for the order or longer than the history are skipped.
inline FitResult mode2_select(std::span<const double> history, std::vector<int> half_widths, int order) {
    std::sort(half_widths.begin(), half_widths.end());
    half_widths.erase(std::unique(half_widths.begin(), half_widths.end()), half_widths.end());
    std::vector<FitResult> fits;
    for (int m : half_widths) {
        const auto n = static_cast<std::size_t>(2 * m + 1);
        if (m < 1 || 2 * m + 1 <= order + 1 || history.size() < n) continue;
        fits.push_back(fit_window(history.subspan(history.size() - n), order));
    }
    if (fits.empty()) {
        throw InsufficientHistoryError("mode2_select: no admissible window for " + std::to_string(history.size()) +
                                       " samples at order " + std::to_string(order));
    }
    return fits[select_best_fit(fits)];
}

enum class SelectionTag { filtered, fuzzy_fallback };

inline const char* to_string(SelectionTag t) { return t == SelectionTag::filtered ? "filtered" : "fuzzy-fallback"; }

struct Selection {
    double power = 0.0;
    SelectionTag tag = SelectionTag::fuzzy_fallback;
    int source = 0; // 1 = Mode I, 2 = Mode II, 0 = none
};

// A filtered command is only used when it asks the battery for no more than
// the demand and points the same way; otherwise the fuzzy command stands.
inline Selection rule_select(double p_fuzzy, double candidate, double p_req) {
    const bool too_large = std::abs(candidate) > std::abs(p_req);
    const bool wrong_sign = p_req != 0.0 && candidate != 0.0 && std::signbit(candidate) != std::signbit(p_req);
    if (too_large || wrong_sign) return {p_fuzzy, SelectionTag::fuzzy_fallback, 0};
    return {candidate, SelectionTag::filtered, 0};
}

enum class EvalPoint { center, latest };

inline double evaluate_fit(const FitResult& fit, EvalPoint at) {
    return at == EvalPoint::center ? fit.center() : fit.latest();
}

// Picks the better of the two fits (ties go to Mode I) and applies the rule.
// Either fit may be absent; with neither, the fuzzy value is returned.
inline Selection rule_select(double p_fuzzy, const std::optional<FitResult>& fit1,
                             const std::optional<FitResult>& fit2, double p_req, EvalPoint at = EvalPoint::center) {
    const FitResult* chosen = nullptr;
    int source = 0;
    if (fit1 && (!fit2 || fit1->r2 >= fit2->r2 - kR2TieTolerance)) {
        chosen = &*fit1;
        source = 1;
    } else if (fit2) {
        chosen = &*fit2;
        source = 2;
    }
    if (chosen == nullptr) return {p_fuzzy, SelectionTag::fuzzy_fallback, 0};
    auto sel = rule_select(p_fuzzy, evaluate_fit(*chosen, at), p_req);
    sel.source = source;
    return sel;
}

// Offline centered smoothing with a fixed window. Edge samples are taken from
// the first/last full window evaluated at their own abscissa.
inline std::vector<double> smooth(std::span<const double> series, int half_width, int order) {
    const auto n = static_cast<std::size_t>(2 * half_width + 1);
    if (series.size() < n) throw InsufficientHistoryError("smooth: series shorter than the window");
    std::vector<double> out(series.size());
    const auto mm = static_cast<std::size_t>(half_width);
    for (std::size_t i = mm; i + mm < series.size(); ++i) {
        out[i] = fit_window(series.subspan(i - mm, n), order).center();
    }
    const auto head = fit_window(series.subspan(0, n), order);
    const auto tail = fit_window(series.subspan(series.size() - n), order);
    for (std::size_t i = 0; i < mm; ++i) {
        out[i] = head.predict(static_cast<double>(i) - half_width);
        out[series.size() - 1 - i] = tail.predict(static_cast<double>(half_width - i));
    }
    return out;
}

} // namespace hess
