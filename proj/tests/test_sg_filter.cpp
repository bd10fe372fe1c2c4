#include <gtest/gtest.h>

#include <random>

#include "hess/sg_filter.hpp"
#include "oracles.hpp"

using namespace hess;

namespace {

std::vector<double> poly_window(int m, const std::vector<double>& c) {
    std::vector<double> y;
    for (int x = -m; x <= m; ++x) {
        double acc = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
        y.push_back(acc);
    }
    return y;
}

// Independent argmax over candidate fits: highest R^2, earliest candidate within the tie tolerance.
std::size_t scan_best(const std::vector<double>& r2) {
    double best = r2.front();
    for (double v : r2) best = std::max(best, v);
    for (std::size_t i = 0; i < r2.size(); ++i) {
        if (best - r2[i] <= kR2TieTolerance) return i;
    }
    return r2.size();
}

} // namespace

TEST(FitWindow, ConstantSeries) {
    const std::vector<double> y(9, 4.25);
    for (int order = 0; order <= 5; ++order) {
        const auto f = fit_window(y, order);
        EXPECT_NEAR(f.coeffs[0], 4.25, 1e-12);
        for (std::size_t j = 1; j < f.coeffs.size(); ++j) EXPECT_NEAR(f.coeffs[j], 0.0, 1e-12);
        for (double p : f.predictions) EXPECT_NEAR(p, 4.25, 1e-12);
        EXPECT_EQ(f.r2, 1.0);
    }
}

TEST(FitWindow, RecoversParabola) {
    const std::vector<double> y{4, 1, 0, 1, 4};
    const auto f = fit_window(y, 2);
    EXPECT_NEAR(f.coeffs[0], 0.0, 1e-12);
    EXPECT_NEAR(f.coeffs[1], 0.0, 1e-12);
    EXPECT_NEAR(f.coeffs[2], 1.0, 1e-12);
    EXPECT_NEAR(f.r2, 1.0, 1e-12);
}

TEST(FitWindow, FivePointQuadraticCenterWeights) {
    const auto w = oracle::center_weights(2, 2);
    const double expected[] = {-3, 12, 17, 12, -3};
    for (int i = 0; i < 5; ++i) EXPECT_EQ(w[i], oracle::Rational(static_cast<long long>(expected[i]), 35LL));
    // the library fit applied to unit impulses reproduces the same weights
    for (int i = 0; i < 5; ++i) {
        std::vector<double> e(5, 0.0);
        e[i] = 1.0;
        EXPECT_NEAR(fit_window(e, 2).center(), expected[i] / 35.0, 1e-12);
    }
}

TEST(FitWindow, ExactPolynomialsForAllShapes) {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> coef(-10.0, 10.0);
    for (int m = 1; m <= 8; ++m) {
        for (int order = 0; order <= 2 * m - 1; ++order) {
            std::vector<double> c(static_cast<std::size_t>(order + 1));
            for (auto& v : c) v = coef(rng);
            const auto y = poly_window(m, c);
            const auto f = fit_window(y, order);
            double scale = 1.0;
            for (double v : y) scale = std::max(scale, std::abs(v));
            for (std::size_t i = 0; i < y.size(); ++i) EXPECT_LE(std::abs(f.predictions[i] - y[i]), 1e-9 * scale);
            EXPECT_NEAR(f.r2, 1.0, 1e-12) << "m=" << m << " order=" << order;
        }
    }
}

TEST(FitWindow, MatchesRationalNormalEquations) {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> val(-50.0, 50.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int m = 1 + trial % 8;
        const int order = trial % (2 * m);
        std::vector<double> y(static_cast<std::size_t>(2 * m + 1));
        for (auto& v : y) v = val(rng);
        const auto f = fit_window(y, order);
        const auto ref = oracle::lsq_coeffs(y, order);
        for (std::size_t j = 0; j < ref.size(); ++j) {
            // coefficient j multiplies x^j with |x| <= m, so compare on that scale
            const double s = std::pow(double(m), double(j));
            double yscale = 0.0;
            for (double v : y) yscale = std::max(yscale, std::abs(v));
            EXPECT_LE(std::abs(f.coeffs[j] - ref[j]) * s, 1e-8 * std::max(std::abs(ref[j]) * s, yscale))
                << "m=" << m << " order=" << order << " j=" << j;
        }
    }
}

TEST(FitWindow, RejectsBadShapes) {
    const std::vector<double> even(4, 1.0);
    EXPECT_THROW(fit_window(even, 1), ContractError);
    const std::vector<double> y(5, 1.0);
    EXPECT_THROW(fit_window(y, 5), FitError);
    EXPECT_NO_THROW(fit_window(y, 4, FitOptions{false}));
    EXPECT_THROW(fit_window(y, 4), FitError);
}

TEST(RSquared, Examples) {
    const std::vector<double> a{1, 2, 3};
    const std::vector<double> b{1, 2, 4};
    EXPECT_EQ(r_squared(a, a), 1.0);
    EXPECT_DOUBLE_EQ(r_squared(a, b), 0.5);
    const std::vector<double> mean(3, 2.0);
    EXPECT_EQ(r_squared(a, mean), 0.0);
    const std::vector<double> flat(3, 7.0);
    const std::vector<double> off{7.0, 7.0, 7.5};
    EXPECT_EQ(r_squared(flat, flat), 1.0);
    EXPECT_EQ(r_squared(flat, off), 0.0);
}

TEST(RSquared, NeverAboveOne) {
    std::mt19937 rng(6);
    std::uniform_real_distribution<double> val(-10.0, 10.0);
    for (int k = 0; k < 1000; ++k) {
        std::vector<double> o(7);
        std::vector<double> p(7);
        for (auto& v : o) v = val(rng);
        for (auto& v : p) v = val(rng);
        EXPECT_LE(r_squared(o, p), 1.0);
    }
}

TEST(Mode1Select, CubicPicksOrderThree) {
    const auto y = poly_window(4, {1.0, -2.0, 0.5, 0.25});
    const auto f = mode1_select(y, 5);
    EXPECT_EQ(f.order, 3);
    EXPECT_NEAR(f.r2, 1.0, 1e-12);
}

TEST(Mode1Select, LinePicksOrderOne) {
    const auto y = poly_window(3, {2.0, 3.0});
    EXPECT_EQ(mode1_select(y, 4).order, 1);
}

TEST(Mode1Select, NoiseTakesMaximumR2) {
    std::mt19937 rng(12);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int k = 0; k < 50; ++k) {
        std::vector<double> y(11);
        for (auto& v : y) v = noise(rng);
        const auto f = mode1_select(y, 4);
        for (int order = 1; order <= 4; ++order) EXPECT_GE(f.r2, fit_window(y, order).r2 - kR2TieTolerance);
    }
}

TEST(Mode1Select, MatchesExhaustiveScan) {
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> val(-100.0, 100.0);
    for (int k = 0; k < 200; ++k) {
        const int m = 2 + k % 6;
        const int max_order = 1 + k % (2 * m - 1);
        std::vector<double> y(static_cast<std::size_t>(2 * m + 1));
        for (auto& v : y) v = val(rng);
        std::vector<double> r2;
        std::vector<FitResult> fits;
        for (int order = 1; order <= max_order; ++order) {
            fits.push_back(fit_window(y, order));
            r2.push_back(fits.back().r2);
        }
        const auto best = scan_best(r2);
        const auto f = mode1_select(y, max_order);
        EXPECT_EQ(f.order, fits[best].order);
        EXPECT_EQ(f.coeffs, fits[best].coeffs);
    }
}

TEST(Mode2Select, PolynomialHistoryPicksSmallestWindow) {
    std::vector<double> h;
    for (int t = 0; t < 30; ++t) h.push_back(0.5 * t * t - 3.0 * t + 1.0);
    const auto f = mode2_select(h, {7, 3, 5}, 2);
    EXPECT_EQ(f.half_width, 3);
    EXPECT_NEAR(f.r2, 1.0, 1e-12);
}

TEST(Mode2Select, RegimeChangePrefersShortWindow) {
    std::vector<double> h;
    for (int t = 0; t < 30; ++t) h.push_back(t < 24 ? 0.0 : 10.0 * (t - 23));
    const auto f = mode2_select(h, {3, 5, 7}, 1);
    EXPECT_LE(f.half_width, 7);
    EXPECT_EQ(f.half_width, 3);
}

TEST(Mode2Select, TwoCandidateScan) {
    const std::vector<double> h{3.0, -1.0, 4.0, 1.0, -5.0, 9.0, 2.0};
    const auto f2 = fit_window(std::span<const double>(h).last(5), 1);
    const auto f3 = fit_window(h, 1);
    const auto f = mode2_select(h, {2, 3}, 1);
    const auto& expected = f2.r2 >= f3.r2 - kR2TieTolerance ? f2 : f3;
    EXPECT_EQ(f.half_width, expected.half_width);
    EXPECT_EQ(f.coeffs, expected.coeffs);
}

TEST(Mode2Select, MatchesExhaustiveScan) {
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> val(-100.0, 100.0);
    for (int k = 0; k < 200; ++k) {
        std::vector<double> h(static_cast<std::size_t>(5 + k % 20));
        for (auto& v : h) v = val(rng);
        const int order = 1 + k % 3;
        const std::vector<int> widths{2, 3, 5, 7};
        std::vector<FitResult> fits;
        std::vector<double> r2;
        for (int w : widths) {
            const auto n = static_cast<std::size_t>(2 * w + 1);
            if (n > h.size() || n <= static_cast<std::size_t>(order + 1)) continue;
            fits.push_back(fit_window(std::span<const double>(h).last(n), order));
            r2.push_back(fits.back().r2);
        }
        if (fits.empty()) {
            EXPECT_THROW(mode2_select(h, widths, order), InsufficientHistoryError);
            continue;
        }
        const auto f = mode2_select(h, widths, order);
        const auto& e = fits[scan_best(r2)];
        EXPECT_EQ(f.half_width, e.half_width);
        EXPECT_EQ(f.coeffs, e.coeffs);
    }
}

TEST(Mode2Select, ShortHistory) {
    const std::vector<double> h{1, 2, 3};
    EXPECT_THROW(mode2_select(h, {3, 5}, 2), InsufficientHistoryError);
}

TEST(RuleSelect, PassThrough) {
    const auto s = rule_select(8000.0, 5000.0, 20000.0);
    EXPECT_EQ(s.power, 5000.0);
    EXPECT_EQ(s.tag, SelectionTag::filtered);
}

TEST(RuleSelect, MagnitudeFallback) {
    const auto s = rule_select(8000.0, 25000.0, 20000.0);
    EXPECT_EQ(s.power, 8000.0);
    EXPECT_EQ(s.tag, SelectionTag::fuzzy_fallback);
    EXPECT_STREQ(to_string(s.tag), "fuzzy-fallback");
}

TEST(RuleSelect, SignMismatchFallback) {
    const auto s = rule_select(6000.0, -3000.0, 10000.0);
    EXPECT_EQ(s.power, 6000.0);
    EXPECT_EQ(s.tag, SelectionTag::fuzzy_fallback);
}

TEST(RuleSelect, MagnitudeBound) {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> pw(-50000.0, 50000.0);
    for (int k = 0; k < 2000; ++k) {
        const double f = pw(rng);
        const double c = pw(rng);
        const double r = pw(rng);
        EXPECT_LE(std::abs(rule_select(f, c, r).power), std::max(std::abs(f), std::abs(r)));
    }
}

TEST(RuleSelect, TiesGoToModeOne) {
    const auto y = poly_window(3, {1.0, 1.0});
    const auto fit1 = fit_window(y, 1);
    const auto fit2 = fit_window(y, 2);
    const auto s = rule_select(0.0, fit1, fit2, 100.0, EvalPoint::latest);
    EXPECT_EQ(s.source, 1);
    EXPECT_NEAR(s.power, 4.0, 1e-12);
    EXPECT_EQ(rule_select(7.0, std::nullopt, std::nullopt, 100.0).tag, SelectionTag::fuzzy_fallback);
}

TEST(FitResult, CausalAndCenterEvaluation) {
    const auto y = poly_window(2, {1.0, 2.0});
    const auto f = fit_window(y, 1);
    EXPECT_NEAR(f.center(), 1.0, 1e-12);
    EXPECT_NEAR(f.latest(), 5.0, 1e-12);
}

TEST(Smooth, PreservesQuadratics) {
    std::vector<double> s;
    for (int t = 0; t < 40; ++t) s.push_back(0.1 * t * t - t);
    const auto out = smooth(s, 3, 2);
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(out[i], s[i], 1e-9);
}
