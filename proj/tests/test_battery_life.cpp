#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hess/battery_life.hpp"

using namespace hess;

TEST(ActivationEnergy, Values) {
    EXPECT_EQ(activation_energy(0.0), 31500.0);
    EXPECT_NEAR(activation_energy(1.0), 31129.7, 1e-9);
    EXPECT_NEAR(activation_energy(10.0), 27797.0, 1e-9);
}

TEST(ActivationEnergy, AffineAndWarnsPastCalibration) {
    EXPECT_NEAR(activation_energy(3.0) - activation_energy(2.0), activation_energy(1.0) - activation_energy(0.0), 1e-9);
    Diagnostics d;
    activation_energy(12.0, FadeParams{}, &d);
    EXPECT_EQ(d.warnings.size(), 1u);
}

TEST(LnPreExponential, Values) {
    EXPECT_NEAR(ln_pre_exponential(0.0), 10.461, 1e-12);
    EXPECT_NEAR(ln_pre_exponential(2.0), 1.251 * std::exp(-0.5078) + 9.21, 1e-12);
    EXPECT_NEAR(ln_pre_exponential(2.0), 9.96287, 1e-5);
    EXPECT_NEAR(ln_pre_exponential(200.0), 9.21, 1e-12);
}

TEST(LnPreExponential, ConvexDecreasing) {
    for (double c = 0.0; c < 20.0; c += 0.1) {
        const double a = ln_pre_exponential(c);
        const double b = ln_pre_exponential(c + 0.1);
        const double e = ln_pre_exponential(c + 0.2);
        EXPECT_LT(b, a);
        EXPECT_GT(a + e - 2.0 * b, 0.0);
    }
}

TEST(CapacityLossStep, ZeroThroughput) { EXPECT_EQ(capacity_loss_step(1.0, 298.15, 0.0), 0.0); }

// Standalone arithmetic: exp(lnA - E/(R T)) * Ah^tau with every term written out.
TEST(CapacityLossStep, OneCAtRoomTemperature) {
    const double ln_a = 1.251 * std::exp(-0.2539) + 9.21;
    const double e = 31500.0 - 370.3;
    const double expected = std::exp(ln_a) * std::exp(-e / (8.314 * 298.15));
    EXPECT_NEAR(capacity_loss_step(1.0, 298.15, 1.0), expected, 1e-15);
    EXPECT_NEAR(capacity_loss_step(1.0, 298.15, 1.0), 0.093, 0.0005);
}

TEST(CapacityLossStep, ThroughputPowerLaw) {
    const double a = capacity_loss_step(2.0, 310.0, 3.0);
    const double b = capacity_loss_step(2.0, 310.0, 6.0);
    EXPECT_NEAR(b / a, std::pow(2.0, 0.824), 1e-12);
    EXPECT_NEAR(b / a, 1.77031, 1e-5);
}

// d/dC of lnA - E/(R T) vanishes where a b e^(-b C) = 370.3 / (R T): the loss
// falls with C-rate below that point and rises above it.
TEST(CapacityLossStep, CRateTurningPointAtRoomTemperature) {
    const double t = 298.0;
    const double c_star = std::log(1.251 * 0.2539 * 8.314 * t / 370.3) / 0.2539;
    EXPECT_NEAR(c_star, 2.969, 1e-3);
    double prev = capacity_loss_step(0.0, t, 1.0);
    for (double c = 0.05; c <= 10.0; c += 0.05) {
        const double v = capacity_loss_step(c, t, 1.0);
        if (c < c_star - 0.05) EXPECT_LT(v, prev) << c;
        if (c > c_star + 0.05) EXPECT_GT(v, prev) << c;
        prev = v;
    }
}

TEST(CapacityLossStep, MonotoneInTemperatureAndThroughput) {
    for (int i = 0; i < 20; ++i) {
        for (int j = 0; j < 20; ++j) {
            const double t = 260.0 + 5.0 * i;
            const double ah = 0.1 + 0.5 * j;
            const double base = capacity_loss_step(1.5, t, ah);
            EXPECT_GT(capacity_loss_step(1.5, t + 0.5, ah), base);
            EXPECT_GT(capacity_loss_step(1.5, t, ah + 0.01), base);
        }
    }
}

TEST(AccumulateLoss, EmptyTrace) {
    const auto s = accumulate_loss(FadeState{}, std::span<const FadeBucket>{});
    EXPECT_EQ(s.q_loss_pct, 0.0);
}

TEST(AccumulateLoss, SplitBucketTelescopes) {
    const FadeBucket whole{1.0, 300.0, 2.5};
    const FadeBucket parts[] = {{1.0, 300.0, 0.7}, {1.0, 300.0, 1.8}};
    const auto a = accumulate_loss(FadeState{}, std::span(&whole, 1));
    const auto b = accumulate_loss(FadeState{}, parts);
    EXPECT_NEAR(a.q_loss_pct, b.q_loss_pct, 1e-12 * a.q_loss_pct);
    EXPECT_NEAR(a.q_loss_pct, capacity_loss_step(1.0, 300.0, 2.5), 1e-12 * a.q_loss_pct);
}

TEST(AccumulateLoss, RateBucketsAdd) {
    const FadeBucket b1{0.5, 300.0, 1.2};
    const FadeBucket b2{2.0, 305.0, 0.4};
    const FadeBucket both[] = {b1, b2};
    const double sum = accumulate_loss(FadeState{}, std::span(&b1, 1)).q_loss_pct +
                       accumulate_loss(FadeState{}, std::span(&b2, 1)).q_loss_pct;
    EXPECT_NEAR(accumulate_loss(FadeState{}, both).q_loss_pct, sum, 1e-12 * sum);
}

TEST(AccumulateLoss, OrderIndependentAndMonotone) {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> c(0.0, 4.0);
    std::uniform_real_distribution<double> ah(0.0, 1.0);
    std::vector<FadeBucket> b;
    for (int k = 0; k < 40; ++k) b.push_back({c(rng), 300.0, ah(rng)});
    const double fwd = accumulate_loss(FadeState{}, b).q_loss_pct;
    std::reverse(b.begin(), b.end());
    const double rev = accumulate_loss(FadeState{}, b).q_loss_pct;
    EXPECT_NEAR(fwd, rev, 1e-12 * fwd);

    FadeState s;
    for (const auto& x : b) {
        const auto n = accumulate_loss(s, std::span(&x, 1));
        EXPECT_GE(n.q_loss_pct, s.q_loss_pct);
        s = n;
    }
}

TEST(Bucketize, WeightsTemperatureByThroughput) {
    const std::vector<double> cur{40.0, 40.0, 0.0, -40.0};
    const std::vector<double> temp{300.0, 310.0, 400.0, 320.0};
    const std::vector<double> dt{1.0, 3.0, 1.0, 2.0};
    const auto b = bucketize(cur, temp, dt, 40.0, 2);
    ASSERT_EQ(b.size(), 1u);
    EXPECT_EQ(b[0].c_rate, 1.0);
    // cell-level Ah: |I| dt / 3600 / n_parallel
    EXPECT_NEAR(b[0].ah, 40.0 * 6.0 / 3600.0 / 2.0, 1e-15);
    EXPECT_NEAR(b[0].t_bat, (300.0 * 1 + 310.0 * 3 + 320.0 * 2) / 6.0, 1e-9);
}

TEST(Bucketize, QuarterCBins) {
    const std::vector<double> cur{4.0, 6.0, 11.0};
    const std::vector<double> temp(3, 300.0);
    const std::vector<double> dt(3, 1.0);
    const auto b = bucketize(cur, temp, dt, 40.0, 1);
    ASSERT_EQ(b.size(), 2u);
    EXPECT_EQ(b[0].c_rate, 0.0);
    EXPECT_EQ(b[1].c_rate, 0.25);
}

TEST(EstimateCycleLife, Division) {
    EXPECT_EQ(estimate_cycle_life(0.02, 20.0), 1000);
    EXPECT_GT(estimate_cycle_life(0.4), estimate_cycle_life(0.5));
    EXPECT_THROW(estimate_cycle_life(0.0), ContractError);
}
