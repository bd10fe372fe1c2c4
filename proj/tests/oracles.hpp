#pragma once

// Reference implementations used only by the tests. None of them call into the
// library code they check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace oracle {

using Rational = boost::multiprecision::cpp_rational;

// Exact rational value of a finite double.
inline Rational to_rational(double v) {
    int exp = 0;
    const double mant = std::frexp(v, &exp);
    // 53-bit integer mantissa
    const auto scaled = static_cast<long long>(std::ldexp(mant, 53));
    Rational r(scaled);
    exp -= 53;
    boost::multiprecision::cpp_int p2 = 1;
    if (exp >= 0) {
        p2 <<= exp;
        return r * p2;
    }
    p2 <<= -exp;
    return r / p2;
}

// Least-squares polynomial coefficients a_0..a_order over x = -m..m, solving the
// normal equations (X^T X) a = X^T y by exact Gaussian elimination.
inline std::vector<double> lsq_coeffs(std::span<const double> y, int order) {
    const int n = static_cast<int>(y.size());
    const int m = (n - 1) / 2;
    const int k = order + 1;
    std::vector<std::vector<Rational>> a(static_cast<std::size_t>(k), std::vector<Rational>(static_cast<std::size_t>(k + 1)));
    for (int r = 0; r < k; ++r) {
        for (int c = 0; c < k; ++c) {
            boost::multiprecision::cpp_int s = 0;
            for (int x = -m; x <= m; ++x) s += boost::multiprecision::pow(boost::multiprecision::cpp_int(x), r + c);
            a[r][c] = Rational(s);
        }
        Rational s = 0;
        for (int i = 0; i < n; ++i) {
            s += Rational(boost::multiprecision::pow(boost::multiprecision::cpp_int(i - m), r)) * to_rational(y[i]);
        }
        a[r][k] = s;
    }
    for (int col = 0; col < k; ++col) {
        int piv = col;
        while (a[piv][col] == 0) ++piv;
        std::swap(a[piv], a[col]);
        for (int r = 0; r < k; ++r) {
            if (r == col || a[r][col] == 0) continue;
            const Rational f = a[r][col] / a[col][col];
            for (int c = col; c <= k; ++c) a[r][c] -= f * a[col][c];
        }
    }
    std::vector<double> out(static_cast<std::size_t>(k));
    for (int r = 0; r < k; ++r) out[r] = static_cast<double>(Rational(a[r][k] / a[r][r]));
    return out;
}

// Weights w such that the fitted value at x = 0 equals sum w_i y_i.
inline std::vector<Rational> center_weights(int m, int order) {
    const int n = 2 * m + 1;
    std::vector<Rational> w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        // a_0 of the fit to a unit impulse at sample i
        const int k = order + 1;
        std::vector<std::vector<Rational>> a(k, std::vector<Rational>(k + 1));
        for (int r = 0; r < k; ++r) {
            for (int c = 0; c < k; ++c) {
                Rational s = 0;
                for (int x = -m; x <= m; ++x) s += Rational(boost::multiprecision::pow(boost::multiprecision::cpp_int(x), r + c));
                a[r][c] = s;
            }
            a[r][k] = Rational(boost::multiprecision::pow(boost::multiprecision::cpp_int(i - m), r));
        }
        for (int col = 0; col < k; ++col) {
            int piv = col;
            while (a[piv][col] == 0) ++piv;
            std::swap(a[piv], a[col]);
            for (int r = 0; r < k; ++r) {
                if (r == col || a[r][col] == 0) continue;
                const Rational f = a[r][col] / a[col][col];
                for (int c = col; c <= k; ++c) a[r][c] -= f * a[col][c];
            }
        }
        w[i] = a[0][k] / a[0][0];
    }
    return w;
}

// Quadratic scan over every index pair, keeping only neighbours.
inline double max_abs_adjacent_diff(std::span<const double> v) {
    double best = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        for (std::size_t j = 0; j < v.size(); ++j) {
            if (j == i + 1) best = std::max(best, std::abs(v[j] - v[i]));
        }
    }
    return best;
}

// Hand-tabulated copy of the shipped rule base: membership breakpoints and the
// rule consequents, evaluated with a plain Mamdani min/max/centroid loop.
struct RefMamdani {
    // trapezoids (a, b, c, d); triangles have b == c
    static constexpr std::array<std::array<double, 4>, 4> preq{{{-1, -1, -0.2, 0},
                                                                {-0.2, 0, 0.1, 0.4},
                                                                {0.1, 0.4, 0.4, 0.7},
                                                                {0.4, 0.7, 1, 1}}};
    static constexpr std::array<std::array<double, 4>, 3> soc{{{0, 0, 0.2, 0.5}, {0.2, 0.5, 0.5, 0.8}, {0.5, 0.8, 1, 1}}};
    static constexpr std::array<std::array<double, 4>, 5> out{
        {{0, 0, 0, 0.25}, {0, 0.25, 0.25, 0.5}, {0.25, 0.5, 0.5, 0.75}, {0.5, 0.75, 0.75, 1}, {0.9, 1, 1, 1}}};
    enum { VL, L, M, H, VH };
    // [preq Low..High][socbat][socsc] -> output term
    static constexpr int table[3][3][3] = {
        {{VH, H, M}, {VH, H, M}, {VH, H, M}},
        {{VH, H, L}, {VH, H, L}, {VH, H, L}},
        {{VH, H, VL}, {VH, H, VL}, {VH, H, L}},
    };

    static double mu(const std::array<double, 4>& t, double x) {
        const auto [a, b, c, d] = t;
        if (x < a || x > d) return 0.0;
        if (x >= b && x <= c) return 1.0;
        if (x < b) return (x - a) / (b - a);
        return (d - x) / (d - c);
    }

    static double evaluate(double p, double sb, double ss) {
        std::array<double, 5> clip{};
        clip[VL] = mu(preq[0], p);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                for (int k = 0; k < 3; ++k) {
                    const double w = std::min({mu(preq[i + 1], p), mu(soc[j], sb), mu(soc[k], ss)});
                    const int o = table[i][j][k];
                    clip[o] = std::max(clip[o], w);
                }
            }
        }
        const int n = 501;
        double num = 0.0;
        double den = 0.0;
        for (int s = 0; s < n; ++s) {
            const double y = s / double(n - 1);
            double agg = 0.0;
            for (int o = 0; o < 5; ++o) agg = std::max(agg, std::min(clip[o], mu(out[o], y)));
            const double wgt = (s == 0 || s == n - 1) ? 0.5 : 1.0;
            num += wgt * y * agg;
            den += wgt * agg;
        }
        return den > 0.0 ? num / den : 0.5;
    }
};

} // namespace oracle
