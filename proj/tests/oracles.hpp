#pragma once

// Test-only reference computations. Nothing here calls into the library's
// analytic or solver paths, so the checks stay independent.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "immunize/bond.hpp"
#include "immunize/hedging.hpp"

namespace oracle {

// Brute-force price from the schedule definition, annual compounding.
inline double brute_price(const immunize::Bond& b, double y) {
    const double period = 1.0 / b.coupon_frequency;
    double pv = 0.0;
    for (int k = 0;; ++k) {
        const double t = b.maturity - k * period;
        if (t <= 1e-9) break;
        double amount = b.face * b.coupon_rate / b.coupon_frequency;
        if (k == 0) amount += b.face;
        pv += amount / std::pow(1.0 + y, t);
    }
    return pv;
}

inline double fd_duration(const immunize::Bond& b, double y, double h = 1e-6) {
    return -(brute_price(b, y + h) - brute_price(b, y - h)) / (2.0 * h) / brute_price(b, y);
}

inline double fd_convexity(const immunize::Bond& b, double y, double h = 1e-4) {
    return (brute_price(b, y + h) - 2.0 * brute_price(b, y) + brute_price(b, y - h)) / (h * h) /
           brute_price(b, y);
}

// Dense Gaussian elimination with partial pivoting.
inline std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        }
        if (a[piv][col] == 0.0) throw std::runtime_error("singular");
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
        x[i] = s / a[i][i];
    }
    return x;
}

// Hedge amounts zeroing sum_i N_i P_i D_i T_i^k for k < legs.size().
inline std::vector<double> moment_hedge(const immunize::InstrumentSnapshot& target,
                                        const std::vector<immunize::InstrumentSnapshot>& legs) {
    const std::size_t n = legs.size();
    std::vector<std::vector<double>> a(n, std::vector<double>(n));
    std::vector<double> rhs(n);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            a[k][i] = legs[i].price * legs[i].modified_duration * std::pow(legs[i].maturity, double(k));
        }
        rhs[k] = -target.amount * target.price * target.modified_duration *
                 std::pow(target.maturity, double(k));
    }
    return gauss_solve(a, rhs);
}

// Hedge amounts zeroing dollar duration and dollar convexity.
inline std::vector<double> duration_convexity_hedge(const immunize::InstrumentSnapshot& target,
                                                    const immunize::InstrumentSnapshot& a,
                                                    const immunize::InstrumentSnapshot& b) {
    return gauss_solve({{a.price * a.modified_duration, b.price * b.modified_duration},
                        {a.price * a.convexity, b.price * b.convexity}},
                       {-target.amount * target.price * target.modified_duration,
                        -target.amount * target.price * target.convexity});
}

// Seeded generator of plausible instrument snapshots.
class SnapshotGen {
public:
    explicit SnapshotGen(std::uint64_t seed) : rng_(seed) {}

    immunize::InstrumentSnapshot make(const std::string& id, double maturity, double amount = 0.0) {
        std::uniform_real_distribution<double> px(85.0, 115.0);
        std::uniform_real_distribution<double> dfrac(0.80, 0.97);
        std::uniform_real_distribution<double> cfrac(0.9, 1.1);
        const double d = maturity * dfrac(rng_);
        return {id, px(rng_), maturity, d, d * (d + 1.0) * cfrac(rng_), amount};
    }

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

private:
    std::mt19937_64 rng_;
};

}  // namespace oracle
