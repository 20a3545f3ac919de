#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "immunize/bond.hpp"
#include "immunize/curve.hpp"

namespace immunize {

/// Seeded generator for daily spot-curve histories whose day-over-day moves
/// are drawn from the level/slope/curvature family
///   dY(T) = a + b F'(T) + c F''(T),
/// F being the least-squares cubic through that day's curve, plus optional
/// independent per-tenor noise.
struct SynthConfig {
    std::uint64_t seed = 42;
    int days = 250;                       // trading days, weekends skipped
    Date start{std::chrono::year{2007}, std::chrono::month{6}, std::chrono::day{4}};
    std::vector<double> tenors{0.5, 1, 2, 3, 4, 5, 6, 7, 8, 10, 15, 20};
    // Initial curve: Y(T) = c0 + c1 T + c2 T^2 + c3 T^3.
    std::array<double, 4> base{0.022, 0.0042, -0.00022, 0.0000035};
    double sigma_level = 0.0005;     // a, decimal per day
    double sigma_rotation = 0.3;     // b, years
    double sigma_twist = 0.3;        // c, years^2
    double sigma_noise = 0.0;        // independent per-tenor move
};

struct FactorDraw {
    double a;
    double b;
    double c;
};

struct SynthHistory {
    std::vector<YieldCurve> curves;   // days entries
    std::vector<FactorDraw> factors;  // days - 1 entries, move into day i + 1
};

SynthHistory synth_history(const SynthConfig& config);

/// Four treasury-style bonds used by the demo backtest: B2 is the hedged
/// bond, B3 and B1 bracket it, B4 sits between B2 and B1.
BondUniverse demo_universe();

}  // namespace immunize
