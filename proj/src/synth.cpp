#include "immunize/synth.hpp"

#include <random>

#include <fmt/format.h>

#include "immunize/error.hpp"

namespace immunize {

namespace {

Date next_weekday(const Date& d) {
    auto day = std::chrono::sys_days{d} + std::chrono::days{1};
    while (std::chrono::weekday{day} == std::chrono::Saturday ||
           std::chrono::weekday{day} == std::chrono::Sunday) {
        day += std::chrono::days{1};
    }
    return Date{day};
}

}  // namespace

SynthHistory synth_history(const SynthConfig& config) {
    if (config.days < 2) fail(ErrorKind::Contract, "synthetic history needs at least 2 days");
    if (config.tenors.size() < 4) fail(ErrorKind::Contract, "synthetic history needs >= 4 tenors");

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    std::vector<CurvePoint> pts;
    for (double t : config.tenors) {
        const auto& k = config.base;
        pts.push_back({t, k[0] + t * (k[1] + t * (k[2] + t * k[3]))});
    }

    SynthHistory out;
    out.curves.reserve(static_cast<std::size_t>(config.days));
    out.curves.emplace_back(config.start, pts);
    for (int i = 1; i < config.days; ++i) {
        const YieldCurve& prev = out.curves.back();
        const auto seg = fit_segment(prev, prev.min_tenor(), prev.max_tenor(), 3);
        const FactorDraw f{config.sigma_level * normal(rng), config.sigma_rotation * normal(rng),
                           config.sigma_twist * normal(rng)};
        const auto shock = ShockSpec::parametric(f.a, f.b, f.c);
        std::vector<CurvePoint> next = prev.points();
        for (auto& p : next) {
            p.spot += delta_y(seg, shock, p.tenor);
            if (config.sigma_noise > 0.0) p.spot += config.sigma_noise * normal(rng);
        }
        out.factors.push_back(f);
        out.curves.emplace_back(next_weekday(prev.date()), std::move(next));
    }
    return out;
}

BondUniverse demo_universe() {
    BondUniverse u;
    auto add = [&](std::string id, double coupon, int freq, double maturity) {
        Bond b{id, 100.0, coupon, freq, maturity, std::nullopt};
        b.validate();
        u.emplace(std::move(id), std::move(b));
    };
    add("B1", 0.0400, 1, 7.6);
    add("B2", 0.0350, 1, 5.3);
    add("B3", 0.0300, 1, 3.4);
    add("B4", 0.0380, 2, 6.1);
    return u;
}

}  // namespace immunize
