#include "immunize/scenario.hpp"

#include <cmath>
#include <exception>

#include <fmt/format.h>

#include "immunize/error.hpp"

namespace immunize {

const Bond& find_bond(const BondUniverse& universe, const std::string& id) {
    auto it = universe.find(id);
    if (it == universe.end()) fail(ErrorKind::NotFound, fmt::format("unknown instrument id '{}'", id));
    return it->second;
}

double reprice_pnl(const Bond& bond, const YieldCurve& curve, const YieldCurve& shocked) {
    const double before = price(bond, spot(curve, bond.maturity));
    const double after = price(bond, spot(shocked, bond.maturity));
    return after - before;
}

ScenarioResult run_scenario(const HedgePlan& plan, const BondUniverse& universe,
                            const YieldCurve& curve, const ShockSpec& shock,
                            const std::optional<PolynomialSegment>& seg) {
    // Resolve every id before doing any work.
    const Bond& target = find_bond(universe, plan.target.id);
    std::vector<const Bond*> legs;
    for (const auto& leg : plan.legs) legs.push_back(&find_bond(universe, leg.id));

    const YieldCurve shocked = apply_shock(curve, shock, seg);

    ScenarioResult out;
    out.shock = shock;
    const double target_pnl = plan.target.amount * reprice_pnl(target, curve, shocked);
    out.unhedged_pnl = target_pnl;
    out.per_instrument_pnl.push_back({plan.target.id, target_pnl});
    double total = target_pnl;
    for (std::size_t i = 0; i < legs.size(); ++i) {
        const double pnl = plan.legs[i].amount * reprice_pnl(*legs[i], curve, shocked);
        out.per_instrument_pnl.push_back({plan.legs[i].id, pnl});
        total += pnl;
    }
    out.hedged_pnl = total;
    return out;
}

namespace {

void check_steps(int steps) {
    if (steps < 3) fail(ErrorKind::Contract, fmt::format("residual sweep needs >= 3 steps, got {}", steps));
}

ScalePoint sweep_point(const HedgePlan& plan, const BondUniverse& universe, const YieldCurve& curve,
                       const ShockSpec& family, int k, const std::optional<PolynomialSegment>& seg) {
    const double scale = std::ldexp(1.0, -k);
    const auto r = run_scenario(plan, universe, curve, family.scaled(scale), seg);
    return {scale, std::abs(r.hedged_pnl)};
}

}  // namespace

namespace serial {

std::vector<ScalePoint> residual_scaling(const HedgePlan& plan, const BondUniverse& universe,
                                         const YieldCurve& curve, const ShockSpec& shock_family,
                                         int steps, const std::optional<PolynomialSegment>& seg) {
    check_steps(steps);
    std::vector<ScalePoint> out;
    for (int k = 0; k < steps; ++k) out.push_back(sweep_point(plan, universe, curve, shock_family, k, seg));
    return out;
}

}  // namespace serial

std::vector<ScalePoint> residual_scaling(const HedgePlan& plan, const BondUniverse& universe,
                                         const YieldCurve& curve, const ShockSpec& shock_family,
                                         int steps, const std::optional<PolynomialSegment>& seg) {
    check_steps(steps);
    std::vector<ScalePoint> out(static_cast<std::size_t>(steps));
    std::exception_ptr first_error;
#pragma omp parallel for schedule(static)
    for (int k = 0; k < steps; ++k) {
        try {
            out[k] = sweep_point(plan, universe, curve, shock_family, k, seg);
        } catch (...) {
#pragma omp critical(immunize_sweep_error)
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

double loglog_slope(std::span<const ScalePoint> points) {
    if (points.size() < 2) fail(ErrorKind::Contract, "slope needs at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(points.size());
    for (const auto& p : points) {
        if (!(p.residual > 0.0) || !(p.scale > 0.0)) {
            fail(ErrorKind::Domain, "log-log slope needs positive scales and residuals");
        }
        const double x = std::log(p.scale), y = std::log(p.residual);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

PlanSnapshots plan_snapshots(const HedgePlan& plan, const BondUniverse& universe,
                             const YieldCurve& curve) {
    auto snap = [&](const std::string& id, double amount) {
        const Bond& b = find_bond(universe, id);
        return snapshot(b, analyze(b, curve), amount);
    };
    PlanSnapshots out{snap(plan.target.id, plan.target.amount), {}};
    for (const auto& leg : plan.legs) out.legs.push_back(snap(leg.id, 0.0));
    return out;
}

}  // namespace immunize
