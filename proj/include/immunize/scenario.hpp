#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "immunize/bond.hpp"
#include "immunize/curve.hpp"
#include "immunize/hedging.hpp"

namespace immunize {

struct InstrumentPnl {
    std::string id;
    double pnl;  // position P&L, amount times price change
};

struct ScenarioResult {
    ShockSpec shock;
    double unhedged_pnl = 0.0;
    double hedged_pnl = 0.0;
    std::vector<InstrumentPnl> per_instrument_pnl;  // target first, then legs
};

/// Exact price change of one unit of `bond` between two curves, each bond
/// priced at the spot rate for its maturity.
double reprice_pnl(const Bond& bond, const YieldCurve& curve, const YieldCurve& shocked);

/// Applies the shock to the curve knots and reprices the target and every
/// leg of the plan off the shocked knots. `seg` is required for rotation
/// and twist shocks.
ScenarioResult run_scenario(const HedgePlan& plan, const BondUniverse& universe,
                            const YieldCurve& curve, const ShockSpec& shock,
                            const std::optional<PolynomialSegment>& seg = std::nullopt);

struct ScalePoint {
    double scale;
    double residual;  // |hedged P&L|
};

/// Hedged residual at shock scales 1, 1/2, 1/4, ... (`steps` points).
std::vector<ScalePoint> residual_scaling(const HedgePlan& plan, const BondUniverse& universe,
                                         const YieldCurve& curve, const ShockSpec& shock_family,
                                         int steps,
                                         const std::optional<PolynomialSegment>& seg = std::nullopt);

namespace serial {
std::vector<ScalePoint> residual_scaling(const HedgePlan& plan, const BondUniverse& universe,
                                         const YieldCurve& curve, const ShockSpec& shock_family,
                                         int steps,
                                         const std::optional<PolynomialSegment>& seg = std::nullopt);
}

/// Least-squares slope of log(residual) against log(scale): the order at
/// which the hedge leaks.
double loglog_slope(std::span<const ScalePoint> points);

/// Snapshots of the plan's target and legs priced off `curve`; the target
/// snapshot carries the plan's target amount.
struct PlanSnapshots {
    InstrumentSnapshot target;
    std::vector<InstrumentSnapshot> legs;
};
PlanSnapshots plan_snapshots(const HedgePlan& plan, const BondUniverse& universe,
                             const YieldCurve& curve);

const Bond& find_bond(const BondUniverse& universe, const std::string& id);

}  // namespace immunize
