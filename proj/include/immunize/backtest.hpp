#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "immunize/bond.hpp"
#include "immunize/curve.hpp"
#include "immunize/hedging.hpp"

namespace immunize {

struct StrategySpec {
    Strategy strategy = Strategy::Duration;
    std::vector<std::string> instruments;  // order as passed to build_hedge
};

/// Bond maturities in the universe are measured from the first date of the
/// backtest window and roll down by ACT/365 elapsed time from there.
struct BacktestConfig {
    std::string target_id;
    double target_amount = 100.0;
    std::vector<StrategySpec> strategies;
    int rebalance_days = 1;
    std::optional<Date> start;
    std::optional<Date> end;
    // Report P&L net of the deterministic pull-to-par carry.
    bool net_carry = false;
    HedgeOptions hedge;

    /// Checks instrument counts, ids and the date range before any work.
    void validate(const BondUniverse& universe, std::span<const YieldCurve> history) const;
};

struct PnlSeries {
    std::string name;            // strategy name, or "unhedged"
    std::vector<Date> dates;     // date at the end of each holding day
    std::vector<double> daily;   // hedged P&L (target plus legs)
    std::vector<double> cumulative;
    std::vector<double> target_daily;             // target position alone
    std::vector<std::vector<double>> leg_daily;   // one series per leg
};

struct SummaryStats {
    double mean = 0.0;
    double stdev = 0.0;
    double max_drawdown = 0.0;
    double worst_day = 0.0;
};

/// Sample standard deviation (n - 1); drawdown measured on the cumulative
/// series starting from zero.
SummaryStats summary_stats(std::span<const double> daily);

struct BacktestReport {
    PnlSeries unhedged;
    std::vector<PnlSeries> strategies;  // config order
    std::vector<SummaryStats> summaries;  // unhedged first, then strategies
    std::vector<std::string> warnings;
    bool net_carry = false;
};

/// Daily hedge, hold, mark-to-market replay over consecutive curves.
BacktestReport run_backtest(std::span<const YieldCurve> history, const BondUniverse& universe,
                            const BacktestConfig& config);

namespace serial {
BacktestReport run_backtest(std::span<const YieldCurve> history, const BondUniverse& universe,
                            const BacktestConfig& config);
}

struct CorrelationMatrix {
    std::vector<double> tenors;
    std::vector<std::vector<double>> values;
};

/// Pearson correlation between every pair of tenor series, on rate levels
/// or, with `on_changes`, on day-over-day changes.
CorrelationMatrix tenor_correlations(std::span<const YieldCurve> history, bool on_changes = false);

namespace serial {
CorrelationMatrix tenor_correlations(std::span<const YieldCurve> history, bool on_changes = false);
}

}  // namespace immunize
