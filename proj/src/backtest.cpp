#include "immunize/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

#include <fmt/format.h>

#include "immunize/error.hpp"
#include "immunize/scenario.hpp"

namespace immunize {

SummaryStats summary_stats(std::span<const double> daily) {
    if (daily.empty()) fail(ErrorKind::Contract, "summary_stats needs a non-empty series");
    const double n = static_cast<double>(daily.size());
    const double mean = std::accumulate(daily.begin(), daily.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : daily) ss += (x - mean) * (x - mean);
    const double stdev = daily.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;

    double cum = 0.0, peak = 0.0, drawdown = 0.0;
    for (double x : daily) {
        cum += x;
        peak = std::max(peak, cum);
        drawdown = std::max(drawdown, peak - cum);
    }
    return {mean, stdev, drawdown, *std::min_element(daily.begin(), daily.end())};
}

namespace {

struct Window {
    std::size_t first = 0;
    std::size_t last = 0;  // inclusive
};

Window resolve_window(std::span<const YieldCurve> history, const BacktestConfig& config) {
    Window w{0, history.size() - 1};
    auto sys = [](const Date& d) { return std::chrono::sys_days{d}; };
    if (config.start) {
        while (w.first < history.size() && sys(history[w.first].date()) < sys(*config.start)) ++w.first;
    }
    if (config.end) {
        while (w.last > 0 && sys(history[w.last].date()) > sys(*config.end)) --w.last;
    }
    if (w.first >= history.size() || w.last <= w.first) {
        fail(ErrorKind::Data, "backtest window holds fewer than two trading days");
    }
    return w;
}

}  // namespace

void BacktestConfig::validate(const BondUniverse& universe, std::span<const YieldCurve> history) const {
    if (history.size() < 2) fail(ErrorKind::Data, "backtest needs at least two curves");
    for (std::size_t i = 1; i < history.size(); ++i) {
        if (!(std::chrono::sys_days{history[i].date()} > std::chrono::sys_days{history[i - 1].date()})) {
            fail(ErrorKind::Data, fmt::format("history dates not strictly increasing at {}",
                                              format_iso_date(history[i].date())));
        }
    }
    if (start && end && std::chrono::sys_days{*start} > std::chrono::sys_days{*end}) {
        fail(ErrorKind::Data, "backtest start date after end date");
    }
    if (start && std::chrono::sys_days{*start} < std::chrono::sys_days{history.front().date()}) {
        fail(ErrorKind::Data, fmt::format("start {} precedes the history", format_iso_date(*start)));
    }
    if (end && std::chrono::sys_days{*end} > std::chrono::sys_days{history.back().date()}) {
        fail(ErrorKind::Data, fmt::format("end {} is after the history", format_iso_date(*end)));
    }
    if (rebalance_days < 1) fail(ErrorKind::Data, "rebalance_days must be >= 1");
    if (!(target_amount != 0.0) || !std::isfinite(target_amount)) {
        fail(ErrorKind::Data, "target amount must be finite and non-zero");
    }
    find_bond(universe, target_id);
    for (const auto& s : strategies) {
        if (s.strategy == Strategy::Generic || s.instruments.size() != leg_count(s.strategy)) {
            fail(ErrorKind::Data, fmt::format("strategy '{}' needs {} instruments, config lists {}",
                                              to_string(s.strategy), leg_count(s.strategy),
                                              s.instruments.size()));
        }
        for (const auto& id : s.instruments) find_bond(universe, id);
    }
    resolve_window(history, *this);
}

namespace {

struct DayContext {
    const YieldCurve& from;
    const YieldCurve& to;
    double t_from;  // years elapsed since the window start
    double t_to;
};

bool priceable(const Bond& bond, const DayContext& day) {
    const double m0 = bond.maturity - day.t_from;
    const double m1 = bond.maturity - day.t_to;
    return m0 >= day.from.min_tenor() && m0 <= day.from.max_tenor() &&
           m1 >= day.to.min_tenor() && m1 <= day.to.max_tenor();
}

// P&L of one unit held over the day.
double unit_pnl(const Bond& bond, const DayContext& day, bool net_carry) {
    const Bond b0 = bond.rolled(day.t_from);
    const Bond b1 = bond.rolled(day.t_to);
    const double y0 = spot(day.from, b0.maturity);
    const double p1 = price(b1, spot(day.to, b1.maturity));
    if (net_carry) return p1 - price(b1, y0);
    const double cash = cash_received(b0, 0.0, day.t_to - day.t_from);
    return p1 + cash - price(b0, y0);
}

struct SeriesResult {
    PnlSeries series;
    std::optional<std::string> warning;
};

SeriesResult run_series(std::span<const YieldCurve> history, Window w, const BondUniverse& universe,
                        const BacktestConfig& config, const std::string& name,
                        const std::optional<StrategySpec>& spec) {
    SeriesResult out;
    auto& s = out.series;
    s.name = name;
    const Bond& target = find_bond(universe, config.target_id);
    std::vector<const Bond*> legs;
    if (spec) {
        for (const auto& id : spec->instruments) legs.push_back(&find_bond(universe, id));
    }
    s.leg_daily.resize(legs.size());
    std::vector<double> amounts(legs.size(), 0.0);

    const Date& origin = history[w.first].date();
    double cum = 0.0;
    for (std::size_t d = w.first; d < w.last; ++d) {
        const DayContext day{history[d], history[d + 1], year_fraction(origin, history[d].date()),
                             year_fraction(origin, history[d + 1].date())};
        const Bond* stale = priceable(target, day) ? nullptr : &target;
        for (const Bond* b : legs) {
            if (!stale && !priceable(*b, day)) stale = b;
        }
        if (stale) {
            out.warning = fmt::format(
                "{}: series truncated at {}: bond '{}' maturity {:.6f} leaves the curve range",
                name, format_iso_date(history[d].date()), stale->id, stale->maturity - day.t_to);
            break;
        }

        if (spec && (d - w.first) % static_cast<std::size_t>(config.rebalance_days) == 0) {
            auto snap = [&](const Bond& b, double amount) {
                const Bond rolled = b.rolled(day.t_from);
                return snapshot(rolled, analyze(rolled, day.from), amount);
            };
            const auto target_snap = snap(target, config.target_amount);
            std::vector<InstrumentSnapshot> inst;
            for (const Bond* b : legs) inst.push_back(snap(*b, 0.0));
            const HedgePlan plan = build_hedge(spec->strategy, target_snap, inst, config.hedge);
            for (std::size_t i = 0; i < legs.size(); ++i) amounts[i] = plan.legs[i].amount;
        }

        const double target_pnl = config.target_amount * unit_pnl(target, day, config.net_carry);
        double total = target_pnl;
        for (std::size_t i = 0; i < legs.size(); ++i) {
            const double leg_pnl = amounts[i] * unit_pnl(*legs[i], day, config.net_carry);
            s.leg_daily[i].push_back(leg_pnl);
            total += leg_pnl;
        }
        cum += total;
        s.dates.push_back(history[d + 1].date());
        s.target_daily.push_back(target_pnl);
        s.daily.push_back(total);
        s.cumulative.push_back(cum);
    }
    return out;
}

BacktestReport assemble(std::vector<SeriesResult> results, bool net_carry) {
    BacktestReport report;
    report.net_carry = net_carry;
    for (std::size_t i = 0; i < results.size(); ++i) {
        auto& r = results[i];
        if (r.warning) report.warnings.push_back(*r.warning);
        report.summaries.push_back(r.series.daily.empty() ? SummaryStats{}
                                                           : summary_stats(r.series.daily));
        if (i == 0) {
            report.unhedged = std::move(r.series);
        } else {
            report.strategies.push_back(std::move(r.series));
        }
    }
    return report;
}

std::string series_name(const BacktestConfig& config, std::size_t i) {
    // Repeated strategies get a numeric suffix so output files stay distinct.
    const auto strategy = config.strategies[i].strategy;
    std::size_t seen = 0;
    for (std::size_t j = 0; j < i; ++j) seen += config.strategies[j].strategy == strategy;
    return seen == 0 ? to_string(strategy) : fmt::format("{}_{}", to_string(strategy), seen + 1);
}

}  // namespace

namespace serial {

BacktestReport run_backtest(std::span<const YieldCurve> history, const BondUniverse& universe,
                            const BacktestConfig& config) {
    config.validate(universe, history);
    const Window w = resolve_window(history, config);
    std::vector<SeriesResult> results;
    results.push_back(run_series(history, w, universe, config, "unhedged", std::nullopt));
    for (std::size_t i = 0; i < config.strategies.size(); ++i) {
        results.push_back(
            run_series(history, w, universe, config, series_name(config, i), config.strategies[i]));
    }
    return assemble(std::move(results), config.net_carry);
}

}  // namespace serial

BacktestReport run_backtest(std::span<const YieldCurve> history, const BondUniverse& universe,
                            const BacktestConfig& config) {
    config.validate(universe, history);
    const Window w = resolve_window(history, config);
    const auto n = static_cast<std::ptrdiff_t>(config.strategies.size()) + 1;
    std::vector<SeriesResult> results(static_cast<std::size_t>(n));
    std::exception_ptr first_error;
    // Day steps carry position state; strategies are independent.
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            if (i == 0) {
                results[0] = run_series(history, w, universe, config, "unhedged", std::nullopt);
            } else {
                const auto k = static_cast<std::size_t>(i - 1);
                results[i] = run_series(history, w, universe, config, series_name(config, k),
                                        config.strategies[k]);
            }
        } catch (...) {
#pragma omp critical(immunize_backtest_error)
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);
    return assemble(std::move(results), config.net_carry);
}

namespace {

std::vector<std::vector<double>> tenor_series(std::span<const YieldCurve> history, bool on_changes,
                                              std::vector<double>& tenors) {
    if (history.size() < 3) fail(ErrorKind::Data, "correlations need at least 3 days of history");
    const auto& grid = history.front().points();
    for (const auto& c : history) {
        const auto& pts = c.points();
        bool same = pts.size() == grid.size();
        for (std::size_t i = 0; same && i < pts.size(); ++i) same = pts[i].tenor == grid[i].tenor;
        if (!same) {
            fail(ErrorKind::Data, fmt::format("tenor grid on {} differs from {}",
                                              format_iso_date(c.date()),
                                              format_iso_date(history.front().date())));
        }
    }
    tenors.clear();
    std::vector<std::vector<double>> series(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        tenors.push_back(grid[j].tenor);
        for (std::size_t d = on_changes ? 1 : 0; d < history.size(); ++d) {
            const double level = history[d].points()[j].spot;
            series[j].push_back(on_changes ? level - history[d - 1].points()[j].spot : level);
        }
    }
    return series;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y, double tx, double ty) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) {
        fail(ErrorKind::Domain,
             fmt::format("correlation of tenors {} and {} undefined: constant series", tx, ty));
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace

namespace serial {

CorrelationMatrix tenor_correlations(std::span<const YieldCurve> history, bool on_changes) {
    CorrelationMatrix out;
    const auto series = tenor_series(history, on_changes, out.tenors);
    const std::size_t m = series.size();
    out.values.assign(m, std::vector<double>(m, 1.0));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            out.values[i][j] = out.values[j][i] =
                pearson(series[i], series[j], out.tenors[i], out.tenors[j]);
        }
    }
    return out;
}

}  // namespace serial

CorrelationMatrix tenor_correlations(std::span<const YieldCurve> history, bool on_changes) {
    CorrelationMatrix out;
    const auto series = tenor_series(history, on_changes, out.tenors);
    const std::size_t m = series.size();
    out.values.assign(m, std::vector<double>(m, 1.0));
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) pairs.emplace_back(i, j);
    }
    const auto n_pairs = static_cast<std::ptrdiff_t>(pairs.size());
    std::exception_ptr first_error;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t p = 0; p < n_pairs; ++p) {
        const auto [i, j] = pairs[p];
        try {
            out.values[i][j] = out.values[j][i] =
                pearson(series[i], series[j], out.tenors[i], out.tenors[j]);
        } catch (...) {
#pragma omp critical(immunize_corr_error)
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

}  // namespace immunize
