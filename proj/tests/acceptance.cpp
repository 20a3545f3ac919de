// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Tolerances and runtime limits are fixed here, not configurable.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "immunize/backtest.hpp"
#include "immunize/bond.hpp"
#include "immunize/curve.hpp"
#include "immunize/hedging.hpp"
#include "immunize/io.hpp"
#include "immunize/scenario.hpp"
#include "immunize/synth.hpp"
#include "oracles.hpp"

namespace {

using namespace immunize;
namespace fs = std::filesystem;

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, double limit_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, fmt::format("threw: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < limit_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    fmt::print("{} [{}] {}: {}; {:.3f}s (limit {}s){}\n", pass ? "PASS" : "FAIL", id, title, o.detail, secs,
               limit_s, in_time ? "" : " TOO SLOW");
    std::cout.flush();
}

// Criterion 1.
Outcome analytic_derivatives() {
    const std::vector<Bond> bonds{{"Z1", 100, 0.0, 1, 1.0, std::nullopt},
                                  {"S2", 100, 0.03, 2, 2.5, std::nullopt},
                                  {"A5", 100, 0.045, 1, 5.0, std::nullopt},
                                  {"Q10", 100, 0.06, 4, 10.25, std::nullopt},
                                  {"M20", 100, 0.02, 12, 20.0, std::nullopt}};
    const std::vector<double> yields{-0.02, 0.0, 0.02, 0.04, 0.06, 0.08, 0.10};
    double worst_d = 0.0, worst_c = 0.0;
    for (const auto& b : bonds) {
        for (double y : yields) {
            const auto a = analyze(b, y);
            const double fd_d = oracle::fd_duration(b, y);
            const double fd_c = oracle::fd_convexity(b, y);
            worst_d = std::max(worst_d, std::abs(a.modified_duration - fd_d) / std::abs(fd_d));
            worst_c = std::max(worst_c, std::abs(a.convexity - fd_c) / std::abs(fd_c));
        }
    }
    return {worst_d <= 1e-6 && worst_c <= 1e-4,
            fmt::format("35 points, max rel err D {:.2e} (<=1e-6), C {:.2e} (<=1e-4)", worst_d, worst_c)};
}

struct RandomCase {
    InstrumentSnapshot target;
    InstrumentSnapshot a, c, b;  // maturities a < c < b
};

std::vector<RandomCase> random_cases() {
    oracle::SnapshotGen gen(20070604);
    std::vector<RandomCase> out;
    for (int i = 0; i < 100; ++i) {
        RandomCase rc;
        rc.a = gen.make("A", gen.uniform(0.5, 4.0));
        rc.c = gen.make("C", gen.uniform(4.5, 7.0));
        rc.b = gen.make("B", gen.uniform(7.5, 20.0));
        rc.target = gen.make("T", gen.uniform(rc.a.maturity, rc.b.maturity), gen.uniform(-1000, 1000));
        out.push_back(rc);
    }
    return out;
}

double npd(const InstrumentSnapshot& t) { return std::abs(t.amount * t.price * t.modified_duration); }

// Difference between two plans in dollar-duration units relative to |NPD|.
double plan_gap(const HedgePlan& x, const HedgePlan& y, std::span<const InstrumentSnapshot> inst,
                const InstrumentSnapshot& t) {
    double g = 0.0;
    for (std::size_t i = 0; i < inst.size(); ++i) {
        g = std::max(g, std::abs(x.legs[i].amount - y.legs[i].amount) * inst[i].price *
                            inst[i].modified_duration / npd(t));
    }
    return g;
}

// Criterion 2.
Outcome closed_form_cross_validation() {
    const std::array dq{constraints::dollar_duration(), constraints::dollar_duration_maturity()};
    const std::array dc{constraints::dollar_duration(), constraints::dollar_convexity()};
    const std::array cub{constraints::dollar_duration(), constraints::dollar_duration_maturity(),
                         constraints::dollar_duration_maturity2()};
    double gq = 0.0, gc = 0.0, gu = 0.0;
    for (const auto& rc : random_cases()) {
        const std::array two{rc.a, rc.b};
        const std::array three{rc.a, rc.c, rc.b};
        gq = std::max(gq, plan_gap(quadratic_hedge(rc.target, rc.a, rc.b), solve_constraint_hedge(rc.target, two, dq),
                                   two, rc.target));
        gc = std::max(gc, plan_gap(convexity_hedge(rc.target, rc.a, rc.b), solve_constraint_hedge(rc.target, two, dc),
                                   two, rc.target));
        gu = std::max(gu, plan_gap(cubic_hedge(rc.target, rc.a, rc.c, rc.b),
                                   solve_constraint_hedge(rc.target, three, cub), three, rc.target));
    }
    const double tol = 1e-12;
    return {gq <= tol && gc <= tol && gu <= tol,
            fmt::format("100 cases, max gap quadratic {:.2e}, convexity {:.2e}, cubic {:.2e} (<=1e-12)", gq, gc, gu)};
}

// Criterion 3.
Outcome constraint_satisfaction() {
    double worst = 0.0;
    std::size_t plans = 0;
    for (const auto& rc : random_cases()) {
        const std::array three{rc.a, rc.c, rc.b};
        const std::array two{rc.a, rc.b};
        for (const auto& plan : {duration_hedge(rc.target, rc.c), quadratic_hedge(rc.target, rc.a, rc.b),
                                 convexity_hedge(rc.target, rc.a, rc.b), cubic_hedge(rc.target, rc.a, rc.c, rc.b),
                                 build_hedge(Strategy::Quadratic, rc.target, two),
                                 build_hedge(Strategy::Cubic, rc.target, three)}) {
            ++plans;
            for (const auto& c : plan.constraints) worst = std::max(worst, std::abs(c.value) / npd(rc.target));
        }
    }
    return {worst <= 1e-9, fmt::format("{} plans, max |constraint|/|NPD| {:.2e} (<=1e-9)", plans, worst)};
}

// Criterion 4. Bond maturities sit on curve knots so that linearly
// interpolated spot rates carry polynomial shocks through exactly.
Outcome immunization_order() {
    const Date date{std::chrono::year{2008}, std::chrono::month{1}, std::chrono::day{2}};
    std::vector<CurvePoint> pts;
    for (double t : {0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 10.0}) {
        pts.push_back({t, 0.022 + 0.0042 * t - 0.00022 * t * t + 0.0000035 * t * t * t});
    }
    const YieldCurve curve(date, pts);
    const BondUniverse u{{"A2", {"A2", 100, 0.03, 1, 2.0, std::nullopt}},
                         {"C3", {"C3", 100, 0.035, 2, 3.0, std::nullopt}},
                         {"T5", {"T5", 100, 0.04, 1, 5.0, std::nullopt}},
                         {"B7", {"B7", 100, 0.045, 1, 7.0, std::nullopt}},
                         {"L10", {"L10", 100, 0.05, 2, 10.0, std::nullopt}}};
    auto snap = [&](const std::string& id, double n = 0.0) {
        return snapshot(u.at(id), analyze(u.at(id), curve), n);
    };
    auto plan = [&](Strategy s, std::vector<std::string> ids) {
        std::vector<InstrumentSnapshot> inst;
        for (const auto& id : ids) inst.push_back(snap(id));
        return build_hedge(s, snap("T5", 100.0), inst);
    };
    constexpr double kTop = 0.002;  // 20bp at the largest scale
    constexpr int kSteps = 4;

    // Rotation b scaled so the largest move at a bond maturity is 20bp.
    auto rotation_20bp = [&](const PolynomialSegment& seg) {
        double m = 0.0;
        for (const auto& [id, b] : u) {
            if (b.maturity >= seg.t_lo && b.maturity <= seg.t_hi) {
                m = std::max(m, std::abs(derivatives(seg, b.maturity).first));
            }
        }
        return ShockSpec::parametric(0, kTop / m, 0);
    };

    const auto parallel = ShockSpec::parametric(kTop, 0, 0);
    const double s_dur = loglog_slope(residual_scaling(plan(Strategy::Duration, {"B7"}), u, curve, parallel, kSteps));
    const double s_cvx = loglog_slope(
        residual_scaling(plan(Strategy::DurationConvexity, {"C3", "B7"}), u, curve, parallel, kSteps));
    // On a quadratic segment F' is affine in T; on a cubic one it is quadratic.
    const auto seg2 = fit_segment(curve, 2.0, 7.0, 2);
    const double s_quad = loglog_slope(
        residual_scaling(plan(Strategy::Quadratic, {"C3", "B7"}), u, curve, rotation_20bp(seg2), kSteps, seg2));
    const auto seg3 = fit_segment(curve, 2.0, 10.0, 3);
    const double s_cub = loglog_slope(residual_scaling(plan(Strategy::Cubic, {"A2", "B7", "L10"}), u, curve,
                                                       rotation_20bp(seg3), kSteps, seg3));
    const bool ok = std::abs(s_dur - 2.0) <= 0.3 && std::abs(s_cvx - 3.0) <= 0.4 && std::abs(s_quad - 2.0) <= 0.3 &&
                    std::abs(s_cub - 2.0) <= 0.3;
    return {ok, fmt::format("slopes duration {:.3f} (2+-0.3), convexity {:.3f} (3+-0.4), quadratic {:.3f} "
                            "(2+-0.3), cubic {:.3f} (2+-0.3)",
                            s_dur, s_cvx, s_quad, s_cub)};
}

// Criterion 5.
Outcome lagrange_identities() {
    oracle::SnapshotGen gen(5);
    double unity = 0.0, collapse = 0.0;
    bool endpoint_exact = true;
    for (int i = 0; i < 100; ++i) {
        const auto a = gen.make("A", gen.uniform(0.5, 4.0));
        const auto c = gen.make("C", gen.uniform(4.5, 7.0));
        const auto b = gen.make("B", gen.uniform(7.5, 20.0));
        const std::array nodes{a.maturity, c.maturity, b.maturity};
        const auto w = lagrange_weights(nodes, gen.uniform(a.maturity, b.maturity));
        unity = std::max(unity, std::abs(w[0] + w[1] + w[2] - 1.0));

        auto at_c = gen.make("T", c.maturity, 100.0);
        const auto cub = cubic_hedge(at_c, a, c, b);
        const double scale = npd(at_c);
        collapse = std::max({collapse, std::abs(cub.legs[0].amount) * a.price * a.modified_duration / scale,
                             std::abs(cub.legs[2].amount) * b.price * b.modified_duration / scale});

        const auto at_a = gen.make("T", a.maturity, 100.0);
        const auto q = quadratic_hedge(at_a, a, b);
        endpoint_exact = endpoint_exact && q.legs[0].amount == duration_hedge(at_a, a).legs[0].amount &&
                         q.legs[1].amount == 0.0;
    }
    return {unity <= 1e-12 && collapse <= 1e-12 && endpoint_exact,
            fmt::format("partition of unity {:.2e}, node collapse {:.2e} (<=1e-12), quadratic endpoint {}",
                        unity, collapse, endpoint_exact ? "exact" : "NOT exact")};
}

BacktestConfig demo_config() {
    BacktestConfig c;
    c.target_id = "B2";
    c.target_amount = 100.0;
    c.net_carry = true;
    c.strategies = {{Strategy::Duration, {"B4"}},
                    {Strategy::Quadratic, {"B3", "B1"}},
                    {Strategy::DurationConvexity, {"B3", "B1"}},
                    {Strategy::Cubic, {"B3", "B1", "B4"}}};
    return c;
}

// Criterion 6.
Outcome backtest_ranking() {
    SynthConfig sc;  // seed 42, 250 days
    const auto hist = synth_history(sc);
    const auto r = run_backtest(hist.curves, demo_universe(), demo_config());
    const double un = r.summaries[0].stdev;
    const double dur = r.summaries[1].stdev, quad = r.summaries[2].stdev, cvx = r.summaries[3].stdev,
                 cub = r.summaries[4].stdev;
    const bool ranked = cub <= 0.95 * quad && quad <= 0.95 * dur;
    const bool small = std::max({dur, quad, cvx, cub}) < 0.2 * un;
    return {ranked && small && r.warnings.empty() && r.unhedged.daily.size() == 249,
            fmt::format("stdev unhedged {:.4g}, duration {:.4g}, quadratic {:.4g}, convexity {:.4g}, cubic {:.4g}; "
                        "cubic/quad {:.3f}, quad/dur {:.3f} (<=0.95); worst hedged/unhedged {:.3f} (<0.2)",
                        un, dur, quad, cvx, cub, cub / quad, quad / dur, std::max({dur, quad, cvx, cub}) / un)};
}

// Criterion 7. The level share is measured from the realized moves: the
// variance of the common shift a over the mean per-tenor variance of the
// daily change. Rotation and twist are damped so level dominates.
Outcome correlation_sanity() {
    SynthConfig sc;
    sc.days = 250;
    sc.sigma_rotation = 0.1;
    sc.sigma_twist = 0.1;
    sc.sigma_noise = 0.0002;
    const auto hist = synth_history(sc);
    const std::size_t nt = hist.curves[0].size();
    std::vector<double> level;
    for (const auto& f : hist.factors) level.push_back(f.a);
    auto variance = [](const std::vector<double>& x) {
        double m = 0.0;
        for (double v : x) m += v;
        m /= double(x.size());
        double s = 0.0;
        for (double v : x) s += (v - m) * (v - m);
        return s / double(x.size() - 1);
    };
    double total = 0.0;
    for (std::size_t k = 0; k < nt; ++k) {
        std::vector<double> d;
        for (std::size_t i = 1; i < hist.curves.size(); ++i) {
            d.push_back(hist.curves[i].points()[k].spot - hist.curves[i - 1].points()[k].spot);
        }
        total += variance(d);
    }
    const double share = variance(level) / (total / double(nt));
    auto min_offdiag = [&](const CorrelationMatrix& m) {
        double lo = 1.0;
        for (std::size_t i = 0; i < nt; ++i) {
            for (std::size_t j = i + 1; j < nt; ++j) lo = std::min(lo, m.values[i][j]);
        }
        return lo;
    };
    const double lo = min_offdiag(tenor_correlations(hist.curves));
    const double lo_diff = min_offdiag(tenor_correlations(hist.curves, true));
    return {share >= 0.6 && lo > 0.57,
            fmt::format("level variance share {:.3f} (>=0.6), min pairwise correlation on levels {:.4f} (>0.57); "
                        "on daily changes {:.4f}",
                        share, lo, lo_diff)};
}

std::vector<std::string> read_all(const std::vector<fs::path>& files) {
    std::vector<std::string> out;
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        out.push_back(ss.str());
    }
    return out;
}

// Criterion 8.
Outcome determinism() {
    const auto root = fs::temp_directory_path() / "immunize_acceptance_determinism";
    fs::remove_all(root);
    auto once = [&](const std::string& name) {
        SynthConfig sc;
        const auto hist = synth_history(sc);
        const auto report = run_backtest(hist.curves, demo_universe(), demo_config());
        return read_all(io::emit_report(report, tenor_correlations(hist.curves), root / name));
    };
    const auto a = once("run1");
    const auto b = once("run2");
    fs::remove_all(root);
    const bool same = a == b && !a.empty();
    std::size_t bytes = 0;
    for (const auto& s : a) bytes += s.size();
    return {same, fmt::format("{} files, {} bytes, {}", a.size(), bytes, same ? "byte-identical" : "DIFFER")};
}

}  // namespace

int main() {
    criterion(1, "analytic duration/convexity vs central differences", 1.0, analytic_derivatives);
    criterion(2, "closed-form hedges vs generic constraint solver", 1.0, closed_form_cross_validation);
    criterion(3, "advertised constraints vanish", 1.0, constraint_satisfaction);
    criterion(4, "immunization-order sweep", 5.0, immunization_order);
    criterion(5, "Lagrange identities", 1.0, lagrange_identities);
    criterion(6, "backtest strategy ranking on synthetic history", 10.0, backtest_ranking);
    criterion(7, "tenor correlation sanity", 2.0, correlation_sanity);
    criterion(8, "backtest report determinism", 10.0, determinism);
    fmt::print("{} of 8 criteria passed\n", 8 - failures);
    return failures == 0 ? 0 : 1;
}
