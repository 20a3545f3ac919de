#include "immunize/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "immunize/backtest.hpp"
#include "immunize/error.hpp"
#include "immunize/io.hpp"
#include "immunize/scenario.hpp"
#include "immunize/synth.hpp"

namespace immunize::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum class Subcommand { Analyze, Hedge, Scenario, Backtest, Stats, Synth };

/// Everything a subcommand needs, collected before any computation.
struct RunConfig {
    Subcommand subcommand = Subcommand::Analyze;
    std::uint64_t seed = 42;
    double tolerance = 1e-9;
    std::string out;

    std::string bonds, curve, history, config, plan, date;
    std::string strategy = "duration";
    std::string target;
    std::vector<std::string> instruments;
    double amount = 100.0;
    std::string shock = "a=0,b=0,c=0";
    std::vector<double> shock_vector;
    int sweep = 0;
    int degree = 3;
    std::string pricing = "flat";
    int days = 250;
    double noise = 0.0;

    bool allow_extrapolation = false;
    bool value_weighted = false;
    bool net_carry = false;
    bool diff_correlations = false;
};

// Writes to --out when given, stdout otherwise.
void emit_text(const RunConfig& rc, std::ostream& out, const std::string& text) {
    if (rc.out.empty()) {
        out << text;
        return;
    }
    const fs::path path(rc.out);
    io::write_files_atomically(path.has_parent_path() ? path.parent_path() : fs::path("."),
                               {{path.filename().string(), text}});
}

const YieldCurve& load_curve(const RunConfig& rc, std::vector<YieldCurve>& storage) {
    storage = io::parse_curve_csv(fs::path(rc.curve));
    if (rc.date.empty()) {
        if (storage.size() != 1) fail(ErrorKind::Data, "--date is required when the curve file has several rows");
        return storage.front();
    }
    return io::curve_on(storage, parse_iso_date(rc.date));
}

int cmd_analyze(const RunConfig& rc, std::ostream& out) {
    const auto universe = io::parse_bonds_json(fs::path(rc.bonds));
    std::vector<YieldCurve> storage;
    const YieldCurve& curve = load_curve(rc, storage);
    const auto mode = rc.pricing == "spot" ? PricingMode::SpotDiscount : PricingMode::FlatYield;

    std::ostringstream ss;
    ss << io::kRateComment << '\n' << "id,maturity,yield,price,modified_duration,convexity\n";
    for (const auto& [id, bond] : universe) {
        const auto a = analyze(bond, curve, mode);
        ss << id << ',' << io::format_number(bond.maturity) << ',' << io::format_number(a.yield) << ','
           << io::format_number(a.price) << ',' << io::format_number(a.modified_duration) << ','
           << io::format_number(a.convexity) << '\n';
    }
    emit_text(rc, out, ss.str());
    return kExitOk;
}

// "B2" (amount from --amount) or "B2:100,B5:-20" (a portfolio).
std::vector<std::pair<std::string, double>> parse_target(const RunConfig& rc) {
    std::vector<std::pair<std::string, double>> out;
    std::stringstream ss(rc.target);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            out.emplace_back(item, rc.amount);
            continue;
        }
        char* end = nullptr;
        const std::string num = item.substr(colon + 1);
        const double n = std::strtod(num.c_str(), &end);
        if (num.empty() || end != num.c_str() + num.size() || !std::isfinite(n)) {
            fail(ErrorKind::Data, fmt::format("bad target position '{}' (expected id:amount)", item));
        }
        out.emplace_back(item.substr(0, colon), n);
    }
    if (out.empty()) fail(ErrorKind::Data, "--target is empty");
    return out;
}

int cmd_hedge(const RunConfig& rc, std::ostream& out, std::ostream& err) {
    const auto universe = io::parse_bonds_json(fs::path(rc.bonds));
    const Strategy strategy = parse_strategy(rc.strategy);
    const auto positions = parse_target(rc);
    for (const auto& [id, n] : positions) find_bond(universe, id);
    for (const auto& id : rc.instruments) find_bond(universe, id);
    if (rc.instruments.size() != leg_count(strategy)) {
        fail(ErrorKind::Data, fmt::format("strategy '{}' needs {} instruments, got {}", rc.strategy,
                                          leg_count(strategy), rc.instruments.size()));
    }
    std::vector<YieldCurve> storage;
    const YieldCurve& curve = load_curve(rc, storage);

    auto snap = [&](const std::string& id, double n) {
        const Bond& b = find_bond(universe, id);
        return snapshot(b, analyze(b, curve), n);
    };
    InstrumentSnapshot target;
    if (positions.size() == 1) {
        target = snap(positions[0].first, positions[0].second);
    } else {
        std::vector<std::pair<double, InstrumentSnapshot>> book;
        for (const auto& [id, n] : positions) book.emplace_back(n, snap(id, 0.0));
        target = aggregate_portfolio(book, rc.value_weighted ? AggregationMode::ValueWeighted
                                                             : AggregationMode::AmountWeighted);
    }
    std::vector<InstrumentSnapshot> inst;
    for (const auto& id : rc.instruments) inst.push_back(snap(id, 0.0));

    const HedgePlan plan = build_hedge(strategy, target, inst, {rc.allow_extrapolation});
    const double scale = std::abs(target.amount * target.price * target.modified_duration);
    bool ok = true;
    for (const auto& c : plan.constraints) {
        if (std::abs(c.value) > rc.tolerance * scale) {
            err << fmt::format("constraint '{}' residual {:.3g} exceeds tolerance\n", c.name, c.value);
            ok = false;
        }
    }
    emit_text(rc, out, io::plan_to_json(plan).dump(2) + "\n");
    return ok ? kExitOk : kExitDataError;
}

int cmd_scenario(const RunConfig& rc, std::ostream& out) {
    const auto universe = io::parse_bonds_json(fs::path(rc.bonds));
    json plan_doc;
    {
        std::ifstream in(rc.plan);
        try {
            plan_doc = json::parse(in);
        } catch (const json::exception& e) {
            fail(ErrorKind::Data, fmt::format("{}: invalid JSON: {}", rc.plan, e.what()));
        }
    }
    const HedgePlan plan = io::plan_from_json(plan_doc);
    find_bond(universe, plan.target.id);
    for (const auto& l : plan.legs) find_bond(universe, l.id);
    std::vector<YieldCurve> storage;
    const YieldCurve& curve = load_curve(rc, storage);

    const ShockSpec shock =
        rc.shock_vector.empty() ? io::parse_shock_arg(rc.shock) : ShockSpec::custom(rc.shock_vector);
    std::optional<PolynomialSegment> seg;
    if (shock.is_parametric()) {
        double lo = find_bond(universe, plan.target.id).maturity, hi = lo;
        for (const auto& l : plan.legs) {
            lo = std::min(lo, find_bond(universe, l.id).maturity);
            hi = std::max(hi, find_bond(universe, l.id).maturity);
        }
        seg = fit_covering_segment(curve, lo, hi, rc.degree);
    }

    std::ostringstream ss;
    if (rc.sweep > 0) {
        const auto points = residual_scaling(plan, universe, curve, shock, rc.sweep, seg);
        for (const auto& p : points) {
            auto j = io::scenario_to_json(run_scenario(plan, universe, curve, shock.scaled(p.scale), seg));
            j["scale"] = p.scale;
            ss << j.dump() << '\n';
        }
        ss << json{{"loglog_slope", loglog_slope(points)}}.dump() << '\n';
    } else {
        ss << io::scenario_to_json(run_scenario(plan, universe, curve, shock, seg)).dump() << '\n';
    }
    emit_text(rc, out, ss.str());
    return kExitOk;
}

int cmd_backtest(const RunConfig& rc, std::ostream& out, std::ostream& err) {
    const auto history = io::parse_curve_csv(fs::path(rc.history));
    const auto universe = io::parse_bonds_json(fs::path(rc.bonds));
    auto config = io::parse_backtest_config(fs::path(rc.config));
    config.net_carry = config.net_carry || rc.net_carry;
    config.hedge.allow_extrapolation = config.hedge.allow_extrapolation || rc.allow_extrapolation;
    config.validate(universe, history);

    const auto report = run_backtest(history, universe, config);
    const auto corr = tenor_correlations(history, rc.diff_correlations);
    for (const auto& w : report.warnings) err << "warning: " << w << '\n';
    const auto files = io::emit_report(report, corr, rc.out.empty() ? fs::path("report") : fs::path(rc.out));
    for (const auto& f : files) out << f.string() << '\n';
    return kExitOk;
}

int cmd_stats(const RunConfig& rc, std::ostream& out) {
    const auto history = io::parse_curve_csv(fs::path(rc.history));
    std::ostringstream ss;
    io::write_correlations_csv(ss, tenor_correlations(history, rc.diff_correlations));
    if (rc.out.empty()) {
        out << ss.str();
    } else {
        io::write_files_atomically(rc.out, {{"correlations.csv", ss.str()}});
    }
    return kExitOk;
}

int cmd_synth(const RunConfig& rc, std::ostream& out) {
    SynthConfig sc;
    sc.seed = rc.seed;
    sc.days = rc.days;
    sc.sigma_noise = rc.noise;
    const auto synth = synth_history(sc);

    std::ostringstream history;
    io::write_curve_csv(history, synth.curves);
    const json config{{"target", "B2"},
                      {"amount", 100.0},
                      {"net_carry", true},
                      {"strategies",
                       {{{"strategy", "duration"}, {"instruments", {"B4"}}},
                        {{"strategy", "quadratic"}, {"instruments", {"B3", "B1"}}},
                        {{"strategy", "convexity"}, {"instruments", {"B3", "B1"}}},
                        {{"strategy", "cubic"}, {"instruments", {"B3", "B1", "B4"}}}}}};
    const auto files = io::write_files_atomically(
        rc.out.empty() ? fs::path("fixture") : fs::path(rc.out),
        {{"history.csv", history.str()},
         {"bonds.json", io::bonds_to_json(demo_universe()).dump(2) + "\n"},
         {"backtest.json", config.dump(2) + "\n"}});
    for (const auto& f : files) out << f.string() << '\n';
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig rc;
    CLI::App app{"Yield-curve immunization toolkit: bond analytics, hedge ratios, scenarios, backtests",
                 "immunize"};
    app.require_subcommand(1);
    app.add_option("--seed", rc.seed, "Seed for synthetic data")->capture_default_str();
    app.add_option("--tolerance", rc.tolerance, "Relative constraint tolerance")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--out", rc.out, "Output file or directory");

    auto* analyze_cmd = app.add_subcommand("analyze", "Price, duration and convexity table");
    analyze_cmd->add_option("--bonds", rc.bonds)->required()->check(CLI::ExistingFile);
    analyze_cmd->add_option("--curve", rc.curve)->required()->check(CLI::ExistingFile);
    analyze_cmd->add_option("--date", rc.date);
    analyze_cmd->add_option("--pricing", rc.pricing)->check(CLI::IsMember({"flat", "spot"}));

    auto* hedge_cmd = app.add_subcommand("hedge", "Hedge ratios for one strategy");
    hedge_cmd->add_option("--strategy", rc.strategy)
        ->required()
        ->check(CLI::IsMember({"duration", "quadratic", "convexity", "cubic"}));
    hedge_cmd->add_option("--target", rc.target, "Bond id, or id:amount,... for a portfolio")->required();
    hedge_cmd->add_option("--instruments", rc.instruments)->required()->delimiter(',');
    hedge_cmd->add_option("--curve", rc.curve)->required()->check(CLI::ExistingFile);
    hedge_cmd->add_option("--date", rc.date);
    hedge_cmd->add_option("--bonds", rc.bonds)->required()->check(CLI::ExistingFile);
    hedge_cmd->add_option("--amount", rc.amount)->capture_default_str();
    hedge_cmd->add_flag("--allow-extrapolation", rc.allow_extrapolation);
    hedge_cmd->add_flag("--value-weighted", rc.value_weighted);

    auto* scenario_cmd = app.add_subcommand("scenario", "Exact repricing of a plan under a curve shock");
    scenario_cmd->add_option("--plan", rc.plan)->required()->check(CLI::ExistingFile);
    scenario_cmd->add_option("--curve", rc.curve)->required()->check(CLI::ExistingFile);
    scenario_cmd->add_option("--date", rc.date);
    scenario_cmd->add_option("--bonds", rc.bonds)->required()->check(CLI::ExistingFile);
    auto* shock_opt = scenario_cmd->add_option("--shock", rc.shock, "a=..,b=..,c=..");
    scenario_cmd->add_option("--shock-vector", rc.shock_vector, "Per-knot additive shock")
        ->delimiter(',')
        ->excludes(shock_opt);
    scenario_cmd->add_option("--sweep", rc.sweep, "Dyadic scale steps")->check(CLI::Range(3, 64));
    scenario_cmd->add_option("--degree", rc.degree)->check(CLI::IsMember({2, 3}));

    auto* backtest_cmd = app.add_subcommand("backtest", "Daily hedge replay over a curve history");
    backtest_cmd->add_option("--history", rc.history)->required()->check(CLI::ExistingFile);
    backtest_cmd->add_option("--bonds", rc.bonds)->required()->check(CLI::ExistingFile);
    backtest_cmd->add_option("--config", rc.config)->required()->check(CLI::ExistingFile);
    backtest_cmd->add_flag("--net-carry", rc.net_carry);
    backtest_cmd->add_flag("--allow-extrapolation", rc.allow_extrapolation);
    backtest_cmd->add_flag("--diff", rc.diff_correlations, "Correlate daily changes, not levels");

    auto* stats_cmd = app.add_subcommand("stats", "Tenor correlation matrix");
    stats_cmd->add_option("--history", rc.history)->required()->check(CLI::ExistingFile);
    stats_cmd->add_flag("--diff", rc.diff_correlations, "Correlate daily changes, not levels");

    auto* synth_cmd = app.add_subcommand("synth", "Seeded synthetic history plus demo bonds and config");
    synth_cmd->add_option("--days", rc.days)->capture_default_str()->check(CLI::Range(3, 100000));
    synth_cmd->add_option("--noise", rc.noise, "Per-tenor daily noise")->check(CLI::NonNegativeNumber);

    // Subcommands also accept the global flags after their own name.
    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (analyze_cmd->parsed()) rc.subcommand = Subcommand::Analyze;
    if (hedge_cmd->parsed()) rc.subcommand = Subcommand::Hedge;
    if (scenario_cmd->parsed()) rc.subcommand = Subcommand::Scenario;
    if (backtest_cmd->parsed()) rc.subcommand = Subcommand::Backtest;
    if (stats_cmd->parsed()) rc.subcommand = Subcommand::Stats;
    if (synth_cmd->parsed()) rc.subcommand = Subcommand::Synth;

    try {
        switch (rc.subcommand) {
            case Subcommand::Analyze: return cmd_analyze(rc, out);
            case Subcommand::Hedge: return cmd_hedge(rc, out, err);
            case Subcommand::Scenario: return cmd_scenario(rc, out);
            case Subcommand::Backtest: return cmd_backtest(rc, out, err);
            case Subcommand::Stats: return cmd_stats(rc, out);
            case Subcommand::Synth: return cmd_synth(rc, out);
        }
    } catch (const Error& e) {
        err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
        return kExitDataError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitDataError;
    }
    return kExitUsage;
}

}  // namespace immunize::cli
