#include "immunize/io.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "immunize/error.hpp"

namespace immunize::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_number(double x) {
    if (x == 0.0) return "0";  // no "-0"
    return fmt::format("{:.10g}", x);
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, sep)) out.push_back(cell);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::optional<double> parse_double(const std::string& text) {
    if (text.empty()) return std::nullopt;
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (errno != 0 || end != text.c_str() + text.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::ifstream open_input(const fs::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, fmt::format("cannot open '{}' for reading", path.string()));
    return in;
}

json load_json(const fs::path& path) {
    auto in = open_input(path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorKind::Data, fmt::format("{}: invalid JSON: {}", path.string(), e.what()));
    }
}

}  // namespace

std::vector<YieldCurve> parse_curve_csv(std::istream& in, const std::string& source) {
    std::vector<double> tenors;
    std::vector<YieldCurve> out;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    auto bad = [&](const std::string& why) {
        fail(ErrorKind::Data, fmt::format("{}:{}: {}", source, line_no, why));
    };

    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        auto cells = split(stripped, ',');
        for (auto& c : cells) c = trim(c);

        if (!have_header) {
            if (cells.size() < 3 || cells[0] != "date") {
                bad("header must be 'date,tenor_<years>,...' with at least two tenors");
            }
            for (std::size_t j = 1; j < cells.size(); ++j) {
                const auto& name = cells[j];
                const auto value = name.rfind("tenor_", 0) == 0 ? parse_double(name.substr(6))
                                                               : std::nullopt;
                if (!value || !(*value > 0.0)) bad(fmt::format("bad tenor column '{}'", name));
                if (!tenors.empty() && !(*value > tenors.back())) {
                    bad("tenor columns must be strictly increasing");
                }
                tenors.push_back(*value);
            }
            have_header = true;
            continue;
        }

        if (cells.size() != tenors.size() + 1) {
            bad(fmt::format("expected {} columns, found {}", tenors.size() + 1, cells.size()));
        }
        Date date{};
        try {
            date = parse_iso_date(cells[0]);
        } catch (const Error& e) {
            bad(e.what());
        }
        if (!out.empty()) {
            const auto prev = std::chrono::sys_days{out.back().date()};
            const auto cur = std::chrono::sys_days{date};
            if (cur == prev) bad(fmt::format("duplicate date {}", cells[0]));
            if (cur < prev) bad(fmt::format("date {} out of ascending order", cells[0]));
        }
        std::vector<CurvePoint> pts;
        for (std::size_t j = 0; j < tenors.size(); ++j) {
            const auto v = parse_double(cells[j + 1]);
            if (!v) bad(fmt::format("non-numeric rate '{}' in column tenor_{}", cells[j + 1],
                                    format_number(tenors[j])));
            pts.push_back({tenors[j], *v});
        }
        out.emplace_back(date, std::move(pts));
    }
    if (!have_header) fail(ErrorKind::Data, fmt::format("{}: missing header row", source));
    if (out.empty()) fail(ErrorKind::Data, fmt::format("{}: no data rows", source));
    return out;
}

std::vector<YieldCurve> parse_curve_csv(const fs::path& path) {
    auto in = open_input(path);
    return parse_curve_csv(in, path.string());
}

void write_curve_csv(std::ostream& out, std::span<const YieldCurve> history) {
    out << kRateComment << '\n';
    if (history.empty()) return;
    out << "date";
    for (const auto& p : history.front().points()) out << ",tenor_" << format_number(p.tenor);
    out << '\n';
    for (const auto& c : history) {
        out << format_iso_date(c.date());
        for (const auto& p : c.points()) out << ',' << format_number(p.spot);
        out << '\n';
    }
}

const YieldCurve& curve_on(std::span<const YieldCurve> history, const Date& date) {
    for (const auto& c : history) {
        if (c.date() == date) return c;
    }
    fail(ErrorKind::Data, fmt::format("no curve for date {}", format_iso_date(date)));
}

BondUniverse parse_bonds_json(const json& doc) {
    if (!doc.is_array()) fail(ErrorKind::Data, "bond file must hold a JSON array");
    BondUniverse out;
    std::size_t index = 0;
    for (const auto& item : doc) {
        const std::string label =
            item.is_object() && item.contains("id") && item["id"].is_string()
                ? item["id"].get<std::string>()
                : fmt::format("#{}", index);
        auto field = [&](const char* name) -> const json& {
            if (!item.is_object() || !item.contains(name)) {
                fail(ErrorKind::Data, fmt::format("bond '{}': missing field '{}'", label, name));
            }
            return item[name];
        };
        auto number = [&](const char* name) {
            const auto& v = field(name);
            if (!v.is_number()) {
                fail(ErrorKind::Data, fmt::format("bond '{}': field '{}' must be a number", label, name));
            }
            return v.get<double>();
        };
        Bond b;
        if (!field("id").is_string()) fail(ErrorKind::Data, fmt::format("bond {}: 'id' must be a string", label));
        b.id = field("id").get<std::string>();
        b.face = number("face");
        b.coupon_rate = number("coupon_rate");
        const auto& freq = field("coupon_frequency");
        if (!freq.is_number_integer()) {
            fail(ErrorKind::Data, fmt::format("bond '{}': field 'coupon_frequency' must be an integer", label));
        }
        b.coupon_frequency = freq.get<int>();
        b.maturity = number("maturity");
        if (item.contains("issue_or_first_coupon_offset")) {
            b.issue_offset = number("issue_or_first_coupon_offset");
        }
        b.validate();
        if (out.contains(b.id)) fail(ErrorKind::Data, fmt::format("duplicate bond id '{}'", b.id));
        out.emplace(b.id, std::move(b));
        ++index;
    }
    return out;
}

BondUniverse parse_bonds_json(const fs::path& path) {
    try {
        return parse_bonds_json(load_json(path));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Io) throw;
        fail(e.kind() == ErrorKind::Validation ? ErrorKind::Validation : ErrorKind::Data,
             fmt::format("{}: {}", path.string(), e.what()));
    }
}

json bonds_to_json(const BondUniverse& universe) {
    json out = json::array();
    for (const auto& [id, b] : universe) {
        json j{{"id", b.id},
               {"face", b.face},
               {"coupon_rate", b.coupon_rate},
               {"coupon_frequency", b.coupon_frequency},
               {"maturity", b.maturity}};
        if (b.issue_offset) j["issue_or_first_coupon_offset"] = *b.issue_offset;
        out.push_back(std::move(j));
    }
    return out;
}

BacktestConfig parse_backtest_config(const json& doc) {
    static const std::set<std::string> known{"target", "amount", "strategies", "rebalance_days",
                                             "start", "end", "net_carry", "allow_extrapolation"};
    if (!doc.is_object()) fail(ErrorKind::Data, "backtest config must be a JSON object");
    for (const auto& [key, _] : doc.items()) {
        if (!known.contains(key)) fail(ErrorKind::Data, fmt::format("unknown config key '{}'", key));
    }
    BacktestConfig cfg;
    try {
        cfg.target_id = doc.at("target").get<std::string>();
        cfg.target_amount = doc.value("amount", 100.0);
        cfg.rebalance_days = doc.value("rebalance_days", 1);
        cfg.net_carry = doc.value("net_carry", false);
        cfg.hedge.allow_extrapolation = doc.value("allow_extrapolation", false);
        if (doc.contains("start")) cfg.start = parse_iso_date(doc["start"].get<std::string>());
        if (doc.contains("end")) cfg.end = parse_iso_date(doc["end"].get<std::string>());
        for (const auto& s : doc.at("strategies")) {
            StrategySpec spec;
            spec.strategy = parse_strategy(s.at("strategy").get<std::string>());
            spec.instruments = s.at("instruments").get<std::vector<std::string>>();
            cfg.strategies.push_back(std::move(spec));
        }
    } catch (const json::exception& e) {
        fail(ErrorKind::Data, fmt::format("backtest config: {}", e.what()));
    }
    return cfg;
}

BacktestConfig parse_backtest_config(const fs::path& path) {
    try {
        return parse_backtest_config(load_json(path));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Io) throw;
        fail(ErrorKind::Data, fmt::format("{}: {}", path.string(), e.what()));
    }
}

json plan_to_json(const HedgePlan& plan) {
    json legs = json::array();
    for (const auto& l : plan.legs) legs.push_back({{"id", l.id}, {"amount", l.amount}});
    json cons = json::array();
    for (const auto& c : plan.constraints) cons.push_back({{"name", c.name}, {"value", c.value}});
    return {{"strategy", to_string(plan.strategy)},
            {"target", {{"id", plan.target.id}, {"amount", plan.target.amount}}},
            {"legs", legs},
            {"constraints", cons}};
}

HedgePlan plan_from_json(const json& doc) {
    HedgePlan plan;
    try {
        const auto name = doc.at("strategy").get<std::string>();
        plan.strategy = name == "generic" ? Strategy::Generic : parse_strategy(name);
        plan.target = {doc.at("target").at("id").get<std::string>(),
                       doc.at("target").at("amount").get<double>()};
        for (const auto& l : doc.at("legs")) {
            plan.legs.push_back({l.at("id").get<std::string>(), l.at("amount").get<double>()});
        }
        if (doc.contains("constraints")) {
            for (const auto& c : doc["constraints"]) {
                plan.constraints.push_back({c.at("name").get<std::string>(), c.at("value").get<double>()});
            }
        }
    } catch (const json::exception& e) {
        fail(ErrorKind::Data, fmt::format("hedge plan: {}", e.what()));
    }
    if (plan.strategy != Strategy::Generic && plan.legs.size() != leg_count(plan.strategy)) {
        fail(ErrorKind::Data, fmt::format("hedge plan: strategy '{}' needs {} legs, found {}",
                                          to_string(plan.strategy), leg_count(plan.strategy),
                                          plan.legs.size()));
    }
    return plan;
}

json shock_to_json(const ShockSpec& shock) {
    if (shock.is_parametric()) {
        const auto& p = shock.params();
        return {{"a", p.a}, {"b", p.b}, {"c", p.c}};
    }
    return {{"custom", shock.vector().per_tenor}};
}

ShockSpec parse_shock_arg(const std::string& text) {
    ParametricShock p;
    std::set<char> seen;
    for (const auto& raw : split(text, ',')) {
        const std::string part = trim(raw);
        const auto eq = part.find('=');
        const std::string key = eq == std::string::npos ? part : trim(part.substr(0, eq));
        const auto value = eq == std::string::npos ? std::nullopt : parse_double(trim(part.substr(eq + 1)));
        if (key.size() != 1 || std::string("abc").find(key[0]) == std::string::npos || !value) {
            fail(ErrorKind::Data, fmt::format("bad shock term '{}' (expected a=..,b=..,c=..)", part));
        }
        if (!seen.insert(key[0]).second) fail(ErrorKind::Data, fmt::format("shock term '{}' repeated", key));
        (key[0] == 'a' ? p.a : key[0] == 'b' ? p.b : p.c) = *value;
    }
    return ShockSpec(p);
}

json scenario_to_json(const ScenarioResult& result) {
    json per = json::array();
    for (const auto& p : result.per_instrument_pnl) per.push_back({{"id", p.id}, {"pnl", p.pnl}});
    return {{"shock", shock_to_json(result.shock)},
            {"unhedged_pnl", result.unhedged_pnl},
            {"hedged_pnl", result.hedged_pnl},
            {"per_instrument_pnl", per}};
}

void write_pnl_csv(std::ostream& out, const PnlSeries& series) {
    out << kRateComment << '\n' << "date,daily_pnl,cumulative_pnl\n";
    for (std::size_t i = 0; i < series.daily.size(); ++i) {
        out << format_iso_date(series.dates[i]) << ',' << format_number(series.daily[i]) << ','
            << format_number(series.cumulative[i]) << '\n';
    }
}

void write_summary_csv(std::ostream& out, const BacktestReport& report) {
    out << kRateComment << '\n'
        << "# pnl mode: " << (report.net_carry ? "net of carry" : "gross, coupons included") << '\n'
        << "strategy,days,mean,stdev,max_drawdown,worst_day,stdev_vs_unhedged\n";
    const double base = report.summaries.empty() ? 0.0 : report.summaries.front().stdev;
    for (std::size_t i = 0; i < report.strategies.size(); ++i) {
        const auto& s = report.summaries[i + 1];
        out << report.strategies[i].name << ',' << report.strategies[i].daily.size() << ','
            << format_number(s.mean) << ',' << format_number(s.stdev) << ','
            << format_number(s.max_drawdown) << ',' << format_number(s.worst_day) << ','
            << (base > 0.0 ? format_number(s.stdev / base) : std::string("nan")) << '\n';
    }
}

void write_correlations_csv(std::ostream& out, const CorrelationMatrix& m) {
    out << kRateComment << '\n' << "tenor";
    for (double t : m.tenors) out << ",tenor_" << format_number(t);
    out << '\n';
    for (std::size_t i = 0; i < m.tenors.size(); ++i) {
        out << "tenor_" << format_number(m.tenors[i]);
        for (double v : m.values[i]) out << ',' << format_number(v);
        out << '\n';
    }
}

std::vector<fs::path> write_files_atomically(const fs::path& out_dir,
                                             const std::vector<std::pair<std::string, std::string>>& files) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir)) {
        fail(ErrorKind::Io, fmt::format("cannot create output directory '{}': {}", out_dir.string(),
                                        ec ? ec.message() : "not a directory"));
    }
    std::vector<fs::path> staged;
    auto discard = [&] {
        for (const auto& p : staged) fs::remove(p, ec);
    };
    for (const auto& [name, content] : files) {
        const fs::path tmp = out_dir / (name + ".tmp");
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (f) {
            staged.push_back(tmp);
            f << content;
            f.close();
        }
        if (!f) {
            discard();
            fail(ErrorKind::Io, fmt::format("cannot write '{}'", tmp.string()));
        }
    }
    std::vector<fs::path> written;
    for (std::size_t i = 0; i < files.size(); ++i) {
        const fs::path dest = out_dir / files[i].first;
        fs::rename(staged[i], dest, ec);
        if (ec) {
            discard();
            fail(ErrorKind::Io, fmt::format("cannot rename into '{}': {}", dest.string(), ec.message()));
        }
        written.push_back(dest);
    }
    return written;
}

std::vector<fs::path> emit_report(const BacktestReport& report,
                                  const std::optional<CorrelationMatrix>& correlations,
                                  const fs::path& out_dir) {
    std::vector<std::pair<std::string, std::string>> files;
    auto render = [](auto&& writer) {
        std::ostringstream ss;
        writer(ss);
        return ss.str();
    };
    if (!report.unhedged.name.empty()) {
        files.emplace_back("pnl_unhedged.csv",
                           render([&](std::ostream& o) { write_pnl_csv(o, report.unhedged); }));
    }
    for (const auto& s : report.strategies) {
        files.emplace_back("pnl_" + s.name + ".csv",
                           render([&](std::ostream& o) { write_pnl_csv(o, s); }));
    }
    files.emplace_back("summary.csv", render([&](std::ostream& o) { write_summary_csv(o, report); }));
    if (correlations) {
        files.emplace_back("correlations.csv",
                           render([&](std::ostream& o) { write_correlations_csv(o, *correlations); }));
    }
    return write_files_atomically(out_dir, files);
}

}  // namespace immunize::io
