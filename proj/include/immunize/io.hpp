#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "immunize/backtest.hpp"
#include "immunize/bond.hpp"
#include "immunize/curve.hpp"
#include "immunize/hedging.hpp"
#include "immunize/scenario.hpp"

namespace immunize::io {

// Comment line written at the top of every emitted CSV.
inline constexpr const char* kRateComment = "# rates are decimal fractions (0.0312 = 3.12%)";

/// Numbers in emitted files: 10 significant digits.
std::string format_number(double x);

/// Curve history: `date,tenor_0.5,tenor_1,...`, ISO dates ascending, one
/// row per day. Lines starting with '#' are comments.
std::vector<YieldCurve> parse_curve_csv(const std::filesystem::path& path);
std::vector<YieldCurve> parse_curve_csv(std::istream& in, const std::string& source = "<stream>");
void write_curve_csv(std::ostream& out, std::span<const YieldCurve> history);

/// Curve for one date out of a history; throws Error(Data) if absent.
const YieldCurve& curve_on(std::span<const YieldCurve> history, const Date& date);

/// JSON array of {"id", "face", "coupon_rate", "coupon_frequency",
/// "maturity"} with optional "issue_or_first_coupon_offset".
BondUniverse parse_bonds_json(const std::filesystem::path& path);
BondUniverse parse_bonds_json(const nlohmann::json& doc);
nlohmann::json bonds_to_json(const BondUniverse& universe);

BacktestConfig parse_backtest_config(const std::filesystem::path& path);
BacktestConfig parse_backtest_config(const nlohmann::json& doc);

nlohmann::json plan_to_json(const HedgePlan& plan);
HedgePlan plan_from_json(const nlohmann::json& doc);

nlohmann::json shock_to_json(const ShockSpec& shock);
/// "a=0.001,b=0,c=0"; omitted keys are zero.
ShockSpec parse_shock_arg(const std::string& text);
nlohmann::json scenario_to_json(const ScenarioResult& result);

/// Writes pnl_<series>.csv for the unhedged target and every strategy,
/// summary.csv and, when given, correlations.csv. Files are staged under
/// temporary names and renamed once all writes succeed.
std::vector<std::filesystem::path> emit_report(const BacktestReport& report,
                                               const std::optional<CorrelationMatrix>& correlations,
                                               const std::filesystem::path& out_dir);

void write_correlations_csv(std::ostream& out, const CorrelationMatrix& m);
void write_pnl_csv(std::ostream& out, const PnlSeries& series);
void write_summary_csv(std::ostream& out, const BacktestReport& report);

/// Writes named file contents atomically into `out_dir`, creating it.
std::vector<std::filesystem::path> write_files_atomically(
    const std::filesystem::path& out_dir,
    const std::vector<std::pair<std::string, std::string>>& files);

}  // namespace immunize::io
