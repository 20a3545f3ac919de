#pragma once

#include <array>
#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace immunize {

using Date = std::chrono::year_month_day;

/// Parses YYYY-MM-DD; throws Error(Data) otherwise.
Date parse_iso_date(std::string_view text);
std::string format_iso_date(const Date& date);

/// ACT/365 year fraction from `from` to `to`.
double year_fraction(const Date& from, const Date& to);

struct CurvePoint {
    double tenor;  // years
    double spot;   // decimal per year
};

/// Spot curve observed on one date. Tenors are strictly increasing and
/// positive, at least two points.
class YieldCurve {
public:
    YieldCurve(Date date, std::vector<CurvePoint> points);

    const Date& date() const noexcept { return date_; }
    const std::vector<CurvePoint>& points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }
    double min_tenor() const noexcept { return points_.front().tenor; }
    double max_tenor() const noexcept { return points_.back().tenor; }

private:
    Date date_;
    std::vector<CurvePoint> points_;
};

/// Piecewise-linear spot rate; throws Error(Extrapolation) outside the knots.
double spot(const YieldCurve& curve, double tenor);

enum class FitKind { Interpolating, LeastSquares };

/// Y(T) = alpha + beta T + gamma T^2 + lambda T^3 on [t_lo, t_hi].
struct PolynomialSegment {
    double t_lo = 0.0;
    double t_hi = 0.0;
    std::array<double, 4> coefficients{};  // alpha, beta, gamma, lambda
    FitKind fit_kind = FitKind::LeastSquares;
    int degree = 3;
};

inline constexpr double kMinSegmentSpan = 1.0 / 365.0;
inline constexpr double kMaxFitCondition = 1e12;

/// Least-squares fit of the requested degree (2 or 3) to the knots lying in
/// [t_lo, t_hi]. Interpolates when exactly degree + 1 knots are in range.
PolynomialSegment fit_segment(const YieldCurve& curve, double t_lo, double t_hi, int degree);

/// Fit over the smallest run of knots that covers [t_lo, t_hi] and holds at
/// least degree + 1 knots, widening alternately outward.
PolynomialSegment fit_covering_segment(const YieldCurve& curve, double t_lo, double t_hi,
                                       int degree);

struct Derivatives {
    double value;   // F(T)
    double first;   // F'(T)
    double second;  // F''(T)
};

Derivatives derivatives(const PolynomialSegment& seg, double tenor);

/// F''/(1 + F'^2)^(3/2).
double curvature(const PolynomialSegment& seg, double tenor);

/// Level, slope and curvature weights of a curve move.
struct ParametricShock {
    double a = 0.0;  // translation
    double b = 0.0;  // rotation, multiplies F'(T)
    double c = 0.0;  // twist, multiplies F''(T)
};

/// Additive per-knot move, one entry per curve tenor.
struct CustomShock {
    std::vector<double> per_tenor;
};

class ShockSpec {
public:
    ShockSpec() = default;
    ShockSpec(ParametricShock p) : form_(p) {}
    ShockSpec(CustomShock c) : form_(std::move(c)) {}

    static ShockSpec parametric(double a, double b, double c) {
        return ShockSpec(ParametricShock{a, b, c});
    }
    static ShockSpec custom(std::vector<double> per_tenor) {
        return ShockSpec(CustomShock{std::move(per_tenor)});
    }

    bool is_parametric() const noexcept { return std::holds_alternative<ParametricShock>(form_); }
    const ParametricShock& params() const;
    const CustomShock& vector() const;

    /// The same shock multiplied by `factor`.
    ShockSpec scaled(double factor) const;

private:
    std::variant<ParametricShock, CustomShock> form_;
};

/// a + b F'(T) + c F''(T). Throws Error(Contract) for custom shocks.
double delta_y(const PolynomialSegment& seg, const ShockSpec& shock, double tenor);

/// New curve with spot_i + dY(T_i). Parametric shocks need a segment unless
/// they are pure translations; knots outside the segment take the dY of the
/// nearest segment endpoint.
YieldCurve apply_shock(const YieldCurve& curve, const ShockSpec& shock,
                       const std::optional<PolynomialSegment>& seg = std::nullopt);

}  // namespace immunize
