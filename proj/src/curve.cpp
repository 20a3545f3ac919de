#include "immunize/curve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "immunize/error.hpp"

namespace immunize {

namespace {

constexpr double kSpanSlack = 1e-12;

bool in_span(const PolynomialSegment& seg, double tenor) {
    const double slack = kSpanSlack * (1.0 + std::abs(tenor));
    return tenor >= seg.t_lo - slack && tenor <= seg.t_hi + slack;
}

void require_in_span(const PolynomialSegment& seg, double tenor) {
    if (!in_span(seg, tenor)) {
        fail(ErrorKind::Extrapolation,
             fmt::format("tenor {} outside segment [{}, {}]", tenor, seg.t_lo, seg.t_hi));
    }
}

}  // namespace

Date parse_iso_date(std::string_view text) {
    int y = 0;
    unsigned m = 0, d = 0;
    char tail = 0;
    const std::string s(text);
    if (s.size() != 10 || std::sscanf(s.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3 ||
        s[4] != '-' || s[7] != '-') {
        fail(ErrorKind::Data, fmt::format("'{}' is not an ISO-8601 date (YYYY-MM-DD)", s));
    }
    Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!date.ok()) fail(ErrorKind::Data, fmt::format("'{}' is not a valid calendar date", s));
    return date;
}

std::string format_iso_date(const Date& date) {
    return fmt::format("{:04d}-{:02d}-{:02d}", int(date.year()), unsigned(date.month()),
                       unsigned(date.day()));
}

double year_fraction(const Date& from, const Date& to) {
    const auto days = (std::chrono::sys_days{to} - std::chrono::sys_days{from}).count();
    return static_cast<double>(days) / 365.0;
}

YieldCurve::YieldCurve(Date date, std::vector<CurvePoint> points)
    : date_(date), points_(std::move(points)) {
    if (points_.size() < 2) {
        fail(ErrorKind::Validation, "yield curve needs at least 2 points");
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const auto& p = points_[i];
        if (!(p.tenor > 0.0) || !std::isfinite(p.tenor)) {
            fail(ErrorKind::Validation, fmt::format("tenor {} must be finite and > 0", p.tenor));
        }
        if (!std::isfinite(p.spot)) {
            fail(ErrorKind::Validation, fmt::format("spot at tenor {} is not finite", p.tenor));
        }
        if (i > 0 && !(p.tenor > points_[i - 1].tenor)) {
            fail(ErrorKind::Validation, "tenors must be strictly increasing");
        }
    }
}

double spot(const YieldCurve& curve, double tenor) {
    const auto& pts = curve.points();
    if (!(tenor >= pts.front().tenor && tenor <= pts.back().tenor)) {
        fail(ErrorKind::Extrapolation,
             fmt::format("tenor {} outside curve range [{}, {}]", tenor, pts.front().tenor,
                         pts.back().tenor));
    }
    auto hi = std::lower_bound(pts.begin(), pts.end(), tenor,
                               [](const CurvePoint& p, double t) { return p.tenor < t; });
    if (hi->tenor == tenor) return hi->spot;
    auto lo = std::prev(hi);
    const double w = (tenor - lo->tenor) / (hi->tenor - lo->tenor);
    return lo->spot + w * (hi->spot - lo->spot);
}

PolynomialSegment fit_segment(const YieldCurve& curve, double t_lo, double t_hi, int degree) {
    if (degree != 2 && degree != 3) {
        fail(ErrorKind::Contract, fmt::format("fit degree must be 2 or 3, got {}", degree));
    }
    if (!(t_hi - t_lo >= kMinSegmentSpan)) {
        fail(ErrorKind::DegenerateSpan,
             fmt::format("segment [{}, {}] shorter than {} years", t_lo, t_hi, kMinSegmentSpan));
    }
    std::vector<CurvePoint> knots;
    for (const auto& p : curve.points()) {
        if (p.tenor >= t_lo - kSpanSlack && p.tenor <= t_hi + kSpanSlack) knots.push_back(p);
    }
    const int n_coef = degree + 1;
    if (static_cast<int>(knots.size()) < n_coef) {
        fail(ErrorKind::Fit, fmt::format("degree {} fit needs {} knots in [{}, {}], found {}",
                                         degree, n_coef, t_lo, t_hi, knots.size()));
    }

    // Work in u = (T - center) / half_width so the normal equations stay
    // well scaled, then expand back to the monomial basis in T.
    const double center = 0.5 * (knots.front().tenor + knots.back().tenor);
    const double half_width = std::max(0.5 * (knots.back().tenor - knots.front().tenor),
                                       kMinSegmentSpan);

    Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(n_coef, n_coef);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_coef);
    for (const auto& k : knots) {
        const double u = (k.tenor - center) / half_width;
        Eigen::VectorXd row(n_coef);
        double power = 1.0;
        for (int j = 0; j < n_coef; ++j, power *= u) row(j) = power;
        normal.noalias() += row * row.transpose();
        rhs.noalias() += row * k.spot;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(normal);
    const double rcond = lu.rcond();
    if (!lu.isInvertible() || !(rcond > 1.0 / kMaxFitCondition)) {
        fail(ErrorKind::Fit,
             fmt::format("normal equations ill-conditioned on [{}, {}] (rcond {:.3g})", t_lo,
                         t_hi, rcond));
    }
    const Eigen::VectorXd scaled = lu.solve(rhs);

    // p(u) = sum_k d_k u^k with u = (T - c)/s; binomial expansion into T^j.
    PolynomialSegment seg;
    seg.t_lo = t_lo;
    seg.t_hi = t_hi;
    seg.degree = degree;
    seg.fit_kind =
        static_cast<int>(knots.size()) == n_coef ? FitKind::Interpolating : FitKind::LeastSquares;
    static constexpr double binom[4][4] = {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
    for (int k = 0; k < n_coef; ++k) {
        const double dk = scaled(k) / std::pow(half_width, k);
        for (int j = 0; j <= k; ++j) {
            seg.coefficients[j] += dk * binom[k][j] * std::pow(-center, k - j);
        }
    }
    return seg;
}

PolynomialSegment fit_covering_segment(const YieldCurve& curve, double t_lo, double t_hi,
                                       int degree) {
    const auto& pts = curve.points();
    const auto n = static_cast<std::ptrdiff_t>(pts.size());
    if (n < degree + 1) {
        fail(ErrorKind::Fit, fmt::format("curve has {} knots, degree {} needs {}", n, degree,
                                         degree + 1));
    }
    // Last knot at or below t_lo, first knot at or above t_hi.
    std::ptrdiff_t lo = 0, hi = n - 1;
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        if (pts[i].tenor <= t_lo) lo = i;
    }
    for (std::ptrdiff_t i = n - 1; i >= 0; --i) {
        if (pts[i].tenor >= t_hi) hi = i;
    }
    if (hi < lo) std::swap(lo, hi);
    bool grow_low = true;
    while (hi - lo < degree) {
        if ((grow_low && lo > 0) || hi == n - 1) {
            --lo;
        } else {
            ++hi;
        }
        grow_low = !grow_low;
    }
    return fit_segment(curve, pts[lo].tenor, pts[hi].tenor, degree);
}

Derivatives derivatives(const PolynomialSegment& seg, double tenor) {
    require_in_span(seg, tenor);
    const auto [alpha, beta, gamma, lambda] = seg.coefficients;
    const double t = tenor;
    return {alpha + t * (beta + t * (gamma + t * lambda)),
            beta + t * (2.0 * gamma + 3.0 * lambda * t),
            2.0 * gamma + 6.0 * lambda * t};
}

double curvature(const PolynomialSegment& seg, double tenor) {
    const auto d = derivatives(seg, tenor);
    return d.second / std::pow(1.0 + d.first * d.first, 1.5);
}

const ParametricShock& ShockSpec::params() const {
    if (const auto* p = std::get_if<ParametricShock>(&form_)) return *p;
    fail(ErrorKind::Contract, "shock is a custom vector, not parametric");
}

const CustomShock& ShockSpec::vector() const {
    if (const auto* c = std::get_if<CustomShock>(&form_)) return *c;
    fail(ErrorKind::Contract, "shock is parametric, not a custom vector");
}

ShockSpec ShockSpec::scaled(double factor) const {
    if (is_parametric()) {
        const auto& p = params();
        return parametric(p.a * factor, p.b * factor, p.c * factor);
    }
    auto v = vector().per_tenor;
    for (auto& x : v) x *= factor;
    return custom(std::move(v));
}

double delta_y(const PolynomialSegment& seg, const ShockSpec& shock, double tenor) {
    if (!shock.is_parametric()) {
        fail(ErrorKind::Contract, "delta_y needs a parametric shock; use apply_shock for vectors");
    }
    const auto& p = shock.params();
    const auto d = derivatives(seg, tenor);
    return p.a + p.b * d.first + p.c * d.second;
}

YieldCurve apply_shock(const YieldCurve& curve, const ShockSpec& shock,
                       const std::optional<PolynomialSegment>& seg) {
    std::vector<CurvePoint> pts = curve.points();
    if (!shock.is_parametric()) {
        const auto& v = shock.vector().per_tenor;
        if (v.size() != pts.size()) {
            fail(ErrorKind::Contract, fmt::format("custom shock has {} entries, curve has {} knots",
                                                  v.size(), pts.size()));
        }
        for (std::size_t i = 0; i < pts.size(); ++i) pts[i].spot += v[i];
        return YieldCurve(curve.date(), std::move(pts));
    }
    const auto& p = shock.params();
    if (!seg) {
        if (p.b != 0.0 || p.c != 0.0) {
            fail(ErrorKind::Contract, "rotation or twist shock needs a fitted segment");
        }
        for (auto& pt : pts) pt.spot += p.a;
        return YieldCurve(curve.date(), std::move(pts));
    }
    for (auto& pt : pts) {
        const double t = std::clamp(pt.tenor, seg->t_lo, seg->t_hi);
        pt.spot += delta_y(*seg, shock, t);
    }
    return YieldCurve(curve.date(), std::move(pts));
}

}  // namespace immunize
