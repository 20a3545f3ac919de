#include "immunize/bond.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fmt/format.h>

#include "immunize/curve.hpp"
#include "immunize/error.hpp"

namespace immunize {

namespace {

// Flows closer than this to the valuation date count as already paid.
constexpr double kTimeEpsilon = 1e-9;

void check_yield(double yield) {
    if (!(yield > -1.0) || !std::isfinite(yield)) {
        fail(ErrorKind::Domain, fmt::format("yield {} must be finite and > -1", yield));
    }
}

}  // namespace

void Bond::validate() const {
    auto bad = [&](const char* field, const std::string& why) {
        fail(ErrorKind::Validation, fmt::format("bond '{}': field '{}' {}", id, field, why));
    };
    if (id.empty()) bad("id", "must be non-empty");
    if (!(face > 0.0) || !std::isfinite(face)) bad("face", "must be > 0");
    if (!(coupon_rate >= 0.0) || !std::isfinite(coupon_rate)) bad("coupon_rate", "must be >= 0");
    if (coupon_frequency != 1 && coupon_frequency != 2 && coupon_frequency != 4 &&
        coupon_frequency != 12) {
        bad("coupon_frequency", "must be one of 1, 2, 4, 12");
    }
    if (!(maturity > 0.0) || !std::isfinite(maturity)) bad("maturity", "must be > 0");
    if (issue_offset && (!std::isfinite(*issue_offset) || *issue_offset >= maturity)) {
        bad("issue_or_first_coupon_offset", "must be finite and before maturity");
    }
}

Bond Bond::rolled(double elapsed) const {
    Bond out = *this;
    out.maturity -= elapsed;
    if (out.issue_offset) *out.issue_offset -= elapsed;
    return out;
}

std::vector<Cashflow> cashflows(const Bond& bond) {
    bond.validate();
    const double period = 1.0 / bond.coupon_frequency;
    const double coupon = bond.face * bond.coupon_rate / bond.coupon_frequency;
    const double issue = bond.issue_offset.value_or(-INFINITY);

    std::vector<Cashflow> reversed;
    for (int k = 0;; ++k) {
        const double t = bond.maturity - k * period;
        if (t <= kTimeEpsilon || t <= issue + kTimeEpsilon) break;
        double amount = coupon;
        const double start = t - period;
        if (start < issue) amount *= (t - issue) / period;  // pro-rata stub
        if (k == 0) amount += bond.face;
        reversed.push_back({t, amount});
    }
    return {reversed.rbegin(), reversed.rend()};
}

double cash_received(const Bond& bond, double from, double to) {
    double total = 0.0;
    for (const auto& cf : cashflows(bond)) {
        if (cf.time > from + kTimeEpsilon && cf.time <= to + kTimeEpsilon) total += cf.amount;
    }
    return total;
}

double price(std::span<const Cashflow> flows, double yield) {
    check_yield(yield);
    double pv = 0.0;
    for (const auto& cf : flows) pv += cf.amount * std::pow(1.0 + yield, -cf.time);
    return pv;
}

double price(const Bond& bond, double yield) {
    return price(cashflows(bond), yield);
}

namespace {

BondAnalytics analyze_flows(std::span<const Cashflow> flows, double yield) {
    check_yield(yield);
    double pv = 0.0, weighted = 0.0, weighted2 = 0.0;
    for (const auto& cf : flows) {
        const double disc = cf.amount * std::pow(1.0 + yield, -cf.time);
        pv += disc;
        weighted += cf.time * disc;
        weighted2 += cf.time * (cf.time + 1.0) * disc;
    }
    const double g = 1.0 + yield;
    return {pv, yield, weighted / (pv * g), weighted2 / (pv * g * g)};
}

}  // namespace

double modified_duration(const Bond& bond, double yield) {
    return analyze_flows(cashflows(bond), yield).modified_duration;
}

double convexity(const Bond& bond, double yield) {
    return analyze_flows(cashflows(bond), yield).convexity;
}

double pnl_approx(double price, double duration, double convexity, double dy) {
    return price * (-duration * dy + 0.5 * convexity * dy * dy);
}

BondAnalytics analyze(const Bond& bond, double yield) {
    return analyze_flows(cashflows(bond), yield);
}

BondAnalytics analyze(const Bond& bond, const YieldCurve& curve, PricingMode mode) {
    const double y_mat = spot(curve, bond.maturity);
    if (mode == PricingMode::FlatYield) return analyze(bond, y_mat);

    const double t_min = curve.points().front().tenor;
    double pv = 0.0, weighted = 0.0, weighted2 = 0.0;
    for (const auto& cf : cashflows(bond)) {
        const double s = spot(curve, std::max(cf.time, t_min));
        check_yield(s);
        const double disc = cf.amount * std::pow(1.0 + s, -cf.time);
        pv += disc;
        weighted += cf.time * disc / (1.0 + s);
        weighted2 += cf.time * (cf.time + 1.0) * disc / ((1.0 + s) * (1.0 + s));
    }
    return {pv, y_mat, weighted / pv, weighted2 / pv};
}

namespace serial {

std::vector<BondAnalytics> analyze_batch(std::span<const Bond> bonds,
                                         std::span<const double> yields) {
    if (bonds.size() != yields.size()) {
        fail(ErrorKind::Contract, "analyze_batch: bonds and yields differ in length");
    }
    std::vector<BondAnalytics> out(bonds.size());
    for (std::size_t i = 0; i < bonds.size(); ++i) out[i] = analyze(bonds[i], yields[i]);
    return out;
}

}  // namespace serial

std::vector<BondAnalytics> analyze_batch(std::span<const Bond> bonds,
                                         std::span<const double> yields) {
    if (bonds.size() != yields.size()) {
        fail(ErrorKind::Contract, "analyze_batch: bonds and yields differ in length");
    }
    const auto n = static_cast<std::ptrdiff_t>(bonds.size());
    std::vector<BondAnalytics> out(bonds.size());
    std::exception_ptr first_error;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            out[i] = analyze(bonds[i], yields[i]);
        } catch (...) {
#pragma omp critical(immunize_batch_error)
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

}  // namespace immunize
