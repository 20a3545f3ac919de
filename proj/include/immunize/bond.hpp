#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace immunize {

class YieldCurve;

/// A fixed-coupon, default-free bond. Times are ACT/365 year fractions
/// measured from the valuation date.
struct Bond {
    std::string id;
    double face = 100.0;
    double coupon_rate = 0.0;   // decimal per year
    int coupon_frequency = 1;   // payments per year: 1, 2, 4 or 12
    double maturity = 1.0;      // years from valuation
    // Issue time relative to valuation (negative when issued in the past).
    // When the issue falls inside a coupon period, that first coupon is
    // paid pro rata. Absent means a regular schedule.
    std::optional<double> issue_offset;

    /// Throws Error(Validation) naming the offending field.
    void validate() const;

    /// The same bond seen `elapsed` years later: maturity and issue offset
    /// shift down, the coupon schedule stays anchored to maturity.
    Bond rolled(double elapsed) const;
};

/// Bonds keyed by id; ordered so iteration is deterministic.
using BondUniverse = std::map<std::string, Bond>;

struct Cashflow {
    double time;
    double amount;
};

/// Schedule generated backward from maturity in steps of 1/frequency.
/// Only flows strictly after the valuation date are returned.
std::vector<Cashflow> cashflows(const Bond& bond);

/// Cash paid by the bond in the half-open window (from, to].
double cash_received(const Bond& bond, double from, double to);

// Flat-yield pricing with annual compounding: PV = amount * (1 + y)^-t.
double price(const Bond& bond, double yield);
double price(std::span<const Cashflow> flows, double yield);

/// -(1/P) dP/dy = sum(t * PV) / (P * (1 + y)).
double modified_duration(const Bond& bond, double yield);

/// (1/P) d2P/dy2 = sum(t * (t + 1) * PV) / (P * (1 + y)^2).
double convexity(const Bond& bond, double yield);

/// Second-order price change P * (-D dy + C dy^2 / 2).
double pnl_approx(double price, double duration, double convexity, double dy);

struct BondAnalytics {
    double price = 0.0;
    double yield = 0.0;
    double modified_duration = 0.0;
    double convexity = 0.0;
};

BondAnalytics analyze(const Bond& bond, double yield);

enum class PricingMode {
    FlatYield,      // one yield read off the curve at the bond's maturity
    SpotDiscount    // every flow discounted at its own interpolated spot
};

/// Analytics off a curve. In FlatYield mode the yield is the spot rate at
/// maturity. SpotDiscount mode reports the price from discounting each
/// flow at its own spot, flows shorter than the first tenor using the
/// first tenor's rate, and the duration and convexity of a parallel shift
/// of all spots; `yield` is then the spot at maturity.
BondAnalytics analyze(const Bond& bond, const YieldCurve& curve,
                      PricingMode mode = PricingMode::FlatYield);

// Batch analytics under flat-yield pricing, one yield per bond.
std::vector<BondAnalytics> analyze_batch(std::span<const Bond> bonds,
                                         std::span<const double> yields);

namespace serial {
std::vector<BondAnalytics> analyze_batch(std::span<const Bond> bonds,
                                         std::span<const double> yields);
}

}  // namespace immunize
