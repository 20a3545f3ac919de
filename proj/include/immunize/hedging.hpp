#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "immunize/bond.hpp"

namespace immunize {

/// Market state of one instrument as seen by the hedge calculators.
struct InstrumentSnapshot {
    std::string id;
    double price = 0.0;              // P
    double maturity = 0.0;           // T
    double modified_duration = 0.0;  // D
    double convexity = 0.0;          // C
    double amount = 0.0;             // N, used for the hedged position

    void validate() const;
};

InstrumentSnapshot snapshot(const Bond& bond, const BondAnalytics& analytics, double amount = 0.0);

enum class Strategy { Duration, Quadratic, DurationConvexity, Cubic, Generic };

const char* to_string(Strategy s) noexcept;
/// Accepts duration, quadratic, convexity, cubic.
Strategy parse_strategy(std::string_view name);
/// Number of hedge instruments a strategy uses; 0 for Generic.
std::size_t leg_count(Strategy s) noexcept;

struct Leg {
    std::string id;
    double amount;
};

struct ConstraintValue {
    std::string name;
    double value;  // sum over target and legs of N_i P_i w(i)
};

struct HedgePlan {
    Strategy strategy = Strategy::Duration;
    Leg target;
    std::vector<Leg> legs;
    std::vector<ConstraintValue> constraints;
};

/// Per-instrument weight w in a constraint sum_i N_i P_i w(i) = 0.
struct HedgeConstraint {
    std::string name;
    std::function<double(const InstrumentSnapshot&)> weight;
};

namespace constraints {
HedgeConstraint dollar_duration();            // w = D
HedgeConstraint dollar_duration_maturity();   // w = D T
HedgeConstraint dollar_duration_maturity2();  // w = D T^2
HedgeConstraint dollar_convexity();           // w = C
}  // namespace constraints

inline constexpr double kMinMaturitySpan = 1.0 / 365.0;
inline constexpr double kSingularRelTol = 1e-12;
inline constexpr double kMaxSystemCondition = 1e12;

struct HedgeOptions {
    // Permit a target maturity outside the hedge instruments' maturity span.
    bool allow_extrapolation = false;
};

/// Constraint sums for a set of legs, evaluated against the snapshots.
std::vector<ConstraintValue> evaluate_constraints(const InstrumentSnapshot& target,
                                                  std::span<const InstrumentSnapshot> instruments,
                                                  std::span<const double> amounts,
                                                  std::span<const HedgeConstraint> cons);

/// N_A = -N P D / (P_A D_A).
HedgePlan duration_hedge(const InstrumentSnapshot& target, const InstrumentSnapshot& a);

/// Zeroes dollar duration and dollar duration times maturity: the target's
/// dollar duration is split linearly in maturity between A and B.
HedgePlan quadratic_hedge(const InstrumentSnapshot& target, const InstrumentSnapshot& a,
                          const InstrumentSnapshot& b, const HedgeOptions& opts = {});

/// Zeroes dollar duration and dollar convexity.
HedgePlan convexity_hedge(const InstrumentSnapshot& target, const InstrumentSnapshot& a,
                          const InstrumentSnapshot& b);

/// Zeroes dollar duration times 1, T and T^2. Instrument i carries
/// -N P D l_i(T) of dollar duration, l_i the Lagrange basis on the three
/// hedge maturities. Output legs keep the caller's instrument order.
HedgePlan cubic_hedge(const InstrumentSnapshot& target, const InstrumentSnapshot& a,
                      const InstrumentSnapshot& b, const InstrumentSnapshot& c,
                      const HedgeOptions& opts = {});

/// Lagrange basis weights l_i(T) over `nodes`; throws on duplicate nodes.
std::vector<double> lagrange_weights(std::span<const double> nodes, double t);

/// Solves sum_i N_i P_i w_k(i) = -N P w_k(target) for every constraint k.
HedgePlan solve_constraint_hedge(const InstrumentSnapshot& target,
                                 std::span<const InstrumentSnapshot> instruments,
                                 std::span<const HedgeConstraint> cons);

/// Dispatches to the closed-form calculator for `strategy`; the instrument
/// count must match leg_count(strategy).
HedgePlan build_hedge(Strategy strategy, const InstrumentSnapshot& target,
                      std::span<const InstrumentSnapshot> instruments, const HedgeOptions& opts = {});

enum class AggregationMode { AmountWeighted, ValueWeighted };

/// Collapses positions (n_i, snapshot_i) into one synthetic bond with
/// N = sum n_i, N P = sum n_i P_i and T = max T_i. D and C are amount
/// weighted by default, or weighted by n_i P_i in ValueWeighted mode.
InstrumentSnapshot aggregate_portfolio(std::span<const std::pair<double, InstrumentSnapshot>> positions,
                                       AggregationMode mode = AggregationMode::AmountWeighted);

}  // namespace immunize
