#include "immunize/hedging.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "immunize/error.hpp"

namespace immunize {

void InstrumentSnapshot::validate() const {
    auto bad = [&](const char* field, double v) {
        fail(ErrorKind::Validation, fmt::format("instrument '{}': {} = {} must be > 0", id, field, v));
    };
    if (!(price > 0.0)) bad("price", price);
    if (!(maturity > 0.0)) bad("maturity", maturity);
    if (!(modified_duration > 0.0)) bad("modified_duration", modified_duration);
    if (!std::isfinite(convexity) || !std::isfinite(amount)) {
        fail(ErrorKind::Validation, fmt::format("instrument '{}': non-finite convexity or amount", id));
    }
}

InstrumentSnapshot snapshot(const Bond& bond, const BondAnalytics& analytics, double amount) {
    return {bond.id, analytics.price, bond.maturity, analytics.modified_duration,
            analytics.convexity, amount};
}

const char* to_string(Strategy s) noexcept {
    switch (s) {
        case Strategy::Duration: return "duration";
        case Strategy::Quadratic: return "quadratic";
        case Strategy::DurationConvexity: return "convexity";
        case Strategy::Cubic: return "cubic";
        case Strategy::Generic: return "generic";
    }
    return "unknown";
}

Strategy parse_strategy(std::string_view name) {
    if (name == "duration") return Strategy::Duration;
    if (name == "quadratic") return Strategy::Quadratic;
    if (name == "convexity") return Strategy::DurationConvexity;
    if (name == "cubic") return Strategy::Cubic;
    fail(ErrorKind::Data, fmt::format("unknown strategy '{}' (duration|quadratic|convexity|cubic)", name));
}

std::size_t leg_count(Strategy s) noexcept {
    switch (s) {
        case Strategy::Duration: return 1;
        case Strategy::Quadratic: return 2;
        case Strategy::DurationConvexity: return 2;
        case Strategy::Cubic: return 3;
        case Strategy::Generic: return 0;
    }
    return 0;
}

namespace constraints {

HedgeConstraint dollar_duration() {
    return {"dollar_duration", [](const InstrumentSnapshot& s) { return s.modified_duration; }};
}
HedgeConstraint dollar_duration_maturity() {
    return {"dollar_duration_T",
            [](const InstrumentSnapshot& s) { return s.modified_duration * s.maturity; }};
}
HedgeConstraint dollar_duration_maturity2() {
    return {"dollar_duration_T2", [](const InstrumentSnapshot& s) {
                return s.modified_duration * s.maturity * s.maturity;
            }};
}
HedgeConstraint dollar_convexity() {
    return {"dollar_convexity", [](const InstrumentSnapshot& s) { return s.convexity; }};
}

}  // namespace constraints

std::vector<ConstraintValue> evaluate_constraints(const InstrumentSnapshot& target,
                                                  std::span<const InstrumentSnapshot> instruments,
                                                  std::span<const double> amounts,
                                                  std::span<const HedgeConstraint> cons) {
    std::vector<ConstraintValue> out;
    out.reserve(cons.size());
    for (const auto& c : cons) {
        double sum = target.amount * target.price * c.weight(target);
        for (std::size_t i = 0; i < instruments.size(); ++i) {
            sum += amounts[i] * instruments[i].price * c.weight(instruments[i]);
        }
        out.push_back({c.name, sum});
    }
    return out;
}

namespace {

// N P D / (P_i D_i): amount of instrument i matching the target's dollar duration.
double duration_ratio(const InstrumentSnapshot& target, const InstrumentSnapshot& inst) {
    return target.amount * target.price * target.modified_duration /
           (inst.price * inst.modified_duration);
}

HedgePlan make_plan(Strategy strategy, const InstrumentSnapshot& target,
                    std::span<const InstrumentSnapshot> instruments, std::vector<double> amounts,
                    std::span<const HedgeConstraint> cons) {
    HedgePlan plan;
    plan.strategy = strategy;
    plan.target = {target.id, target.amount};
    for (std::size_t i = 0; i < instruments.size(); ++i) {
        plan.legs.push_back({instruments[i].id, amounts[i]});
    }
    plan.constraints = evaluate_constraints(target, instruments, amounts, cons);
    return plan;
}

void check_span(const InstrumentSnapshot& x, const InstrumentSnapshot& y) {
    if (std::abs(x.maturity - y.maturity) < kMinMaturitySpan) {
        fail(ErrorKind::DegenerateSpan,
             fmt::format("instruments '{}' and '{}' have maturities {} and {} closer than {} years",
                         x.id, y.id, x.maturity, y.maturity, kMinMaturitySpan));
    }
}

void check_bracket(const InstrumentSnapshot& target, double lo, double hi, const HedgeOptions& opts) {
    if (opts.allow_extrapolation) return;
    if (target.maturity < lo || target.maturity > hi) {
        fail(ErrorKind::Extrapolation,
             fmt::format("target '{}' maturity {} outside hedge span [{}, {}] "
                         "(pass --allow-extrapolation to override)",
                         target.id, target.maturity, lo, hi));
    }
}

}  // namespace

HedgePlan duration_hedge(const InstrumentSnapshot& target, const InstrumentSnapshot& a) {
    target.validate();
    a.validate();
    const std::array inst{a};
    const std::array cons{constraints::dollar_duration()};
    return make_plan(Strategy::Duration, target, inst, {-duration_ratio(target, a)}, cons);
}

HedgePlan quadratic_hedge(const InstrumentSnapshot& target, const InstrumentSnapshot& a,
                          const InstrumentSnapshot& b, const HedgeOptions& opts) {
    target.validate();
    a.validate();
    b.validate();
    check_span(a, b);
    check_bracket(target, std::min(a.maturity, b.maturity), std::max(a.maturity, b.maturity), opts);

    const double span = b.maturity - a.maturity;
    const double n_a = -duration_ratio(target, a) * ((b.maturity - target.maturity) / span);
    const double n_b = -duration_ratio(target, b) * ((target.maturity - a.maturity) / span);
    const std::array inst{a, b};
    const std::array cons{constraints::dollar_duration(), constraints::dollar_duration_maturity()};
    return make_plan(Strategy::Quadratic, target, inst, {n_a, n_b}, cons);
}

HedgePlan convexity_hedge(const InstrumentSnapshot& target, const InstrumentSnapshot& a,
                          const InstrumentSnapshot& b) {
    target.validate();
    a.validate();
    b.validate();
    const double ca_db = a.convexity * b.modified_duration;
    const double cb_da = b.convexity * a.modified_duration;
    const double denom = ca_db - cb_da;
    if (!(std::abs(denom) > kSingularRelTol * (std::abs(ca_db) + std::abs(cb_da)))) {
        fail(ErrorKind::Singular,
             fmt::format("instruments '{}' and '{}' are collinear in duration and convexity "
                         "(C_A D_B - C_B D_A = {:.3g})",
                         a.id, b.id, denom));
    }
    const double np = target.amount * target.price;
    const double d = target.modified_duration;
    const double c = target.convexity;
    const double n_a = np * (b.convexity * d - c * b.modified_duration) / (a.price * denom);
    const double n_b = np * (-a.convexity * d + a.modified_duration * c) / (b.price * denom);
    const std::array inst{a, b};
    const std::array cons{constraints::dollar_duration(), constraints::dollar_convexity()};
    return make_plan(Strategy::DurationConvexity, target, inst, {n_a, n_b}, cons);
}

std::vector<double> lagrange_weights(std::span<const double> nodes, double t) {
    std::vector<double> w(nodes.size(), 1.0);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            if (i == j) continue;
            const double gap = nodes[i] - nodes[j];
            if (std::abs(gap) < kMinMaturitySpan) {
                fail(ErrorKind::DegenerateSpan,
                     fmt::format("interpolation nodes {} and {} closer than {} years", nodes[i],
                                 nodes[j], kMinMaturitySpan));
            }
            w[i] *= (t - nodes[j]) / gap;
        }
    }
    return w;
}

HedgePlan cubic_hedge(const InstrumentSnapshot& target, const InstrumentSnapshot& a,
                      const InstrumentSnapshot& b, const InstrumentSnapshot& c,
                      const HedgeOptions& opts) {
    target.validate();
    const std::array inst{a, b, c};
    for (const auto& s : inst) s.validate();

    // Sort by maturity so the result does not depend on argument order.
    std::array<std::size_t, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return inst[x].maturity < inst[y].maturity;
    });
    check_span(inst[order[0]], inst[order[1]]);
    check_span(inst[order[1]], inst[order[2]]);
    check_bracket(target, inst[order[0]].maturity, inst[order[2]].maturity, opts);

    const std::array nodes{inst[order[0]].maturity, inst[order[1]].maturity, inst[order[2]].maturity};
    const auto weights = lagrange_weights(nodes, target.maturity);
    std::vector<double> amounts(3);
    for (std::size_t k = 0; k < 3; ++k) {
        amounts[order[k]] = -duration_ratio(target, inst[order[k]]) * weights[k];
    }
    const std::array cons{constraints::dollar_duration(), constraints::dollar_duration_maturity(),
                          constraints::dollar_duration_maturity2()};
    return make_plan(Strategy::Cubic, target, inst, std::move(amounts), cons);
}

HedgePlan solve_constraint_hedge(const InstrumentSnapshot& target,
                                 std::span<const InstrumentSnapshot> instruments,
                                 std::span<const HedgeConstraint> cons) {
    target.validate();
    for (const auto& s : instruments) s.validate();
    const auto n = static_cast<Eigen::Index>(instruments.size());
    if (instruments.empty() || instruments.size() != cons.size()) {
        fail(ErrorKind::Contract,
             fmt::format("need as many constraints as instruments (got {} and {})", cons.size(),
                         instruments.size()));
    }

    Eigen::MatrixXd m(n, n);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index i = 0; i < n; ++i) {
            m(k, i) = instruments[i].price * cons[k].weight(instruments[i]);
        }
        rhs(k) = -target.amount * target.price * cons[k].weight(target);
    }

    // Equilibrate rows and columns before judging conditioning.
    Eigen::VectorXd row_scale(n), col_scale(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double s = m.row(k).cwiseAbs().maxCoeff();
        if (!(s > 0.0)) {
            fail(ErrorKind::Singular, fmt::format("constraint '{}' is identically zero", cons[k].name));
        }
        row_scale(k) = 1.0 / s;
    }
    Eigen::MatrixXd scaled = row_scale.asDiagonal() * m;
    for (Eigen::Index i = 0; i < n; ++i) col_scale(i) = 1.0 / scaled.col(i).cwiseAbs().maxCoeff();
    scaled = scaled * col_scale.asDiagonal();

    Eigen::FullPivLU<Eigen::MatrixXd> lu(scaled);
    // rcond() is only an estimate and can be large for an exactly singular
    // factorization, so check the rank first.
    if (!lu.isInvertible() || !(lu.rcond() > 1.0 / kMaxSystemCondition)) {
        // Name the pair of constraint rows closest to parallel.
        Eigen::Index worst_k = 0, worst_l = n > 1 ? 1 : 0;
        double worst = -1.0;
        for (Eigen::Index k = 0; k < n; ++k) {
            for (Eigen::Index l = k + 1; l < n; ++l) {
                const double cosine = std::abs(scaled.row(k).dot(scaled.row(l))) /
                                      (scaled.row(k).norm() * scaled.row(l).norm());
                if (cosine > worst) {
                    worst = cosine;
                    worst_k = k;
                    worst_l = l;
                }
            }
        }
        fail(ErrorKind::Singular,
             fmt::format("hedge system singular (rcond {:.3g}); constraints '{}' and '{}' are "
                         "nearly dependent over these instruments",
                         lu.rcond(), cons[worst_k].name, cons[worst_l].name));
    }
    const Eigen::VectorXd b = row_scale.asDiagonal() * rhs;
    Eigen::VectorXd y = lu.solve(b);
    // One step of iterative refinement.
    const Eigen::VectorXd r = b - scaled * y;
    y += lu.solve(r);
    const Eigen::VectorXd x = col_scale.asDiagonal() * y;

    return make_plan(Strategy::Generic, target, instruments,
                     std::vector<double>(x.data(), x.data() + n), cons);
}

HedgePlan build_hedge(Strategy strategy, const InstrumentSnapshot& target,
                      std::span<const InstrumentSnapshot> instruments, const HedgeOptions& opts) {
    if (strategy == Strategy::Generic || instruments.size() != leg_count(strategy)) {
        fail(ErrorKind::Contract, fmt::format("strategy '{}' takes {} instruments, got {}",
                                              to_string(strategy), leg_count(strategy),
                                              instruments.size()));
    }
    switch (strategy) {
        case Strategy::Duration: return duration_hedge(target, instruments[0]);
        case Strategy::Quadratic: return quadratic_hedge(target, instruments[0], instruments[1], opts);
        case Strategy::DurationConvexity: return convexity_hedge(target, instruments[0], instruments[1]);
        case Strategy::Cubic:
            return cubic_hedge(target, instruments[0], instruments[1], instruments[2], opts);
        case Strategy::Generic: break;
    }
    fail(ErrorKind::Contract, "unreachable strategy");
}

InstrumentSnapshot aggregate_portfolio(std::span<const std::pair<double, InstrumentSnapshot>> positions,
                                       AggregationMode mode) {
    if (positions.empty()) fail(ErrorKind::Contract, "cannot aggregate an empty portfolio");
    double net = 0.0, value = 0.0, d_sum = 0.0, c_sum = 0.0, t_max = 0.0;
    std::string id;
    for (const auto& [n, s] : positions) {
        s.validate();
        const double w = mode == AggregationMode::AmountWeighted ? n : n * s.price;
        net += n;
        value += n * s.price;
        d_sum += w * s.modified_duration;
        c_sum += w * s.convexity;
        t_max = std::max(t_max, s.maturity);
        id += (id.empty() ? "" : "+") + s.id;
    }
    if (net == 0.0) fail(ErrorKind::Contract, "portfolio has zero net amount");
    const double weight_total = mode == AggregationMode::AmountWeighted ? net : value;
    if (weight_total == 0.0) fail(ErrorKind::Contract, "portfolio has zero net value");

    InstrumentSnapshot out{id, value / net, t_max, d_sum / weight_total, c_sum / weight_total, net};
    out.validate();
    return out;
}

}  // namespace immunize
