#pragma once

#include "regcoc/event_tree.hpp"
#include "regcoc/gross_rate.hpp"
#include "regcoc/valuation.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace regcoc {

// R(X) = E(X) / V(X) at node `at`.
inline GrossRate cost_of_capital(const EventTree& tree, const RandomCashFlow& x, NodeId at)
{
    const double v = value(tree, x, at);
    if (v == 0.0) {
        throw ZeroPresentValue("cost of capital undefined: present value is zero at node " +
                               std::to_string(at));
    }
    return GrossRate(expect(tree, x, at) / v);
}

inline GrossRate cost_of_capital(const EventTree& tree, const RandomCashFlow& x)
{
    return cost_of_capital(tree, x, tree.root());
}

// R_{s->t}(X_t) node-wise at time s.
inline RandomCashFlow conditional_coc(const EventTree& tree, const RandomCashFlow& x, int s)
{
    const auto e = conditional_expect(tree, x, s);
    const auto v = conditional_value(tree, x, s);
    return e.zip(v, [](double ev, double vv) {
        if (vv == 0.0) {
            throw ZeroPresentValue("cost of capital undefined: zero node-wise present value");
        }
        return ev / vv;
    });
}

// Cost of capital for holding X_T from s to t: R_{s->t}(V_{t->T}(X_T)),
// node-wise at time s. Equals E_s(V_{t->T}(X_T)) / V_{s->T}(X_T).
inline RandomCashFlow holding_coc(const EventTree& tree, const RandomCashFlow& x, int s, int t)
{
    if (s > t || t > x.time()) {
        throw TimeOrderError("holding period must satisfy s <= t <= payoff time");
    }
    return conditional_coc(tree, conditional_value(tree, x, t), s);
}

inline GrossRate coc_of_holding(const EventTree& tree, const RandomCashFlow& x, NodeId at, int t)
{
    detail::check_node(tree, at);
    return GrossRate(holding_coc(tree, x, tree.time(at), t).at(tree, at));
}

struct TwoPeriodCheck {
    GrossRate direct;      // R_{0->2}(X_2)
    GrossRate decomposed;  // built from the one-period rates
    double residual() const { return std::abs(direct.gross() - decomposed.gross()); }
    double relative() const { return residual() / std::abs(direct.gross()); }
};

// R_{0->2}(X_2) against R_{0->1}(V_1(X_2)) * E_0(X_2) / E_0(E_1(X_2) / R_{1->2}(X_2)).
inline TwoPeriodCheck two_period_decomposition_check(const EventTree& tree, const RandomCashFlow& x2)
{
    if (x2.time() != 2) {
        throw TimeOrderError("two-period check needs a time-2 payoff");
    }
    const GrossRate direct = cost_of_capital(tree, x2);
    const auto v1 = conditional_value(tree, x2, 1);
    const auto e1 = conditional_expect(tree, x2, 1);
    const auto r12 = e1.zip(v1, [](double e, double v) {
        if (v == 0.0) {
            throw ZeroDenominator("R_{1->2} undefined at a time-1 node");
        }
        return e / v;
    });
    const GrossRate r01_of_v1 = cost_of_capital(tree, v1);
    const double denom = expect(tree, e1.divided_by(r12), tree.root());
    if (denom == 0.0) {
        throw ZeroDenominator("E_0(E_1(X_2)/R_{1->2}(X_2)) is zero");
    }
    const double e0 = expect(tree, x2, tree.root());
    return {direct, GrossRate(r01_of_v1.gross() * e0 / denom)};
}

struct WeightedAverage {
    double alpha_weight = 1.0;  // weight on the first component
    GrossRate rate;
};

// R(X+Y) = a R(X) + (1-a) R(Y) with a = V(X) / V(X+Y), from component
// expectations and values. A component with zero value contributes E/V(X+Y),
// the limit of its weighted term.
inline WeightedAverage combine_by_value(double e_x, double v_x, double e_y, double v_y)
{
    const double v_sum = v_x + v_y;
    if (v_sum == 0.0) {
        throw ZeroPresentValue("combined flow has zero present value");
    }
    const double alpha = v_x / v_sum;
    auto term = [&](double e, double v, double weight) {
        return v == 0.0 ? e / v_sum : weight * (e / v);
    };
    return {alpha, GrossRate(term(e_x, v_x, alpha) + term(e_y, v_y, 1.0 - alpha))};
}

// 1/R(X+Y) = a/R(X) + (1-a)/R(Y) with a = E(X) / E(X+Y).
inline WeightedAverage combine_by_expectation(double e_x, GrossRate r_x, double e_y, GrossRate r_y)
{
    const double e_sum = e_x + e_y;
    if (e_sum == 0.0) {
        throw ZeroExpectation("combined flow has zero expectation");
    }
    const double alpha = e_x / e_sum;
    const double inv = alpha * r_x.discount() + (1.0 - alpha) * r_y.discount();
    if (inv == 0.0) {
        throw ZeroPresentValue("combined flow has zero present value");
    }
    return {alpha, GrossRate(1.0 / inv)};
}

inline WeightedAverage wa_value_weights(const EventTree& tree, const RandomCashFlow& x,
                                        const RandomCashFlow& y, NodeId at = 0)
{
    if (x.time() != y.time()) {
        throw TimeOrderError("weighted average needs flows at the same time");
    }
    return combine_by_value(expect(tree, x, at), value(tree, x, at), expect(tree, y, at),
                            value(tree, y, at));
}

inline WeightedAverage wa_expectation_weights(const EventTree& tree, const RandomCashFlow& x,
                                              const RandomCashFlow& y, NodeId at = 0)
{
    if (x.time() != y.time()) {
        throw TimeOrderError("weighted average needs flows at the same time");
    }
    const double e_x = expect(tree, x, at);
    const double e_y = expect(tree, y, at);
    const double v_x = value(tree, x, at);
    const double v_y = value(tree, y, at);
    const double e_sum = e_x + e_y;
    if (e_sum == 0.0) {
        throw ZeroExpectation("combined flow has zero expectation");
    }
    const double alpha = e_x / e_sum;
    // Zero-expectation components contribute V/E(X+Y), the limit of their term.
    auto term = [&](double e, double v, double weight) {
        return e == 0.0 ? v / e_sum : weight * (v / e);
    };
    const double inv = term(e_x, v_x, alpha) + term(e_y, v_y, 1.0 - alpha);
    if (inv == 0.0) {
        throw ZeroPresentValue("combined flow has zero present value");
    }
    return {alpha, GrossRate(1.0 / inv)};
}

// Representative investor with utility Y + delta (E[X] - alpha_ra Var[X]).
struct MeanVarianceSpec {
    double delta = 1.0;     // time preference
    double alpha_ra = 0.0;  // risk aversion, per currency unit
    std::vector<double> probabilities;
    std::vector<double> market;  // market portfolio payoff M_1 per state
};

// One-period tree with q_i = p_i delta (1 - 2 alpha_ra (M_i - E[M])), so that
// V(X) = delta E[X] - 2 alpha_ra delta Cov(M, X) for every payoff X.
inline EventTree mean_variance_tree(const MeanVarianceSpec& spec)
{
    if (!(spec.delta > 0.0)) {
        throw OutOfRange("time preference delta must be positive");
    }
    if (spec.probabilities.size() != spec.market.size() || spec.market.empty()) {
        throw InvalidTree("market payoff needs one value per state");
    }
    double mean = 0.0;
    for (std::size_t i = 0; i < spec.market.size(); ++i) {
        mean += spec.probabilities[i] * spec.market[i];
    }
    std::vector<NodeSpec> nodes{NodeSpec{}};
    for (std::size_t i = 0; i < spec.market.size(); ++i) {
        const double q = spec.probabilities[i] * spec.delta *
                         (1.0 - 2.0 * spec.alpha_ra * (spec.market[i] - mean));
        if (!(q > 0.0)) {
            throw NonPositiveStatePrice("risk aversion too large for the market spread: state " +
                                        std::to_string(i) + " gets state price " +
                                        std::to_string(q));
        }
        nodes.push_back(NodeSpec{i + 1, 1, 0, spec.probabilities[i], q});
    }
    return EventTree::from_specs(1, std::move(nodes));
}

inline RandomCashFlow market_flow(const EventTree& tree, const MeanVarianceSpec& spec)
{
    RandomCashFlow m(1, spec.market);
    m.check(tree);
    return m;
}

// beta(X) = (E(M) / E(X)) Cov(X, M) / Var(M) under the physical measure.
inline double beta(const EventTree& tree, const RandomCashFlow& x, const RandomCashFlow& m)
{
    if (x.time() != m.time()) {
        throw TimeOrderError("beta needs payoffs at the same time");
    }
    x.check(tree);
    m.check(tree);
    const auto prob = path_probabilities(tree, x.time());
    double ex = 0.0, em = 0.0, em2 = 0.0;
    for (std::size_t i = 0; i < prob.size(); ++i) {
        ex += prob[i] * x[i];
        em += prob[i] * m[i];
        em2 += prob[i] * m[i] * m[i];
    }
    double cov = 0.0, var = 0.0;
    for (std::size_t i = 0; i < prob.size(); ++i) {
        cov += prob[i] * (x[i] - ex) * (m[i] - em);
        var += prob[i] * (m[i] - em) * (m[i] - em);
    }
    if (var <= 1e-14 * em2) {
        throw ZeroVariance("market payoff has zero variance");
    }
    if (ex == 0.0) {
        throw ZeroExpectation("beta undefined for a zero-mean payoff");
    }
    return (em / ex) * cov / var;
}

// 1/R = 1/RF - (1/RF - 1/R_M) beta.
inline GrossRate capm_rate(GrossRate rf, GrossRate rm, double beta_x)
{
    if (!(rf.gross() > 0.0) || !(rm.gross() > 0.0)) {
        throw OutOfRange("CAPM rates must be positive");
    }
    const double inv = rf.discount() - (rf.discount() - rm.discount()) * beta_x;
    if (!(inv > 0.0)) {
        throw OutOfRange("CAPM gives a non-positive discount factor");
    }
    return GrossRate(1.0 / inv);
}

} // namespace regcoc
