#pragma once

#include "regcoc/bbm.hpp"
#include "regcoc/coc.hpp"
#include "regcoc/error.hpp"
#include "regcoc/event_tree.hpp"
#include "regcoc/multiyear.hpp"
#include "regcoc/valuation.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

// Regulation policies over the whole asset life, and the check that the asset
// base equals the value of the remaining allowed flows.
namespace regcoc {

// Over-and-above flows X_1..X_N, the asset base RAB_0..RAB_N node-wise, and the
// times at which the regulator resets (always starting with 0).
struct RegulationPolicy {
    CashFlowStream flows;
    std::vector<RandomCashFlow> rab;
    std::vector<int> resets;

    int life() const { return static_cast<int>(rab.size()) - 1; }
};

struct FundamentalTheoremResidual {
    double max_reset_residual = 0.0;  // max over resets r, nodes: |V_r(X_{r+1}, ...) - RAB_r|
    double npv = 0.0;                 // V_0(X_1, ..., X_N) - RAB_0
};

namespace detail {

inline void check_policy_shape(const EventTree& tree, const RegulationPolicy& policy)
{
    const int n = policy.life();
    if (n < 1) {
        throw ContractError("policy needs at least one year");
    }
    if (n > tree.horizon()) {
        throw TimeOrderError("policy life exceeds the tree horizon");
    }
    for (int t = 0; t <= n; ++t) {
        const auto& r = policy.rab[static_cast<std::size_t>(t)];
        if (r.time() != t) {
            throw InvalidCashFlow("asset base entry " + std::to_string(t) + " has the wrong time");
        }
        r.check(tree);
    }
    for (int t = 1; t <= n; ++t) {
        if (!policy.flows.contains(t)) {
            throw InvalidCashFlow("missing allowance flow for year " + std::to_string(t));
        }
    }
    if (policy.flows.last_time() > n) {
        throw InvalidCashFlow("allowance flow after the end of the asset life");
    }
    if (policy.resets.empty() || policy.resets.front() != 0 ||
        !std::is_sorted(policy.resets.begin(), policy.resets.end()) || policy.resets.back() >= n) {
        throw ContractError("reset times must start at 0, increase and precede the end of life");
    }
}

inline double max_abs(const RandomCashFlow& x)
{
    double m = 0.0;
    for (double v : x.values()) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

// X_t scaled node-wise so that E_s(X_t) equals `expected` while keeping the
// shape (and so the cost of capital) of Z_t.
inline RandomCashFlow realize(const EventTree& tree, const RandomCashFlow& shape,
                              const RandomCashFlow& expected)
{
    const int s = expected.time();
    const auto ez = conditional_expect(tree, shape, s);
    return RandomCashFlow::from_nodes(tree, shape.time(), [&](NodeId n) {
        const NodeId a = tree.ancestor(n, s);
        const double denom = ez.at(tree, a);
        if (denom == 0.0) {
            throw ZeroExpectation("allowance shape has zero expectation at node " + std::to_string(a));
        }
        return expected.at(tree, a) * shape.at(tree, n) / denom;
    });
}

inline std::vector<RandomCashFlow> deterministic_rab(const EventTree& tree, const std::vector<double>& rab)
{
    if (rab.size() < 2) {
        throw ContractError("asset base path needs at least two entries");
    }
    if (rab.back() != 0.0) {
        throw ContractError("asset base must reach zero at the end of life");
    }
    for (std::size_t t = 0; t + 1 < rab.size(); ++t) {
        if (!(rab[t] > 0.0)) {
            throw ContractError("asset base must be positive before the end of life");
        }
    }
    std::vector<RandomCashFlow> out;
    for (std::size_t t = 0; t < rab.size(); ++t) {
        out.push_back(RandomCashFlow::constant(tree, static_cast<int>(t), rab[t]));
    }
    return out;
}

inline void check_shapes(const CashFlowStream& shapes, int n)
{
    for (int t = 1; t <= n; ++t) {
        if (!shapes.contains(t)) {
            throw InvalidCashFlow("missing allowance shape for year " + std::to_string(t));
        }
    }
}

inline std::vector<int> resets_every(int period, int n)
{
    if (period < 1) {
        throw ContractError("regulatory period must be at least one year");
    }
    std::vector<int> out;
    for (int r = 0; r < n; r += period) {
        out.push_back(r);
    }
    return out;
}

// Multi-year policy where each period's allowances come from `schedule`, a
// function of the period scenario seen from the reset node.
template <class Schedule>
RegulationPolicy build_multiyear_policy(const EventTree& tree, const std::vector<double>& rab,
                                        const CashFlowStream& shapes, int period, Schedule&& schedule)
{
    const int n = static_cast<int>(rab.size()) - 1;
    check_shapes(shapes, n);
    RegulationPolicy policy{{}, deterministic_rab(tree, rab), resets_every(period, n)};
    for (int r : policy.resets) {
        const int len = std::min(period, n - r);
        std::vector<RandomCashFlow> r_x_nodes;
        std::vector<RandomCashFlow> rf_nodes;
        for (int k = 1; k <= len; ++k) {
            r_x_nodes.push_back(holding_coc(tree, shapes.at(r + k), r, r + k));
            rf_nodes.push_back(risk_free_rates(tree, r, r + k));
        }
        std::vector<std::vector<double>> values(static_cast<std::size_t>(len),
                                                std::vector<double>(tree.layer_size(r)));
        for (NodeId node : tree.layer(r)) {
            multiyear::MultiYearScenario s;
            s.rab.assign(rab.begin() + r, rab.begin() + r + len + 1);
            for (int k = 0; k < len; ++k) {
                s.r_x.push_back(GrossRate(r_x_nodes[static_cast<std::size_t>(k)].at(tree, node)));
                s.r_rab.push_back(GrossRate(rf_nodes[static_cast<std::size_t>(k)].at(tree, node)));
            }
            const std::vector<double> e = schedule(s);
            for (int k = 0; k < len; ++k) {
                values[static_cast<std::size_t>(k)][tree.slot(node)] = e[static_cast<std::size_t>(k)];
            }
        }
        for (int k = 1; k <= len; ++k) {
            const RandomCashFlow e(r, values[static_cast<std::size_t>(k) - 1]);
            policy.flows.add(realize(tree, shapes.at(r + k), e));
        }
    }
    return policy;
}

// Yearly policy where the allowance for year t is set node-wise at t-1 from
// (RAB_{t-1}, RAB_t, R_{t-1->t}(Z_t), RF_{t-1->t}).
template <class Rule>
RegulationPolicy build_yearly_policy(const EventTree& tree, const std::vector<double>& rab,
                                     const CashFlowStream& shapes, Rule&& rule)
{
    const int n = static_cast<int>(rab.size()) - 1;
    check_shapes(shapes, n);
    RegulationPolicy policy{{}, deterministic_rab(tree, rab), resets_every(1, n)};
    for (int t = 1; t <= n; ++t) {
        const auto r_z = conditional_coc(tree, shapes.at(t), t - 1);
        const auto rf = risk_free_rates(tree, t - 1, t);
        const auto e = r_z.zip(rf, [&](double rz, double f) {
            return rule(rab[static_cast<std::size_t>(t) - 1], rab[static_cast<std::size_t>(t)],
                        GrossRate(rz), GrossRate(f));
        });
        policy.flows.add(realize(tree, shapes.at(t), e));
    }
    return policy;
}

} // namespace detail

// One-year component scheme applied every year.
inline RegulationPolicy component_policy(const EventTree& tree, const std::vector<double>& rab,
                                         const CashFlowStream& shapes)
{
    return detail::build_yearly_policy(tree, rab, shapes,
                                       [](double r0, double r1, GrossRate rx, GrossRate rrab) {
                                           return bbm::allowance_component({r0, r1, rx, rrab});
                                       });
}

// One-year standard scheme, solved by fixed point every year.
inline RegulationPolicy standard_policy(const EventTree& tree, const std::vector<double>& rab,
                                        const CashFlowStream& shapes)
{
    return detail::build_yearly_policy(tree, rab, shapes,
                                       [](double r0, double r1, GrossRate rx, GrossRate rrab) {
                                           return bbm::solve_standard_fixed_point({r0, r1, rx, rrab})
                                               .allowance;
                                       });
}

// Parameters reset each year: A = R_{t-1->t}(X_t), B = R_{t-1->t}(RAB_t).
inline RegulationPolicy annual_policy(const EventTree& tree, const std::vector<double>& rab,
                                      const CashFlowStream& shapes)
{
    return detail::build_yearly_policy(tree, rab, shapes,
                                       [](double r0, double r1, GrossRate a, GrossRate b) {
                                           return multiyear::allowance_annual(r0, r1, a, b);
                                       });
}

// Forward-parameter scheme, allowances fixed at each reset for `period` years.
inline RegulationPolicy forward_policy(const EventTree& tree, const std::vector<double>& rab,
                                       const CashFlowStream& shapes, int period)
{
    return detail::build_multiyear_policy(tree, rab, shapes, period,
                                          [](const multiyear::MultiYearScenario& s) {
                                              return multiyear::allowance_path(s);
                                          });
}

// Single-parameter scheme with the parameter solved jointly with its allowances.
inline RegulationPolicy single_r_policy(const EventTree& tree, const std::vector<double>& rab,
                                        const CashFlowStream& shapes, int period)
{
    return detail::build_multiyear_policy(
        tree, rab, shapes, period, [](const multiyear::MultiYearScenario& s) {
            return multiyear::single_r_allowances(s.rab, multiyear::consistent_single_r(s));
        });
}

// Residuals of the asset-base identity at every reset, plus the NPV at the root.
// No policy condition is checked, so perturbed policies can be measured.
inline FundamentalTheoremResidual fundamental_theorem_residual(const EventTree& tree,
                                                               const RegulationPolicy& policy)
{
    detail::check_policy_shape(tree, policy);
    FundamentalTheoremResidual out;
    for (int r : policy.resets) {
        const auto remaining = value_stream_after(tree, policy.flows, r);
        out.max_reset_residual = std::max(
            out.max_reset_residual, detail::max_abs(remaining - policy.rab[static_cast<std::size_t>(r)]));
    }
    out.npv = value_stream(tree, policy.flows, tree.root()) - policy.rab[0][0];
    return out;
}

// Checks the NPV = 0 condition in every regulatory period and a zero terminal
// asset base, then returns the residuals of the asset-base identity.
inline FundamentalTheoremResidual verify_fundamental_theorem(const EventTree& tree,
                                                             const RegulationPolicy& policy,
                                                             double tol = 1e-9)
{
    detail::check_policy_shape(tree, policy);
    const int n = policy.life();
    if (detail::max_abs(policy.rab.back()) != 0.0) {
        throw ContractError("asset base must be zero at the end of life");
    }
    const double scale = std::max(1.0, std::abs(policy.rab[0][0]));
    for (std::size_t i = 0; i < policy.resets.size(); ++i) {
        const int r = policy.resets[i];
        const int next = i + 1 < policy.resets.size() ? policy.resets[i + 1] : n;
        auto v = conditional_value(tree, policy.rab[static_cast<std::size_t>(next)], r);
        for (int t = r + 1; t <= next; ++t) {
            v = v + conditional_value(tree, policy.flows.at(t), r);
        }
        const double gap = detail::max_abs(v - policy.rab[static_cast<std::size_t>(r)]);
        if (gap > tol * scale) {
            throw PolicyViolation(r, "period starting at " + std::to_string(r) +
                                         ": allowances are not valued at the opening asset base (gap " +
                                         std::to_string(gap) + ")");
        }
    }
    return fundamental_theorem_residual(tree, policy);
}

// Binary tree with a 5% risk-free rate in which a payoff depending only on its
// last branch has a one-period cost of capital of 20%.
inline EventTree illustrative_binary_tree(int horizon)
{
    const double q_up = 0.3;
    const double q_down = 1.0 / 1.05 - q_up;
    const std::vector<double> p(2, 0.5);
    const std::vector<double> q{q_up, q_down};
    return EventTree::uniform(horizon, p, q);
}

// Z_t = 1 +/- a on the last branch of the illustrative tree, with E(Z_t) = 1
// and R_{t-1->t}(Z_t) = 1.2.
inline RandomCashFlow illustrative_shape(const EventTree& tree, int t)
{
    const NodeId first_child = tree.children(tree.root())[0];
    const double q_up = tree.state_price(first_child);
    const double q_down = tree.state_price(tree.children(tree.root())[1]);
    const double a = (1.0 / 1.2 - (q_up + q_down)) / (q_up - q_down);
    return RandomCashFlow::from_nodes(tree, t, [&](NodeId n) {
        const NodeId parent = *tree.parent(n);
        return tree.children(parent)[0] == n ? 1.0 + a : 1.0 - a;
    });
}

inline CashFlowStream illustrative_shapes(const EventTree& tree, int n)
{
    CashFlowStream out;
    for (int t = 1; t <= n; ++t) {
        out.add(illustrative_shape(tree, t));
    }
    return out;
}

} // namespace regcoc
