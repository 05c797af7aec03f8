#pragma once

#include "regcoc/event_tree.hpp"
#include "regcoc/gross_rate.hpp"

#include <string>
#include <utility>
#include <vector>

namespace regcoc {

namespace detail {

enum class Measure { physical, pricing };

// Backward induction of x from its own time down to time s. Each parent takes
// the weighted sum of its children, weights being p (expectation) or q
// (present value).
inline RandomCashFlow roll_back(const EventTree& tree, const RandomCashFlow& x, int s, Measure m)
{
    x.check(tree);
    tree.check_time(s);
    if (s > x.time()) {
        throw TimeOrderError("cannot condition a time-" + std::to_string(x.time()) +
                             " payoff on later time " + std::to_string(s));
    }
    std::vector<double> current(x.values().begin(), x.values().end());
    for (int t = x.time() - 1; t >= s; --t) {
        const NodeId first = tree.layer_begin(t);
        const NodeId child_first = tree.layer_begin(t + 1);
        std::vector<double> next(tree.layer_size(t), 0.0);
        for (std::size_t i = 0; i < next.size(); ++i) {
            double acc = 0.0;
            for (NodeId c : tree.children(first + i)) {
                const double w = m == Measure::physical ? tree.probability(c) : tree.state_price(c);
                acc += w * current[c - child_first];
            }
            next[i] = acc;
        }
        current = std::move(next);
    }
    return RandomCashFlow(s, std::move(current));
}

inline void check_node(const EventTree& tree, NodeId at)
{
    if (!tree.contains(at)) {
        throw InvalidTree("node " + std::to_string(at) + " not in tree");
    }
}

} // namespace detail

// E_s(X_t) node-wise at time s.
inline RandomCashFlow conditional_expect(const EventTree& tree, const RandomCashFlow& x, int s)
{
    return detail::roll_back(tree, x, s, detail::Measure::physical);
}

// V_{s->t}(X_t) node-wise at time s.
inline RandomCashFlow conditional_value(const EventTree& tree, const RandomCashFlow& x, int s)
{
    return detail::roll_back(tree, x, s, detail::Measure::pricing);
}

// Expected payoff of x viewed from node `at`.
inline double expect(const EventTree& tree, const RandomCashFlow& x, NodeId at)
{
    detail::check_node(tree, at);
    return conditional_expect(tree, x, tree.time(at)).at(tree, at);
}

// Present value of x at node `at`. At the payoff's own time this is the payoff.
inline double value(const EventTree& tree, const RandomCashFlow& x, NodeId at)
{
    detail::check_node(tree, at);
    return conditional_value(tree, x, tree.time(at)).at(tree, at);
}

// Sum of the present values of the stream's flows. An empty stream is worth 0.
inline double value_stream(const EventTree& tree, const CashFlowStream& stream, NodeId at)
{
    detail::check_node(tree, at);
    double total = 0.0;
    for (const auto& [t, flow] : stream) {
        total += value(tree, flow, at);
    }
    return total;
}

// Node-wise value at time s of the flows paid strictly after s: V_s(X_{s+1}, ...).
inline RandomCashFlow value_stream_after(const EventTree& tree, const CashFlowStream& stream, int s)
{
    auto total = RandomCashFlow::constant(tree, s, 0.0);
    for (const auto& [t, flow] : stream) {
        if (t > s) {
            total = total + conditional_value(tree, flow, s);
        }
    }
    return total;
}

// Replaces every flow after T by its node-wise value at T, folded into X_T.
// The value of the stream is unchanged.
inline CashFlowStream truncate_with_terminal(const EventTree& tree, const CashFlowStream& stream,
                                             int T)
{
    if (T < 1) {
        throw TimeOrderError("truncation time must be >= 1");
    }
    if (T > tree.horizon()) {
        throw TimeOrderError("truncation time " + std::to_string(T) + " beyond tree horizon " +
                             std::to_string(tree.horizon()));
    }
    CashFlowStream out;
    auto last = RandomCashFlow::constant(tree, T, 0.0);
    for (const auto& [t, flow] : stream) {
        if (t < T) {
            out.add(flow);
        } else if (t == T) {
            last = last + flow;
        }
    }
    out.add(last + value_stream_after(tree, stream, T));
    return out;
}

// Probability of reaching each time-t node from the root.
inline RandomCashFlow path_probabilities(const EventTree& tree, int t)
{
    tree.check_time(t);
    return RandomCashFlow::from_nodes(tree, t, [&](NodeId n) {
        double prob = 1.0;
        while (tree.parent(n)) {
            prob *= tree.probability(n);
            n = *tree.parent(n);
        }
        return prob;
    });
}

// RF_{s->t} node-wise at time s: inverse price of a certain unit paid at t.
inline RandomCashFlow risk_free_rates(const EventTree& tree, int s, int t)
{
    if (t <= s) {
        throw TimeOrderError("risk-free rate needs t > s");
    }
    return conditional_value(tree, RandomCashFlow::constant(tree, t, 1.0), s)
        .map([](double price) { return 1.0 / price; });
}

inline GrossRate risk_free_rate(const EventTree& tree, NodeId at, int t)
{
    detail::check_node(tree, at);
    if (t <= tree.time(at)) {
        throw TimeOrderError("risk-free rate needs t after the node time");
    }
    return GrossRate(1.0 / value(tree, RandomCashFlow::constant(tree, t, 1.0), at));
}

} // namespace regcoc
