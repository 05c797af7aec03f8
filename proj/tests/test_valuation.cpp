#include "test_support.hpp"

using namespace regcoc;
using regcoc::testing::Gen;
using regcoc::testing::kCases;
using regcoc::testing::random_flow;
using regcoc::testing::random_tree;
using regcoc::testing::rel_err;

namespace {

// Two-state one-period tree: up/down with p = 0.5, state prices 0.4 / 0.5.
EventTree two_state()
{
    const double p[] = {0.5, 0.5};
    const double q[] = {0.4, 0.5};
    return EventTree::uniform(1, p, q);
}

// Brute-force present value: sum over leaves of payoff times product of q on the path.
double path_sum_value(const EventTree& tree, const RandomCashFlow& x)
{
    double total = 0.0;
    for (NodeId n : tree.layer(x.time())) {
        double w = 1.0;
        for (NodeId c = n; tree.parent(c); c = *tree.parent(c)) {
            w *= tree.state_price(c);
        }
        total += w * x.at(tree, n);
    }
    return total;
}

double path_sum_expect(const EventTree& tree, const RandomCashFlow& x)
{
    const auto prob = path_probabilities(tree, x.time());
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        total += prob[i] * x[i];
    }
    return total;
}

} // namespace

TEST(Valuation, TwoStateExample)
{
    const auto tree = two_state();
    const RandomCashFlow x(1, {120.0, 80.0});
    EXPECT_DOUBLE_EQ(expect(tree, x, 0), 100.0);
    EXPECT_DOUBLE_EQ(value(tree, x, 0), 0.4 * 120.0 + 0.5 * 80.0);
}

TEST(Valuation, ValueAtOwnTimeIsThePayoff)
{
    const auto tree = two_state();
    const RandomCashFlow x(1, {120.0, 80.0});
    EXPECT_DOUBLE_EQ(value(tree, x, 1), 120.0);
    EXPECT_DOUBLE_EQ(expect(tree, x, 2), 80.0);
}

TEST(Valuation, RejectsConditioningOnLaterTime)
{
    const double p[] = {0.5, 0.5};
    const double q[] = {0.45, 0.45};
    const auto tree = EventTree::uniform(2, p, q);
    const auto x1 = RandomCashFlow::constant(tree, 1, 1.0);
    EXPECT_THROW(conditional_value(tree, x1, 2), TimeOrderError);
    EXPECT_THROW(value(tree, x1, tree.layer_begin(2)), TimeOrderError);
}

TEST(Valuation, RejectsUnknownNode)
{
    const auto tree = two_state();
    EXPECT_THROW(value(tree, RandomCashFlow(1, {1.0, 1.0}), 99), InvalidTree);
}

TEST(Valuation, RiskFreeRateFromStatePrices)
{
    const auto tree = EventTree::certain(3, 1.0 / 1.05);
    EXPECT_NEAR(risk_free_rate(tree, 0, 1).gross(), 1.05, 1e-12);
    EXPECT_NEAR(risk_free_rate(tree, 0, 3).gross(), std::pow(1.05, 3), 1e-12);
    EXPECT_THROW(risk_free_rate(tree, 0, 0), TimeOrderError);
}

TEST(Valuation, EmptyStreamIsWorthNothing)
{
    EXPECT_EQ(value_stream(two_state(), CashFlowStream{}, 0), 0.0);
}

TEST(Valuation, TruncationRejectsBadTimes)
{
    const auto tree = two_state();
    EXPECT_THROW(truncate_with_terminal(tree, CashFlowStream{}, 0), TimeOrderError);
    EXPECT_THROW(truncate_with_terminal(tree, CashFlowStream{}, 2), TimeOrderError);
}

TEST(ValuationProperty, MatchesPathSums)
{
    for (int c = 0; c < kCases; ++c) {
        Gen g(2000 + c);
        const auto tree = random_tree(g, g.integer(1, 4));
        const auto x = random_flow(g, tree, tree.horizon(), -50.0, 200.0);
        ASSERT_LT(rel_err(value(tree, x, 0), path_sum_value(tree, x)), 1e-10);
        ASSERT_LT(rel_err(expect(tree, x, 0), path_sum_expect(tree, x)), 1e-10);
    }
}

TEST(ValuationProperty, Linearity)
{
    for (int c = 0; c < kCases; ++c) {
        Gen g(3000 + c);
        const auto tree = random_tree(g, g.integer(1, 4));
        const int t = g.integer(1, tree.horizon());
        const auto x = random_flow(g, tree, t, -100.0, 100.0);
        const auto y = random_flow(g, tree, t, -100.0, 100.0);
        const double a = g.uniform(-3.0, 3.0);
        const double b = g.uniform(-3.0, 3.0);
        const double lhs = value(tree, a * x + b * y, 0);
        const double rhs = a * value(tree, x, 0) + b * value(tree, y, 0);
        ASSERT_LT(rel_err(lhs, rhs), 1e-10);
        const double le = expect(tree, a * x + b * y, 0);
        const double re = a * expect(tree, x, 0) + b * expect(tree, y, 0);
        ASSERT_LT(rel_err(le, re), 1e-10);
    }
}

TEST(ValuationProperty, Recursion)
{
    for (int c = 0; c < kCases; ++c) {
        Gen g(4000 + c);
        const auto tree = random_tree(g, g.integer(2, 4));
        const int t = tree.horizon();
        const int s = g.integer(1, t - 1);
        const auto x = random_flow(g, tree, t, 0.0, 100.0);
        // V_0(X_t) = V_0(V_s(X_t)) and the same for E.
        ASSERT_LT(rel_err(value(tree, x, 0), value(tree, conditional_value(tree, x, s), 0)), 1e-10);
        ASSERT_LT(rel_err(expect(tree, x, 0), expect(tree, conditional_expect(tree, x, s), 0)), 1e-10);
    }
}

TEST(ValuationProperty, TruncationPreservesValue)
{
    for (int c = 0; c < kCases; ++c) {
        Gen g(5000 + c);
        const auto tree = random_tree(g, g.integer(2, 4));
        CashFlowStream stream;
        for (int t = 1; t <= tree.horizon(); ++t) {
            if (g.integer(0, 3) > 0) {
                stream.add(random_flow(g, tree, t, -20.0, 80.0));
            }
        }
        const int T = g.integer(1, tree.horizon());
        const auto truncated = truncate_with_terminal(tree, stream, T);
        ASSERT_EQ(truncated.last_time(), T);
        ASSERT_LT(rel_err(value_stream(tree, truncated, 0), value_stream(tree, stream, 0)), 1e-10);
    }
}

TEST(ValuationProperty, ConstantsDiscountAtRiskFree)
{
    for (int c = 0; c < kCases; ++c) {
        Gen g(6000 + c);
        const auto tree = random_tree(g, g.integer(1, 4));
        const int t = tree.horizon();
        const double k = g.uniform(1.0, 500.0);
        const auto one = RandomCashFlow::constant(tree, t, 1.0);
        ASSERT_LT(rel_err(expect(tree, RandomCashFlow::constant(tree, t, k), 0), k), 1e-12);
        ASSERT_LT(rel_err(value(tree, RandomCashFlow::constant(tree, t, k), 0), k * value(tree, one, 0)), 1e-12);
        const auto prob = path_probabilities(tree, t);
        double total = 0.0;
        for (double p : prob.values()) {
            total += p;
        }
        ASSERT_NEAR(total, 1.0, 1e-12);
    }
}
