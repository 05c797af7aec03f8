#pragma once

#include "regcoc/coc.hpp"
#include "regcoc/error.hpp"
#include "regcoc/event_tree.hpp"
#include "regcoc/gross_rate.hpp"
#include "regcoc/multiyear.hpp"
#include "regcoc/valuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace regcoc::debt {

// Zero-coupon instrument maturing at `payoff.time()`. Default states are simply
// nodes where the payoff is below face.
class DebtInstrument {
public:
    explicit DebtInstrument(RandomCashFlow payoff) : payoff_(std::move(payoff))
    {
        if (payoff_.time() < 1) {
            throw ContractError("debt instrument must mature after time 0");
        }
        for (double v : payoff_.values()) {
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw InvalidCashFlow("debt payoffs must be finite and nonnegative");
            }
        }
    }

    static DebtInstrument riskless(const EventTree& tree, int maturity, double face)
    {
        return DebtInstrument(RandomCashFlow::constant(tree, maturity, face));
    }

    // Pays recovery * face on every path that ever takes branch `default_branch`
    // (default is absorbing), face otherwise.
    static DebtInstrument defaultable(const EventTree& tree, int maturity, double face,
                                      double recovery, std::size_t default_branch)
    {
        if (recovery < 0.0 || recovery > 1.0) {
            throw OutOfRange("recovery must lie in [0, 1]");
        }
        return DebtInstrument(RandomCashFlow::from_nodes(tree, maturity, [&](NodeId n) {
            for (NodeId c = n; tree.parent(c); c = *tree.parent(c)) {
                const auto siblings = tree.children(*tree.parent(c));
                if (default_branch < siblings.size() && siblings[default_branch] == c) {
                    return recovery * face;
                }
            }
            return face;
        }));
    }

    int maturity() const noexcept { return payoff_.time(); }
    const RandomCashFlow& payoff() const noexcept { return payoff_; }

private:
    RandomCashFlow payoff_;
};

// One instrument per maturity.
using InstrumentSet = std::map<int, DebtInstrument>;

inline InstrumentSet make_instruments(const EventTree& tree, const std::vector<DebtInstrument>& list)
{
    InstrumentSet out;
    for (const auto& inst : list) {
        inst.payoff().check(tree);
        if (!out.emplace(inst.maturity(), inst).second) {
            throw ContractError("two instruments mature at time " + std::to_string(inst.maturity()));
        }
    }
    return out;
}

// Quantities D_{s->t}: units of the instrument maturing at t held from
// rebalance time s.
class DebtPortfolio {
public:
    void set(int s, int t, double d)
    {
        if (s < 0 || t <= s) {
            throw ContractError("holding needs maturity after rebalance time");
        }
        if (!std::isfinite(d)) {
            throw ContractError("holding quantity must be finite");
        }
        holdings_[{s, t}] = d;
    }

    double quantity(int s, int t) const
    {
        const auto it = holdings_.find({s, t});
        return it == holdings_.end() ? 0.0 : it->second;
    }

    // Latest rebalance time at or before `time`, if any.
    std::optional<int> snapshot_at(int time) const
    {
        std::optional<int> out;
        for (const auto& [key, d] : holdings_) {
            if (key.first <= time) {
                out = std::max(out.value_or(key.first), key.first);
            }
        }
        return out;
    }

    // Holdings (t, D) taken at rebalance time s.
    std::vector<std::pair<int, double>> snapshot(int s) const
    {
        std::vector<std::pair<int, double>> out;
        for (const auto& [key, d] : holdings_) {
            if (key.first == s) {
                out.emplace_back(key.second, d);
            }
        }
        return out;
    }

    const std::map<std::pair<int, int>, double>& holdings() const noexcept { return holdings_; }
    bool empty() const noexcept { return holdings_.empty(); }

private:
    std::map<std::pair<int, int>, double> holdings_;
};

namespace detail {

inline const DebtInstrument& find(const InstrumentSet& instruments, int t)
{
    const auto it = instruments.find(t);
    if (it == instruments.end()) {
        throw MissingInstrument("no instrument matures at time " + std::to_string(t));
    }
    return it->second;
}

} // namespace detail

// Value at `at` of the snapshot in force there: the holdings of the latest
// rebalance at or before that time, restricted to maturities still ahead.
inline double portfolio_value(const EventTree& tree, const InstrumentSet& instruments,
                              const DebtPortfolio& p, NodeId at)
{
    regcoc::detail::check_node(tree, at);
    const int now = tree.time(at);
    const auto s = p.snapshot_at(now);
    if (!s) {
        return 0.0;
    }
    double total = 0.0;
    for (const auto& [t, d] : p.snapshot(*s)) {
        if (t > now) {
            total += d * value(tree, detail::find(instruments, t).payoff(), at);
        }
    }
    return total;
}

struct DebtFlow {
    RandomCashFlow x1;  // X^D_1
    RandomCashFlow v1;  // V^D_1
};

// Net payoff and remaining value at time 1 when the time-0 holdings D_{0->t}
// become D_{1->t}. Maturities missing from the rebalance are sold.
inline DebtFlow debt_flow_period1(const EventTree& tree, const InstrumentSet& instruments,
                                  const DebtPortfolio& p, const DebtPortfolio& rebalanced)
{
    if (tree.horizon() < 1) {
        throw TimeOrderError("debt flows need a tree of horizon at least 1");
    }
    for (const auto& [key, d] : rebalanced.holdings()) {
        if (key.first != 1) {
            throw ContractError("rebalanced holdings must be taken at time 1");
        }
        detail::find(instruments, key.second);
    }
    DebtFlow out{RandomCashFlow::constant(tree, 1, 0.0), RandomCashFlow::constant(tree, 1, 0.0)};
    std::map<int, bool> maturities;
    for (const auto& [t, d] : p.snapshot(0)) {
        maturities[t] = true;
    }
    for (const auto& [key, d] : rebalanced.holdings()) {
        maturities[key.second] = true;
    }
    for (const auto& [t, unused] : maturities) {
        const auto& inst = detail::find(instruments, t);
        const double d0 = p.quantity(0, t);
        if (t == 1) {
            out.x1 = out.x1 + d0 * inst.payoff();
            continue;
        }
        const double d1 = rebalanced.quantity(1, t);
        const auto v = conditional_value(tree, inst.payoff(), 1);
        out.x1 = out.x1 + (d0 - d1) * v;
        out.v1 = out.v1 + d1 * v;
    }
    return out;
}

// Rebalance that keeps every time-0 holding still outstanding at time 1.
inline DebtPortfolio no_rebalance(const DebtPortfolio& p)
{
    DebtPortfolio out;
    for (const auto& [t, d] : p.snapshot(0)) {
        if (t >= 2) {
            out.set(1, t, d);
        }
    }
    return out;
}

// max over candidates of |V_0(X^D_1 + V^D_1) - V^D_0|.
inline double rebalance_invariance_check(const EventTree& tree, const InstrumentSet& instruments,
                                         const DebtPortfolio& p,
                                         const std::vector<DebtPortfolio>& candidates)
{
    const double v0 = portfolio_value(tree, instruments, p, tree.root());
    double worst = 0.0;
    for (const auto& r : candidates) {
        const auto flow = debt_flow_period1(tree, instruments, p, r);
        worst = std::max(worst, std::abs(value(tree, flow.x1 + flow.v1, tree.root()) - v0));
    }
    return worst;
}

enum class DebtCocMode {
    full,             // every term computed from the tree
    observable_only,  // only prices and maturing payoffs; long-instrument rates withheld
};

struct InstrumentTerm {
    int maturity = 0;
    double quantity = 0.0;
    double weight = 0.0;              // D_{0->t} V_0(I_t) / V^D_0
    std::optional<GrossRate> rate;    // R_{0->1}(I_1) or R_{0->1}(V_{1->t}(I_t))
};

struct DebtCoc {
    double value0 = 0.0;             // V^D_0
    std::optional<GrossRate> rate;   // absent when any needed term is withheld
    std::vector<InstrumentTerm> terms;
};

// One-period cost of capital of the debt portfolio, assembled as the
// value-weighted average of the instruments' one-period rates.
inline DebtCoc debt_coc(const EventTree& tree, const InstrumentSet& instruments, const DebtPortfolio& p,
                        DebtCocMode mode = DebtCocMode::full)
{
    if (tree.horizon() < 1) {
        throw TimeOrderError("debt cost of capital needs a tree of horizon at least 1");
    }
    DebtCoc out;
    out.value0 = portfolio_value(tree, instruments, p, tree.root());
    if (out.value0 == 0.0) {
        throw ZeroPortfolioValue("debt portfolio has zero value");
    }
    double assembled = 0.0;
    bool complete = true;
    for (const auto& [t, d] : p.snapshot(0)) {
        const auto& inst = detail::find(instruments, t);
        const double v = value(tree, inst.payoff(), tree.root());
        InstrumentTerm term{t, d, d * v / out.value0, std::nullopt};
        if (v != 0.0 && (t == 1 || mode == DebtCocMode::full)) {
            term.rate = coc_of_holding(tree, inst.payoff(), tree.root(), 1);
        }
        if (term.rate) {
            assembled += term.weight * term.rate->gross();
        } else if (v != 0.0) {
            complete = false;
        }
        out.terms.push_back(term);
    }
    if (complete) {
        out.rate = GrossRate(assembled);
    }
    return out;
}

struct YieldComparison {
    GrossRate ytm;
    GrossRate coc;
};

// Per-period gross rates: (face / price)^{1/t} and (E(I_t) / price)^{1/t}.
inline YieldComparison ytm_vs_coc(double price, double expected, double face, int t)
{
    if (!(price > 0.0)) {
        throw ContractError("bond price must be positive");
    }
    if (t < 1) {
        throw ContractError("maturity must be at least one period");
    }
    if (expected < 0.0 || face < 0.0) {
        throw ContractError("expected payoff and face must be nonnegative");
    }
    const double k = 1.0 / t;
    return {GrossRate(std::pow(face / price, k)), GrossRate(std::pow(expected / price, k))};
}

inline YieldComparison ytm_vs_coc(const EventTree& tree, const DebtInstrument& inst, double face)
{
    const auto& x = inst.payoff();
    return ytm_vs_coc(value(tree, x, tree.root()), expect(tree, x, tree.root()), face, x.time());
}

// Firm time-1 flow X_1 + RAB_1 split into equity X^E_1 + RAB^E_1 and debt
// X^D_1 + V^D_1.
class FirmSplit {
public:
    static FirmSplit make(const EventTree& tree, const RandomCashFlow& firm, const RandomCashFlow& equity,
                          const RandomCashFlow& debt, double rel_tol = 1e-9)
    {
        firm.check(tree);
        equity.check(tree);
        debt.check(tree);
        if (firm.time() != equity.time() || firm.time() != debt.time()) {
            throw TimeOrderError("firm, equity and debt flows must share a time");
        }
        for (std::size_t i = 0; i < firm.size(); ++i) {
            const double gap = std::abs(firm[i] - equity[i] - debt[i]);
            if (gap > rel_tol * std::max(1.0, std::abs(firm[i]))) {
                throw DecompositionMismatch("equity plus debt differs from the firm flow in slot " +
                                            std::to_string(i));
            }
        }
        return FirmSplit(firm, equity, debt);
    }

    static FirmSplit from_parts(const EventTree& tree, const RandomCashFlow& equity, const RandomCashFlow& debt)
    {
        return make(tree, equity + debt, equity, debt);
    }

    const RandomCashFlow& firm() const noexcept { return firm_; }
    const RandomCashFlow& equity() const noexcept { return equity_; }
    const RandomCashFlow& debt() const noexcept { return debt_; }

private:
    FirmSplit(RandomCashFlow f, RandomCashFlow e, RandomCashFlow d)
        : firm_(std::move(f)), equity_(std::move(e)), debt_(std::move(d)) {}

    RandomCashFlow firm_;
    RandomCashFlow equity_;
    RandomCashFlow debt_;
};

// One-year WACC: value-weighted average of the equity and debt rates, alpha
// being the equity weight.
inline WeightedAverage wacc_one_year(const EventTree& tree, const FirmSplit& split)
{
    return wa_value_weights(tree, split.equity(), split.debt());
}

struct EquityScenario {
    double rab0 = 0.0;
    double rab1_e = 0.0;     // E_0(RAB^E_1)
    GrossRate r_xe;          // R_{0->1}(X^E_1)
    GrossRate r_rabe;        // R_{0->1}(RAB^E_1)
    double debt_value0 = 0.0;

    void validate() const
    {
        if (!(r_xe.gross() > 0.0) || !(r_rabe.gross() > 0.0)) {
            throw ContractError("equity costs of capital must be positive");
        }
    }
};

// E_0(X^E_1) = RAB_0 R(X^E) - (E_0(RAB^E_1) - R(RAB^E) V^D_0) R(X^E) / R(RAB^E).
inline double equity_allowance(const EquityScenario& s)
{
    s.validate();
    const double rx = s.r_xe.gross();
    const double rr = s.r_rabe.gross();
    return s.rab0 * rx - (s.rab1_e - rr * s.debt_value0) * (rx / rr);
}

// Multi-year split of a regulated stream into debt and equity streams with
// openings D_0 and E_0 (RAB_0 = D_0 + E_0).
struct WaccInstance {
    std::vector<double> debt;    // f^D_1..f^D_T
    std::vector<double> equity;  // f^E_1..f^E_T
    double debt0 = 0.0;
    double equity0 = 0.0;

    double rab0() const { return debt0 + equity0; }

    std::vector<double> combined() const
    {
        if (debt.size() != equity.size() || debt.empty()) {
            throw ContractError("debt and equity streams need the same positive length");
        }
        std::vector<double> out(debt.size());
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = debt[i] + equity[i];
        }
        return out;
    }
};

struct WaccCounterexample {
    GrossRate r;    // single parameter of the combined stream
    GrossRate r_e;
    GrossRate r_d;
    double value_weight = 0.0;       // E_0 / RAB_0
    // min over the alpha grid of |sum_t f_t / R_a^t - RAB_0|, R_a = a R_E + (1-a) R_D
    double min_pricing_residual = 0.0;
    double best_alpha = 0.0;
    // min over the alpha grid of sum_t |f_t / R_a^t - f^E_t / R_E^t - f^D_t / R_D^t|
    double min_period_residual = 0.0;
    double best_period_alpha = 0.0;
};

inline constexpr int kAlphaGridSteps = 10000;

// Whether the single parameter of the combined stream can stand in for a
// weighted average of the equity and debt parameters.
inline WaccCounterexample multiyear_wacc_counterexample(const WaccInstance& inst)
{
    const std::vector<double> f = inst.combined();
    const double rab0 = inst.rab0();
    WaccCounterexample out{multiyear::single_r_irr(rab0, f), multiyear::single_r_irr(inst.equity0, inst.equity),
                           multiyear::single_r_irr(inst.debt0, inst.debt)};
    out.value_weight = inst.equity0 / rab0;
    out.min_pricing_residual = std::numeric_limits<double>::infinity();
    out.min_period_residual = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kAlphaGridSteps; ++i) {
        const double a = i / static_cast<double>(kAlphaGridSteps);
        const double ra = a * out.r_e.gross() + (1.0 - a) * out.r_d.gross();
        const double pricing = std::abs(multiyear::irr_residual(rab0, f, ra));
        double period = 0.0;
        for (std::size_t k = 0; k < f.size(); ++k) {
            const double n = static_cast<double>(k + 1);
            period += std::abs(f[k] / std::pow(ra, n) - inst.equity[k] / std::pow(out.r_e.gross(), n) -
                               inst.debt[k] / std::pow(out.r_d.gross(), n));
        }
        if (pricing < out.min_pricing_residual) {
            out.min_pricing_residual = pricing;
            out.best_alpha = a;
        }
        if (period < out.min_period_residual) {
            out.min_period_residual = period;
            out.best_period_alpha = a;
        }
    }
    return out;
}

// Two-year instance: risk-free debt at 5% (400 opening), risky equity at 20%
// (600 opening), with equity paying more of its value in the second year.
inline WaccInstance shipped_counterexample()
{
    return WaccInstance{{20.0, 420.0}, {240.0, 576.0}, 400.0, 600.0};
}

// One-year control: the same openings and rates over a single year.
inline WaccInstance one_year_control()
{
    return WaccInstance{{420.0}, {720.0}, 400.0, 600.0};
}

} // namespace regcoc::debt
