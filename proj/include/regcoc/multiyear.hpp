#pragma once

#include "regcoc/coc.hpp"
#include "regcoc/error.hpp"
#include "regcoc/event_tree.hpp"
#include "regcoc/gross_rate.hpp"
#include "regcoc/valuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace regcoc::multiyear {

// A T-year regulatory period with deterministic component rates.
//   rab[t]      RAB_t (expected), t = 0..T
//   r_x[t-1]    R_{0->t}(X_t),    t = 1..T
//   r_rab[t-1]  R_{0->t}(RAB_t),  t = 1..T
struct MultiYearScenario {
    std::vector<double> rab;
    std::vector<GrossRate> r_x;
    std::vector<GrossRate> r_rab;

    int periods() const { return static_cast<int>(r_x.size()); }

    void validate() const
    {
        if (r_x.empty()) {
            throw ContractError("regulatory period must be at least one year");
        }
        if (r_rab.size() != r_x.size() || rab.size() != r_x.size() + 1) {
            throw ContractError("scenario vectors have inconsistent lengths");
        }
        if (!(rab[0] > 0.0)) {
            throw ContractError("opening asset base must be positive");
        }
        for (std::size_t i = 0; i < r_x.size(); ++i) {
            if (!(r_x[i].gross() > 0.0) || !(r_rab[i].gross() > 0.0)) {
                throw ContractError("costs of capital must be positive");
            }
        }
    }

    // R_{0->t}(RAB_t) with the convention R_{0->0}(RAB_0) = 1.
    GrossRate rab_rate(int t) const { return t == 0 ? GrossRate(1.0) : r_rab[static_cast<std::size_t>(t) - 1]; }
    GrossRate x_rate(int t) const { return r_x[static_cast<std::size_t>(t) - 1]; }
};

// Forward parameters for allowances fixed at the start of the period.
struct ForwardParams {
    std::vector<GrossRate> r;  // R_t, t = 1..T
    std::vector<GrossRate> s;  // S_t, t = 1..T
};

// R_t = R_{0->t}(X_t) / R_{0->t-1}(RAB_{t-1}),  S_t = R_{0->t}(RAB_t) / R_{0->t-1}(RAB_{t-1}).
inline ForwardParams forward_params(const MultiYearScenario& s)
{
    s.validate();
    ForwardParams out;
    for (int t = 1; t <= s.periods(); ++t) {
        out.r.push_back(s.x_rate(t) / s.rab_rate(t - 1));
        out.s.push_back(s.rab_rate(t) / s.rab_rate(t - 1));
    }
    return out;
}

// E_0(X_t) = R_t RAB_{t-1} - RAB_t R_t / S_t for t = 1..T.
inline std::vector<double> allowance_path(const MultiYearScenario& s)
{
    const ForwardParams fp = forward_params(s);
    std::vector<double> out;
    for (std::size_t i = 0; i < fp.r.size(); ++i) {
        const double rt = fp.r[i].gross();
        out.push_back(rt * s.rab[i] - s.rab[i + 1] * (rt / fp.s[i].gross()));
    }
    return out;
}

// sum_t E_0(X_t) / R_{0->t}(X_t) + RAB_T / R_{0->T}(RAB_T) - RAB_0.
inline double present_value_residual(const MultiYearScenario& s, std::span<const double> allowances)
{
    s.validate();
    if (static_cast<int>(allowances.size()) != s.periods()) {
        throw ContractError("one allowance per year required");
    }
    double pv = s.rab.back() / s.r_rab.back().gross();
    for (int t = 1; t <= s.periods(); ++t) {
        pv += allowances[static_cast<std::size_t>(t) - 1] / s.x_rate(t).gross();
    }
    return pv - s.rab[0];
}

// Rate the naive one-year formula would need each year:
// (E_0(X_t) + RAB_t) / RAB_{t-1}.
inline std::vector<GrossRate> implied_naive_coc(const MultiYearScenario& s,
                                                std::span<const double> allowances)
{
    s.validate();
    if (static_cast<int>(allowances.size()) != s.periods()) {
        throw ContractError("one allowance per year required");
    }
    std::vector<GrossRate> out;
    for (std::size_t i = 0; i < allowances.size(); ++i) {
        if (s.rab[i] == 0.0) {
            throw ZeroRab("implied rate undefined for zero opening asset base in year " +
                          std::to_string(i + 1));
        }
        out.push_back(GrossRate((allowances[i] + s.rab[i + 1]) / s.rab[i]));
    }
    return out;
}

// Allowances with the closing asset base added to the final year.
inline std::vector<double> terminal_inclusive(std::span<const double> allowances, double rab_T)
{
    std::vector<double> out(allowances.begin(), allowances.end());
    if (out.empty()) {
        throw ContractError("no allowances");
    }
    out.back() += rab_T;
    return out;
}

inline double irr_residual(double rab0, std::span<const double> flows, double R)
{
    double pv = 0.0;
    double discount = 1.0;
    for (double f : flows) {
        discount /= R;
        pv += f * discount;
    }
    return pv - rab0;
}

// Sign changes in (-rab0, f_1, ..., f_T), zeros skipped. Exactly one change
// guarantees a unique positive IRR.
inline int outlay_sign_changes(double rab0, std::span<const double> flows)
{
    int changes = 0;
    double last = -rab0;
    for (double f : flows) {
        if (f == 0.0) {
            continue;
        }
        if ((f > 0.0) != (last > 0.0)) {
            ++changes;
        }
        last = f;
    }
    return changes;
}

// The single rate R with sum_t flows[t-1] / R^t = rab0, by bisection on a
// bracket grown from [1e-6, 2]. Stops when the residual is within tol or the
// bracket has shrunk to a few ulps.
inline GrossRate single_r_irr(double rab0, std::span<const double> flows, double tol = 1e-12)
{
    if (!(rab0 > 0.0)) {
        throw ContractError("opening asset base must be positive");
    }
    if (flows.empty()) {
        throw ContractError("IRR needs at least one flow");
    }
    for (double f : flows) {
        if (!std::isfinite(f)) {
            throw ContractError("IRR flows must be finite");
        }
    }
    if (outlay_sign_changes(rab0, flows) != 1) {
        throw NoSignChange("flows must change sign exactly once against the outlay");
    }
    double lo = 1e-6;
    double hi = 2.0;
    const double f_lo = irr_residual(rab0, flows, lo);
    for (int k = 0; (irr_residual(rab0, flows, hi) > 0.0) == (f_lo > 0.0); ++k) {
        if (k == 64) {
            throw NoSignChange("IRR bracket expansion found no sign change");
        }
        hi *= 2.0;
    }
    for (int k = 0; k < 400; ++k) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = irr_residual(rab0, flows, mid);
        if (std::abs(f_mid) <= tol || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * mid) {
            return GrossRate(mid);
        }
        if ((f_mid > 0.0) == (f_lo > 0.0)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return GrossRate(0.5 * (lo + hi));
}

// Naive single-parameter scheme: E_0(X_t) = R RAB_{t-1} - RAB_t.
inline std::vector<double> single_r_allowances(std::span<const double> rab, GrossRate R)
{
    if (rab.size() < 2) {
        throw ContractError("asset base path needs at least RAB_0 and RAB_1");
    }
    std::vector<double> out;
    for (std::size_t t = 1; t < rab.size(); ++t) {
        out.push_back(R.gross() * rab[t - 1] - rab[t]);
    }
    return out;
}

// The single parameter whose naive allowances are valued at exactly RAB_0 by
// the component rates. Solves the circularity jointly (the present value of
// the naive allowances is affine in R).
inline GrossRate consistent_single_r(const MultiYearScenario& s)
{
    s.validate();
    double numerator = s.rab[0] - s.rab.back() / s.r_rab.back().gross();
    double denominator = 0.0;
    for (int t = 1; t <= s.periods(); ++t) {
        const double d = s.x_rate(t).discount();
        numerator += s.rab[static_cast<std::size_t>(t)] * d;
        denominator += s.rab[static_cast<std::size_t>(t) - 1] * d;
    }
    if (denominator == 0.0) {
        throw ZeroDenominator("asset base path gives no weight to the single parameter");
    }
    return GrossRate(numerator / denominator);
}

// Parameters reset each year: A_{t-1->t} and B_{t-1->t}, node-wise at t-1.
struct AnnualParams {
    std::vector<RandomCashFlow> a;  // a[t-1] lives at time t-1
    std::vector<RandomCashFlow> b;
};

// A_{t-1->t} = R_{t-1->t}(X_t). B_{k->k+1} is the quotient that makes the
// nested expansion price the next payoff exactly:
//   B_{k->k+1} = prod_{j=0..k} R_{j->j+1}(V_{j+1->tau}(Y)) / prod_{j<k} B_{j->j+1}
// with Y = X_{k+2} (tau = k+2) for k < T-1 and Y = RAB_T (tau = T) for k = T-1.
inline AnnualParams annual_params(const EventTree& tree, const CashFlowStream& flows,
                                  const RandomCashFlow& rab_T)
{
    const int T = rab_T.time();
    if (T < 1) {
        throw ContractError("regulatory period must be at least one year");
    }
    if (tree.horizon() < T) {
        throw TimeOrderError("tree horizon shorter than the regulatory period");
    }
    for (int t = 1; t <= T; ++t) {
        if (!flows.contains(t)) {
            throw InvalidCashFlow("missing allowance flow for year " + std::to_string(t));
        }
    }
    auto guarded_coc = [&](const RandomCashFlow& x, int s, int t) {
        try {
            return holding_coc(tree, x, s, t);
        } catch (const ZeroPresentValue& e) {
            throw ZeroDenominator(std::string("annual parameter: ") + e.what());
        }
    };

    AnnualParams out;
    for (int t = 1; t <= T; ++t) {
        out.a.push_back(guarded_coc(flows.at(t), t - 1, t));
    }
    for (int k = 0; k < T; ++k) {
        const RandomCashFlow& target = k < T - 1 ? flows.at(k + 2) : rab_T;
        const int tau = target.time();
        std::vector<RandomCashFlow> factors;
        for (int j = 0; j <= k; ++j) {
            factors.push_back(guarded_coc(target, j, j + 1));
        }
        out.b.push_back(RandomCashFlow::from_nodes(tree, k, [&](NodeId n) {
            double numerator = 1.0;
            for (int j = 0; j <= k; ++j) {
                numerator *= factors[static_cast<std::size_t>(j)].at(tree, tree.ancestor(n, j));
            }
            double denominator = 1.0;
            for (int j = 0; j < k; ++j) {
                denominator *= out.b[static_cast<std::size_t>(j)].at(tree, tree.ancestor(n, j));
            }
            if (numerator == 0.0 || denominator == 0.0) {
                throw ZeroDenominator("B parameter quotient degenerate for payoff at time " +
                                      std::to_string(tau));
            }
            return numerator / denominator;
        }));
    }
    return out;
}

// Right-hand side of the nested expansion: what RAB_0 must be for the annual
// parameters to reproduce the given flows and closing asset base.
inline double expand_annual(const EventTree& tree, const CashFlowStream& flows,
                            const RandomCashFlow& rab_T, const AnnualParams& params)
{
    const int T = rab_T.time();
    if (static_cast<int>(params.a.size()) != T || static_cast<int>(params.b.size()) != T) {
        throw ContractError("annual parameters do not match the period length");
    }
    // Start from E_{top}(Y) / divisor at time `top`, then nest E_k(.) / B_{k->k+1} down to 0.
    auto nest = [&](const RandomCashFlow& y, const RandomCashFlow& divisor) {
        const int top = divisor.time();
        RandomCashFlow f = conditional_expect(tree, y, top).divided_by(divisor);
        for (int k = top - 1; k >= 0; --k) {
            f = conditional_expect(tree, f, k).divided_by(params.b[static_cast<std::size_t>(k)]);
        }
        return f.at(tree, tree.root());
    };
    double total = 0.0;
    for (int t = 1; t <= T; ++t) {
        total += nest(flows.at(t), params.a[static_cast<std::size_t>(t) - 1]);
    }
    total += nest(rab_T, params.b[static_cast<std::size_t>(T) - 1]);
    return total;
}

// E_{t-1}(X_t) = A RAB_{t-1} - E_{t-1}(RAB_t) A / B.
inline double allowance_annual(double rab_prev, double expected_rab, GrossRate a, GrossRate b)
{
    return a.gross() * rab_prev - expected_rab * (a.gross() / b.gross());
}

// Five-year illustration: RAB 1000 -> 500, R_{0->t}(X_t) = 1.05^{t-1} 1.2,
// R_{0->t}(RAB_t) = 1.05^t.
inline MultiYearScenario illustrative_five_year_scenario()
{
    MultiYearScenario s;
    s.rab = {1000.0, 900.0, 800.0, 700.0, 600.0, 500.0};
    for (int t = 1; t <= 5; ++t) {
        s.r_x.push_back(GrossRate(std::pow(1.05, t - 1) * 1.20));
        s.r_rab.push_back(GrossRate(std::pow(1.05, t)));
    }
    return s;
}

} // namespace regcoc::multiyear
