#pragma once

#include "regcoc/coc.hpp"
#include "regcoc/error.hpp"
#include "regcoc/gross_rate.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

// One-year Building Block Model: the standard scheme driven by the combined
// cost of capital R(X_1 + RAB_1), and the component-wise scheme driven by
// separate rates for the one-period cash flow and the closing asset base.
namespace regcoc::bbm {

struct OneYearScenario {
    double rab0 = 0.0;           // opening asset base RAB_0
    double rab1_expected = 0.0;  // E_0(RAB_1)
    GrossRate r_x;               // R_{0->1}(X_1)
    GrossRate r_rab;             // R_{0->1}(RAB_1)

    void validate() const
    {
        if (!(rab0 > 0.0)) {
            throw ContractError("opening asset base must be positive");
        }
        if (!std::isfinite(rab1_expected)) {
            throw ContractError("closing asset base must be finite");
        }
        if (!(r_x.gross() > 0.0) || !(r_rab.gross() > 0.0)) {
            throw ContractError("component costs of capital must be positive");
        }
    }
};

struct BuildingBlockDecomposition {
    double revenue = 0.0;
    double opex = 0.0;
    double capex = 0.0;
    double depreciation = 0.0;  // RAB_0 + K_1 - RAB_1
};

// E_0(X_1) = R(X_1) RAB_0 - E_0(RAB_1) R(X_1) / R(RAB_1). No circularity:
// R(X_1) does not depend on the level of X_1.
inline double allowance_component(const OneYearScenario& s)
{
    s.validate();
    return s.r_x.gross() * s.rab0 - s.rab1_expected * (s.r_x.gross() / s.r_rab.gross());
}

// R(X_1 + RAB_1) for a given allowance, by expectation-weighted harmonic mean.
inline GrossRate combined_coc(const OneYearScenario& s, double e_x1)
{
    s.validate();
    return combine_by_expectation(e_x1, s.r_x, s.rab1_expected, s.r_rab).rate;
}

// E_0(X_1) = R(X_1 + RAB_1) RAB_0 - E_0(RAB_1).
inline double allowance_standard(double rab0, double rab1_expected, GrossRate r_combined)
{
    if (!(r_combined.gross() > 0.0)) {
        throw ContractError("combined cost of capital must be positive");
    }
    return r_combined.gross() * rab0 - rab1_expected;
}

struct FixedPointResult {
    double allowance = 0.0;
    int iterations = 0;
};

inline constexpr double kFixedPointDamping = 0.5;
inline constexpr int kFixedPointMaxIter = 10000;

// Solves the circular standard scheme: the allowance sets the combined rate,
// which sets the allowance. Damped iteration from 0; stops once the allowance
// implied by successive combined rates changes by less than tol.
inline FixedPointResult solve_standard_fixed_point(const OneYearScenario& s, double tol = 1e-12,
                                                   int max_iter = kFixedPointMaxIter)
{
    if (!(tol > 0.0)) {
        throw ContractError("tolerance must be positive");
    }
    s.validate();
    // With nothing left at year end the combined rate is R(X) for any nonzero
    // allowance, and the iteration's zero start would have no combined rate.
    if (s.rab1_expected == 0.0) {
        return {s.rab0 * s.r_x.gross(), 1};
    }
    auto implied = [&](double e) {
        return allowance_standard(s.rab0, s.rab1_expected, combined_coc(s, e));
    };
    double e = 0.0;
    double previous = implied(e);
    for (int k = 1; k <= max_iter; ++k) {
        e += kFixedPointDamping * (previous - e);
        const double next = implied(e);
        if (std::abs(next - previous) < tol) {
            return {next, k};
        }
        previous = next;
    }
    throw NonConvergence("standard-scheme fixed point did not converge in " +
                         std::to_string(max_iter) + " iterations");
}

// Revenue = return on capital + opex + return of capital, using the combined
// rate that is consistent with the component allowance.
inline BuildingBlockDecomposition revenue_allowance(const OneYearScenario& s, double opex,
                                                    double capex)
{
    const GrossRate r_combined = combined_coc(s, allowance_component(s));
    BuildingBlockDecomposition out;
    out.opex = opex;
    out.capex = capex;
    out.depreciation = s.rab0 + capex - s.rab1_expected;
    out.revenue = r_combined.net() * s.rab0 + opex + out.depreciation;
    return out;
}

// Scenario whose rates come from payoffs on a tree: the shape of X_1 (any
// scale) and a possibly stochastic closing asset base.
inline OneYearScenario scenario_from_tree(const EventTree& tree, double rab0,
                                          const RandomCashFlow& x_shape, const RandomCashFlow& rab1)
{
    if (x_shape.time() != 1 || rab1.time() != 1) {
        throw TimeOrderError("one-year scenario needs time-1 payoffs");
    }
    return OneYearScenario{rab0, expect(tree, rab1, tree.root()), cost_of_capital(tree, x_shape),
                           cost_of_capital(tree, rab1)};
}

struct CombinedPoint {
    double allowance = 0.0;
    GrossRate combined;
};

// Combined rate as a function of the allowance, all else fixed.
inline std::vector<CombinedPoint> figure2_left_series(GrossRate r_x, GrossRate r_rab,
                                                      double rab1_expected,
                                                      const std::vector<double>& grid)
{
    // rab0 does not enter the combined rate; any positive value validates.
    const OneYearScenario s{1.0, rab1_expected, r_x, r_rab};
    std::vector<CombinedPoint> out;
    out.reserve(grid.size());
    for (double e : grid) {
        out.push_back({e, combined_coc(s, e)});
    }
    return out;
}

inline std::vector<double> default_allowance_grid()
{
    std::vector<double> grid;
    for (int e = 0; e <= 600; e += 50) {
        grid.push_back(e);
    }
    return grid;
}

struct ConstantAllowancePath {
    double cash_flow = 0.0;            // constant E_t(X_{t+1})
    std::vector<double> rab;           // RAB_0 .. RAB_T
    std::vector<GrossRate> combined;   // R_{t->t+1}(X_{t+1} + RAB_{t+1}), t = 0..T-1
};

// Asset base run down to zero over `life` years with a constant allowance under
// the component scheme: RAB_t = R(RAB) (RAB_{t-1} - c / R(X)).
inline ConstantAllowancePath figure2_right_series(double rab0, int life, GrossRate r_x,
                                                  GrossRate r_rab, double tol = 1e-10)
{
    if (life < 1) {
        throw ContractError("asset life must be at least one year");
    }
    if (!(rab0 > 0.0)) {
        throw ContractError("opening asset base must be positive");
    }
    auto closing = [&](double c) {
        double rab = rab0;
        for (int t = 0; t < life; ++t) {
            rab = r_rab.gross() * (rab - c / r_x.gross());
        }
        return rab;
    };
    double lo = 0.0;
    double hi = r_x.gross() * rab0;
    for (int k = 0; closing(lo) * closing(hi) > 0.0; ++k) {
        if (k == 200) {
            throw NoSolution("no constant allowance brackets a zero closing asset base");
        }
        hi *= 2.0;
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if ((closing(mid) > 0.0) == (closing(lo) > 0.0)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    ConstantAllowancePath out;
    out.cash_flow = 0.5 * (lo + hi);
    out.rab.push_back(rab0);
    for (int t = 0; t < life; ++t) {
        out.rab.push_back(r_rab.gross() * (out.rab.back() - out.cash_flow / r_x.gross()));
    }
    for (int t = 0; t < life; ++t) {
        if (out.rab[static_cast<std::size_t>(t)] == 0.0) {
            throw ZeroRab("asset base reached zero before the end of life");
        }
        out.combined.push_back(GrossRate((out.cash_flow + out.rab[static_cast<std::size_t>(t) + 1]) /
                                         out.rab[static_cast<std::size_t>(t)]));
    }
    return out;
}

} // namespace regcoc::bbm
