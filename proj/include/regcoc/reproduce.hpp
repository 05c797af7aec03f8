#pragma once

#include "regcoc/bbm.hpp"
#include "regcoc/debt.hpp"
#include "regcoc/error.hpp"
#include "regcoc/io.hpp"
#include "regcoc/multiyear.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

// Built-in reproductions of the published tables and figure coordinates. Each
// row carries a `discrepancies` cell listing any printed value that differs
// from the computed one by more than the print tolerance.
namespace regcoc::reproduce {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string to_csv() const
    {
        std::string out;
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                out += (i ? "," : "") + cells[i];
            }
            out += '\n';
        };
        line(header);
        for (const auto& r : rows) {
            line(r);
        }
        return out;
    }

    io::json to_json() const
    {
        io::json out = io::json::array();
        for (const auto& r : rows) {
            io::json row = io::json::object();
            for (std::size_t i = 0; i < header.size(); ++i) {
                row[header[i]] = r[i];
            }
            out.push_back(row);
        }
        return out;
    }
};

// A value as printed in the publication, with its number of decimals.
struct Printed {
    double value = 0.0;
    int decimals = 2;

    // Half a unit in the last printed place, never tighter than 0.005 nor
    // looser than 0.05.
    double tolerance() const { return std::clamp(0.5 * std::pow(10.0, -decimals), 0.005, 0.05); }
};

class DiscrepancyLog {
public:
    void check(const std::string& label, double computed, const Printed& printed)
    {
        if (std::abs(computed - printed.value) > printed.tolerance()) {
            notes_.push_back(label + " printed " + io::fixed(printed.value, printed.decimals) + " computed " +
                             io::fixed(computed, std::max(printed.decimals, 2)));
        }
    }

    // Semicolon-separated notes, then cleared.
    std::string take()
    {
        std::string out;
        for (std::size_t i = 0; i < notes_.size(); ++i) {
            out += (i ? "; " : "") + notes_[i];
        }
        total_ += static_cast<int>(notes_.size());
        notes_.clear();
        return out;
    }

    int total() const noexcept { return total_; }

private:
    std::vector<std::string> notes_;
    int total_ = 0;
};

struct Table1Row {
    double rab0;
    double rab1;
    Printed allowance;
    Printed combined;
};

inline const std::vector<Table1Row>& table1_printed()
{
    static const std::vector<Table1Row> rows{
        {1000.0, 900.0, {171.83, 2}, {7.14, 2}},
        {500.0, 400.0, {142.86, 2}, {8.57, 2}},
        {1000.0, 800.0, {285.71, 2}, {8.57, 2}},
        {400.0, 200.0, {251.73, 2}, {12.86, 2}},
    };
    return rows;
}

inline Table table1()
{
    const GrossRate r_x(1.20);
    const GrossRate r_rab(1.05);
    Table t{{"rab0", "rab1", "r_x_pct", "r_rab_pct", "allowance", "combined_coc_pct", "discrepancies"}, {}};
    DiscrepancyLog log;
    for (const auto& row : table1_printed()) {
        const bbm::OneYearScenario s{row.rab0, row.rab1, r_x, r_rab};
        const double e = bbm::allowance_component(s);
        const GrossRate combined = bbm::combined_coc(s, e);
        // The circular standard scheme must land on the same allowance.
        const double fixed_point = bbm::solve_standard_fixed_point(s).allowance;
        if (std::abs(fixed_point - e) > 1e-9 * s.rab0) {
            throw ContractError("standard-scheme fixed point disagrees with the component allowance");
        }
        log.check("allowance", e, row.allowance);
        log.check("combined_coc_pct", combined.percent(), row.combined);
        t.rows.push_back({io::fixed(row.rab0, 2), io::fixed(row.rab1, 2), io::percent(r_x), io::percent(r_rab),
                          io::fixed(e, 2), io::percent(combined), log.take()});
    }
    return t;
}

struct Table2Printed {
    std::vector<Printed> r_x;    // t = 1..5
    std::vector<Printed> r_rab;  // t = 1..5
    std::vector<Printed> allowance;
    std::vector<Printed> implied;
    double r_t = 1.20;
    double s_t = 1.05;
};

inline const Table2Printed& table2_printed()
{
    static const Table2Printed p{
        {{1.200, 3}, {1.260, 3}, {1.323, 3}, {1.389, 3}, {1.459, 3}},
        {{1.05, 2}, {1.103, 3}, {1.158, 3}, {1.216, 3}, {1.276, 3}},
        {{171.43, 2}, {165.71, 2}, {160.00, 2}, {154.29, 2}, {148.57, 2}},
        {{7.14, 2}, {7.30, 2}, {7.50, 2}, {7.76, 2}, {8.10, 2}},
    };
    return p;
}

inline Table table2()
{
    const auto s = multiyear::illustrative_five_year_scenario();
    const auto fp = multiyear::forward_params(s);
    const auto e = multiyear::allowance_path(s);
    if (std::abs(multiyear::present_value_residual(s, e)) > 1e-9 * s.rab[0]) {
        throw ContractError("forward allowances are not valued at the opening asset base");
    }
    const auto implied = multiyear::implied_naive_coc(s, e);
    const auto& p = table2_printed();
    const int T = s.periods();

    Table t{{"row", "t0", "t1", "t2", "t3", "t4", "t5", "discrepancies"}, {}};
    DiscrepancyLog log;
    auto row = [&](const std::string& name, std::optional<std::string> t0, auto&& cell) {
        std::vector<std::string> r{name, t0.value_or("")};
        for (int k = 1; k <= T; ++k) {
            r.push_back(cell(k));
        }
        r.push_back(log.take());
        t.rows.push_back(std::move(r));
    };
    auto at = [](const auto& v, int k) { return v[static_cast<std::size_t>(k) - 1]; };

    row("rab", io::fixed(s.rab[0], 2), [&](int k) { return io::fixed(s.rab[static_cast<std::size_t>(k)], 2); });
    row("r_x", io::fixed(1.0, 3), [&](int k) {
        log.check("t" + std::to_string(k), at(s.r_x, k).gross(), at(p.r_x, k));
        return io::fixed(at(s.r_x, k).gross(), 3);
    });
    row("r_rab", io::fixed(1.0, 3), [&](int k) {
        log.check("t" + std::to_string(k), at(s.r_rab, k).gross(), at(p.r_rab, k));
        return io::fixed(at(s.r_rab, k).gross(), 3);
    });
    row("R_t", std::nullopt, [&](int k) {
        log.check("t" + std::to_string(k), at(fp.r, k).gross(), {p.r_t, 2});
        return io::fixed(at(fp.r, k).gross(), 2);
    });
    row("S_t", std::nullopt, [&](int k) {
        log.check("t" + std::to_string(k), at(fp.s, k).gross(), {p.s_t, 2});
        return io::fixed(at(fp.s, k).gross(), 2);
    });
    row("allowance", std::nullopt, [&](int k) {
        log.check("t" + std::to_string(k), at(e, k), at(p.allowance, k));
        return io::fixed(at(e, k), 2);
    });
    row("implied_coc_pct", std::nullopt, [&](int k) {
        log.check("t" + std::to_string(k), at(implied, k).percent(), at(p.implied, k));
        return io::percent(at(implied, k));
    });
    return t;
}

inline const std::vector<Printed>& figure2_left_printed()
{
    static const std::vector<Printed> v{{5.00, 2}, {5.63, 2}, {6.21, 2}, {6.74, 2}, {7.23, 2},
                                        {7.69, 2}, {8.12, 2}, {8.52, 2}, {8.89, 2}, {9.24, 2},
                                        {9.57, 2}, {9.87, 2}, {10.16, 2}};
    return v;
}

inline Table figure2_left()
{
    const auto points = bbm::figure2_left_series(GrossRate(1.20), GrossRate(1.05), 1000.0,
                                                 bbm::default_allowance_grid());
    const auto& printed = figure2_left_printed();
    if (points.size() != printed.size()) {
        throw ContractError("allowance grid does not match the published coordinates");
    }
    Table t{{"allowance", "combined_coc_pct", "discrepancies"}, {}};
    DiscrepancyLog log;
    for (std::size_t i = 0; i < points.size(); ++i) {
        log.check("combined_coc_pct", points[i].combined.percent(), printed[i]);
        t.rows.push_back({io::fixed(points[i].allowance, 2), io::percent(points[i].combined), log.take()});
    }
    return t;
}

inline const std::vector<Printed>& figure2_right_printed()
{
    static const std::vector<Printed> v{{8.3, 1}, {9.03, 2}, {10.25, 2}, {12.68, 2}, {20.0, 0}};
    return v;
}

inline constexpr Printed kFigure2RightCashFlow{263.97, 2};

inline Table figure2_right()
{
    const auto path = bbm::figure2_right_series(1000.0, 5, GrossRate(1.20), GrossRate(1.05));
    const auto& printed = figure2_right_printed();
    if (std::abs(path.rab.back()) > 1e-6) {
        throw ContractError("constant allowance does not run the asset base down to zero");
    }
    Table t{{"t", "rab_open", "cash_flow", "combined_coc_pct", "discrepancies"}, {}};
    DiscrepancyLog log;
    for (std::size_t i = 0; i < path.combined.size(); ++i) {
        log.check("cash_flow", path.cash_flow, kFigure2RightCashFlow);
        log.check("combined_coc_pct", path.combined[i].percent(), printed[i]);
        t.rows.push_back({std::to_string(i), io::fixed(path.rab[i], 2), io::fixed(path.cash_flow, 2),
                          io::percent(path.combined[i]), log.take()});
    }
    return t;
}

inline Table counterexample()
{
    Table t{{"instance", "T", "rab0", "r_pct", "r_equity_pct", "r_debt_pct", "value_weight", "min_pricing_residual",
             "best_alpha", "min_period_residual", "best_period_alpha", "discrepancies"},
            {}};
    auto add = [&](const std::string& name, const debt::WaccInstance& inst) {
        const auto c = debt::multiyear_wacc_counterexample(inst);
        t.rows.push_back({name, std::to_string(inst.debt.size()), io::fixed(inst.rab0(), 2), io::percent(c.r, 4),
                          io::percent(c.r_e, 4), io::percent(c.r_d, 4), io::fixed(c.value_weight, 4),
                          fmt::format("{:.6e}", c.min_pricing_residual), io::fixed(c.best_alpha, 4),
                          fmt::format("{:.6e}", c.min_period_residual), io::fixed(c.best_period_alpha, 4), ""});
    };
    add("two_year", debt::shipped_counterexample());
    add("one_year_control", debt::one_year_control());
    return t;
}

inline const std::vector<std::string>& targets()
{
    static const std::vector<std::string> v{"table1", "table2", "figure2-left", "figure2-right", "counterexample"};
    return v;
}

inline Table run(const std::string& target)
{
    if (target == "table1") return table1();
    if (target == "table2") return table2();
    if (target == "figure2-left") return figure2_left();
    if (target == "figure2-right") return figure2_right();
    if (target == "counterexample") return counterexample();
    throw InputError("unknown reproduction target '" + target + "'");
}

} // namespace regcoc::reproduce
