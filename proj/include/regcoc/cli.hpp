#pragma once

#include "regcoc/bbm.hpp"
#include "regcoc/coc.hpp"
#include "regcoc/debt.hpp"
#include "regcoc/error.hpp"
#include "regcoc/io.hpp"
#include "regcoc/multiyear.hpp"
#include "regcoc/reproduce.hpp"
#include "regcoc/valuation.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace regcoc::cli {

enum class Format { csv, json };

struct RunConfig {
    std::string command;
    std::string input;
    std::string output;  // empty: standard output
    Format format = Format::csv;
    std::optional<double> tol;

    // reproduce
    std::string target;
    // bbm
    double opex = 0.0;
    double capex = 0.0;
    // debt
    bool observable_only = false;
    // irr
    std::optional<double> rab0;
    std::optional<double> rx1;
    std::optional<double> rf;
    std::optional<double> terminal_rab;
};

namespace detail {

using io::json;
using reproduce::Table;

// Accepts a scenario document, or a previous JSON result wrapping it under "input".
inline json load_document(const RunConfig& cfg)
{
    if (cfg.input.empty()) {
        throw InputError("--input is required for '" + cfg.command + "'");
    }
    json j = io::parse_json(io::read_file(cfg.input));
    if (j.is_object() && j.contains("input") && j.at("input").is_object()) {
        return j.at("input");
    }
    return j;
}

struct Result {
    Table table;
    json input;  // echoed scenario, null when there is none
};

inline std::string render(const RunConfig& cfg, const Result& r)
{
    if (cfg.format == Format::csv) {
        return r.table.to_csv();
    }
    json out = json::object();
    out["command"] = cfg.command;
    if (!r.input.is_null()) {
        out["input"] = r.input;
    }
    out["rows"] = r.table.to_json();
    return out.dump(2) + "\n";
}

inline Result run_value(const RunConfig& cfg, bool with_coc)
{
    const auto doc = io::tree_document_from_json(load_document(cfg));
    if (doc.flows.empty()) {
        throw InputError("tree document has no flows");
    }
    Table t{{"t", "expectation", "value"}, {}};
    if (with_coc) {
        t.header.push_back("coc_pct");
    }
    const NodeId root = doc.tree.root();
    for (const auto& [time, x] : doc.flows) {
        std::vector<std::string> row{std::to_string(time), io::fixed(expect(doc.tree, x, root), 6),
                                     io::fixed(value(doc.tree, x, root), 6)};
        if (with_coc) {
            row.push_back(io::percent(cost_of_capital(doc.tree, x)));
        }
        t.rows.push_back(std::move(row));
    }
    if (!with_coc) {
        t.rows.push_back({"total", "", io::fixed(value_stream(doc.tree, doc.flows, root), 6)});
    }
    return {t, io::to_json(doc)};
}

inline Result run_bbm(const RunConfig& cfg)
{
    const auto s = io::bbm_scenario_from_json(load_document(cfg));
    const double e = bbm::allowance_component(s);
    const auto fp = bbm::solve_standard_fixed_point(s, cfg.tol.value_or(1e-12));
    const auto blocks = bbm::revenue_allowance(s, cfg.opex, cfg.capex);
    Table t{{"rab0", "rab1", "r_x_pct", "r_rab_pct", "allowance", "combined_coc_pct", "standard_allowance",
             "iterations", "opex", "capex", "depreciation", "revenue"},
            {}};
    t.rows.push_back({io::fixed(s.rab0, 2), io::fixed(s.rab1_expected, 2), io::percent(s.r_x), io::percent(s.r_rab),
                      io::fixed(e, 2), io::percent(bbm::combined_coc(s, e)), io::fixed(fp.allowance, 2),
                      std::to_string(fp.iterations), io::fixed(blocks.opex, 2), io::fixed(blocks.capex, 2),
                      io::fixed(blocks.depreciation, 2), io::fixed(blocks.revenue, 2)});
    return {t, io::to_json(s)};
}

inline Result run_multiyear(const RunConfig& cfg)
{
    const auto s = io::multiyear_scenario_from_json(load_document(cfg));
    const auto fp = multiyear::forward_params(s);
    const auto e = multiyear::allowance_path(s);
    const auto implied = multiyear::implied_naive_coc(s, e);
    const int T = s.periods();
    Table t{{"row"}, {}};
    for (int k = 0; k <= T; ++k) {
        t.header.push_back("t" + std::to_string(k));
    }
    auto row = [&](const std::string& name, const std::string& t0, auto&& cell) {
        std::vector<std::string> r{name, t0};
        for (int k = 1; k <= T; ++k) {
            r.push_back(cell(static_cast<std::size_t>(k)));
        }
        t.rows.push_back(std::move(r));
    };
    row("rab", io::fixed(s.rab[0], 2), [&](std::size_t k) { return io::fixed(s.rab[k], 2); });
    row("r_x", io::fixed(1.0, 3), [&](std::size_t k) { return io::fixed(s.r_x[k - 1].gross(), 3); });
    row("r_rab", io::fixed(1.0, 3), [&](std::size_t k) { return io::fixed(s.r_rab[k - 1].gross(), 3); });
    row("R_t", "", [&](std::size_t k) { return io::fixed(fp.r[k - 1].gross(), 2); });
    row("S_t", "", [&](std::size_t k) { return io::fixed(fp.s[k - 1].gross(), 2); });
    row("allowance", "", [&](std::size_t k) { return io::fixed(e[k - 1], 2); });
    row("implied_coc_pct", "", [&](std::size_t k) { return io::percent(implied[k - 1]); });
    return {t, io::to_json(s)};
}

inline Result run_debt(const RunConfig& cfg)
{
    const auto doc = io::portfolio_from_json(load_document(cfg));
    const auto mode = cfg.observable_only ? debt::DebtCocMode::observable_only : debt::DebtCocMode::full;
    const auto dc = debt::debt_coc(doc.tree, doc.instruments, doc.holdings, mode);
    const NodeId root = doc.tree.root();
    Table t{{"item", "quantity", "price", "expected_payoff", "weight", "coc_pct", "ytm_pct"}, {}};
    for (const auto& term : dc.terms) {
        const auto& inst = doc.instruments.at(term.maturity);
        const auto values = inst.payoff().values();
        // Face value is the promised payment: the payoff in the no-default states.
        const double face = *std::max_element(values.begin(), values.end());
        const double price = value(doc.tree, inst.payoff(), root);
        std::string ytm;
        if (price > 0.0) {
            ytm = io::percent(debt::ytm_vs_coc(doc.tree, inst, face).ytm);
        }
        t.rows.push_back({"maturity_" + std::to_string(term.maturity), io::fixed(term.quantity, 6),
                          io::fixed(price, 6), io::fixed(expect(doc.tree, inst.payoff(), root), 6),
                          io::fixed(term.weight, 6), term.rate ? io::percent(*term.rate) : "", ytm});
    }
    t.rows.push_back({"portfolio", "", io::fixed(dc.value0, 6), "", io::fixed(1.0, 6),
                      dc.rate ? io::percent(*dc.rate) : "", ""});
    if (doc.rebalanced) {
        const double residual =
            debt::rebalance_invariance_check(doc.tree, doc.instruments, doc.holdings, {*doc.rebalanced});
        t.rows.push_back({"rebalance_residual", "", fmt::format("{:.3e}", residual), "", "", "", ""});
    }
    return {t, io::to_json(doc)};
}

inline Result run_reproduce(const RunConfig& cfg)
{
    if (cfg.target.empty()) {
        throw InputError("--target is required for 'reproduce'");
    }
    return {reproduce::run(cfg.target), json(nullptr)};
}

// R - 1 to three decimals. The opening outlay comes from --rab0, a year-0 row,
// or the present value of the flows under component rates (--rx1, --rf,
// --terminal-rab): R_{0->t}(X_t) = rf^{t-1} rx1 and R_{0->T}(RAB_T) = rf^T.
inline Result run_irr(const RunConfig& cfg)
{
    if (cfg.input.empty()) {
        throw InputError("--input is required for 'irr'");
    }
    const auto yf = io::read_year_flows_file(cfg.input);
    std::optional<double> rab0 = cfg.rab0 ? cfg.rab0 : yf.rab0;
    const bool rates = cfg.rx1 || cfg.rf || cfg.terminal_rab;
    if (rates) {
        if (!cfg.rx1 || !cfg.rf || !cfg.terminal_rab) {
            throw InputError("--rx1, --rf and --terminal-rab must be given together");
        }
        if (rab0) {
            throw InputError("give either an opening asset base or component rates, not both");
        }
        const int T = static_cast<int>(yf.flows.size());
        double pv = *cfg.terminal_rab / std::pow(*cfg.rf, T);
        for (int t = 1; t <= T; ++t) {
            double x = yf.flows[static_cast<std::size_t>(t) - 1];
            if (t == T) {
                x -= *cfg.terminal_rab;
            }
            pv += x / (std::pow(*cfg.rf, t - 1) * *cfg.rx1);
        }
        rab0 = pv;
    }
    if (!rab0) {
        throw InputError("opening asset base missing: pass --rab0, a year-0 row, or component rates");
    }
    const GrossRate r = multiyear::single_r_irr(*rab0, yf.flows, cfg.tol.value_or(1e-12));
    Table t{{"rab0", "irr_pct"}, {{io::fixed(*rab0, 6), io::percent(r, 3)}}};
    json input = {{"rab0", *rab0}, {"flows", yf.flows}};
    return {t, input};
}

inline Result dispatch(const RunConfig& cfg)
{
    if (cfg.tol && !(*cfg.tol > 0.0)) {
        throw InputError("--tol must be positive");
    }
    if (cfg.command == "value") return run_value(cfg, false);
    if (cfg.command == "coc") return run_value(cfg, true);
    if (cfg.command == "bbm") return run_bbm(cfg);
    if (cfg.command == "multiyear") return run_multiyear(cfg);
    if (cfg.command == "debt") return run_debt(cfg);
    if (cfg.command == "reproduce") return run_reproduce(cfg);
    if (cfg.command == "irr") return run_irr(cfg);
    throw InputError("unknown command '" + cfg.command + "'");
}

inline int exit_code(ErrorKind k)
{
    return static_cast<int>(k);
}

} // namespace detail

// Parses arguments, runs one command and writes its output. Returns the exit
// code: 0 success, 1 input error, 2 contract violation, 3 numerical failure.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    RunConfig cfg;
    CLI::App app{"Cost-of-capital engine for regulated asset bases", "regcoc"};
    app.require_subcommand(1);

    std::string format = "csv";
    auto common = [&](CLI::App* sub) {
        sub->add_option("--input", cfg.input, "Input file (JSON scenario or year,flow CSV)");
        sub->add_option("--output", cfg.output, "Output file (default: standard output)");
        sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--tol", cfg.tol, "Solver tolerance override");
    };

    auto* value = app.add_subcommand("value", "Expectation and present value of each flow at the root");
    auto* coc = app.add_subcommand("coc", "Cost of capital of each flow at the root");
    auto* bbm_cmd = app.add_subcommand("bbm", "One-year building block allowance");
    bbm_cmd->add_option("--opex", cfg.opex, "Operating expenditure for the revenue build-up");
    bbm_cmd->add_option("--capex", cfg.capex, "Capital expenditure for the revenue build-up");
    auto* multi = app.add_subcommand("multiyear", "Forward-parameter allowances over a regulatory period");
    auto* debt_cmd = app.add_subcommand("debt", "Debt portfolio cost of capital");
    debt_cmd->add_flag("--observable-only", cfg.observable_only,
                       "Withhold rates that need unobservable future prices");
    auto* repro = app.add_subcommand("reproduce", "Rebuild a published table or figure");
    repro->add_option("--target", cfg.target, "What to rebuild")->check(CLI::IsMember(reproduce::targets()));
    auto* irr = app.add_subcommand("irr", "Single-parameter IRR of a year,flow CSV");
    irr->add_option("--rab0", cfg.rab0, "Opening asset base");
    irr->add_option("--rx1", cfg.rx1, "Gross one-year cost of capital of the cash flows");
    irr->add_option("--rf", cfg.rf, "Gross annual risk-free rate");
    irr->add_option("--terminal-rab", cfg.terminal_rab, "Closing asset base included in the final row");
    for (auto* sub : {value, coc, bbm_cmd, multi, debt_cmd, repro, irr}) {
        common(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : detail::exit_code(ErrorKind::input);
    }
    cfg.command = app.get_subcommands().front()->get_name();
    cfg.format = format == "json" ? Format::json : Format::csv;

    try {
        const std::string text = detail::render(cfg, detail::dispatch(cfg));
        if (cfg.output.empty()) {
            out << text;
        } else {
            std::ofstream file(cfg.output, std::ios::binary);
            if (!file || !(file << text)) {
                throw InputError("cannot write output file '" + cfg.output + "'");
            }
        }
        return 0;
    } catch (const Error& e) {
        err << "regcoc: " << e.what() << '\n';
        return detail::exit_code(e.kind());
    } catch (const std::exception& e) {
        err << "regcoc: internal error: " << e.what() << '\n';
        return detail::exit_code(ErrorKind::contract);
    }
}

} // namespace regcoc::cli
