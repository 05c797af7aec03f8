#pragma once

#include "regcoc/bbm.hpp"
#include "regcoc/debt.hpp"
#include "regcoc/error.hpp"
#include "regcoc/event_tree.hpp"
#include "regcoc/gross_rate.hpp"
#include "regcoc/multiyear.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace regcoc::io {

using nlohmann::json;

// Fixed-point text with `.` separator; negative zero prints as zero.
inline std::string fixed(double x, int decimals)
{
    std::string s = fmt::format("{:.{}f}", x, decimals);
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) {
        s.erase(0, 1);
    }
    return s;
}

// r = R - 1 as a percentage.
inline std::string percent(GrossRate r, int decimals = 2)
{
    return fixed(r.percent(), decimals);
}

// Shortest text that reads back to the same double.
inline std::string exact(double x)
{
    return fmt::format("{}", x);
}

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open input file '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json parse_json(const std::string& text)
{
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed JSON: ") + e.what());
    }
}

namespace detail {

// Runs a field-extraction step, mapping JSON type errors to input errors.
template <class F>
auto fields(const char* what, F&& f)
{
    try {
        return f();
    } catch (const json::exception& e) {
        throw InputError(std::string("bad ") + what + ": " + e.what());
    }
}

inline const json& member(const json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key)) {
        throw InputError(std::string("missing field '") + key + "'");
    }
    return j.at(key);
}

inline std::vector<GrossRate> rates(const json& j, const char* key)
{
    std::vector<GrossRate> out;
    for (double r : member(j, key).get<std::vector<double>>()) {
        out.emplace_back(r);
    }
    return out;
}

inline std::vector<double> raw(const std::vector<GrossRate>& rates)
{
    std::vector<double> out;
    for (const auto& r : rates) {
        out.push_back(r.gross());
    }
    return out;
}

inline int parse_int_key(const std::string& key, const char* what)
{
    std::size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(key, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != key.size() || key.empty()) {
        throw InputError(std::string("bad ") + what + " key '" + key + "'");
    }
    return v;
}

// Node-keyed map {"<node-id>": value} covering exactly the time-t layer.
inline RandomCashFlow layer_values(const EventTree& tree, int t, const json& j)
{
    if (!j.is_object()) {
        throw InputError("node values must be an object keyed by node id");
    }
    tree.check_time(t);
    std::vector<double> values(tree.layer_size(t));
    std::vector<bool> seen(values.size(), false);
    for (const auto& [key, v] : j.items()) {
        const int id = parse_int_key(key, "node");
        if (id < 0 || !tree.contains(static_cast<NodeId>(id)) || tree.time(static_cast<NodeId>(id)) != t) {
            throw InputError("node " + key + " is not in layer " + std::to_string(t));
        }
        const std::size_t slot = tree.slot(static_cast<NodeId>(id));
        seen[slot] = true;
        values[slot] = v.get<double>();
    }
    for (std::size_t i = 0; i < seen.size(); ++i) {
        if (!seen[i]) {
            throw InputError("no value for node " + std::to_string(tree.layer_begin(t) + i) +
                             " at time " + std::to_string(t));
        }
    }
    return RandomCashFlow(t, std::move(values));
}

inline json layer_json(const EventTree& tree, const RandomCashFlow& x)
{
    json out = json::object();
    for (NodeId n : tree.layer(x.time())) {
        out[std::to_string(n)] = x.at(tree, n);
    }
    return out;
}

} // namespace detail

inline EventTree tree_from_json(const json& j)
{
    return detail::fields("tree", [&] {
        const int horizon = detail::member(j, "horizon").get<int>();
        std::vector<NodeSpec> specs;
        for (const auto& n : detail::member(j, "nodes")) {
            NodeSpec s;
            s.id = detail::member(n, "id").get<std::size_t>();
            s.time = detail::member(n, "time").get<int>();
            const json& parent = detail::member(n, "parent");
            if (!parent.is_null()) {
                s.parent = parent.get<std::size_t>();
            }
            s.p = n.value("p", 1.0);
            s.q = n.value("q", 1.0);
            specs.push_back(s);
        }
        return EventTree::from_specs(horizon, std::move(specs));
    });
}

inline json tree_to_json(const EventTree& tree)
{
    json nodes = json::array();
    for (const auto& s : tree.specs()) {
        nodes.push_back({{"id", s.id},
                         {"time", s.time},
                         {"parent", s.parent ? json(*s.parent) : json(nullptr)},
                         {"p", s.p},
                         {"q", s.q}});
    }
    return {{"horizon", tree.horizon()}, {"nodes", nodes}};
}

inline CashFlowStream flows_from_json(const EventTree& tree, const json& j)
{
    return detail::fields("flows", [&] {
        CashFlowStream out;
        if (!j.is_object()) {
            throw InputError("flows must be an object keyed by time");
        }
        for (const auto& [key, layer] : j.items()) {
            const int t = detail::parse_int_key(key, "time");
            if (t < 1 || t > tree.horizon()) {
                throw InputError("flow time " + key + " outside 1.." + std::to_string(tree.horizon()));
            }
            out.add(detail::layer_values(tree, t, layer));
        }
        return out;
    });
}

inline json flows_to_json(const EventTree& tree, const CashFlowStream& stream)
{
    json out = json::object();
    for (const auto& [t, x] : stream) {
        out[std::to_string(t)] = detail::layer_json(tree, x);
    }
    return out;
}

struct TreeDocument {
    EventTree tree;
    CashFlowStream flows;
};

inline TreeDocument tree_document_from_json(const json& j)
{
    TreeDocument doc{tree_from_json(j), {}};
    if (j.contains("flows")) {
        doc.flows = flows_from_json(doc.tree, j.at("flows"));
    }
    return doc;
}

inline json to_json(const TreeDocument& doc)
{
    json out = tree_to_json(doc.tree);
    out["flows"] = flows_to_json(doc.tree, doc.flows);
    return out;
}

inline bbm::OneYearScenario bbm_scenario_from_json(const json& j)
{
    return detail::fields("bbm scenario", [&] {
        bbm::OneYearScenario s{detail::member(j, "rab0").get<double>(), detail::member(j, "rab1").get<double>(),
                               GrossRate(detail::member(j, "r_x").get<double>()),
                               GrossRate(detail::member(j, "r_rab").get<double>())};
        s.validate();
        return s;
    });
}

inline json to_json(const bbm::OneYearScenario& s)
{
    return {{"rab0", s.rab0}, {"rab1", s.rab1_expected}, {"r_x", s.r_x.gross()}, {"r_rab", s.r_rab.gross()}};
}

inline multiyear::MultiYearScenario multiyear_scenario_from_json(const json& j)
{
    return detail::fields("multiyear scenario", [&] {
        multiyear::MultiYearScenario s;
        const int T = detail::member(j, "T").get<int>();
        s.rab = detail::member(j, "rab").get<std::vector<double>>();
        s.r_x = detail::rates(j, "r_x");
        s.r_rab = detail::rates(j, "r_rab");
        if (T != s.periods()) {
            throw InputError("T = " + std::to_string(T) + " but r_x has " + std::to_string(s.periods()) +
                             " entries");
        }
        s.validate();
        return s;
    });
}

inline json to_json(const multiyear::MultiYearScenario& s)
{
    return {{"T", s.periods()}, {"rab", s.rab}, {"r_x", detail::raw(s.r_x)}, {"r_rab", detail::raw(s.r_rab)}};
}

// Portfolio document: the tree fields plus instruments and holdings. An
// optional "rebalanced" list holds the time-1 quantities D_{1->t}.
struct PortfolioDocument {
    EventTree tree;
    debt::InstrumentSet instruments;
    debt::DebtPortfolio holdings;
    std::optional<debt::DebtPortfolio> rebalanced;
};

namespace detail {

inline debt::DebtPortfolio holdings_from_json(const json& list)
{
    debt::DebtPortfolio p;
    for (const auto& h : list) {
        p.set(member(h, "s").get<int>(), member(h, "t").get<int>(), member(h, "d").get<double>());
    }
    return p;
}

inline json holdings_json(const debt::DebtPortfolio& p)
{
    json out = json::array();
    for (const auto& [key, d] : p.holdings()) {
        out.push_back({{"s", key.first}, {"t", key.second}, {"d", d}});
    }
    return out;
}

} // namespace detail

inline PortfolioDocument portfolio_from_json(const json& j)
{
    EventTree tree = tree_from_json(j);
    return detail::fields("portfolio", [&] {
        std::vector<debt::DebtInstrument> list;
        for (const auto& inst : detail::member(j, "instruments")) {
            const int t = detail::member(inst, "maturity").get<int>();
            if (t < 1 || t > tree.horizon()) {
                throw InputError("instrument maturity " + std::to_string(t) + " outside the tree");
            }
            list.emplace_back(detail::layer_values(tree, t, detail::member(inst, "payoff")));
        }
        PortfolioDocument doc{tree, debt::make_instruments(tree, list),
                              detail::holdings_from_json(detail::member(j, "holdings")), std::nullopt};
        if (j.contains("rebalanced")) {
            doc.rebalanced = detail::holdings_from_json(j.at("rebalanced"));
        }
        return doc;
    });
}

inline json to_json(const PortfolioDocument& doc)
{
    json out = tree_to_json(doc.tree);
    json instruments = json::array();
    for (const auto& [t, inst] : doc.instruments) {
        instruments.push_back({{"maturity", t}, {"payoff", detail::layer_json(doc.tree, inst.payoff())}});
    }
    out["instruments"] = instruments;
    out["holdings"] = detail::holdings_json(doc.holdings);
    if (doc.rebalanced) {
        out["rebalanced"] = detail::holdings_json(*doc.rebalanced);
    }
    return out;
}

// `year,flow` CSV. Years run 1..T consecutively; an optional leading year-0
// row carries the opening outlay (as a positive RAB_0 or a negative flow).
struct YearFlows {
    std::optional<double> rab0;
    std::vector<double> flows;
};

namespace detail {

inline std::string trim(std::string s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline double parse_number(const std::string& text, int line, const char* what)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (text.empty() || used != text.size() || !std::isfinite(v)) {
        throw InputError("line " + std::to_string(line) + ": bad " + what + " '" + text + "'");
    }
    return v;
}

} // namespace detail

inline YearFlows read_year_flows(std::istream& in)
{
    YearFlows out;
    std::string line;
    int number = 0;
    bool header = false;
    int expected_year = 0;
    while (std::getline(in, line)) {
        ++number;
        line = detail::trim(line);
        if (line.empty()) {
            continue;
        }
        if (!header) {
            if (line != "year,flow") {
                throw InputError("line " + std::to_string(number) + ": expected header 'year,flow'");
            }
            header = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
            throw InputError("line " + std::to_string(number) + ": expected two fields");
        }
        const double year_value = detail::parse_number(detail::trim(line.substr(0, comma)), number, "year");
        const double flow = detail::parse_number(detail::trim(line.substr(comma + 1)), number, "flow");
        const int year = static_cast<int>(year_value);
        if (year != year_value) {
            throw InputError("line " + std::to_string(number) + ": year must be an integer");
        }
        if (year == 0 && expected_year == 0) {
            out.rab0 = flow < 0.0 ? -flow : flow;
            expected_year = 1;
            continue;
        }
        if (expected_year == 0) {
            expected_year = 1;
        }
        if (year != expected_year) {
            throw InputError("line " + std::to_string(number) + ": expected year " +
                             std::to_string(expected_year) + ", got " + std::to_string(year));
        }
        out.flows.push_back(flow);
        ++expected_year;
    }
    if (!header) {
        throw InputError("line " + std::to_string(number + 1) + ": missing header 'year,flow'");
    }
    if (out.flows.empty()) {
        throw InputError("line " + std::to_string(number + 1) + ": no flows after the header");
    }
    return out;
}

inline YearFlows read_year_flows_file(const std::string& path)
{
    std::istringstream in(read_file(path));
    return read_year_flows(in);
}

} // namespace regcoc::io
