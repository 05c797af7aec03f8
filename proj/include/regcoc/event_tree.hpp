#pragma once

#include "regcoc/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace regcoc {

// Node identifiers are assigned breadth-first: the root is 0, every layer is a
// contiguous id range, and siblings are contiguous.
using NodeId = std::size_t;

inline constexpr double kProbabilitySumTolerance = 1e-12;

// One row of the serialized tree. For the root, p and q are carried as 1.
struct NodeSpec {
    NodeId id = 0;
    int time = 0;
    std::optional<NodeId> parent;
    double p = 1.0;  // transition probability on the edge from the parent
    double q = 1.0;  // one-period state price on that edge, paid at the parent
};

// Finite discrete-time probability space. Every edge carries a physical
// probability and a one-period state price; together they define both the
// expectation and the present-value functionals exactly.
class EventTree {
public:
    // Horizon-0 tree holding only the root.
    EventTree() : nodes_{NodeSpec{}}, children_(1), layer_start_{0, 1} {}

    // Validates and builds a tree from serialized rows (any order).
    static EventTree from_specs(int horizon, std::vector<NodeSpec> specs)
    {
        if (horizon < 0) {
            throw InvalidTree("horizon must be non-negative");
        }
        if (specs.empty()) {
            throw InvalidTree("tree has no nodes");
        }
        std::sort(specs.begin(), specs.end(),
                  [](const NodeSpec& a, const NodeSpec& b) { return a.id < b.id; });

        EventTree tree;
        tree.horizon_ = horizon;
        tree.nodes_.clear();
        tree.children_.clear();

        for (std::size_t i = 0; i < specs.size(); ++i) {
            const NodeSpec& s = specs[i];
            const std::string where = "node " + std::to_string(s.id);
            if (s.id != i) {
                throw InvalidTree("node ids must be 0..n-1 without gaps (missing id " +
                                  std::to_string(i) + ")");
            }
            if (i == 0) {
                if (s.parent || s.time != 0) {
                    throw InvalidTree("node 0 must be the root at time 0");
                }
                tree.nodes_.push_back(NodeSpec{0, 0, std::nullopt, 1.0, 1.0});
                tree.children_.emplace_back();
                continue;
            }
            if (!s.parent) {
                throw InvalidTree(where + ": only the root may lack a parent");
            }
            const NodeId parent = *s.parent;
            if (parent >= i) {
                throw InvalidTree(where + ": ids must be breadth-first (parent id < id)");
            }
            if (s.time != tree.nodes_[parent].time + 1) {
                throw InvalidTree(where + ": time must be parent time + 1");
            }
            if (s.time > horizon) {
                throw InvalidTree(where + ": time exceeds horizon");
            }
            if (s.time < tree.nodes_.back().time) {
                throw InvalidTree(where + ": ids must be breadth-first (time order)");
            }
            if (s.time == tree.nodes_.back().time && tree.nodes_.back().parent &&
                parent < *tree.nodes_.back().parent) {
                throw InvalidTree(where + ": ids must be breadth-first (sibling order)");
            }
            if (!(s.p > 0.0) || !std::isfinite(s.p)) {
                throw InvalidTree(where + ": probability must be strictly positive");
            }
            if (!(s.q > 0.0) || !std::isfinite(s.q)) {
                throw InvalidTree(where + ": state price must be strictly positive");
            }
            tree.nodes_.push_back(s);
            tree.children_.emplace_back();
            tree.children_[parent].push_back(i);
        }

        for (NodeId n = 0; n < tree.nodes_.size(); ++n) {
            const auto& kids = tree.children_[n];
            if (tree.nodes_[n].time < horizon && kids.empty()) {
                throw InvalidTree("node " + std::to_string(n) +
                                  " before the horizon has no children");
            }
            if (kids.empty()) {
                continue;
            }
            double total = 0.0;
            for (NodeId c : kids) {
                total += tree.nodes_[c].p;
            }
            if (std::abs(total - 1.0) > kProbabilitySumTolerance) {
                throw InvalidTree("children of node " + std::to_string(n) +
                                  " have probabilities summing to " + std::to_string(total));
            }
        }

        tree.layer_start_.assign(static_cast<std::size_t>(horizon) + 2, tree.nodes_.size());
        for (NodeId n = tree.nodes_.size(); n-- > 0;) {
            tree.layer_start_[static_cast<std::size_t>(tree.nodes_[n].time)] = n;
        }
        return tree;
    }

    // Non-recombining tree where every node branches identically:
    // branch k has probability p[k] and state price q[k].
    static EventTree uniform(int horizon, std::span<const double> p, std::span<const double> q)
    {
        if (p.size() != q.size() || p.empty()) {
            throw InvalidTree("branch probability and state price lists must match");
        }
        std::vector<NodeSpec> specs{NodeSpec{}};
        std::size_t layer_begin = 0;
        for (int t = 1; t <= horizon; ++t) {
            const std::size_t layer_end = specs.size();
            for (std::size_t parent = layer_begin; parent < layer_end; ++parent) {
                for (std::size_t k = 0; k < p.size(); ++k) {
                    specs.push_back(NodeSpec{specs.size(), t, parent, p[k], q[k]});
                }
            }
            layer_begin = layer_end;
        }
        return from_specs(horizon, std::move(specs));
    }

    // Single-path tree: every payoff is certain, one-period discount factor d.
    static EventTree certain(int horizon, double discount)
    {
        const double p[] = {1.0};
        const double q[] = {discount};
        return uniform(horizon, p, q);
    }

    int horizon() const noexcept { return horizon_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    NodeId root() const noexcept { return 0; }

    bool contains(NodeId n) const noexcept { return n < nodes_.size(); }

    int time(NodeId n) const { return node(n).time; }
    std::optional<NodeId> parent(NodeId n) const { return node(n).parent; }
    double probability(NodeId n) const { return node(n).p; }
    double state_price(NodeId n) const { return node(n).q; }

    // Pricing kernel m = q/p on the edge into n.
    double kernel(NodeId n) const { return node(n).q / node(n).p; }

    std::span<const NodeId> children(NodeId n) const
    {
        node(n);
        return children_[n];
    }

    // Node count at time t.
    std::size_t layer_size(int t) const
    {
        check_time(t);
        return layer_start_[static_cast<std::size_t>(t) + 1] -
               layer_start_[static_cast<std::size_t>(t)];
    }

    NodeId layer_begin(int t) const
    {
        check_time(t);
        return layer_start_[static_cast<std::size_t>(t)];
    }

    std::vector<NodeId> layer(int t) const
    {
        std::vector<NodeId> out(layer_size(t));
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = layer_begin(t) + i;
        }
        return out;
    }

    // Position of n within its time layer.
    std::size_t slot(NodeId n) const { return n - layer_start_[static_cast<std::size_t>(time(n))]; }

    // Ancestor of n at an earlier (or equal) time.
    NodeId ancestor(NodeId n, int t) const
    {
        if (t < 0 || t > time(n)) {
            throw TimeOrderError("ancestor time " + std::to_string(t) + " is after node time " +
                                 std::to_string(time(n)));
        }
        while (time(n) > t) {
            n = *nodes_[n].parent;
        }
        return n;
    }

    const std::vector<NodeSpec>& specs() const noexcept { return nodes_; }

    void check_time(int t) const
    {
        if (t < 0 || t > horizon_) {
            throw TimeOrderError("time " + std::to_string(t) + " outside tree horizon " +
                                 std::to_string(horizon_));
        }
    }

private:
    const NodeSpec& node(NodeId n) const
    {
        if (n >= nodes_.size()) {
            throw InvalidTree("node " + std::to_string(n) + " not in tree");
        }
        return nodes_[n];
    }

    int horizon_ = 0;
    std::vector<NodeSpec> nodes_;
    std::vector<std::vector<NodeId>> children_;
    std::vector<NodeId> layer_start_;  // size horizon+2, sentinel at the end
};

// Payoff at a fixed time: one amount per node of that time layer, ordered by
// node id. Also used for node-wise conditional quantities (V_{s->t}, E_s, R_s).
class RandomCashFlow {
public:
    RandomCashFlow() = default;

    RandomCashFlow(int time, std::vector<double> values) : time_(time), values_(std::move(values))
    {
        for (double v : values_) {
            if (!std::isfinite(v)) {
                throw InvalidCashFlow("cash-flow amounts must be finite");
            }
        }
    }

    static RandomCashFlow constant(const EventTree& tree, int t, double amount)
    {
        return RandomCashFlow(t, std::vector<double>(tree.layer_size(t), amount));
    }

    // Builds a payoff by evaluating f(node) over the time-t layer.
    template <class F>
    static RandomCashFlow from_nodes(const EventTree& tree, int t, F&& f)
    {
        std::vector<double> values(tree.layer_size(t));
        const NodeId first = tree.layer_begin(t);
        for (std::size_t i = 0; i < values.size(); ++i) {
            values[i] = f(first + i);
        }
        return RandomCashFlow(t, std::move(values));
    }

    int time() const noexcept { return time_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t slot) const { return values_.at(slot); }

    double at(const EventTree& tree, NodeId n) const
    {
        check(tree);
        if (tree.time(n) != time_) {
            throw TimeOrderError("node " + std::to_string(n) + " is not at time " +
                                 std::to_string(time_));
        }
        return values_[tree.slot(n)];
    }

    // Every node of the time layer must carry exactly one value.
    void check(const EventTree& tree) const
    {
        tree.check_time(time_);
        if (values_.size() != tree.layer_size(time_)) {
            throw InvalidCashFlow("cash flow at time " + std::to_string(time_) + " has " +
                                  std::to_string(values_.size()) + " values, tree layer has " +
                                  std::to_string(tree.layer_size(time_)));
        }
    }

    bool is_constant(double tol = 0.0) const
    {
        if (values_.empty()) {
            return true;
        }
        const auto [lo, hi] = std::minmax_element(values_.begin(), values_.end());
        return *hi - *lo <= tol;
    }

    template <class F>
    RandomCashFlow map(F&& f) const
    {
        std::vector<double> out(values_.size());
        std::transform(values_.begin(), values_.end(), out.begin(), f);
        return RandomCashFlow(time_, std::move(out));
    }

    template <class F>
    RandomCashFlow zip(const RandomCashFlow& other, F&& f) const
    {
        if (other.time_ != time_ || other.values_.size() != values_.size()) {
            throw InvalidCashFlow("node-wise operation on cash flows at different times");
        }
        std::vector<double> out(values_.size());
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = f(values_[i], other.values_[i]);
        }
        return RandomCashFlow(time_, std::move(out));
    }

    friend RandomCashFlow operator+(const RandomCashFlow& a, const RandomCashFlow& b)
    {
        return a.zip(b, [](double x, double y) { return x + y; });
    }
    friend RandomCashFlow operator-(const RandomCashFlow& a, const RandomCashFlow& b)
    {
        return a.zip(b, [](double x, double y) { return x - y; });
    }
    friend RandomCashFlow operator*(double k, const RandomCashFlow& a)
    {
        return a.map([k](double x) { return k * x; });
    }
    friend RandomCashFlow operator*(const RandomCashFlow& a, double k) { return k * a; }

    friend RandomCashFlow operator+(const RandomCashFlow& a, double k)
    {
        return a.map([k](double x) { return x + k; });
    }

    // Node-wise product and quotient.
    RandomCashFlow times(const RandomCashFlow& other) const
    {
        return zip(other, [](double x, double y) { return x * y; });
    }
    RandomCashFlow divided_by(const RandomCashFlow& other) const
    {
        return zip(other, [](double x, double y) {
            if (y == 0.0) {
                throw ZeroDenominator("node-wise division by zero");
            }
            return x / y;
        });
    }

    friend bool operator==(const RandomCashFlow&, const RandomCashFlow&) = default;

private:
    int time_ = 0;
    std::vector<double> values_;
};

// Stream (X_1, X_2, ...) keyed by payment time.
class CashFlowStream {
public:
    CashFlowStream() = default;

    explicit CashFlowStream(std::vector<RandomCashFlow> flows)
    {
        for (auto& f : flows) {
            add(std::move(f));
        }
    }

    void add(RandomCashFlow flow)
    {
        const int t = flow.time();
        if (t < 1) {
            throw InvalidCashFlow("stream flows must be at time >= 1");
        }
        if (!flows_.emplace(t, std::move(flow)).second) {
            throw InvalidCashFlow("duplicate flow at time " + std::to_string(t));
        }
    }

    bool empty() const noexcept { return flows_.empty(); }
    std::size_t size() const noexcept { return flows_.size(); }
    bool contains(int t) const { return flows_.count(t) != 0; }
    const RandomCashFlow& at(int t) const
    {
        auto it = flows_.find(t);
        if (it == flows_.end()) {
            throw InvalidCashFlow("no flow at time " + std::to_string(t));
        }
        return it->second;
    }

    // Last payment time, 0 for an empty stream.
    int last_time() const noexcept { return flows_.empty() ? 0 : flows_.rbegin()->first; }

    const std::map<int, RandomCashFlow>& flows() const noexcept { return flows_; }

    auto begin() const { return flows_.begin(); }
    auto end() const { return flows_.end(); }

    friend bool operator==(const CashFlowStream&, const CashFlowStream&) = default;

private:
    std::map<int, RandomCashFlow> flows_;
};

} // namespace regcoc
