#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <vector>

#include "xube/domain.hpp"

namespace xube {

using NodeId = std::int64_t;
inline constexpr NodeId kNoNode = -1;

template <class State, class Action>
struct SearchNode {
    State state;
    NodeId parent = kNoNode;
    std::optional<Action> action;  // from parent
    double g = 0.0;                // path cost from the root
    double h = std::numeric_limits<double>::quiet_NaN();
    double edge_cost = 0.0;  // transition cost from parent
    int depth = 0;
    bool expanded = false;
    bool pruned = false;  // generated but rejected by the closed map
};

template <class Action>
struct TreeEdge {
    NodeId parent;
    Action action;
    NodeId child;
    double cost;
};

// Everything a search generated. Node ids are insertion order, so a child
// always has a larger id than its parent.
template <class State, class Action>
struct SearchTree {
    std::vector<SearchNode<State, Action>> nodes;
    std::vector<NodeId> popped;             // nodes selected for expansion, in order (a goal pop included)
    std::vector<TreeEdge<Action>> edges;    // edges traversed, in order

    NodeId add_root(State s) {
        SearchNode<State, Action> n;
        n.state = std::move(s);
        nodes.push_back(std::move(n));
        return static_cast<NodeId>(nodes.size() - 1);
    }

    NodeId add_child(NodeId parent, Action a, State s, double cost) {
        SearchNode<State, Action> n;
        n.state = std::move(s);
        n.parent = parent;
        n.action = a;
        n.edge_cost = cost;
        n.g = nodes[static_cast<std::size_t>(parent)].g + cost;
        n.depth = nodes[static_cast<std::size_t>(parent)].depth + 1;
        nodes.push_back(std::move(n));
        const auto id = static_cast<NodeId>(nodes.size() - 1);
        edges.push_back({parent, std::move(a), id, cost});
        return id;
    }

    const SearchNode<State, Action>& operator[](NodeId id) const { return nodes[static_cast<std::size_t>(id)]; }
    SearchNode<State, Action>& operator[](NodeId id) { return nodes[static_cast<std::size_t>(id)]; }

    [[nodiscard]] std::vector<NodeId> path_nodes(NodeId id) const {
        std::vector<NodeId> out;
        for (NodeId n = id; n != kNoNode; n = (*this)[n].parent) out.push_back(n);
        std::reverse(out.begin(), out.end());
        return out;
    }

    [[nodiscard]] std::vector<Action> path_to(NodeId id) const {
        std::vector<Action> out;
        for (NodeId n = id; (*this)[n].parent != kNoNode; n = (*this)[n].parent) out.push_back(*(*this)[n].action);
        std::reverse(out.begin(), out.end());
        return out;
    }

    // A node of maximal depth; ties go to the earliest inserted.
    [[nodiscard]] NodeId deepest() const {
        NodeId best = kNoNode;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (best == kNoNode || nodes[i].depth > (*this)[best].depth) best = static_cast<NodeId>(i);
        }
        return best;
    }
};

template <class State, class Action>
struct SearchResult {
    bool solved = false;
    std::vector<Action> path;
    double path_cost = 0.0;
    std::int64_t iterations = 0;
    std::int64_t nodes_generated = 0;
    double wall_time = 0.0;  // seconds
    NodeId goal_node = kNoNode;
    SearchTree<State, Action> tree;
};

template <class D>
using SearchResultOf = SearchResult<StateOf<D>, ActionOf<D>>;

struct SearchParams {
    double weight = 1.0;        // lambda: f = weight * g + h
    std::size_t batch = 1;      // B: pops per iteration, or beam width
    double eps = 0.0;           // probability of a random pop / random edge
    double temperature = 0.0;   // beam search Boltzmann temperature
    std::int64_t max_iters = 10000;
    std::ostream* verbose = nullptr;

    void validate() const {
        if (!(weight >= 0.0 && weight <= 1.0)) throw ConfigError("search weight must be in [0, 1]");
        if (batch < 1) throw ConfigError("search batch size must be >= 1");
        if (!(eps >= 0.0 && eps <= 1.0)) throw ConfigError("search epsilon must be in [0, 1]");
        if (!(temperature >= 0.0)) throw ConfigError("beam temperature must be >= 0");
        if (max_iters < 1) throw ConfigError("search iteration limit must be >= 1");
    }
};

namespace detail {

class Stopwatch {
  public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    [[nodiscard]] double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

struct Summary {
    double min = 0.0, mean = 0.0, max = 0.0;
};

template <class Range>
Summary summarize(const Range& values) {
    Summary s;
    std::size_t n = 0;
    for (double v : values) {
        if (n == 0) s.min = s.max = v;
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
        s.mean += v;
        ++n;
    }
    if (n) s.mean /= static_cast<double>(n);
    return s;
}

inline void verbose_line(std::ostream& os, std::int64_t itr, std::size_t frontier, const Summary& f, const Summary& h,
                         std::int64_t generated) {
    os << "itr " << itr << " frontier " << frontier << " f(min/mean/max) " << f.min << '/' << f.mean << '/' << f.max
       << " h(min/mean/max) " << h.min << '/' << h.mean << '/' << h.max << " generated " << generated << '\n';
}

template <class State, class Action>
void finish(SearchResult<State, Action>& r, NodeId goal, const Stopwatch& sw) {
    if (goal != kNoNode) {
        r.solved = true;
        r.goal_node = goal;
        r.path = r.tree.path_to(goal);
        r.path_cost = r.tree[goal].g;
    }
    r.wall_time = sw.seconds();
}

// Among `candidates`, the solved node with least g (earliest on ties).
template <class D>
NodeId cheapest_solved(const D& domain, const SearchTree<StateOf<D>, ActionOf<D>>& tree, std::span<const NodeId> candidates,
                       const GoalOf<D>& goal) {
    NodeId best = kNoNode;
    for (NodeId id : candidates) {
        if (!domain.is_solved(tree[id].state, goal)) continue;
        if (best == kNoNode || tree[id].g < tree[best].g || (tree[id].g == tree[best].g && id < best)) best = id;
    }
    return best;
}

}  // namespace detail

}  // namespace xube
