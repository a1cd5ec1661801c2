#pragma once

// Beam search over heuristic-v or heuristic-q edge scores. No closed map and
// no priority queue: every iteration scores all outgoing edges of the beam and
// keeps B of them.

#include <cmath>
#include <variant>

#include "xube/search/heuristic.hpp"
#include "xube/search/tree.hpp"

namespace xube {

// Pick min(B, n) distinct edge indices. Each pick is uniformly random among
// the remaining edges with probability eps; otherwise the best remaining
// score (temperature 0, earliest on ties) or a draw from
// softmax(score / temperature) over the remaining edges.
inline std::vector<std::size_t> select_edges(std::span<const double> scores, std::size_t beam, double temperature, double eps,
                                             Rng& rng) {
    std::vector<std::size_t> remaining(scores.size());
    for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;
    std::vector<std::size_t> chosen;
    const std::size_t k = std::min(beam, scores.size());
    chosen.reserve(k);
    std::vector<double> weights;
    while (chosen.size() < k) {
        std::size_t pick = 0;  // position in `remaining`
        if (eps > 0.0 && uniform01(rng) < eps) {
            pick = uniform_index(rng, remaining.size());
        } else if (temperature == 0.0) {
            for (std::size_t j = 1; j < remaining.size(); ++j) {
                if (scores[remaining[j]] > scores[remaining[pick]]) pick = j;
            }
        } else {
            double top = -std::numeric_limits<double>::infinity();
            for (auto i : remaining) top = std::max(top, scores[i]);
            weights.resize(remaining.size());
            double total = 0.0;
            for (std::size_t j = 0; j < remaining.size(); ++j) {
                weights[j] = std::exp((scores[remaining[j]] - top) / temperature);
                total += weights[j];
            }
            double u = uniform01(rng) * total;
            pick = remaining.size() - 1;
            for (std::size_t j = 0; j < remaining.size(); ++j) {
                if (u < weights[j]) {
                    pick = j;
                    break;
                }
                u -= weights[j];
            }
        }
        chosen.push_back(remaining[pick]);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    return chosen;
}

template <class D>
using BeamScorer = std::variant<HeuristicV<D>, HeuristicQ<D>>;

template <ActsEnum D>
SearchResultOf<D> beam_search(const D& domain, const InstanceOf<D>& inst, const BeamScorer<D>& scorer,
                              const SearchParams& params, Rng& rng) {
    params.validate();
    detail::Stopwatch sw;
    SearchResultOf<D> result;
    auto& tree = result.tree;
    const auto& goal = inst.goal;

    std::vector<NodeId> beam{tree.add_root(inst.start)};
    result.nodes_generated = 1;
    NodeId goal_node = kNoNode;

    struct Candidate {
        NodeId parent;
        ActionOf<D> action;
        std::optional<Transition<StateOf<D>>> transition;  // present when scored through h
    };
    std::vector<Candidate> cands;
    std::vector<double> scores;

    for (;;) {
        goal_node = detail::cheapest_solved(domain, tree, std::span<const NodeId>(beam), goal);
        if (goal_node != kNoNode) {
            tree.popped.push_back(goal_node);
            break;
        }
        if (result.iterations >= params.max_iters) break;
        ++result.iterations;

        cands.clear();
        scores.clear();
        std::vector<StateOf<D>> beam_states;
        for (NodeId id : beam) {
            tree[id].expanded = true;
            tree.popped.push_back(id);
            beam_states.push_back(tree[id].state);
        }

        if (const auto* hv = std::get_if<HeuristicV<D>>(&scorer)) {
            std::vector<StateOf<D>> child_states;
            for (NodeId id : beam) {
                for (auto& [a, tr] : domain.expand(tree[id].state)) {
                    child_states.push_back(tr.next_state);
                    cands.push_back({id, std::move(a), std::move(tr)});
                }
            }
            result.nodes_generated += static_cast<std::int64_t>(cands.size());
            const auto hs = (*hv)(std::span<const StateOf<D>>(child_states), goal);
            for (std::size_t i = 0; i < cands.size(); ++i) scores.push_back(-(cands[i].transition->cost + hs[i]));
        } else {
            if constexpr (FixedActsEnum<D>) {
                const auto& qf = std::get<HeuristicQ<D>>(scorer);
                const std::size_t na = domain.all_actions().size();
                if (qf.num_actions != na) throw ConfigError("heuristic-q width does not match the domain's action set");
                const auto qs = qf(std::span<const StateOf<D>>(beam_states), goal);
                for (std::size_t b = 0; b < beam.size(); ++b) {
                    tree[beam[b]].h = std::numeric_limits<double>::infinity();
                    for (auto& a : domain.actions(tree[beam[b]].state)) {
                        const double qv = qs[b * na + domain.action_index(a)];
                        tree[beam[b]].h = std::min(tree[beam[b]].h, qv);
                        scores.push_back(-qv);
                        cands.push_back({beam[b], std::move(a), std::nullopt});
                    }
                }
            } else {
                throw ConfigError("beam search with a heuristic-q needs a fixed action set");
            }
        }
        if (cands.empty()) break;  // every beam node is a dead end

        const auto picks = select_edges(scores, params.batch, params.temperature, params.eps, rng);
        std::vector<NodeId> next;
        next.reserve(picks.size());
        for (auto i : picks) {
            auto& c = cands[i];
            Transition<StateOf<D>> tr = c.transition ? *c.transition : domain.next_state(tree[c.parent].state, c.action);
            const NodeId child = tree.add_child(c.parent, c.action, std::move(tr.next_state), tr.cost);
            tree[child].h = c.transition ? -scores[i] - tr.cost : std::numeric_limits<double>::quiet_NaN();
            next.push_back(child);
        }
        if (!std::holds_alternative<HeuristicV<D>>(scorer)) {
            result.nodes_generated += static_cast<std::int64_t>(next.size());
        }

        if (params.verbose) {
            std::vector<double> fs, hv;
            for (auto i : picks) fs.push_back(-scores[i]);
            for (NodeId id : beam) hv.push_back(tree[id].h);
            detail::verbose_line(*params.verbose, result.iterations, next.size(), detail::summarize(fs),
                                 detail::summarize(hv), result.nodes_generated);
        }
        beam = std::move(next);
    }

    detail::finish(result, goal_node, sw);
    return result;
}

}  // namespace xube
