#pragma once

#include <exception>
#include <map>
#include <thread>

#include "xube/search/run.hpp"
#include "xube/training/config.hpp"
#include "xube/training/replay.hpp"
#include "xube/training/supervised.hpp"
#include "xube/training/targets.hpp"

namespace xube::training {

struct KStats {
    std::size_t count = 0;   // first-attempt instances (walks, for supervised families)
    std::size_t solved = 0;
    double path_cost_sum = 0.0;  // over solved first attempts
    double itrs_sum = 0.0;
    double target_sum = 0.0;
    std::size_t targets = 0;
};

struct CollectStats {
    std::size_t first_attempts = 0;
    std::size_t first_solved = 0;
    double path_cost_sum = 0.0;
    double itrs_sum = 0.0;
    std::size_t insts_generated = 0;
    std::size_t discarded = 0;  // dead-end examples
    std::size_t her_relabels = 0;
    std::size_t her_satisfied = 0;
    std::map<int, KStats> by_k;
    double secs_search = 0.0;   // instance generation plus search, summed over workers
    double secs_targets = 0.0;  // summed over workers

    [[nodiscard]] double solve_rate() const {
        return first_attempts ? static_cast<double>(first_solved) / static_cast<double>(first_attempts)
                              : std::numeric_limits<double>::quiet_NaN();
    }

    void merge(const CollectStats& o) {
        first_attempts += o.first_attempts;
        first_solved += o.first_solved;
        path_cost_sum += o.path_cost_sum;
        itrs_sum += o.itrs_sum;
        insts_generated += o.insts_generated;
        discarded += o.discarded;
        her_relabels += o.her_relabels;
        her_satisfied += o.her_satisfied;
        for (const auto& [k, s] : o.by_k) {
            auto& d = by_k[k];
            d.count += s.count;
            d.solved += s.solved;
            d.path_cost_sum += s.path_cost_sum;
            d.itrs_sum += s.itrs_sum;
            d.target_sum += s.target_sum;
            d.targets += s.targets;
        }
        secs_search += o.secs_search;
        secs_targets += o.secs_targets;
    }
};

template <class D>
struct CollectSetup {
    AlgoSpec algo;  // B = 1, I already applied
    char head = 'v';
    bool her = false;
    bool lhbl = false;
    std::size_t budget = 0;  // U * N examples
    std::size_t slots = 0;   // ceil(U * N / I) initial instances
    Encoder<D> encoder;
};

template <ActsEnum D>
Guidance<D> guidance_from(const D& domain, const Encoder<D>& encoder, std::shared_ptr<const nn::Evaluator> eval, char head) {
    if (head == 'q') {
        if constexpr (FixedActsEnum<D>) {
            return make_heuristic_q(encoder, std::move(eval), domain.all_actions().size());
        } else {
            throw ConfigError("a q head needs a domain with a fixed action set");
        }
    }
    return make_heuristic_v(encoder, std::move(eval));
}

namespace detail {

template <class D>
void add_labeled(const Encoder<D>& enc, const GoalOf<D>& goal, int k, std::vector<Labeled<StateOf<D>>>& labeled,
                 ExampleBlock& block, CollectStats& stats, std::vector<float>& scratch) {
    scratch.resize(enc.dim);
    auto& ks = stats.by_k[k];
    for (auto& l : labeled) {
        if (!std::isfinite(l.target)) {
            ++stats.discarded;
            continue;
        }
        enc.encode(l.state, goal, std::span<float>(scratch));
        block.add(scratch, l.target, l.action, k);
        ks.target_sum += l.target;
        ++ks.targets;
    }
}

template <ActsEnum D>
std::vector<Labeled<StateOf<D>>> examples_from_tree(const D& domain, const CollectSetup<D>& setup,
                                                    const SearchTree<StateOf<D>, ActionOf<D>>& tree,
                                                    const GoalOf<D>& goal, const Guidance<D>& target) {
    if (setup.head == 'v') return tree_examples_v(domain, tree, goal, std::get<HeuristicV<D>>(target), setup.lhbl);
    if constexpr (FixedActsEnum<D>) {
        return tree_examples_q(domain, tree, goal, std::get<HeuristicQ<D>>(target), setup.lhbl);
    }
    throw ConfigError("a q head needs a domain with a fixed action set");
}

template <ActsEnum D>
std::vector<Labeled<StateOf<D>>> examples_from_her(const D& domain, const CollectSetup<D>& setup,
                                                   const SearchTree<StateOf<D>, ActionOf<D>>& tree,
                                                   const HerRelabel<GoalOf<D>>& her, const Guidance<D>& target) {
    if (setup.head == 'v') return her_examples_v(domain, tree, her, std::get<HeuristicV<D>>(target));
    if constexpr (FixedActsEnum<D>) {
        return her_examples_q(domain, tree, her, std::get<HeuristicQ<D>>(target));
    }
    throw ConfigError("a q head needs a domain with a fixed action set");
}

}  // namespace detail

// One worker's share. Initial instances are searched round-robin: a solved
// one is replaced by a fresh instance with the same k, an unsolved one
// retires. Stops once the example budget is met; the last search may
// overshoot it.
template <ActsEnum D>
std::pair<ExampleBlock, CollectStats> collect_worker(const D& domain, const CollectSetup<D>& setup,
                                                     const Guidance<D>& guide, const Guidance<D>& target, int K,
                                                     std::size_t slots, std::size_t budget, Rng& rng) {
    ExampleBlock block(setup.encoder.dim);
    CollectStats stats;
    if (budget == 0) return {std::move(block), std::move(stats)};
    std::vector<float> scratch;
    xube::detail::Stopwatch total;
    double target_secs = 0.0;

    if (is_supervised(setup.algo.family)) {
        const bool fwd = setup.algo.family == AlgoFamily::SupFwdV || setup.algo.family == AlgoFamily::SupFwdQ;
        while (block.size() < budget) {
            const int k = setup.algo.walk_steps > 0 ? static_cast<int>(setup.algo.walk_steps) : sample_ks(K, 1, rng)[0];
            auto walk = sup_walk_examples(domain, fwd ? WalkDirection::Forward : WalkDirection::Reverse, setup.head, k, rng);
            ++stats.insts_generated;
            ++stats.by_k[k].count;
            detail::add_labeled(setup.encoder, walk.goal, k, walk.examples, block, stats, scratch);
        }
        stats.secs_targets = total.seconds();
        return {std::move(block), std::move(stats)};
    }

    auto fresh = [&](int k) {
        const int ks[1] = {k};
        ++stats.insts_generated;
        return domain.samp_prob_insts(std::span<const int>(ks), rng).at(0);
    };
    struct Slot {
        InstanceOf<D> inst;
        bool first;
    };
    std::vector<Slot> active;
    for (int k : sample_ks(K, slots, rng)) active.push_back({fresh(k), true});

    std::size_t cursor = 0;
    std::size_t barren = 0;  // consecutive searches that added nothing
    while (block.size() < budget) {
        if (active.empty()) active.push_back({fresh(sample_ks(K, 1, rng)[0]), true});
        if (cursor >= active.size()) cursor = 0;
        Slot& slot = active[cursor];
        const int k = slot.inst.gen_steps;
        auto res = run_search(domain, slot.inst, setup.algo, guide, rng);

        if (slot.first) {
            auto& ks = stats.by_k[k];
            ++stats.first_attempts;
            ++ks.count;
            stats.itrs_sum += static_cast<double>(res.iterations);
            ks.itrs_sum += static_cast<double>(res.iterations);
            if (res.solved) {
                ++stats.first_solved;
                ++ks.solved;
                stats.path_cost_sum += res.path_cost;
                ks.path_cost_sum += res.path_cost;
            }
        }

        xube::detail::Stopwatch tw;
        const std::size_t before = block.size();
        auto labeled = detail::examples_from_tree(domain, setup, res.tree, slot.inst.goal, target);
        detail::add_labeled(setup.encoder, slot.inst.goal, k, labeled, block, stats, scratch);
        if (setup.her && !res.solved) {
            if constexpr (GoalSampleableFromState<D>) {
                auto her = her_relabel(domain, res.tree, rng);
                ++stats.her_relabels;
                if (domain.is_solved(res.tree[her.node].state, her.goal)) ++stats.her_satisfied;
                auto relabeled = detail::examples_from_her(domain, setup, res.tree, her, target);
                detail::add_labeled(setup.encoder, her.goal, k, relabeled, block, stats, scratch);
            } else {
                throw ConfigError("her needs a domain with GoalSampleableFromState");
            }
        }
        target_secs += tw.seconds();
        barren = block.size() == before ? barren + 1 : 0;
        if (barren > 10000) throw InternalError("searches keep producing no trainable examples (all dead ends?)");

        if (res.solved) {
            slot = {fresh(k), false};
            ++cursor;
        } else {
            active.erase(active.begin() + static_cast<std::ptrdiff_t>(cursor));
        }
    }
    stats.secs_targets = target_secs;
    stats.secs_search = total.seconds() - target_secs;
    return {std::move(block), std::move(stats)};
}

// Splits the slots and the example budget over the workers (worker w gets
// rngs[w]) and merges their blocks in worker order.
template <ActsEnum D>
std::pair<ExampleBlock, CollectStats> collect_update_check(const D& domain, const CollectSetup<D>& setup,
                                                           const Guidance<D>& guide, const Guidance<D>& target, int K,
                                                           std::vector<Rng>& rngs) {
    const std::size_t w = rngs.size();
    if (w == 0) throw ConfigError("workers must be >= 1");
    auto share = [w](std::size_t total, std::size_t i) { return total / w + (i < total % w ? 1 : 0); };

    std::vector<std::pair<ExampleBlock, CollectStats>> parts(w);
    if (w == 1) {
        parts[0] = collect_worker(domain, setup, guide, target, K, setup.slots, setup.budget, rngs[0]);
    } else {
        std::vector<std::exception_ptr> errors(w);
        std::vector<std::thread> threads;
        threads.reserve(w);
        for (std::size_t i = 0; i < w; ++i) {
            threads.emplace_back([&, i] {
                try {
                    parts[i] = collect_worker(domain, setup, guide, target, K, share(setup.slots, i),
                                              share(setup.budget, i), rngs[i]);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            });
        }
        for (auto& t : threads) t.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    ExampleBlock block(setup.encoder.dim);
    CollectStats stats;
    for (auto& [b, s] : parts) {
        block.append(b);
        stats.merge(s);
    }
    return {std::move(block), std::move(stats)};
}

}  // namespace xube::training
