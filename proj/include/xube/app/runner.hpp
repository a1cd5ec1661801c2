#pragma once

// Type-erased per-domain command implementations. The registry builds a
// DomainHandle from "name:args"; the CLI only talks to this interface.

#include <chrono>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <memory>
#include <optional>
#include <thread>

#include "xube/app/args.hpp"
#include "xube/app/instances.hpp"
#include "xube/nn/checkpoint.hpp"
#include "xube/search/run.hpp"
#include "xube/training/trainer.hpp"

namespace xube::app {

// name -> approximator factory taking (args, input dim, output dim, seed).
struct ArchEntry {
    std::string name;
    std::string help;
    std::function<std::unique_ptr<nn::Approximator>(NamedArgs&, std::size_t, std::size_t, std::uint64_t)> make;
};

struct EncoderInfo {
    std::string domain;
    std::string arch;
    std::string name;
};

struct ProblemInstOptions {
    std::size_t count = 100;
    int k_min = 0;
    int k_max = 30;
    std::string scheme;  // "forward" | "reverse"; empty picks the domain's own generator
    std::uint64_t seed = 0;
};

struct SolveOptions {
    std::string algo = "graph_v";
    std::optional<std::filesystem::path> ckpt;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    std::ostream* verbose = nullptr;  // per-iteration search trace; single worker only
};

class DomainHandle {
  public:
    virtual ~DomainHandle() = default;

    [[nodiscard]] virtual const std::string& spec() const = 0;
    [[nodiscard]] virtual std::vector<std::string> capabilities() const = 0;

    virtual void problem_inst(const ProblemInstOptions& opts, std::ostream& out) const = 0;
    virtual SolveSummary solve(std::istream& insts, const SolveOptions& opts, std::ostream& out) const = 0;
    // Replays every solved record against its instance; returns how many were
    // checked. Throws CorruptFileError on the first record that fails.
    virtual std::size_t verify_results(std::istream& insts, std::istream& results) const = 0;
    virtual void time(const std::optional<std::filesystem::path>& ckpt, std::uint64_t seed, std::ostream& out) const = 0;
    virtual training::TrainResult train(const ArchEntry& arch, NamedArgs arch_args, const training::TrainConfig& cfg,
                                        const std::filesystem::path& out_dir, std::istream* test_insts) const = 0;
    virtual void viz(int steps, bool interactive, std::uint64_t seed, std::istream& in, std::ostream& out) const = 0;
};

template <class D>
struct EncoderSlot {
    std::string arch;
    Encoder<D> encoder;
};

namespace detail {

inline char checkpoint_head(const nn::LoadedCheckpoint& ck) {
    const std::string h = ck.meta.value("head", std::string());
    if (h == "v" || h == "q") return h[0];
    return ck.approx->output_dim() == 1 ? 'v' : 'q';
}

inline std::string row(const std::string& op, std::size_t calls, double secs) {
    std::ostringstream os;
    os << std::left << std::setw(22) << op << std::right << std::setw(10) << calls << std::setw(14) << std::fixed
       << std::setprecision(6) << secs << std::setw(14) << std::setprecision(3)
       << (calls ? secs * 1e6 / static_cast<double>(calls) : 0.0);
    return os.str();
}

}  // namespace detail

template <ActsEnum D>
class DomainRunner final : public DomainHandle {
  public:
    DomainRunner(std::string spec, D domain, std::vector<EncoderSlot<D>> encoders)
        : spec_(std::move(spec)), domain_(std::move(domain)), encoders_(std::move(encoders)) {}

    [[nodiscard]] const D& domain() const { return domain_; }
    [[nodiscard]] const std::string& spec() const override { return spec_; }
    [[nodiscard]] std::vector<std::string> capabilities() const override { return capability_names<D>(); }

    // First registered encoder for the architecture, or the one with the
    // given name when a checkpoint recorded it.
    [[nodiscard]] const Encoder<D>& find_encoder(const std::string& arch, const std::string& name = {}) const {
        for (const auto& slot : encoders_) {
            if (name.empty() ? slot.arch == arch : slot.encoder.name == name) return slot.encoder;
        }
        if (!name.empty()) throw ConfigError("domain '" + spec_ + "' has no encoder named '" + name + "'");
        throw ConfigError("domain '" + spec_ + "' has no encoder for architecture '" + arch + "'");
    }

    std::vector<InstanceOf<D>> generate(const ProblemInstOptions& opts) const {
        if (opts.k_min < 0 || opts.k_min > opts.k_max) throw ConfigError("need 0 <= k_min <= k_max");
        Rng rng(opts.seed);
        std::uniform_int_distribution<int> kd(opts.k_min, opts.k_max);
        std::vector<int> ks(opts.count);
        for (auto& k : ks) k = kd(rng);
        const std::span<const int> kspan(ks);
        if (opts.scheme.empty()) return domain_.samp_prob_insts(kspan, rng);
        if (opts.scheme == "forward") {
            if constexpr (GoalSampleableFromState<D>) {
                return gen_prob_insts_forward(domain_, kspan, rng);
            } else {
                throw ConfigError("forward scheme needs a domain with GoalSampleableFromState");
            }
        }
        if (opts.scheme == "reverse") {
            if constexpr (ReverseWalkable<D>) {
                return gen_prob_insts_reverse(domain_, kspan, rng);
            } else {
                throw ConfigError("reverse scheme needs a domain with ReverseWalkable");
            }
        }
        throw ConfigError("scheme must be 'forward' or 'reverse', got '" + opts.scheme + "'");
    }

    void problem_inst(const ProblemInstOptions& opts, std::ostream& out) const override {
        if constexpr (Renderable<D>) {
            const auto insts = generate(opts);
            write_instances(domain_, std::span<const InstanceOf<D>>(insts), out);
        } else {
            throw ConfigError("writing instances needs a domain with Renderable");
        }
    }

    // Zero heuristic without a checkpoint; otherwise the checkpoint's network
    // behind the encoder it was trained with.
    Guidance<D> guidance(const std::optional<std::filesystem::path>& ckpt, const AlgoSpec& algo) const {
        const char want = family_head(algo.family);
        if (!ckpt) {
            if (want == 'q') {
                if constexpr (FixedActsEnum<D>) return zero_q<D>(domain_.all_actions().size());
                throw ConfigError("a q heuristic needs a domain with FixedActsEnum");
            }
            return zero_heuristic<D>();
        }
        auto ck = nn::load_checkpoint(*ckpt);
        const std::string trained_on = ck.meta.value("domain", std::string());
        if (!trained_on.empty() && trained_on != spec_) {
            throw ConfigError("checkpoint was trained on '" + trained_on + "', not '" + spec_ + "'");
        }
        const char head = detail::checkpoint_head(ck);
        if (want && want != head) {
            throw ConfigError(render_algo(algo) + " needs a heuristic-" + want + " but the checkpoint has a " + head +
                              " head");
        }
        const auto& enc = find_encoder(ck.approx->kind(), ck.meta.value("encoder", std::string()));
        auto snap = ck.approx->snapshot();
        if (head == 'q') {
            if constexpr (FixedActsEnum<D>) return make_heuristic_q(enc, snap, domain_.all_actions().size());
            throw ConfigError("a q heuristic needs a domain with FixedActsEnum");
        }
        return make_heuristic_v(enc, snap);
    }

    SolveSummary solve(std::istream& insts_in, const SolveOptions& opts, std::ostream& out) const override {
        if constexpr (Renderable<D> && StringToAct<D>) {
            const auto insts = read_instances(domain_, insts_in);
            return solve(std::span<const InstanceOf<D>>(insts), opts, out);
        } else {
            throw ConfigError("solving from files needs a domain with Renderable and StringToAct");
        }
    }

    SolveSummary solve(std::span<const InstanceOf<D>> insts, const SolveOptions& opts, std::ostream& out) const
        requires StringToAct<D>
    {
        const AlgoSpec algo = parse_algo(opts.algo);
        if (is_supervised(algo.family)) throw ConfigError(opts.algo + " is a training family, not a search");
        algo.search_params().validate();
        if (opts.workers < 1) throw ConfigError("workers must be >= 1");
        const auto guide = guidance(opts.ckpt, algo);

        std::vector<SearchResultOf<D>> results(insts.size());
        auto work = [&](std::size_t w, std::size_t stride) {
            for (std::size_t i = w; i < insts.size(); i += stride) {
                Rng rng(opts.seed + i);
                results[i] = run_search(domain_, insts[i], algo, guide, rng, stride == 1 ? opts.verbose : nullptr);
                results[i].tree = {};
            }
        };
        const std::size_t workers = std::min(opts.workers, std::max<std::size_t>(insts.size(), 1));
        if (workers == 1) {
            work(0, 1);
        } else {
            std::vector<std::thread> pool;
            std::vector<std::exception_ptr> errors(workers);
            for (std::size_t w = 0; w < workers; ++w) {
                pool.emplace_back([&, w] {
                    try {
                        work(w, workers);
                    } catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
            }
            for (auto& t : pool) t.join();
            for (auto& e : errors) {
                if (e) std::rethrow_exception(e);
            }
        }

        std::vector<SolveRecord> recs;
        recs.reserve(insts.size());
        for (std::size_t i = 0; i < insts.size(); ++i) {
            const auto& res = results[i];
            SolveRecord rec;
            rec.index = i;
            rec.solved = res.solved;
            for (const auto& a : res.path) rec.path.push_back(domain_.action_to_string(a));
            rec.path_cost = res.solved ? res.path_cost : 0.0;
            rec.iterations = res.iterations;
            rec.nodes_generated = res.nodes_generated;
            rec.secs = res.wall_time;
            if (rec.solved) {
                if (auto why = replay_problem(domain_, insts[i], rec); !why.empty()) {
                    throw InternalError("instance " + std::to_string(i) + " failed replay: " + why);
                }
            } else {
                rec.path.clear();
            }
            out << record_json(rec).dump() << '\n';
            recs.push_back(std::move(rec));
        }
        const auto summary = summarize(std::span<const SolveRecord>(recs));
        out << summary_json(summary).dump() << '\n';
        out.flush();
        return summary;
    }

    std::size_t verify_results(std::istream& insts_in, std::istream& results_in) const override {
        if constexpr (Renderable<D> && StringToAct<D>) {
            const auto insts = read_instances(domain_, insts_in);
            const auto file = read_results(results_in);
            std::size_t checked = 0;
            for (const auto& rec : file.records) {
                if (rec.index >= insts.size()) {
                    throw CorruptFileError("result index " + std::to_string(rec.index) + " has no instance");
                }
                if (!rec.solved) continue;
                if (auto why = replay_problem(domain_, insts[rec.index], rec); !why.empty()) {
                    throw CorruptFileError("record " + std::to_string(rec.index) + ": " + why);
                }
                ++checked;
            }
            return checked;
        } else {
            throw ConfigError("verifying results needs a domain with Renderable and StringToAct");
        }
    }

    void time(const std::optional<std::filesystem::path>& ckpt, std::uint64_t seed, std::ostream& out) const override {
        using Clock = std::chrono::steady_clock;
        auto secs_since = [](Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); };
        Rng rng(seed);
        constexpr std::size_t kInsts = 200;
        constexpr std::size_t kCalls = 20000;
        std::size_t sink = 0;  // keeps results observable

        out << std::left << std::setw(22) << "op" << std::right << std::setw(10) << "calls" << std::setw(14)
            << "total_secs" << std::setw(14) << "per_call_us" << '\n';

        std::vector<int> ks(kInsts, 20);
        auto t0 = Clock::now();
        const auto insts = domain_.samp_prob_insts(std::span<const int>(ks), rng);
        out << detail::row("samp_prob_insts", kInsts, secs_since(t0)) << '\n';

        std::vector<StateOf<D>> states;
        for (const auto& inst : insts) states.push_back(inst.start);
        auto pick = [&](std::size_t i) -> const StateOf<D>& { return states[i % states.size()]; };

        std::vector<std::optional<ActionOf<D>>> acts;
        acts.reserve(kCalls);
        t0 = Clock::now();
        for (std::size_t i = 0; i < kCalls; ++i) acts.push_back(domain_.samp_state_act(pick(i), rng));
        out << detail::row("samp_state_act", kCalls, secs_since(t0)) << '\n';

        // (state, action) pairs that exist; dead ends are skipped
        std::vector<StateOf<D>> moved;
        std::vector<ActionOf<D>> moves;
        for (std::size_t i = 0; i < kCalls; ++i) {
            if (!acts[i]) continue;
            moved.push_back(pick(i));
            moves.push_back(*acts[i]);
        }
        t0 = Clock::now();
        for (std::size_t i = 0; i < moved.size(); ++i) sink += domain_.next_state(moved[i], moves[i]).cost > 0;
        out << detail::row("next_state", moved.size(), secs_since(t0)) << '\n';

        t0 = Clock::now();
        for (std::size_t i = 0; i < kCalls; ++i) sink += domain_.is_solved(pick(i), insts[i % insts.size()].goal);
        out << detail::row("is_solved", kCalls, secs_since(t0)) << '\n';

        t0 = Clock::now();
        for (std::size_t i = 0; i < kCalls; ++i) sink += domain_.expand(pick(i)).size();
        out << detail::row("expand", kCalls, secs_since(t0)) << '\n';

        if constexpr (GoalSampleableFromState<D>) {
            t0 = Clock::now();
            for (std::size_t i = 0; i < kCalls; ++i) sink += domain_.is_solved(pick(i), domain_.samp_goal_from_state(pick(i), rng));
            out << detail::row("samp_goal_from_state", kCalls, secs_since(t0)) << '\n';
        } else {
            out << "samp_goal_from_state: absent\n";
        }

        if constexpr (ReverseWalkable<D>) {
            t0 = Clock::now();
            for (std::size_t i = 0; i < kCalls; ++i) sink += domain_.reverse_step(pick(i), rng).has_value();
            out << detail::row("reverse_step", kCalls, secs_since(t0)) << '\n';
        } else {
            out << "reverse_step: absent\n";
        }

        if constexpr (BatchedTransition<D>) {
            t0 = Clock::now();
            auto next = domain_.next_states(std::span<const StateOf<D>>(moved), std::span<const ActionOf<D>>(moves));
            sink += next.size();
            out << detail::row("batched_next_state", moved.size(), secs_since(t0)) << '\n';
        } else {
            out << "batched_next_state: absent\n";
        }

        if (ckpt) {
            auto ck = nn::load_checkpoint(*ckpt);
            const auto& enc = find_encoder(ck.approx->kind(), ck.meta.value("encoder", std::string()));
            auto snap = ck.approx->snapshot();
            constexpr std::size_t kBatches = 20;
            const GoalOf<D>& goal = insts.front().goal;
            t0 = Clock::now();
            for (std::size_t b = 0; b < kBatches; ++b) sink += enc.batch(std::span<const StateOf<D>>(states), goal).rows;
            out << detail::row("encode", kBatches * states.size(), secs_since(t0)) << '\n';
            const auto in = enc.batch(std::span<const StateOf<D>>(states), goal);
            t0 = Clock::now();
            for (std::size_t b = 0; b < kBatches; ++b) sink += snap->forward(in).rows;
            out << detail::row("forward_batch", kBatches * states.size(), secs_since(t0)) << '\n';
        }
        volatile std::size_t keep = sink;
        (void)keep;
    }

    training::TrainResult train(const ArchEntry& arch, NamedArgs arch_args, const training::TrainConfig& cfg,
                                const std::filesystem::path& out_dir, std::istream* test_insts) const override {
        const auto r = training::resolve(cfg);
        const auto& enc = find_encoder(arch.name);
        std::size_t out_dim = 1;
        if (r.head == 'q') {
            if constexpr (FixedActsEnum<D>) {
                out_dim = domain_.all_actions().size();
            } else {
                throw ConfigError("a q head needs a domain with FixedActsEnum");
            }
        }
        auto approx = arch.make(arch_args, enc.dim, out_dim, cfg.seed);
        arch_args.finish();
        std::vector<InstanceOf<D>> tests;
        if (test_insts) {
            if constexpr (Renderable<D>) {
                tests = read_instances(domain_, *test_insts);
            } else {
                throw ConfigError("test instances need a domain with Renderable");
            }
        }
        nlohmann::json meta;
        meta["domain"] = spec_;
        meta["arch"] = arch_args.text();
        return training::train(domain_, cfg, enc, *approx, std::span<const InstanceOf<D>>(tests), out_dir, meta);
    }

    void viz(int steps, bool interactive, std::uint64_t seed, std::istream& in, std::ostream& out) const override {
        if constexpr (Renderable<D>) {
            if (steps < 0) throw ConfigError("steps must be >= 0");
            Rng rng(seed);
            const std::vector<int> ks{steps};
            auto inst = domain_.samp_prob_insts(std::span<const int>(ks), rng).front();
            out << "goal:\n" << domain_.render_goal(inst.goal) << "start:\n" << domain_.render_state(inst.start);
            auto state = inst.start;
            if (domain_.is_solved(state, inst.goal)) out << "solved\n";
            if (!interactive) return;
            if constexpr (StringToAct<D>) {
                std::string line;
                for (;;) {
                    out << "action> " << std::flush;
                    if (!std::getline(in, line)) break;
                    const auto b = line.find_first_not_of(" \t\r");
                    const auto e = line.find_last_not_of(" \t\r");
                    const std::string text = b == std::string::npos ? "" : line.substr(b, e - b + 1);
                    if (text == "q") break;
                    if (text.empty()) continue;
                    auto a = domain_.parse_action(text);
                    if (!a) {
                        out << "error: unknown action '" << text << "'\n";
                        continue;
                    }
                    try {
                        auto tr = domain_.next_state(state, *a);
                        state = std::move(tr.next_state);
                        out << "cost " << format_double(tr.cost) << '\n';
                    } catch (const InvalidActionError& err) {
                        out << "error: " << err.what() << '\n';
                        continue;
                    }
                    out << domain_.render_state(state);
                    if (domain_.is_solved(state, inst.goal)) out << "solved\n";
                }
            } else {
                throw ConfigError("interactive mode needs a domain with StringToAct");
            }
        } else {
            throw ConfigError("viz needs a domain with Renderable");
        }
    }

  private:
    std::string spec_;
    D domain_;
    std::vector<EncoderSlot<D>> encoders_;
};

}  // namespace xube::app
