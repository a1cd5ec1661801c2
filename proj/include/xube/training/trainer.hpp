#pragma once

#include <spdlog/spdlog.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "xube/nn/checkpoint.hpp"
#include "xube/training/collect.hpp"
#include "xube/training/schedule.hpp"

namespace xube::training {

inline constexpr const char* kStatsHeader =
    "check,itr,loss,target_mean,target_min,target_max,k_max,solve_rate,path_cost_mean,search_itrs_mean,"
    "insts_generated,secs_generate,secs_targets,secs_train";
inline constexpr const char* kStatsByKHeader = "check,k,count,solve_rate,path_cost_mean,search_itrs_mean,target_mean";
inline constexpr const char* kPredHeader = "check,k,target,pred";
inline constexpr const char* kTestHeader = "check,count,solve_rate,path_cost_mean,search_itrs_mean,nodes_generated_mean";

struct UpdateCheckStats {
    int check = 0;
    std::int64_t itr = 0;  // gradient steps so far
    double loss = 0.0;     // mean over this check's U steps
    double target_mean = 0.0, target_min = 0.0, target_max = 0.0;
    int k = 0;  // K in effect while collecting
    double solve_rate = 0.0;
    double path_cost_mean = 0.0;
    double search_itrs_mean = 0.0;
    std::size_t insts_generated = 0;
    std::size_t examples = 0;
    double secs_generate = 0.0, secs_targets = 0.0, secs_train = 0.0;
    bool swapped = false;
    CollectStats collect;
};

struct TestStats {
    int check = 0;
    std::size_t count = 0;
    std::size_t solved = 0;
    double path_cost_mean = 0.0;
    double search_itrs_mean = 0.0;
    double nodes_generated_mean = 0.0;
};

struct TrainResult {
    std::vector<UpdateCheckStats> history;
    std::vector<TestStats> tests;
    int final_k = 0;
    bool target_is_zero = true;
};

namespace detail {

inline double ratio(double num, std::size_t den) {
    return den ? num / static_cast<double>(den) : std::numeric_limits<double>::quiet_NaN();
}

inline std::ofstream open_out(const std::filesystem::path& p, const char* header) {
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot write " + p.string());
    if (header) os << header << '\n';
    return os;
}

inline std::string stats_row(const UpdateCheckStats& s) {
    std::ostringstream os;
    os << s.check << ',' << s.itr << ',' << format_double(s.loss) << ',' << format_double(s.target_mean) << ','
       << format_double(s.target_min) << ',' << format_double(s.target_max) << ',' << s.k << ','
       << format_double(s.solve_rate) << ',' << format_double(s.path_cost_mean) << ','
       << format_double(s.search_itrs_mean) << ',' << s.insts_generated << ',' << format_double(s.secs_generate)
       << ',' << format_double(s.secs_targets) << ',' << format_double(s.secs_train);
    return os.str();
}

template <class D>
std::string test_capability_errors(const ResolvedConfig& r, const TrainConfig& cfg) {
    if (cfg.her && !GoalSampleableFromState<D>) return "her needs a domain with GoalSampleableFromState";
    if (r.head == 'q' && !FixedActsEnum<D>) return "a q head needs a domain with FixedActsEnum";
    const auto fam = r.algo.family;
    if ((fam == AlgoFamily::SupFwdV || fam == AlgoFamily::SupFwdQ) && !GoalSampleableFromState<D>) {
        return "forward supervised walks need GoalSampleableFromState";
    }
    if ((fam == AlgoFamily::SupRevV || fam == AlgoFamily::SupRevQ) && !ReverseWalkable<D>) {
        return "reverse supervised walks need ReverseWalkable";
    }
    return {};
}

}  // namespace detail

// The training loop. Each update check: collect examples with the current
// target network, push them into the replay buffer, take U gradient steps on
// batches of N, maybe swap the target network, adapt K, then write stats,
// checkpoints and (every test_every checks) test results into out_dir.
template <ActsEnum D>
TrainResult train(const D& domain, const TrainConfig& cfg, const Encoder<D>& encoder, nn::Approximator& approx,
                  std::span<const InstanceOf<D>> test_set, const std::filesystem::path& out_dir,
                  const nlohmann::json& ckpt_meta = nlohmann::json::object()) {
    const ResolvedConfig r = resolve(cfg);
    if (auto err = detail::test_capability_errors<D>(r, cfg); !err.empty()) throw ConfigError(err);
    if (encoder.dim != approx.input_dim()) {
        throw ConfigError("encoder '" + encoder.name + "' width " + std::to_string(encoder.dim) +
                          " does not match the approximator input " + std::to_string(approx.input_dim()));
    }
    std::size_t out_dim = 1;
    if (r.head == 'q') {
        if constexpr (FixedActsEnum<D>) out_dim = domain.all_actions().size();
    }
    if (approx.output_dim() != out_dim) {
        throw ConfigError(std::string("a ") + r.head + " head needs " + std::to_string(out_dim) +
                          " approximator outputs, got " + std::to_string(approx.output_dim()));
    }
    const char test_head = family_head(r.test_algo.family);
    if (cfg.test_every > 0 && test_head && test_head != r.head) {
        throw ConfigError("test algorithm '" + cfg.test_algo + "' needs a " + test_head + " head");
    }
    if (cfg.lr) approx.set_learning_rate(*cfg.lr);

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    auto stats_csv = detail::open_out(out_dir / "stats.csv", kStatsHeader);
    auto by_k_csv = detail::open_out(out_dir / "stats_by_k.csv", kStatsByKHeader);
    auto pred_csv = detail::open_out(out_dir / "pred_samples.csv", kPredHeader);
    auto log = detail::open_out(out_dir / "train.log", nullptr);
    std::ofstream test_csv;
    if (cfg.test_every > 0) test_csv = detail::open_out(out_dir / "test.csv", kTestHeader);

    const bool supervised = is_supervised(r.algo.family);
    auto emit = [&](const std::string& line) {
        log << line << '\n';
        log.flush();
        spdlog::info("{}", line);
    };
    emit("train algo=" + render_algo(r.algo) + " head=" + r.head + " encoder=" + encoder.name +
         " approx=" + approx.kind() + " N=" + std::to_string(cfg.batch_size) + " U=" + std::to_string(cfg.update_itrs) +
         " I=" + std::to_string(cfg.search_itrs) + " K_max=" + std::to_string(cfg.k_max) +
         " R=" + std::to_string(cfg.replay) + " workers=" + std::to_string(cfg.workers) +
         " seed=" + std::to_string(cfg.seed));
    if (!supervised && cfg.guidance == GuidanceSource::Live) {
        emit("note: live guidance uses a snapshot of the current network taken once per update check");
    }
    if (supervised && cfg.adaptive_k) emit("note: adaptive K is ignored for supervised families; K = K_max");

    std::vector<Rng> worker_rngs;
    for (std::size_t w = 0; w < cfg.workers; ++w) worker_rngs.emplace_back(cfg.seed ^ static_cast<std::uint64_t>(w));
    Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

    TargetNetwork target(approx.input_dim(), approx.output_dim());
    ReplayBuffer buffer(cfg.replay);
    CollectSetup<D> setup{r.algo, r.head, cfg.her, cfg.lhbl, cfg.batch_size * cfg.update_itrs, 0, encoder};
    setup.slots = (setup.budget + static_cast<std::size_t>(cfg.search_itrs) - 1) / static_cast<std::size_t>(cfg.search_itrs);

    TrainResult result;
    int K = r.initial_k;
    std::int64_t itr = 0;
    for (int check = 1; check <= cfg.max_update_checks; ++check) {
        UpdateCheckStats st;
        st.check = check;
        st.k = K;

        const auto guide_eval = cfg.guidance == GuidanceSource::Target ? target.evaluator() : approx.snapshot();
        const auto guide = guidance_from(domain, encoder, guide_eval, r.head);
        const auto targ = guidance_from(domain, encoder, target.evaluator(), r.head);
        auto [block, cs] = collect_update_check(domain, setup, guide, targ, K, worker_rngs);
        if (cs.discarded) spdlog::warn("check {}: discarded {} dead-end examples", check, cs.discarded);

        const auto tsum = xube::detail::summarize(block.targets());
        st.target_mean = tsum.mean;
        st.target_min = tsum.min;
        st.target_max = tsum.max;
        st.examples = block.size();
        buffer.push(block);

        xube::detail::Stopwatch train_sw;
        double loss = 0.0;
        for (std::size_t u = 0; u < cfg.update_itrs; ++u) {
            auto batch = buffer.sample(cfg.batch_size, r.head == 'q', rng);
            loss += approx.train_step(batch.inputs, batch.targets, batch.actions);
        }
        itr += static_cast<std::int64_t>(cfg.update_itrs);
        st.itr = itr;
        st.loss = loss / static_cast<double>(cfg.update_itrs);
        st.secs_train = train_sw.seconds();
        st.swapped = target.update_check(approx, st.loss, cfg.target_update, cfg.loss_threshold);

        st.solve_rate = cs.solve_rate();
        st.path_cost_mean = detail::ratio(cs.path_cost_sum, cs.first_solved);
        st.search_itrs_mean = detail::ratio(cs.itrs_sum, cs.first_attempts);
        st.insts_generated = cs.insts_generated;
        st.secs_generate = cs.secs_search;
        st.secs_targets = cs.secs_targets;
        if (!cfg.record_timing) st.secs_generate = st.secs_targets = st.secs_train = 0.0;
        if (cfg.adaptive_k && !supervised && !std::isnan(st.solve_rate)) K = adapt_k(K, st.solve_rate, cfg.k_max);

        // predicted-vs-target samples from this check's block
        if (cfg.pred_samples > 0 && !block.empty()) {
            const std::size_t n = std::min(cfg.pred_samples, block.size());
            nn::Matrix in(n, block.dim());
            std::vector<std::size_t> picks(n);
            for (std::size_t i = 0; i < n; ++i) {
                picks[i] = uniform_index(rng, block.size());
                auto src = block.input(picks[i]);
                std::copy(src.begin(), src.end(), in.row(i).begin());
            }
            const auto pred = approx.forward(in);
            for (std::size_t i = 0; i < n; ++i) {
                const int a = block.action(picks[i]);
                pred_csv << check << ',' << block.k(picks[i]) << ',' << format_double(block.target(picks[i])) << ','
                         << format_double(pred(i, a < 0 ? 0 : static_cast<std::size_t>(a))) << '\n';
            }
            pred_csv.flush();
        }

        nlohmann::json meta = ckpt_meta;
        meta["check"] = check;
        meta["head"] = std::string(1, r.head);
        meta["encoder"] = encoder.name;
        meta["k"] = K;
        meta["zero_target"] = false;
        nn::save_checkpoint(approx, out_dir / "model.ckpt", meta);
        if (target.model()) {
            nn::save_checkpoint(*target.model(), out_dir / "model_targ.ckpt", meta);
        } else {
            meta["zero_target"] = true;
            nn::save_checkpoint(approx, out_dir / "model_targ.ckpt", meta);
        }

        stats_csv << detail::stats_row(st) << '\n';
        stats_csv.flush();
        for (const auto& [k, ks] : cs.by_k) {
            by_k_csv << check << ',' << k << ',' << ks.count << ','
                     << format_double(supervised ? std::numeric_limits<double>::quiet_NaN()
                                                 : detail::ratio(static_cast<double>(ks.solved), ks.count))
                     << ',' << format_double(detail::ratio(ks.path_cost_sum, ks.solved)) << ','
                     << format_double(detail::ratio(ks.itrs_sum, ks.count)) << ','
                     << format_double(detail::ratio(ks.target_sum, ks.targets)) << '\n';
        }
        by_k_csv.flush();

        std::ostringstream line;
        line << "check " << check << " itr " << itr << " loss " << format_double(st.loss) << " targets(mean/min/max) "
             << format_double(st.target_mean) << '/' << format_double(st.target_min) << '/'
             << format_double(st.target_max) << " examples " << st.examples << " K " << st.k << " solved "
             << format_double(st.solve_rate) << " path_cost " << format_double(st.path_cost_mean) << " itrs "
             << format_double(st.search_itrs_mean) << " insts " << st.insts_generated
             << " target_swap " << (st.swapped ? "yes" : "no");
        if (cfg.her) line << " her " << cs.her_satisfied << '/' << cs.her_relabels;
        if (cfg.verbose) {
            line << " secs(generate/targets/train) " << format_double(st.secs_generate) << '/'
                 << format_double(st.secs_targets) << '/' << format_double(st.secs_train);
        }
        emit(line.str());

        if (cfg.test_every > 0 && check % cfg.test_every == 0) {
            TestStats ts;
            ts.check = check;
            const auto live = guidance_from(domain, encoder, approx.snapshot(), r.head);
            double cost = 0.0, itrs = 0.0, nodes = 0.0;
            for (const auto& inst : test_set) {
                auto res = run_search(domain, inst, r.test_algo, live, rng);
                ++ts.count;
                itrs += static_cast<double>(res.iterations);
                nodes += static_cast<double>(res.nodes_generated);
                if (res.solved) {
                    ++ts.solved;
                    cost += res.path_cost;
                }
            }
            ts.path_cost_mean = detail::ratio(cost, ts.solved);
            ts.search_itrs_mean = detail::ratio(itrs, ts.count);
            ts.nodes_generated_mean = detail::ratio(nodes, ts.count);
            const double rate = detail::ratio(static_cast<double>(ts.solved), ts.count);
            test_csv << check << ',' << ts.count << ',' << format_double(rate) << ','
                     << format_double(ts.path_cost_mean) << ',' << format_double(ts.search_itrs_mean) << ','
                     << format_double(ts.nodes_generated_mean) << '\n';
            test_csv.flush();
            emit("test check " + std::to_string(check) + " solved " + std::to_string(ts.solved) + "/" +
                 std::to_string(ts.count) + " path_cost " + format_double(ts.path_cost_mean));
            result.tests.push_back(ts);
        }

        st.collect = std::move(cs);
        result.history.push_back(std::move(st));
    }
    result.final_k = K;
    result.target_is_zero = target.is_zero();
    return result;
}

}  // namespace xube::training
