#pragma once

// Command-line front end. Exit codes: 0 success, 2 usage or configuration
// error, 1 runtime failure.

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "xube/app/registry.hpp"
#include "xube/app/summary.hpp"

namespace xube::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Log to stderr so stdout stays clean for results; XUBE_LOG picks the level.
inline void setup_logging() {
    auto logger = spdlog::get("xube");
    if (!logger) {
        logger = spdlog::stderr_color_mt("xube");
        spdlog::set_default_logger(logger);
    }
    if (const char* lvl = std::getenv("XUBE_LOG")) spdlog::set_level(spdlog::level::from_str(lvl));
}

namespace detail {

// "-" is stdout.
class OutFile {
  public:
    OutFile(const std::string& path, std::ostream& stdout_stream) {
        if (path == "-") {
            os_ = &stdout_stream;
            return;
        }
        file_.open(path, std::ios::binary | std::ios::trunc);
        if (!file_) throw Error("cannot write " + path);
        os_ = &file_;
    }
    std::ostream& get() { return *os_; }

  private:
    std::ofstream file_;
    std::ostream* os_ = nullptr;
};

inline std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path);
    return in;
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
    setup_logging();
    const Registry reg = builtin_registry();

    CLI::App app{"Learn heuristic functions for pathfinding domains and solve problem instances with them.", "xube"};
    app.require_subcommand(1);

    std::string domain = "stp3";
    std::string arch = "mlp";
    std::string algo;
    std::string ckpt;
    std::string out_path = "-";
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    bool verbose = false;

    auto add_domain = [&](CLI::App* sub) {
        sub->add_option("--domain", domain, "domain name with optional args, e.g. grid:width=8,height=8")
            ->capture_default_str();
    };

    // problem-inst
    auto* pi = app.add_subcommand("problem-inst", "generate problem instances by random walks");
    ProblemInstOptions pio;
    add_domain(pi);
    pi->add_option("--count", pio.count, "number of instances")->capture_default_str();
    pi->add_option("--k-min", pio.k_min, "minimum walk length")->capture_default_str();
    pi->add_option("--k-max", pio.k_max, "maximum walk length")->capture_default_str();
    pi->add_option("--scheme", pio.scheme, "forward | reverse (default: the domain's own generator)");
    pi->add_option("--seed", seed, "random seed")->capture_default_str();
    pi->add_option("--out", out_path, "instances file, - for stdout")->capture_default_str();

    // solve
    auto* so = app.add_subcommand("solve", "solve problem instances and write JSON-lines results");
    std::string insts_path;
    add_domain(so);
    so->add_option("--insts", insts_path, "instances file")->required();
    so->add_option("--ckpt", ckpt, "model checkpoint; zero heuristic when omitted");
    so->add_option("--algo", algo, "algorithm spec, e.g. graph_q.10B_0.5W (default graph_v)");
    so->add_option("--out", out_path, "results file, - for stdout")->capture_default_str();
    so->add_option("--seed", seed, "random seed")->capture_default_str();
    so->add_option("--workers", workers, "parallel searches")->capture_default_str();
    so->add_flag("--verbose", verbose, "per-iteration search trace on stderr");

    // time
    auto* ti = app.add_subcommand("time", "time the domain's basic operations");
    add_domain(ti);
    ti->add_option("--ckpt", ckpt, "also time encoding and a forward pass of this checkpoint");
    ti->add_option("--seed", seed, "random seed")->capture_default_str();

    // train
    auto* tr = app.add_subcommand("train", "train a heuristic function");
    training::TrainConfig cfg;
    std::string target_update = "always";
    std::string guidance = "target";
    std::string head;
    std::string test_insts;
    bool no_timing = false;
    add_domain(tr);
    tr->add_option("--arch", arch, "architecture with optional args, e.g. mlp:hidden=400-200,lr=0.001")
        ->capture_default_str();
    tr->add_option("--algo", cfg.algo, "training algorithm spec")->capture_default_str();
    tr->add_option("--out", out_path, "output directory")->required();
    tr->add_option("--seed", seed, "random seed")->capture_default_str();
    tr->add_option("--workers", cfg.workers, "data-generation workers")->capture_default_str();
    tr->add_flag("--verbose", cfg.verbose, "per-phase timing in train.log");
    tr->add_option("--batch-size", cfg.batch_size, "N, examples per gradient step")->capture_default_str();
    tr->add_option("--update-itrs", cfg.update_itrs, "U, gradient steps per update check")->capture_default_str();
    tr->add_option("--search-itrs", cfg.search_itrs, "I, search iterations per instance")->capture_default_str();
    tr->add_option("--kmax", cfg.k_max, "K_max, largest walk length")->capture_default_str();
    tr->add_flag("--adaptive-k", cfg.adaptive_k, "start at K = 1 and double when half are solved");
    tr->add_option("--replay", cfg.replay, "R, update checks kept in the replay buffer")->capture_default_str();
    tr->add_option("--lr", cfg.lr, "learning rate override");
    tr->add_option("--target-update", target_update, "always | loss:<threshold>")->capture_default_str();
    tr->add_option("--guidance", guidance, "target | live")->capture_default_str();
    tr->add_flag("--her", cfg.her, "hindsight relabelling of failed searches");
    tr->add_flag("--lhbl", cfg.lhbl, "limited-horizon Bellman backup over the search tree");
    tr->add_option("--head", head, "v | q (default: from the algorithm)");
    tr->add_option("--max-checks", cfg.max_update_checks, "number of update checks")->capture_default_str();
    tr->add_option("--test-insts", test_insts, "instances solved every --test-every checks");
    tr->add_option("--test-every", cfg.test_every, "test period in update checks (0 = never)")->capture_default_str();
    tr->add_option("--test-algo", cfg.test_algo, "algorithm for the test solves")->capture_default_str();
    tr->add_option("--pred-samples", cfg.pred_samples, "predicted-vs-target samples per check")->capture_default_str();
    tr->add_flag("--no-timing", no_timing, "write 0 in the secs_* columns (byte-identical reruns)");

    // train-summary
    auto* ts = app.add_subcommand("train-summary", "summarise a training run's stats files");
    std::string stats_dir;
    std::string plot_dir;
    ts->add_option("dir", stats_dir, "training output directory")->required();
    ts->add_option("--out", plot_dir, "where plotdata_*.csv go (default: the training directory)");

    // viz
    auto* vz = app.add_subcommand("viz", "render a random instance; optionally apply actions from stdin");
    int steps = 0;
    bool interactive = false;
    add_domain(vz);
    vz->add_option("--steps", steps, "walk length of the generated instance")->capture_default_str();
    vz->add_flag("--interactive", interactive, "read actions from stdin; q quits");
    vz->add_option("--seed", seed, "random seed")->capture_default_str();

    auto* di = app.add_subcommand("domain-info", "list registered domains");
    auto* hi = app.add_subcommand("heuristic-info", "list architectures and encoders");
    auto* info = app.add_subcommand("info", "domain or heuristic listing");
    std::string kind;
    info->add_option("kind", kind, "domain | heuristic")->required();

    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::CallForHelp&) {
            out << app.help();
            return kExitOk;
        } catch (const CLI::CallForAllHelp&) {
            out << app.help("", CLI::AppFormatMode::All);
            return kExitOk;
        } catch (const CLI::ParseError& e) {
            err << "error: " << e.what() << '\n';
            if (!app.get_subcommands().empty()) err << app.get_subcommands().front()->help();
            return kExitUsage;
        }

        if (pi->parsed()) {
            auto h = reg.make_domain(domain);
            pio.seed = seed;
            detail::OutFile o(out_path, out);
            h->problem_inst(pio, o.get());
        } else if (so->parsed()) {
            auto h = reg.make_domain(domain);
            SolveOptions opts;
            if (!algo.empty()) opts.algo = algo;
            if (!ckpt.empty()) opts.ckpt = ckpt;
            opts.seed = seed;
            opts.workers = workers;
            opts.verbose = verbose ? &err : nullptr;
            auto insts = detail::open_in(insts_path);
            detail::OutFile o(out_path, out);
            const auto s = h->solve(insts, opts, o.get());
            spdlog::info("solved {}/{} instances, mean path cost {}", s.solved, s.instances, format_double(s.path_cost_mean));
        } else if (ti->parsed()) {
            auto h = reg.make_domain(domain);
            std::optional<std::filesystem::path> ck;
            if (!ckpt.empty()) ck = ckpt;
            out << "domain " << h->spec() << '\n';
            h->time(ck, seed, out);
        } else if (tr->parsed()) {
            auto h = reg.make_domain(domain);
            cfg.seed = seed;
            training::parse_target_update(target_update, cfg);
            cfg.guidance = training::parse_guidance(guidance);
            if (!head.empty()) {
                if (head != "v" && head != "q") throw ConfigError("--head must be v or q");
                cfg.head = head[0];
            }
            if (no_timing) cfg.record_timing = false;
            auto arch_args = NamedArgs::parse(arch);
            const auto& entry = reg.arch(arch_args.name());
            std::ifstream tests;
            if (!test_insts.empty()) tests = detail::open_in(test_insts);
            const auto res = h->train(entry, std::move(arch_args), cfg, out_path, test_insts.empty() ? nullptr : &tests);
            out << "trained " << res.history.size() << " update checks into " << out_path << '\n';
        } else if (ts->parsed()) {
            const auto files = train_summary(stats_dir, plot_dir.empty() ? stats_dir : plot_dir, out);
            for (const auto& p : files.written) out << "wrote " << p.string() << '\n';
        } else if (vz->parsed()) {
            auto h = reg.make_domain(domain);
            h->viz(steps, interactive, seed, in, out);
        } else if (di->parsed()) {
            print_domain_info(reg, out);
        } else if (hi->parsed()) {
            print_heuristic_info(reg, out);
        } else if (info->parsed()) {
            if (kind == "domain") {
                print_domain_info(reg, out);
            } else if (kind == "heuristic") {
                print_heuristic_info(reg, out);
            } else {
                throw ConfigError("info kind must be 'domain' or 'heuristic', got '" + kind + "'");
            }
        }
        out.flush();
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace xube::app
