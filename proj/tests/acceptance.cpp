// Acceptance run: one PASS/FAIL line per criterion. Exit status 0 only if all
// selected criteria pass. Pass criterion numbers as arguments to run a subset.

#include <spdlog/spdlog.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "xube/app/cli.hpp"
#include "xube/search/lhbl.hpp"
#include "xube/training/supervised.hpp"

using namespace xube;
using namespace xube::app;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

namespace fs = std::filesystem;

const fs::path& work_dir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / ("xube_acceptance_" + std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    os << text;
}

const std::unordered_map<TileState<3>, int>& bfs8() {
    static const auto table = oracle::puzzle8_distances(Puzzle8{}.solved_state());
    return table;
}

std::string fixed(double v, int prec = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

// The 8-puzzle corpus shared by criteria 1 and 2: reverse walks, k uniform in [0, 20].
const std::vector<InstanceOf<Puzzle8>>& corpus8() {
    static const auto insts = DomainRunner<Puzzle8>("stp3", Puzzle8{}, {}).generate({100, 0, 20, "reverse", 1});
    return insts;
}

HeuristicV<Puzzle8> manhattan_h() {
    return {[](std::span<const TileState<3>> states, const TileGoal<3>& g) {
        Puzzle8 d;
        std::vector<double> out;
        for (const auto& s : states) out.push_back(d.manhattan(s, g));
        return out;
    }};
}

// ---------------------------------------------------------------------------

Outcome c1_uniform_cost() {
    const auto reg = builtin_registry();
    auto h = reg.make_domain("stp3");
    const auto& insts = corpus8();
    std::ostringstream inst_text;
    write_instances(Puzzle8{}, std::span<const InstanceOf<Puzzle8>>(insts), inst_text);
    spit(work_dir() / "c1_insts.jsonl", inst_text.str());

    std::istringstream in(inst_text.str());
    std::ostringstream out;
    h->solve(in, SolveOptions{}, out);
    spit(work_dir() / "c1_results.jsonl", out.str());

    std::istringstream rin(out.str());
    const auto file = read_results(rin);
    if (file.records.size() != insts.size()) return {false, "record count mismatch"};
    std::size_t exact = 0;
    for (const auto& rec : file.records) {
        if (rec.solved && rec.path_cost == static_cast<double>(bfs8().at(insts[rec.index].start))) ++exact;
    }
    return {exact == insts.size(), std::to_string(exact) + "/100 costs equal the BFS optimum"};
}

Outcome c2_manhattan() {
    Puzzle8 d;
    const auto& insts = corpus8();
    std::size_t optimal = 0, fewer = 0, trivial = 0;
    std::map<int, int> ties_by_opt;  // optimum -> instances without a strict reduction
    for (std::size_t i = 0; i < insts.size(); ++i) {
        const double opt = bfs8().at(insts[i].start);
        if (opt == 0) ++trivial;
        SearchParams p1;
        SearchParams p10;
        p10.batch = 10;
        Rng r1(i), r10(i), rz(i);
        const auto m1 = bwas(d, insts[i], manhattan_h(), p1, r1);
        const auto m10 = bwas(d, insts[i], manhattan_h(), p10, r10);
        const auto z1 = bwas(d, insts[i], zero_heuristic<Puzzle8>(), p1, rz);
        if (m1.solved && m10.solved && m1.path_cost == opt && m10.path_cost == opt) ++optimal;
        if (m1.nodes_generated < z1.nodes_generated) {
            ++fewer;
        } else {
            ++ties_by_opt[static_cast<int>(opt)];
        }
    }
    std::string misses;
    for (const auto& [o, n] : ties_by_opt) misses += (misses.empty() ? "" : ", ") + std::to_string(n) + " at optimum " + std::to_string(o);
    return {optimal == insts.size() && fewer >= 95,
            std::to_string(optimal) + "/100 optimal for B=1 and B=10; Manhattan generated fewer nodes on " +
                std::to_string(fewer) + "/100 (" + std::to_string(trivial) + " start at the goal; not fewer: " +
                (misses.empty() ? "none" : misses) + ")"};
}

training::TrainConfig tabular_cfg(const std::string& algo) {
    training::TrainConfig cfg;
    cfg.batch_size = 200;
    cfg.update_itrs = 10;
    cfg.search_itrs = 50;
    cfg.k_max = 30;
    cfg.algo = algo;
    cfg.seed = 3;
    cfg.max_update_checks = 40;
    cfg.record_timing = false;
    cfg.pred_samples = 0;
    return cfg;
}

Outcome c3_tabular_fixed_point() {
    spdlog::set_level(spdlog::level::warn);
    const auto grid = GridWorld::generate(4, 4, 0.0, 5, 7);
    const auto enc = testkit::grid_encoder(grid);
    const auto hstar = oracle::grid_oracle_v(grid);

    nn::TabularApprox vt(grid.coords_dim(), 1, 1.0);
    (void)training::train(grid, tabular_cfg("graph_v"), enc, vt, {}, work_dir() / "c3_v");
    nn::TabularApprox qt(grid.coords_dim(), 4, 1.0);
    (void)training::train(grid, tabular_cfg("graph_q"), enc, qt, {}, work_dir() / "c3_q");
    const auto qstar = oracle::q_from_v(grid, hstar);

    std::vector<GridState> states;
    for (auto c : grid.free_cells()) states.push_back({c});
    std::size_t v_bad = 0, q_bad = 0, pairs = 0, edges = 0;
    for (auto gc : grid.free_cells()) {
        const GridGoal goal{gc};
        const auto span = std::span<const GridState>(states);
        const auto want_v = hstar(span, goal);
        const auto want_q = qstar(span, goal);
        const auto got_v = vt.forward(enc.batch(span, goal));
        const auto got_q = qt.forward(enc.batch(span, goal));
        for (std::size_t i = 0; i < states.size(); ++i) {
            ++pairs;
            if (static_cast<double>(got_v(i, 0)) != want_v[i]) ++v_bad;
            for (auto a : grid.actions(states[i])) {
                const auto j = grid.action_index(a);
                ++edges;
                if (static_cast<double>(got_q(i, j)) != want_q[i * 4 + j]) ++q_bad;
            }
        }
    }
    return {v_bad == 0 && q_bad == 0, "v: " + std::to_string(pairs - v_bad) + "/" + std::to_string(pairs) +
                                          " pairs exact; q: " + std::to_string(edges - q_bad) + "/" +
                                          std::to_string(edges) + " (pair, action) values exact"};
}

Outcome c4_end_to_end() {
    const auto reg = builtin_registry();
    auto h = reg.make_domain("stp3");
    training::TrainConfig cfg;
    cfg.batch_size = 500;
    cfg.update_itrs = 50;
    cfg.search_itrs = 100;
    cfg.k_max = 30;
    cfg.adaptive_k = true;
    cfg.her = true;
    cfg.workers = 4;
    cfg.max_update_checks = 60;
    cfg.algo = "graph_v";
    cfg.lr = 1e-3;
    cfg.seed = 0;
    const auto run_dir = work_dir() / "c4_train";
    const auto res = h->train(reg.arch("mlp"), NamedArgs::parse("mlp:hidden=400-200,lr=0.001"), cfg, run_dir, nullptr);

    // held-out instances: a seed the training run never used
    std::ostringstream inst_text;
    h->problem_inst({100, 0, 30, "reverse", 424242}, inst_text);
    spit(work_dir() / "c4_insts.jsonl", inst_text.str());
    std::istringstream in(inst_text.str());
    std::ostringstream out;
    SolveOptions opts;
    opts.algo = "graph_v.10B_0.6W";
    opts.ckpt = run_dir / "model.ckpt";
    const auto s = h->solve(in, opts, out);
    spit(work_dir() / "c4_results.jsonl", out.str());

    Puzzle8 d;
    std::istringstream iin(inst_text.str());
    const auto insts = read_instances(d, iin);
    std::istringstream rin(out.str());
    const auto file = read_results(rin);
    double cost = 0.0, opt = 0.0;
    for (const auto& rec : file.records) {
        if (!rec.solved) continue;
        cost += rec.path_cost;
        opt += bfs8().at(insts[rec.index].start);
    }
    const double rate = s.solve_rate();
    const double ratio = opt > 0 ? cost / opt : 1.0;
    return {rate >= 0.95 && ratio <= 1.5,
            "solved " + fixed(100 * rate, 0) + "%, mean cost / BFS optimum = " + fixed(ratio) + " after " +
                std::to_string(res.history.size()) + " update checks, final K " + std::to_string(res.final_k)};
}

Outcome c5_gradients() {
    Rng rng(2025);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        std::vector<std::size_t> layers{2 + uniform_index(rng, 11)};
        const std::size_t depth = 1 + uniform_index(rng, 2);
        for (std::size_t l = 0; l < depth; ++l) layers.push_back(2 + uniform_index(rng, 15));
        const bool q = t % 2 == 1;
        layers.push_back(q ? 4 : 1);
        const auto r = oracle::grad_check(layers, 8 + uniform_index(rng, 9), q, rng);
        worst = std::max(worst, r.rel_error);
    }
    std::ostringstream os;
    os << "worst relative error over 20 nets " << std::scientific << std::setprecision(2) << worst;
    return {worst < 1e-4, os.str()};
}

using IntTree = SearchTree<testkit::NodeState, testkit::Slot>;

// Plain recursion over parent links; a node whose state id is 0 is solved.
double naive_backup(const IntTree& t, NodeId id, std::span<const double> leaf, bool compare_internal) {
    if (t[id].state.id == 0) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t c = 0; c < t.nodes.size(); ++c) {
        if (t.nodes[c].parent != id) continue;
        any = true;
        best = std::min(best, t.nodes[c].edge_cost + naive_backup(t, static_cast<NodeId>(c), leaf, compare_internal));
    }
    if (!any) return leaf[static_cast<std::size_t>(id)];
    if (compare_internal) best = std::min(best, leaf[static_cast<std::size_t>(id)]);
    return best;
}

Outcome c6_lhbl() {
    const testkit::HandGraph g({{}, {}, {}, {}, {}});
    Rng rng(66);
    std::size_t trees = 0, mismatches = 0;
    for (int t = 0; t < 500; ++t) {
        IntTree tree;
        const std::size_t n = 1 + uniform_index(rng, 200);
        tree.add_root(testkit::NodeState{static_cast<int>(uniform_index(rng, 5))});
        for (std::size_t i = 1; i < n; ++i) {
            const auto parent = static_cast<NodeId>(uniform_index(rng, i));
            tree.add_child(parent, testkit::Slot{0}, testkit::NodeState{static_cast<int>(uniform_index(rng, 5))},
                           static_cast<double>(uniform_index(rng, 4)));
        }
        std::vector<double> leaf(n);
        for (auto& v : leaf) v = static_cast<double>(uniform_index(rng, 20)) * 0.5;
        for (bool ci : {false, true}) {
            const auto got = lhbl_backup(g, tree, leaf, testkit::NodeGoal{0}, LhblOptions{ci});
            for (std::size_t i = 0; i < n; ++i) mismatches += got[i] != naive_backup(tree, static_cast<NodeId>(i), leaf, ci);
        }
        ++trees;
    }
    return {mismatches == 0, std::to_string(trees) + " trees, " + std::to_string(mismatches) + " mismatching nodes"};
}

template <class D>
void failed_searches(const D& d, int want, int k, Rng& rng, int& failed, int& satisfied) {
    SearchParams p;
    p.max_iters = 2;
    const std::vector<int> ks{k};
    int got = 0;
    while (got < want) {
        const auto inst = d.samp_prob_insts(std::span<const int>(ks), rng).front();
        const auto res = bwas(d, inst, zero_heuristic<D>(), p, rng);
        if (res.solved) continue;
        ++got;
        ++failed;
        const auto her = training::her_relabel(d, res.tree, rng);
        satisfied += d.is_solved(res.tree[her.node].state, her.goal);
    }
}

Outcome c7_her() {
    Rng rng(77);
    int failed = 0, satisfied = 0;
    failed_searches(Puzzle8{}, 500, 25, rng, failed, satisfied);
    failed_searches(GridWorld::generate(8, 8, 0.2, 5, 3), 500, 30, rng, failed, satisfied);
    return {failed == 1000 && satisfied == failed,
            std::to_string(satisfied) + "/" + std::to_string(failed) + " relabelled pairs satisfy is_solved"};
}

Outcome c8_adaptive_k() {
    std::vector<int> traj{1};
    for (double rate : {0.6, 0.6, 0.4, 0.8}) traj.push_back(training::adapt_k(traj.back(), rate, 8));
    std::string s;
    for (int k : traj) s += (s.empty() ? "" : "->") + std::to_string(k);
    return {traj == std::vector<int>{1, 2, 4, 4, 8}, "K trajectory " + s};
}

Outcome c9_supervised() {
    const auto grid = GridWorld::generate(7, 7, 0.2, 9, 19);
    Rng rng(99);
    std::size_t walks = 0, bad = 0;
    for (int t = 0; t < 500; ++t) {
        const int k = static_cast<int>(uniform_index(rng, 20));
        Rng probe = rng;
        const auto w = training::sup_walk_examples(grid, training::WalkDirection::Forward, 'v', k, rng);
        // replay the same draws and sum the remaining edge weights by hand
        const auto start = grid.samp_start_state(probe);
        const auto walk = random_walk(grid, start, k, probe);
        if (w.examples.size() != walk.states.size()) {
            ++bad;
            continue;
        }
        for (std::size_t i = 0; i < walk.states.size(); ++i) {
            double rest = 0.0;
            for (std::size_t j = i + 1; j < walk.states.size(); ++j) rest += grid.weight(walk.states[j].pos);
            bad += w.examples[i].state != walk.states[i] || w.examples[i].target != rest;
        }
        ++walks;
    }

    // reverse q: example j holds the action that undoes reverse step j; chaining
    // the actions of examples j, j-1, ..., 1 must reach the goal at the target cost
    Puzzle8 d;
    std::size_t rev = 0, rev_bad = 0;
    for (int t = 0; t < 500; ++t) {
        const int k = 1 + static_cast<int>(uniform_index(rng, 25));
        const auto w = training::sup_walk_examples(d, training::WalkDirection::Reverse, 'q', k, rng);
        // the goal state leads with one zero row per legal action
        const std::size_t zero_rows = d.actions(TileState<3>{w.goal.target}).size();
        for (std::size_t j = zero_rows; j < w.examples.size(); ++j) {
            auto s = w.examples[j].state;
            double cost = 0.0;
            for (std::size_t i = j + 1; i-- > zero_rows;) {
                if (!(s == w.examples[i].state)) break;
                const auto tr = d.next_state(s, d.all_actions()[static_cast<std::size_t>(w.examples[i].action)]);
                cost += tr.cost;
                s = tr.next_state;
            }
            ++rev;
            rev_bad += !d.is_solved(s, w.goal) || cost != w.examples[j].target;
        }
    }
    return {bad == 0 && rev_bad == 0 && rev >= 500,
            std::to_string(walks) + " grid walks with " + std::to_string(bad) + " suffix-sum mismatches; " +
                std::to_string(rev - rev_bad) + "/" + std::to_string(rev) + " reverse-q examples replay to the goal"};
}

Outcome c10_beam() {
    // softmax(score / tau) over four edges, 10^4 draws, chi-square at alpha = 0.001
    const std::vector<double> scores{-1.0, -2.5, -1.7, -4.0};
    const double tau = 0.8;
    std::vector<double> p(scores.size());
    double z = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) z += p[i] = std::exp(scores[i] / tau);
    for (auto& v : p) v /= z;
    Rng rng(1010);
    const int n = 10000;
    std::vector<int> counts(scores.size(), 0);
    for (int i = 0; i < n; ++i) ++counts[select_edges(scores, 1, tau, 0.0, rng).front()];
    double chi2 = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double e = n * p[i];
        chi2 += (counts[i] - e) * (counts[i] - e) / e;
    }
    const double critical = 16.266;  // chi-square, 3 degrees of freedom, upper 0.001 tail

    // tau = 0, eps = 0, B = 1 follows argmin c + h from the start, independent of the seed
    Puzzle8 d;
    Rng gen(5);
    const std::vector<int> ks{18};
    int greedy_ok = 0;
    const int trials = 20;
    for (int t = 0; t < trials; ++t) {
        const auto inst = d.samp_prob_insts(std::span<const int>(ks), gen).front();
        std::vector<Move> greedy;
        auto s = inst.start;
        for (int i = 0; i < 100 && !d.is_solved(s, inst.goal); ++i) {
            double best = std::numeric_limits<double>::infinity();
            Move bm{};
            TileState<3> bs;
            for (auto& [a, tr] : d.expand(s)) {
                const double v = tr.cost + d.manhattan(tr.next_state, inst.goal);
                if (v < best) {
                    best = v;
                    bm = a;
                    bs = tr.next_state;
                }
            }
            greedy.push_back(bm);
            s = bs;
        }
        SearchParams bp;
        bp.max_iters = 100;
        Rng a(t), b(1000 + t);
        const auto r1 = beam_search(d, inst, BeamScorer<Puzzle8>{manhattan_h()}, bp, a);
        const auto r2 = beam_search(d, inst, BeamScorer<Puzzle8>{manhattan_h()}, bp, b);
        std::vector<Move> walked;
        for (std::size_t i = 1; i < r1.tree.nodes.size(); ++i) walked.push_back(*r1.tree.nodes[i].action);
        greedy_ok += walked == greedy && r1.path == r2.path && r1.solved == r2.solved;
    }
    return {chi2 < critical && greedy_ok == trials,
            "chi2 = " + fixed(chi2) + " (critical " + fixed(critical) + "); greedy path reproduced on " +
                std::to_string(greedy_ok) + "/" + std::to_string(trials)};
}

int run_binary(const std::string& args) {
    const std::string cmd = std::string(XUBE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

bool same_dirs(const fs::path& a, const fs::path& b, std::size_t& files) {
    files = 0;
    for (const auto& e : fs::directory_iterator(a)) {
        if (slurp(e.path()) != slurp(b / e.path().filename())) return false;
        ++files;
    }
    return files > 0;
}

Outcome c11_cli() {
    const auto spec = parse_algo("graph_q.10B_0.5W");
    const bool parsed = spec.family == AlgoFamily::GraphQ && spec.batch == 10 && spec.weight == 0.5;
    const auto dir = work_dir();
    const std::string d = dir.string();

    // same-seed problem-inst
    bool pi_same = run_binary("problem-inst --domain stp3 --count 200 --k-max 30 --seed 5 --out " + d + "/c11_a.jsonl") == 0 &&
                   run_binary("problem-inst --domain stp3 --count 200 --k-max 30 --seed 5 --out " + d + "/c11_b.jsonl") == 0 &&
                   slurp(dir / "c11_a.jsonl") == slurp(dir / "c11_b.jsonl") && !slurp(dir / "c11_a.jsonl").empty();

    // same-seed single-worker train
    const std::string train = "train --domain stp3 --arch mlp:hidden=64-32 --batch-size 100 --update-itrs 10 "
                              "--search-itrs 30 --kmax 12 --adaptive-k --her --max-checks 4 --seed 9 --no-timing --out ";
    std::size_t files = 0;
    const bool train_same = run_binary(train + d + "/c11_train_a") == 0 && run_binary(train + d + "/c11_train_b") == 0 &&
                            same_dirs(dir / "c11_train_a", dir / "c11_train_b", files);

    // results written through the binary, with and without the trained checkpoint
    run_binary("solve --domain stp3 --insts " + d + "/c11_a.jsonl --out " + d + "/c11_zero_results.jsonl");
    run_binary("solve --domain stp3 --insts " + d + "/c11_a.jsonl --ckpt " + d +
               "/c11_train_a/model.ckpt --algo graph_v.10B_0.6W --out " + d + "/c11_net_results.jsonl");

    // replay every results file this acceptance run emitted
    auto h = builtin_registry().make_domain("stp3");
    std::size_t result_files = 0, verified = 0;
    bool replay_ok = true;
    std::string failure;
    for (const auto& e : fs::directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        const auto pos = name.find("_results.jsonl");
        if (pos == std::string::npos) continue;
        const std::string prefix = name.substr(0, name.find('_'));
        const auto insts = prefix == "c11" ? dir / "c11_a.jsonl" : dir / (prefix + "_insts.jsonl");
        std::ifstream a(insts), b(e.path());
        try {
            verified += h->verify_results(a, b);
            ++result_files;
        } catch (const std::exception& ex) {
            replay_ok = false;
            failure = name + ": " + ex.what();
        }
    }
    replay_ok = replay_ok && result_files >= 2;

    std::string detail = std::string("parse ") + (parsed ? "ok" : "WRONG") + "; " + std::to_string(verified) +
                         " solved records in " + std::to_string(result_files) + " results files replay";
    detail += replay_ok ? "" : " (FAILED " + failure + ")";
    detail += std::string("; problem-inst ") + (pi_same ? "identical" : "DIFFERS");
    detail += std::string("; train ") + (train_same ? "identical (" + std::to_string(files) + " files)" : "DIFFERS");
    return {parsed && replay_ok && pi_same && train_same, detail};
}

}  // namespace

int main(int argc, char** argv) {
    ::setenv("XUBE_LOG", "warn", 0);
    setup_logging();
    spdlog::set_level(spdlog::level::warn);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"uniform-cost solve equals BFS optimum", c1_uniform_cost},
        {"Manhattan BWAS optimal, fewer nodes than zero heuristic", c2_manhattan},
        {"tabular v / q training reaches the Dijkstra fixed point", c3_tabular_fixed_point},
        {"learned 8-puzzle heuristic solves held-out instances", c4_end_to_end},
        {"backprop matches central differences", c5_gradients},
        {"lhbl_backup equals naive recursive backup", c6_lhbl},
        {"HER relabels satisfy the goal", c7_her},
        {"adaptive K schedule", c8_adaptive_k},
        {"supervised walk targets", c9_supervised},
        {"beam Boltzmann selection and greedy determinism", c10_beam},
        {"CLI contract", c11_cli},
    };
    // runtime limits in seconds, same order
    const std::vector<double> limits = {60, 30, 30, 1800, 10, 5, 20, 1, 10, 10, 600};

    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= limits[i];
        const bool pass = o.pass && in_time;
        failed += !pass;
        std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << ": " << criteria[i].first << " -- " << o.detail
                  << " [" << fixed(secs, 1) << " s, limit " << fixed(limits[i], 0) << " s"
                  << (in_time ? "" : ", OVER LIMIT") << "]" << std::endl;
    }
    std::cout << "artifacts in " << work_dir().string() << std::endl;
    return failed == 0 ? 0 : 1;
}
