#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numeric>

#include "oracles.hpp"
#include "xube/domains/grid.hpp"
#include "xube/domains/sliding_tile.hpp"
#include "xube/search/bwas.hpp"

using namespace xube;

namespace {

Puzzle8::State tiles8(std::array<std::uint8_t, 9> t) { return Puzzle8::State{t}; }

// Independent step function: locate the blank by scanning, swap by hand.
std::optional<Puzzle8::State> ref_step(const Puzzle8::State& s, Move m) {
    int b = 0;
    for (int i = 0; i < 9; ++i) {
        if (s.tiles[static_cast<std::size_t>(i)] == 0) b = i;
    }
    int r = b / 3, c = b % 3;
    if (m == Move::Up) --r;
    if (m == Move::Down) ++r;
    if (m == Move::Left) --c;
    if (m == Move::Right) ++c;
    if (r < 0 || r > 2 || c < 0 || c > 2) return std::nullopt;
    auto t = s;
    std::swap(t.tiles[static_cast<std::size_t>(b)], t.tiles[static_cast<std::size_t>(r * 3 + c)]);
    return t;
}

}  // namespace

TEST(SlidingTile, UpFromCenterSwapsWithTileAbove) {
    Puzzle8 d;
    auto s = tiles8({1, 2, 3, 4, 0, 5, 6, 7, 8});
    auto tr = d.next_state(s, Move::Up);
    EXPECT_EQ(tr.next_state, tiles8({1, 0, 3, 4, 2, 5, 6, 7, 8}));
    EXPECT_EQ(tr.cost, 1.0);
    EXPECT_EQ(d.expand(s).size(), 4u);
}

TEST(SlidingTile, CornerHasTwoMoves) {
    Puzzle8 d;
    EXPECT_EQ(d.actions(d.solved_state()).size(), 2u);
    EXPECT_EQ(d.expand(d.solved_state()).size(), 2u);
    EXPECT_THROW(d.next_state(d.solved_state(), Move::Down), InvalidActionError);
}

TEST(SlidingTile, UpThenDownIsIdentity) {
    Puzzle8 d;
    const auto s = d.solved_state();
    auto up = d.next_state(s, Move::Up).next_state;
    EXPECT_EQ(d.next_state(up, Move::Down).next_state, s);
}

TEST(SlidingTile, NextStateMatchesReferenceStepper) {
    Puzzle8 d;
    Rng rng(1);
    for (int t = 0; t < 1000; ++t) {
        auto s = d.samp_start_state(rng);
        const Move m = static_cast<Move>(uniform_index(rng, 4));
        auto want = ref_step(s, m);
        if (!want) {
            EXPECT_THROW(d.next_state(s, m), InvalidActionError);
            continue;
        }
        auto got = d.next_state(s, m);
        EXPECT_EQ(got.next_state, *want);
        EXPECT_EQ(d.state_to_text(got.next_state), d.state_to_text(*want));
    }
}

TEST(SlidingTile, BatchedStepAgreesWithNextState) {
    Puzzle15 d;
    Rng rng(2);
    std::vector<Puzzle15::State> states;
    std::vector<Move> acts;
    for (int t = 0; t < 1000; ++t) {
        auto s = d.samp_start_state(rng);
        auto legal = d.actions(s);
        states.push_back(s);
        acts.push_back(legal[uniform_index(rng, legal.size())]);
    }
    auto batched = d.next_states(std::span<const Puzzle15::State>(states), std::span<const Move>(acts));
    for (std::size_t i = 0; i < states.size(); ++i) {
        auto single = d.next_state(states[i], acts[i]);
        EXPECT_EQ(batched[i].next_state, single.next_state);
        EXPECT_EQ(batched[i].cost, single.cost);
    }
}

TEST(SlidingTile, WalkStatesAreSolvable) {
    Puzzle15 d;
    Rng rng(3);
    for (int t = 0; t < 200; ++t) {
        auto w = random_walk(d, d.solved_state(), 50, rng);
        for (const auto& s : w.states) ASSERT_TRUE(Puzzle15::is_solvable(s, d.solved_state().tiles));
    }
    // a single transposition is unsolvable
    auto bad = d.solved_state();
    std::swap(bad.tiles[0], bad.tiles[1]);
    EXPECT_FALSE(Puzzle15::is_solvable(bad, d.solved_state().tiles));
}

TEST(SlidingTile, SampledStartsAreInBfsTable) {
    Puzzle8 d;
    const auto dist = oracle::puzzle8_distances(d.solved_state());
    EXPECT_EQ(dist.size(), 181440u);
    Rng rng(4);
    for (int t = 0; t < 500; ++t) EXPECT_TRUE(dist.contains(d.samp_start_state(rng)));
}

TEST(SlidingTile, TextRoundTrip) {
    Puzzle8 d;
    Rng rng(5);
    for (int t = 0; t < 100; ++t) {
        auto s = d.samp_start_state(rng);
        EXPECT_EQ(d.state_from_text(d.state_to_text(s)), s);
    }
    EXPECT_EQ(d.state_to_text(d.solved_state()), "1 2 3 4 5 6 7 8 0");
    EXPECT_THROW(d.state_from_text("1 2 3"), ParseError);
    EXPECT_THROW(d.state_from_text("1 1 3 4 5 6 7 8 0"), ParseError);
    EXPECT_THROW(d.state_from_text("1 2 3 4 5 6 7 8 0 9"), ParseError);
    for (Move m : d.all_actions()) EXPECT_EQ(d.parse_action(d.action_to_string(m)), m);
    EXPECT_FALSE(d.parse_action("XYZ"));
    EXPECT_NE(d.render_state(d.solved_state()).find("| 8 |"), std::string::npos);
}

TEST(SlidingTile, OneHotEncoding) {
    Puzzle8 d;
    EXPECT_EQ(Puzzle8::onehot_dim(), 162u);
    std::vector<float> v(162);
    const auto s = d.solved_state();
    d.encode_onehot(s, Puzzle8::Goal{s.tiles}, v);
    EXPECT_TRUE(std::equal(v.begin(), v.begin() + 81, v.begin() + 81));
    EXPECT_EQ(std::accumulate(v.begin(), v.end(), 0.0f), 18.0f);
}

TEST(SlidingTile, OneHotIsInjective) {
    Puzzle8 d;
    Rng rng(6);
    std::map<std::vector<float>, std::pair<std::string, std::string>> seen;
    std::vector<float> v(162);
    for (int t = 0; t < 10000; ++t) {
        auto s = d.samp_start_state(rng);
        auto g = Puzzle8::Goal{d.samp_start_state(rng).tiles};
        d.encode_onehot(s, g, v);
        std::vector<float> again(162);
        d.encode_onehot(s, g, again);
        ASSERT_EQ(v, again);  // deterministic
        auto id = std::make_pair(d.state_to_text(s), d.goal_to_text(g));
        auto [it, fresh] = seen.emplace(v, id);
        if (!fresh) {
            ASSERT_EQ(it->second, id);
        }
    }
}

TEST(SlidingTile, ManhattanIsConsistentAndAdmissible) {
    Puzzle8 d;
    const auto dist = oracle::puzzle8_distances(d.solved_state());
    const Puzzle8::Goal g{d.solved_state().tiles};
    Rng rng(7);
    for (int t = 0; t < 2000; ++t) {
        auto s = d.samp_start_state(rng);
        const double h = d.manhattan(s, g);
        EXPECT_LE(h, dist.at(s));
        for (auto& [a, tr] : d.expand(s)) EXPECT_LE(h, tr.cost + d.manhattan(tr.next_state, g));
    }
    EXPECT_EQ(d.manhattan(d.solved_state(), g), 0.0);
}

TEST(Grid, TwoByTwoCornerToCornerCostsTwo) {
    GridWorld grid(2, 2, {1, 1, 1, 1});
    EXPECT_EQ(oracle::grid_h_star(grid, {0, 0}, {1, 1}), 2.0);
    Rng rng(8);
    InstanceOf<GridWorld> inst{GridState{{0, 0}}, GridGoal{{1, 1}}, 0};
    SearchParams p;
    auto r = bwas(grid, inst, zero_heuristic<GridWorld>(), p, rng);
    ASSERT_TRUE(r.solved);
    EXPECT_EQ(r.path_cost, 2.0);
}

TEST(Grid, MoveCostIsDestinationWeight) {
    GridWorld grid(3, 2, {1, 3, 1, 0, 2, 1});
    auto tr = grid.next_state(GridState{{0, 0}}, Move::Right);
    EXPECT_EQ(tr.next_state.pos, (GridCell{0, 1}));
    EXPECT_EQ(tr.cost, 3.0);
    // (1,0) is an obstacle
    auto acts = grid.actions(GridState{{0, 0}});
    EXPECT_EQ(acts, std::vector<Move>{Move::Right});
    EXPECT_THROW(grid.next_state(GridState{{0, 0}}, Move::Down), InvalidActionError);
    EXPECT_THROW(grid.next_state(GridState{{0, 0}}, Move::Up), InvalidActionError);
}

TEST(Grid, ConstructionErrors) {
    EXPECT_THROW(GridWorld(1, 5, std::vector<int>(5, 1)), ConfigError);
    EXPECT_THROW(GridWorld(2, 2, {0, 0, 0, 0}), ConfigError);
    EXPECT_THROW(GridWorld::generate(4, 4, 0.5, 3, 1), ConfigError);
    EXPECT_THROW(GridWorld::generate(4, 4, 0.1, 0, 1), ConfigError);
}

TEST(Grid, StartSamplingCoversFreeCellsUniformly) {
    auto grid = GridWorld::generate(5, 4, 0.3, 3, 2);
    Rng rng(9);
    std::map<std::pair<int, int>, int> counts;
    const int n = 20000;
    for (int t = 0; t < n; ++t) {
        auto s = grid.samp_start_state(rng);
        ASSERT_TRUE(grid.is_free(s.pos));
        ++counts[{s.pos.r, s.pos.c}];
    }
    EXPECT_EQ(counts.size(), grid.free_cells().size());
    const double expected = static_cast<double>(n) / static_cast<double>(grid.free_cells().size());
    for (auto& [cell, c] : counts) EXPECT_NEAR(c, expected, 6 * std::sqrt(expected));
}

TEST(Grid, UniformCostSearchMatchesDijkstra) {
    Rng rng(10);
    int checked = 0;
    for (std::uint64_t seed = 0; checked < 50; ++seed) {
        auto grid = GridWorld::generate(5, 5, 0.15, 9, 100 + seed);
        auto start = grid.samp_start_state(rng);
        auto target = grid.samp_start_state(rng);
        const double want = oracle::grid_h_star(grid, start.pos, target.pos);
        InstanceOf<GridWorld> inst{start, GridGoal{target.pos}, 0};
        auto r = bwas(grid, inst, zero_heuristic<GridWorld>(), SearchParams{}, rng);
        if (std::isinf(want)) {
            EXPECT_FALSE(r.solved);
            continue;
        }
        ASSERT_TRUE(r.solved);
        EXPECT_EQ(r.path_cost, want);
        // reported cost is the sum of destination weights along the path
        double sum = 0;
        GridState s = start;
        for (Move m : r.path) {
            s = grid.next_state(s, m).next_state;
            sum += grid.weight(s.pos);
        }
        EXPECT_EQ(sum, r.path_cost);
        ++checked;
    }
}

TEST(Grid, TextCodecsAndRender) {
    GridWorld grid(3, 2, {1, 3, 1, 0, 2, 1});
    EXPECT_EQ(grid.state_to_text(GridState{{1, 2}}), "1,2");
    EXPECT_EQ(grid.state_from_text("0,1"), (GridState{{0, 1}}));
    EXPECT_THROW(grid.state_from_text("1,0"), ParseError);  // obstacle
    EXPECT_THROW(grid.state_from_text("a,b"), ParseError);
    EXPECT_THROW(grid.goal_from_text("5,5"), ParseError);
    EXPECT_EQ(grid.render_state(GridState{{0, 0}}), "S31\n#21\n");
}

TEST(Grid, CoordsEncoding) {
    GridWorld grid(3, 2, {1, 4, 1, 0, 2, 1});
    EXPECT_EQ(grid.coords_dim(), 10u);
    std::vector<float> v(10);
    grid.encode_coords(GridState{{1, 2}}, GridGoal{{0, 0}}, v);
    EXPECT_EQ(v[0], 1.0f);
    EXPECT_EQ(v[1], 1.0f);
    EXPECT_EQ(v[2], 0.0f);
    EXPECT_EQ(v[3], 0.0f);
    EXPECT_EQ(v[5], 1.0f);
    EXPECT_EQ(v[7], 0.0f);
}
