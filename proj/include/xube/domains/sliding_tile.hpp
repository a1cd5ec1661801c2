#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>

#include "xube/domain.hpp"

namespace xube {

enum class Move : std::uint8_t { Up = 0, Down = 1, Left = 2, Right = 3 };

inline Move inverse(Move m) {
    switch (m) {
        case Move::Up: return Move::Down;
        case Move::Down: return Move::Up;
        case Move::Left: return Move::Right;
        case Move::Right: return Move::Left;
    }
    return m;
}

inline char move_char(Move m) { return "UDLR"[static_cast<int>(m)]; }

inline std::optional<Move> parse_move(std::string_view text) {
    if (text == "U" || text == "Up") return Move::Up;
    if (text == "D" || text == "Down") return Move::Down;
    if (text == "L" || text == "Left") return Move::Left;
    if (text == "R" || text == "Right") return Move::Right;
    return std::nullopt;
}

inline std::uint64_t fnv1a(const std::uint8_t* data, std::size_t n) {
    std::uint64_t h = 1469598103934665603ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= 1099511628211ULL;
    }
    return h;
}

// Tiles are stored row-major; 0 is the blank.
template <int N>
struct TileState {
    std::array<std::uint8_t, N * N> tiles{};
    friend bool operator==(const TileState&, const TileState&) = default;

    [[nodiscard]] int blank() const {
        return static_cast<int>(std::find(tiles.begin(), tiles.end(), std::uint8_t{0}) - tiles.begin());
    }
};

template <int N>
struct TileGoal {
    std::array<std::uint8_t, N * N> target{};
    friend bool operator==(const TileGoal&, const TileGoal&) = default;
};

}  // namespace xube

template <int N>
struct std::hash<xube::TileState<N>> {
    std::size_t operator()(const xube::TileState<N>& s) const noexcept {
        return static_cast<std::size_t>(xube::fnv1a(s.tiles.data(), s.tiles.size()));
    }
};

namespace xube {

// n x n sliding-tile puzzle with unit move costs. Actions move the blank.
template <int N>
class SlidingTile : public BatchedTransitionMixin<SlidingTile<N>, TileState<N>, Move> {
    static_assert(N >= 2 && N <= 15);

  public:
    using State = TileState<N>;
    using Action = Move;
    using Goal = TileGoal<N>;
    using Flat = std::uint8_t;

    static constexpr int kSide = N;
    static constexpr int kCells = N * N;

    SlidingTile() : all_{Move::Up, Move::Down, Move::Left, Move::Right} {
        for (int i = 0; i < kCells - 1; ++i) solved_.tiles[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i + 1);
        solved_.tiles[kCells - 1] = 0;
    }

    [[nodiscard]] const State& solved_state() const { return solved_; }

    // --- core contract ---

    std::vector<InstanceOf<SlidingTile>> samp_prob_insts(std::span<const int> ks, Rng& rng) const {
        return gen_prob_insts_reverse(*this, ks, rng);
    }

    Transition<State> next_state(const State& s, Move a) const {
        const int b = s.blank();
        const int t = target_cell(b, a);
        if (t < 0) throw InvalidActionError(std::string("move ") + move_char(a) + " leaves the board");
        State next = s;
        std::swap(next.tiles[static_cast<std::size_t>(b)], next.tiles[static_cast<std::size_t>(t)]);
        return {next, 1.0};
    }

    bool is_solved(const State& s, const Goal& g) const { return s.tiles == g.target; }

    // --- ActsEnum / FixedActsEnum ---

    std::vector<Move> actions(const State& s) const {
        const int b = s.blank();
        std::vector<Move> out;
        out.reserve(4);
        for (Move m : all_) {
            if (target_cell(b, m) >= 0) out.push_back(m);
        }
        return out;
    }

    const std::vector<Move>& all_actions() const { return all_; }
    std::size_t action_index(Move m) const { return static_cast<std::size_t>(m); }

    // --- GoalSampleableFromState ---

    // Uniform over the states reachable from the solved configuration.
    State samp_start_state(Rng& rng) const {
        State s = solved_;
        std::shuffle(s.tiles.begin(), s.tiles.end(), rng);
        if (!is_solvable(s, solved_.tiles)) {
            // swap two non-blank tiles to flip permutation parity
            int a = 0;
            while (s.tiles[static_cast<std::size_t>(a)] == 0) ++a;
            int b = a + 1;
            while (s.tiles[static_cast<std::size_t>(b)] == 0) ++b;
            std::swap(s.tiles[static_cast<std::size_t>(a)], s.tiles[static_cast<std::size_t>(b)]);
        }
        return s;
    }

    Goal samp_goal_from_state(const State& s, Rng& /*rng*/) const { return Goal{s.tiles}; }

    // --- ReverseWalkable ---

    std::pair<State, Goal> samp_goal_state_and_goal(Rng& /*rng*/) const { return {solved_, Goal{solved_.tiles}}; }

    // Moves are self-inverse in pairs, so a reverse step is a forward step
    // whose inverse is reported as the forward action.
    std::optional<ReverseStep<State, Move>> reverse_step(const State& s, Rng& rng) const {
        auto a = this->samp_state_act(s, rng);
        if (!a) return std::nullopt;
        auto tr = next_state(s, *a);
        return ReverseStep<State, Move>{std::move(tr.next_state), inverse(*a), tr.cost};
    }

    // --- StringToAct ---

    std::optional<Move> parse_action(std::string_view text) const { return parse_move(text); }
    std::string action_to_string(Move m) const { return std::string(1, move_char(m)); }

    // --- Renderable ---

    std::string state_to_text(const State& s) const { return tiles_to_text(s.tiles); }
    std::string goal_to_text(const Goal& g) const { return tiles_to_text(g.target); }
    State state_from_text(std::string_view text) const { return State{tiles_from_text(text)}; }
    Goal goal_from_text(std::string_view text) const { return Goal{tiles_from_text(text)}; }
    std::string render_state(const State& s) const { return render_tiles(s.tiles); }
    std::string render_goal(const Goal& g) const { return render_tiles(g.target); }

    // --- BatchedTransition ---

    std::size_t flat_width() const { return kCells; }

    std::vector<Flat> to_flat(std::span<const State> states) const {
        std::vector<Flat> flat(states.size() * kCells);
        for (std::size_t i = 0; i < states.size(); ++i) {
            std::copy(states[i].tiles.begin(), states[i].tiles.end(), flat.begin() + static_cast<std::ptrdiff_t>(i * kCells));
        }
        return flat;
    }

    std::vector<double> step_flat(std::vector<Flat>& flat, std::span<const Move> acts) const {
        const std::size_t rows = flat.size() / kCells;
        if (acts.size() != rows) throw ConfigError("step_flat: action count does not match batch size");
        for (std::size_t i = 0; i < rows; ++i) {
            Flat* row = flat.data() + i * kCells;
            const int b = static_cast<int>(std::find(row, row + kCells, Flat{0}) - row);
            const int t = target_cell(b, acts[i]);
            if (t < 0) throw InvalidActionError(std::string("move ") + move_char(acts[i]) + " leaves the board");
            std::swap(row[b], row[t]);
        }
        return std::vector<double>(rows, 1.0);
    }

    std::vector<State> from_flat(const std::vector<Flat>& flat) const {
        std::vector<State> out(flat.size() / kCells);
        for (std::size_t i = 0; i < out.size(); ++i) {
            std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(i * kCells), kCells, out[i].tiles.begin());
        }
        return out;
    }

    // --- encoders ---

    // One-hot tile identity per cell, state then goal: 2 * N^4 values.
    static constexpr std::size_t onehot_dim() { return 2 * static_cast<std::size_t>(kCells) * kCells; }

    void encode_onehot(const State& s, const Goal& g, std::span<float> out) const {
        std::fill(out.begin(), out.end(), 0.0f);
        for (int c = 0; c < kCells; ++c) {
            out[static_cast<std::size_t>(c * kCells + s.tiles[static_cast<std::size_t>(c)])] = 1.0f;
            out[static_cast<std::size_t>(kCells * kCells + c * kCells + g.target[static_cast<std::size_t>(c)])] = 1.0f;
        }
    }

    // Sum of tile Manhattan distances to the target; consistent for unit moves.
    double manhattan(const State& s, const Goal& g) const {
        std::array<int, kCells> where{};
        for (int c = 0; c < kCells; ++c) where[g.target[static_cast<std::size_t>(c)]] = c;
        int total = 0;
        for (int c = 0; c < kCells; ++c) {
            const int tile = s.tiles[static_cast<std::size_t>(c)];
            if (tile == 0) continue;
            const int t = where[static_cast<std::size_t>(tile)];
            total += std::abs(c / N - t / N) + std::abs(c % N - t % N);
        }
        return total;
    }

    // A state can reach `target` iff permutation parity matches the parity of
    // the blank's taxicab distance (each move flips both).
    static bool is_solvable(const State& s, const std::array<std::uint8_t, N * N>& target) {
        std::array<int, kCells> where{};
        for (int c = 0; c < kCells; ++c) where[target[static_cast<std::size_t>(c)]] = c;
        std::array<int, kCells> perm{};
        for (int c = 0; c < kCells; ++c) perm[static_cast<std::size_t>(c)] = where[s.tiles[static_cast<std::size_t>(c)]];
        std::array<bool, kCells> seen{};
        int transpositions = 0;
        for (int c = 0; c < kCells; ++c) {
            if (seen[static_cast<std::size_t>(c)]) continue;
            int len = 0;
            for (int j = c; !seen[static_cast<std::size_t>(j)]; j = perm[static_cast<std::size_t>(j)]) {
                seen[static_cast<std::size_t>(j)] = true;
                ++len;
            }
            transpositions += len - 1;
        }
        const int b = s.blank();
        const int tb = where[0];
        const int dist = std::abs(b / N - tb / N) + std::abs(b % N - tb % N);
        return (transpositions % 2) == (dist % 2);
    }

  private:
    static int target_cell(int blank, Move m) {
        const int r = blank / N;
        const int c = blank % N;
        switch (m) {
            case Move::Up: return r > 0 ? blank - N : -1;
            case Move::Down: return r < N - 1 ? blank + N : -1;
            case Move::Left: return c > 0 ? blank - 1 : -1;
            case Move::Right: return c < N - 1 ? blank + 1 : -1;
        }
        return -1;
    }

    static std::string tiles_to_text(const std::array<std::uint8_t, N * N>& tiles) {
        std::string out;
        for (int i = 0; i < kCells; ++i) {
            if (i) out += ' ';
            out += std::to_string(tiles[static_cast<std::size_t>(i)]);
        }
        return out;
    }

    static std::array<std::uint8_t, N * N> tiles_from_text(std::string_view text) {
        std::istringstream in{std::string(text)};
        std::array<std::uint8_t, N * N> tiles{};
        std::array<bool, N * N> seen{};
        for (int i = 0; i < kCells; ++i) {
            int v = -1;
            if (!(in >> v) || v < 0 || v >= kCells || seen[static_cast<std::size_t>(v)]) {
                throw ParseError("sliding-tile text is not a permutation of 0.." + std::to_string(kCells - 1) + ": '" +
                                 std::string(text) + "'");
            }
            seen[static_cast<std::size_t>(v)] = true;
            tiles[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v);
        }
        std::string rest;
        if (in >> rest) throw ParseError("trailing data in sliding-tile text: '" + std::string(text) + "'");
        return tiles;
    }

    static std::string render_tiles(const std::array<std::uint8_t, N * N>& tiles) {
        const int w = kCells > 10 ? 2 : 1;
        std::string sep = "+";
        for (int c = 0; c < N; ++c) sep += std::string(static_cast<std::size_t>(w + 2), '-') + "+";
        std::ostringstream out;
        out << sep << '\n';
        for (int r = 0; r < N; ++r) {
            out << '|';
            for (int c = 0; c < N; ++c) {
                const int t = tiles[static_cast<std::size_t>(r * N + c)];
                std::string cell = t == 0 ? std::string(static_cast<std::size_t>(w), ' ') : std::to_string(t);
                out << ' ' << std::string(static_cast<std::size_t>(w) - cell.size(), ' ') << cell << " |";
            }
            out << '\n' << sep << '\n';
        }
        return out.str();
    }

    State solved_;
    std::vector<Move> all_;
};

using Puzzle8 = SlidingTile<3>;
using Puzzle15 = SlidingTile<4>;

}  // namespace xube
