#pragma once

#include <algorithm>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "xube/domain.hpp"
#include "xube/domains/sliding_tile.hpp"  // Move, parse_move

namespace xube {

struct GridCell {
    int r = 0;
    int c = 0;
    friend bool operator==(const GridCell&, const GridCell&) = default;
};

struct GridState {
    GridCell pos;
    friend bool operator==(const GridState&, const GridState&) = default;
};

struct GridGoal {
    GridCell target;
    friend bool operator==(const GridGoal&, const GridGoal&) = default;
};

}  // namespace xube

template <>
struct std::hash<xube::GridState> {
    std::size_t operator()(const xube::GridState& s) const noexcept {
        return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(static_cast<std::uint32_t>(s.pos.r)) << 32) |
                                          static_cast<std::uint32_t>(s.pos.c));
    }
};

namespace xube {

inline std::string cell_to_text(GridCell c) { return std::to_string(c.r) + "," + std::to_string(c.c); }

inline GridCell cell_from_text(std::string_view text) {
    const auto comma = text.find(',');
    if (comma == std::string_view::npos) throw ParseError("grid cell must be 'r,c': '" + std::string(text) + "'");
    try {
        std::size_t used_r = 0;
        std::size_t used_c = 0;
        const std::string rs(text.substr(0, comma));
        const std::string cs(text.substr(comma + 1));
        const int r = std::stoi(rs, &used_r);
        const int c = std::stoi(cs, &used_c);
        if (used_r != rs.size() || used_c != cs.size()) throw std::invalid_argument("trailing");
        return {r, c};
    } catch (const std::exception&) {
        throw ParseError("grid cell must be 'r,c': '" + std::string(text) + "'");
    }
}

// 4-connected navigation on a height x width grid. Each cell holds a terrain
// weight >= 1, or 0 for an obstacle; moving costs the destination's weight.
class GridWorld : public ActsEnumMixin<GridWorld, GridState, Move> {
  public:
    using State = GridState;
    using Action = Move;
    using Goal = GridGoal;

    // weights.size() == width * height, row-major; 0 marks an obstacle.
    GridWorld(int width, int height, std::vector<int> weights)
        : width_(width), height_(height), weights_(std::make_shared<const std::vector<int>>(std::move(weights))),
          all_{Move::Up, Move::Down, Move::Left, Move::Right} {
        if (width < 2 || height < 2) throw ConfigError("grid width and height must be >= 2");
        if (weights_->size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
            throw ConfigError("grid weight map has the wrong size");
        }
        for (std::size_t i = 0; i < weights_->size(); ++i) {
            const int w = (*weights_)[i];
            if (w < 0) throw ConfigError("grid terrain weights must be >= 1 (or 0 for obstacles)");
            if (w > 0) free_cells_.push_back({static_cast<int>(i) / width, static_cast<int>(i) % width});
            max_weight_ = std::max(max_weight_, w);
        }
        if (free_cells_.empty()) throw ConfigError("grid has no free cells");
    }

    // Random map: each cell is an obstacle with probability obstacle_density,
    // otherwise its weight is uniform in [1, max_terrain_weight].
    static GridWorld generate(int width, int height, double obstacle_density, int max_terrain_weight,
                              std::uint64_t seed) {
        if (width < 2 || height < 2) throw ConfigError("grid width and height must be >= 2");
        if (!(obstacle_density >= 0.0 && obstacle_density <= 0.4)) {
            throw ConfigError("grid obstacle density must be in [0, 0.4]");
        }
        if (max_terrain_weight < 1) throw ConfigError("grid max terrain weight must be >= 1");
        Rng rng(seed);
        std::uniform_int_distribution<int> wdist(1, max_terrain_weight);
        std::vector<int> weights(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
        for (auto& w : weights) {
            const bool blocked = uniform01(rng) < obstacle_density;
            const int weight = wdist(rng);
            w = blocked ? 0 : weight;
        }
        return GridWorld(width, height, std::move(weights));
    }

    [[nodiscard]] int width() const { return width_; }
    [[nodiscard]] int height() const { return height_; }
    [[nodiscard]] int max_weight() const { return max_weight_; }
    [[nodiscard]] const std::vector<GridCell>& free_cells() const { return free_cells_; }

    [[nodiscard]] int weight(GridCell c) const {
        if (!in_bounds(c)) return 0;
        return (*weights_)[static_cast<std::size_t>(c.r * width_ + c.c)];
    }
    [[nodiscard]] bool is_free(GridCell c) const { return weight(c) > 0; }

    // --- core contract ---

    std::vector<InstanceOf<GridWorld>> samp_prob_insts(std::span<const int> ks, Rng& rng) const {
        return gen_prob_insts_forward(*this, ks, rng);
    }

    Transition<State> next_state(const State& s, Move a) const {
        const GridCell t = step(s.pos, a);
        if (!is_free(t)) throw InvalidActionError("grid move into an obstacle or off the map");
        return {State{t}, static_cast<double>(weight(t))};
    }

    bool is_solved(const State& s, const Goal& g) const { return s.pos == g.target; }

    // --- ActsEnum / FixedActsEnum ---

    std::vector<Move> actions(const State& s) const {
        std::vector<Move> out;
        out.reserve(4);
        for (Move m : all_) {
            if (is_free(step(s.pos, m))) out.push_back(m);
        }
        return out;
    }

    const std::vector<Move>& all_actions() const { return all_; }
    std::size_t action_index(Move m) const { return static_cast<std::size_t>(m); }

    // --- GoalSampleableFromState ---

    State samp_start_state(Rng& rng) const { return State{free_cells_[uniform_index(rng, free_cells_.size())]}; }
    Goal samp_goal_from_state(const State& s, Rng& /*rng*/) const { return Goal{s.pos}; }

    // --- StringToAct ---

    std::optional<Move> parse_action(std::string_view text) const { return parse_move(text); }
    std::string action_to_string(Move m) const { return std::string(1, move_char(m)); }

    // --- Renderable ---

    std::string state_to_text(const State& s) const { return cell_to_text(s.pos); }
    std::string goal_to_text(const Goal& g) const { return cell_to_text(g.target); }

    State state_from_text(std::string_view text) const {
        const GridCell c = cell_from_text(text);
        if (!is_free(c)) throw ParseError("grid state '" + std::string(text) + "' is not a free cell");
        return State{c};
    }

    Goal goal_from_text(std::string_view text) const {
        const GridCell c = cell_from_text(text);
        if (!in_bounds(c)) throw ParseError("grid goal '" + std::string(text) + "' is off the map");
        return Goal{c};
    }

    std::string render_state(const State& s) const { return render(s.pos, 'S'); }
    std::string render_goal(const Goal& g) const { return render(g.target, 'G'); }

    // --- encoders ---

    // Normalized position and target coordinates, then the terrain map
    // (weight / max weight, 0 for obstacles).
    [[nodiscard]] std::size_t coords_dim() const { return 4 + weights_->size(); }

    void encode_coords(const State& s, const Goal& g, std::span<float> out) const {
        const float hr = static_cast<float>(height_ - 1);
        const float wc = static_cast<float>(width_ - 1);
        out[0] = static_cast<float>(s.pos.r) / hr;
        out[1] = static_cast<float>(s.pos.c) / wc;
        out[2] = static_cast<float>(g.target.r) / hr;
        out[3] = static_cast<float>(g.target.c) / wc;
        for (std::size_t i = 0; i < weights_->size(); ++i) {
            out[4 + i] = static_cast<float>((*weights_)[i]) / static_cast<float>(max_weight_);
        }
    }

  private:
    [[nodiscard]] bool in_bounds(GridCell c) const { return c.r >= 0 && c.r < height_ && c.c >= 0 && c.c < width_; }

    static GridCell step(GridCell p, Move m) {
        switch (m) {
            case Move::Up: return {p.r - 1, p.c};
            case Move::Down: return {p.r + 1, p.c};
            case Move::Left: return {p.r, p.c - 1};
            case Move::Right: return {p.r, p.c + 1};
        }
        return p;
    }

    [[nodiscard]] std::string render(GridCell mark, char symbol) const {
        std::ostringstream out;
        for (int r = 0; r < height_; ++r) {
            for (int c = 0; c < width_; ++c) {
                const int w = weight({r, c});
                char ch = w == 0 ? '#' : (w < 10 ? static_cast<char>('0' + w) : '+');
                if (mark == GridCell{r, c}) ch = symbol;
                out << ch;
            }
            out << '\n';
        }
        return out.str();
    }

    int width_;
    int height_;
    std::shared_ptr<const std::vector<int>> weights_;
    std::vector<GridCell> free_cells_;
    int max_weight_ = 1;
    std::vector<Move> all_;
};

}  // namespace xube
