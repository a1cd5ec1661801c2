#pragma once

#include <algorithm>

#include "xube/app/runner.hpp"
#include "xube/domains/grid.hpp"
#include "xube/domains/sliding_tile.hpp"
#include "xube/nn/mlp.hpp"
#include "xube/nn/tabular.hpp"

namespace xube::app {

struct DomainEntry {
    std::string name;
    std::string help;  // argument summary
    std::vector<std::string> capabilities;
    std::function<std::unique_ptr<DomainHandle>(NamedArgs&)> make;
};

class Registry {
  public:
    void add_domain(DomainEntry e) {
        if (find_domain(e.name)) throw InternalError("domain '" + e.name + "' registered twice");
        domains_.push_back(std::move(e));
    }

    void add_arch(ArchEntry e) {
        if (find_arch(e.name)) throw InternalError("architecture '" + e.name + "' registered twice");
        archs_.push_back(std::move(e));
    }

    // Listing only; the encoders themselves live in each domain handle.
    void add_encoder_info(EncoderInfo e) { encoders_.push_back(std::move(e)); }

    [[nodiscard]] const DomainEntry* find_domain(const std::string& name) const {
        for (const auto& d : domains_) {
            if (d.name == name) return &d;
        }
        return nullptr;
    }

    [[nodiscard]] const ArchEntry* find_arch(const std::string& name) const {
        for (const auto& a : archs_) {
            if (a.name == name) return &a;
        }
        return nullptr;
    }

    std::unique_ptr<DomainHandle> make_domain(std::string_view text) const {
        auto args = NamedArgs::parse(text);
        const auto* e = find_domain(args.name());
        if (!e) throw ConfigError("unknown domain '" + args.name() + "'");
        auto h = e->make(args);
        args.finish();
        return h;
    }

    [[nodiscard]] const ArchEntry& arch(const std::string& name) const {
        const auto* a = find_arch(name);
        if (!a) throw ConfigError("unknown architecture '" + name + "'");
        return *a;
    }

    [[nodiscard]] const std::vector<DomainEntry>& domains() const { return domains_; }
    [[nodiscard]] const std::vector<ArchEntry>& archs() const { return archs_; }
    [[nodiscard]] const std::vector<EncoderInfo>& encoders() const { return encoders_; }

  private:
    std::vector<DomainEntry> domains_;
    std::vector<ArchEntry> archs_;
    std::vector<EncoderInfo> encoders_;
};

// "400-200" -> {400, 200}; "" or "none" -> no hidden layers.
inline std::vector<std::size_t> parse_hidden(const std::string& text) {
    std::vector<std::size_t> out;
    if (text.empty() || text == "none") return out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto dash = text.find('-', pos);
        const std::string tok = text.substr(pos, dash == std::string::npos ? std::string::npos : dash - pos);
        std::size_t v = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (tok.empty() || ec != std::errc() || p != tok.data() + tok.size() || v == 0) {
            throw ParseError("malformed hidden layer sizes '" + text + "'");
        }
        out.push_back(v);
        if (dash == std::string::npos) break;
        pos = dash + 1;
    }
    return out;
}

template <int N>
std::unique_ptr<DomainHandle> make_sliding_tile(const std::string& spec) {
    using P = SlidingTile<N>;
    auto dom = std::make_shared<P>();
    Encoder<P> onehot{"onehot", P::onehot_dim(),
                      [dom](const TileState<N>& s, const TileGoal<N>& g, std::span<float> out) { dom->encode_onehot(s, g, out); }};
    return std::make_unique<DomainRunner<P>>(spec, *dom,
                                             std::vector<EncoderSlot<P>>{{"mlp", onehot}, {"table", onehot}});
}

inline std::unique_ptr<DomainHandle> make_grid(NamedArgs& args) {
    const auto width = args.get_int("width", 8);
    const auto height = args.get_int("height", 8);
    const double density = args.get_double("density", 0.2);
    const auto max_weight = args.get_int("max_weight", 5);
    const auto seed = args.get_int("seed", 0);
    if (width > 1024 || height > 1024) throw ConfigError("grid width and height must be <= 1024");
    auto dom = std::make_shared<GridWorld>(GridWorld::generate(static_cast<int>(width), static_cast<int>(height),
                                                               density, static_cast<int>(max_weight),
                                                               static_cast<std::uint64_t>(seed)));
    Encoder<GridWorld> coords{"coords", dom->coords_dim(),
                              [dom](const GridState& s, const GridGoal& g, std::span<float> out) {
                                  dom->encode_coords(s, g, out);
                              }};
    return std::make_unique<DomainRunner<GridWorld>>(args.text(), *dom,
                                                     std::vector<EncoderSlot<GridWorld>>{{"mlp", coords}, {"table", coords}});
}

inline Registry builtin_registry() {
    Registry reg;
    reg.add_domain({"stp3", "(no arguments) 3x3 sliding-tile puzzle", capability_names<SlidingTile<3>>(),
                    [](NamedArgs& a) { return make_sliding_tile<3>(a.text()); }});
    reg.add_domain({"stp4", "(no arguments) 4x4 sliding-tile puzzle", capability_names<SlidingTile<4>>(),
                    [](NamedArgs& a) { return make_sliding_tile<4>(a.text()); }});
    reg.add_domain({"grid",
                    "width=8,height=8,density=0.2,max_weight=5,seed=0  weighted 4-connected grid; density in [0, 0.4]",
                    capability_names<GridWorld>(), [](NamedArgs& a) { return make_grid(a); }});

    reg.add_arch({"mlp", "hidden=400-200,lr=0.001,opt=adam|sgd  fully connected ReLU network",
                  [](NamedArgs& a, std::size_t in, std::size_t out, std::uint64_t seed) -> std::unique_ptr<nn::Approximator> {
                      std::vector<std::size_t> layers{in};
                      for (auto h : parse_hidden(a.get("hidden", "400-200"))) layers.push_back(h);
                      layers.push_back(out);
                      nn::AdamConfig adam;
                      adam.lr = a.get_double("lr", 1e-3);
                      const std::string opt = a.get("opt", "adam");
                      if (opt != "adam" && opt != "sgd") throw ConfigError("mlp opt must be 'adam' or 'sgd'");
                      Rng rng(seed);
                      return std::make_unique<nn::Mlp>(nn::Mlp::make(nn::MlpSpec{layers}, rng,
                                                                     opt == "sgd" ? nn::Optimizer::Sgd : nn::Optimizer::Adam,
                                                                     adam));
                  }});
    reg.add_arch({"table", "lr=1  exact lookup table keyed by the encoded input",
                  [](NamedArgs& a, std::size_t in, std::size_t out, std::uint64_t) -> std::unique_ptr<nn::Approximator> {
                      return std::make_unique<nn::TabularApprox>(in, out, a.get_double("lr", 1.0));
                  }});

    for (const char* d : {"stp3", "stp4"}) {
        reg.add_encoder_info({d, "mlp", "onehot"});
        reg.add_encoder_info({d, "table", "onehot"});
    }
    reg.add_encoder_info({"grid", "mlp", "coords"});
    reg.add_encoder_info({"grid", "table", "coords"});
    return reg;
}

inline void print_domain_info(const Registry& reg, std::ostream& out) {
    for (const auto& d : reg.domains()) {
        out << d.name << "\n  args: " << d.help << "\n  capabilities:";
        for (const auto& c : d.capabilities) out << ' ' << c;
        out << '\n';
    }
}

inline void print_heuristic_info(const Registry& reg, std::ostream& out) {
    out << "architectures:\n";
    for (const auto& a : reg.archs()) out << "  " << a.name << "  " << a.help << '\n';
    out << "encoders (domain, architecture -> encoder; first match wins):\n";
    for (const auto& e : reg.encoders()) out << "  " << e.domain << ", " << e.arch << " -> " << e.name << '\n';
    out << "without a checkpoint, solve uses the zero heuristic\n";
}

}  // namespace xube::app
