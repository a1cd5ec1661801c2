#pragma once

#include <ostream>
#include <variant>

#include "xube/algo_spec.hpp"
#include "xube/search/beam.hpp"
#include "xube/search/bwas.hpp"
#include "xube/search/bwqs.hpp"
#include "xube/search/rollout.hpp"

namespace xube {

// Heuristic handed to a search; graph_v needs the v form, graph_q the q form,
// beam takes either and rollout ignores it.
template <class D>
using Guidance = std::variant<HeuristicV<D>, HeuristicQ<D>>;

template <ActsEnum D>
SearchResultOf<D> run_search(const D& domain, const InstanceOf<D>& inst, const AlgoSpec& spec, const Guidance<D>& guide,
                             Rng& rng, std::ostream* verbose = nullptr) {
    auto params = spec.search_params();
    params.verbose = verbose;
    switch (spec.family) {
        case AlgoFamily::GraphV: {
            const auto* hv = std::get_if<HeuristicV<D>>(&guide);
            if (!hv) throw ConfigError("graph_v needs a heuristic-v, got a heuristic-q");
            return bwas(domain, inst, *hv, params, rng);
        }
        case AlgoFamily::GraphQ: {
            if constexpr (FixedActsEnum<D>) {
                const auto* hq = std::get_if<HeuristicQ<D>>(&guide);
                if (!hq) throw ConfigError("graph_q needs a heuristic-q, got a heuristic-v");
                return bwqs(domain, inst, *hq, params, rng);
            } else {
                throw ConfigError("graph_q needs a domain with a fixed action set");
            }
        }
        case AlgoFamily::BeamV:
        case AlgoFamily::BeamQ: {
            const bool want_q = spec.family == AlgoFamily::BeamQ;
            if (want_q != std::holds_alternative<HeuristicQ<D>>(guide)) {
                throw ConfigError(std::string(family_name(spec.family)) + " got the wrong heuristic head");
            }
            return beam_search(domain, inst, guide, params, rng);
        }
        case AlgoFamily::Rollout: return random_rollout(domain, inst, params.max_iters, rng);
        default: break;
    }
    throw ConfigError(std::string(family_name(spec.family)) + " is a supervised training family, not a search");
}

}  // namespace xube
