#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "xube/algo_spec.hpp"
#include "xube/common.hpp"

namespace xube::training {

enum class TargetUpdate { Always, LossBelow };
enum class GuidanceSource { Target, Live };

struct TrainConfig {
    std::size_t batch_size = 1000;   // N
    std::size_t update_itrs = 100;   // U
    std::int64_t search_itrs = 200;  // I, overrides the algo string's I
    int k_max = 30;
    bool adaptive_k = false;  // start at K = 1 and double; otherwise K = k_max throughout
    std::size_t replay = 1;   // R; 0 behaves like 1 (current block only)
    std::optional<double> lr;  // leaves the approximator's own rate alone when unset
    std::size_t workers = 1;
    TargetUpdate target_update = TargetUpdate::Always;
    double loss_threshold = 0.0;
    GuidanceSource guidance = GuidanceSource::Target;
    bool her = false;
    bool lhbl = false;
    std::string algo = "graph_v";
    std::optional<char> head;  // 'v' or 'q'; derived from algo when unset
    std::uint64_t seed = 0;
    int max_update_checks = 10;
    int test_every = 0;  // run the test set every this many checks; 0 = never
    std::string test_algo = "graph_v";
    std::size_t pred_samples = 100;  // per check, written to pred_samples.csv
    bool record_timing = true;       // false writes 0 in the secs_* columns
    bool verbose = false;            // per-phase timing in train.log
};

// Validated and derived settings.
struct ResolvedConfig {
    AlgoSpec algo;
    AlgoSpec test_algo;
    char head = 'v';
    int initial_k = 0;
};

inline void parse_target_update(std::string_view text, TrainConfig& cfg) {
    if (text == "always") {
        cfg.target_update = TargetUpdate::Always;
        return;
    }
    if (text.starts_with("loss:")) {
        const std::string num(text.substr(5));
        std::size_t used = 0;
        double t = 0.0;
        try {
            t = std::stod(num, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != num.size() || !std::isfinite(t)) {
            throw ParseError("malformed loss threshold '" + num + "' in --target-update");
        }
        cfg.target_update = TargetUpdate::LossBelow;
        cfg.loss_threshold = t;
        return;
    }
    throw ParseError("target update must be 'always' or 'loss:<threshold>', got '" + std::string(text) + "'");
}

inline GuidanceSource parse_guidance(std::string_view text) {
    if (text == "target") return GuidanceSource::Target;
    if (text == "live") return GuidanceSource::Live;
    throw ParseError("guidance must be 'target' or 'live', got '" + std::string(text) + "'");
}

inline ResolvedConfig resolve(const TrainConfig& cfg) {
    if (cfg.batch_size < 1) throw ConfigError("batch size N must be >= 1");
    if (cfg.update_itrs < 1) throw ConfigError("update-check period U must be >= 1");
    if (cfg.search_itrs < 1) throw ConfigError("search iteration cap I must be >= 1");
    if (cfg.workers < 1) throw ConfigError("workers must be >= 1");
    if (cfg.k_max < 0) throw ConfigError("K_max must be >= 0");
    if (cfg.max_update_checks < 0) throw ConfigError("max update checks must be >= 0");
    if (cfg.test_every < 0) throw ConfigError("test period must be >= 0");
    if (cfg.lr && !(*cfg.lr > 0.0)) throw ConfigError("learning rate must be > 0");

    ResolvedConfig r;
    r.algo = parse_algo(cfg.algo);
    r.algo.max_iters = cfg.search_itrs;
    r.test_algo = parse_algo(cfg.test_algo);
    if (is_supervised(r.test_algo.family)) throw ConfigError("test algorithm must be a search, not a supervised family");
    if (!is_supervised(r.algo.family)) {
        if (r.algo.batch != 1) throw ConfigError("training search must have B = 1, got '" + cfg.algo + "'");
        r.algo.search_params().validate();
    }

    const char fam_head = family_head(r.algo.family);
    if (cfg.head && *cfg.head != 'v' && *cfg.head != 'q') throw ConfigError("head must be 'v' or 'q'");
    if (cfg.head && fam_head && *cfg.head != fam_head) {
        throw ConfigError(std::string("head '") + *cfg.head + "' contradicts algorithm '" + cfg.algo + "'");
    }
    r.head = cfg.head ? *cfg.head : (fam_head ? fam_head : 'v');

    if (is_supervised(r.algo.family)) {
        if (cfg.her) throw ConfigError("her applies to search-based training only");
        if (cfg.lhbl) throw ConfigError("lhbl applies to search-based training only");
    }
    r.initial_k = (cfg.adaptive_k && !is_supervised(r.algo.family)) ? std::min(1, cfg.k_max) : cfg.k_max;
    return r;
}

}  // namespace xube::training
