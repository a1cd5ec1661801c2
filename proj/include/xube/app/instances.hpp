#pragma once

// Problem-instance and results files, one JSON object per line.

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "xube/domain.hpp"
#include "xube/search/tree.hpp"

namespace xube::app {

using ojson = nlohmann::ordered_json;

template <Renderable D>
void write_instances(const D& domain, std::span<const InstanceOf<D>> insts, std::ostream& os) {
    for (const auto& inst : insts) {
        ojson j;
        j["start"] = domain.state_to_text(inst.start);
        j["goal"] = domain.goal_to_text(inst.goal);
        j["gen_steps"] = inst.gen_steps;
        os << j.dump() << '\n';
    }
}

template <Renderable D>
std::vector<InstanceOf<D>> read_instances(const D& domain, std::istream& is) {
    std::vector<InstanceOf<D>> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            out.push_back({domain.state_from_text(j.at("start").get<std::string>()),
                           domain.goal_from_text(j.at("goal").get<std::string>()), j.value("gen_steps", 0)});
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("instances line " + std::to_string(lineno) + ": " + e.what());
        } catch (const ParseError& e) {
            throw ParseError("instances line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

struct SolveRecord {
    std::size_t index = 0;
    bool solved = false;
    std::vector<std::string> path;
    double path_cost = 0.0;
    std::int64_t iterations = 0;
    std::int64_t nodes_generated = 0;
    double secs = 0.0;
};

struct SolveSummary {
    std::size_t instances = 0;
    std::size_t solved = 0;
    double path_cost_mean = 0.0;  // over solved instances
    double iterations_mean = 0.0;
    double nodes_generated_mean = 0.0;
    double secs_mean = 0.0;

    [[nodiscard]] double solve_rate() const {
        return instances ? static_cast<double>(solved) / static_cast<double>(instances) : 0.0;
    }
};

inline ojson record_json(const SolveRecord& r) {
    ojson j;
    j["index"] = r.index;
    j["solved"] = r.solved;
    j["path"] = r.path;
    j["path_cost"] = r.path_cost;
    j["iterations"] = r.iterations;
    j["nodes_generated"] = r.nodes_generated;
    j["secs"] = r.secs;
    return j;
}

inline SolveSummary summarize(std::span<const SolveRecord> recs) {
    SolveSummary s;
    s.instances = recs.size();
    double cost = 0.0, itrs = 0.0, nodes = 0.0, secs = 0.0;
    for (const auto& r : recs) {
        itrs += static_cast<double>(r.iterations);
        nodes += static_cast<double>(r.nodes_generated);
        secs += r.secs;
        if (r.solved) {
            ++s.solved;
            cost += r.path_cost;
        }
    }
    if (s.solved) s.path_cost_mean = cost / static_cast<double>(s.solved);
    if (s.instances) {
        const auto n = static_cast<double>(s.instances);
        s.iterations_mean = itrs / n;
        s.nodes_generated_mean = nodes / n;
        s.secs_mean = secs / n;
    }
    return s;
}

inline ojson summary_json(const SolveSummary& s) {
    ojson j;
    j["instances"] = s.instances;
    j["solved"] = s.solved;
    j["solve_rate"] = s.solve_rate();
    j["path_cost_mean"] = s.path_cost_mean;
    j["iterations_mean"] = s.iterations_mean;
    j["nodes_generated_mean"] = s.nodes_generated_mean;
    j["secs_mean"] = s.secs_mean;
    ojson line;
    line["summary"] = j;
    return line;
}

// Records and (if present) the summary line of a results file.
struct ResultsFile {
    std::vector<SolveRecord> records;
    std::optional<nlohmann::json> summary;
};

inline ResultsFile read_results(std::istream& is) {
    ResultsFile out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            if (j.contains("summary")) {
                out.summary = j.at("summary");
                continue;
            }
            SolveRecord r;
            r.index = j.at("index").get<std::size_t>();
            r.solved = j.at("solved").get<bool>();
            r.path = j.at("path").get<std::vector<std::string>>();
            r.path_cost = j.at("path_cost").is_null() ? 0.0 : j.at("path_cost").get<double>();
            r.iterations = j.at("iterations").get<std::int64_t>();
            r.nodes_generated = j.at("nodes_generated").get<std::int64_t>();
            r.secs = j.at("secs").get<double>();
            out.records.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw CorruptFileError("results line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

// Empty when the record's path replays to a state satisfying the goal at
// exactly the recorded cost; otherwise the reason it does not.
template <class D>
    requires StringToAct<D>
std::string replay_problem(const D& domain, const InstanceOf<D>& inst, const SolveRecord& rec) {
    std::vector<ActionOf<D>> acts;
    for (const auto& t : rec.path) {
        auto a = domain.parse_action(t);
        if (!a) return "unknown action '" + t + "'";
        acts.push_back(*a);
    }
    auto end = replay(domain, inst.start, std::span<const ActionOf<D>>(acts));
    if (!end) return "path contains an illegal action";
    if (!domain.is_solved(end->first, inst.goal)) return "path does not reach the goal";
    if (end->second != rec.path_cost) {
        return "path cost " + format_double(end->second) + " differs from recorded " + format_double(rec.path_cost);
    }
    return {};
}

}  // namespace xube::app
