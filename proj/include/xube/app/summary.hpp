#pragma once

// train-summary: reads the CSVs a training run wrote and emits a per-k table
// for the latest update check plus plotdata_*.csv series. Values are copied
// as text so the output is byte-stable for fixed input.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "xube/common.hpp"

namespace xube::app {

struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] std::size_t col(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        throw CorruptFileError("CSV has no column '" + name + "'");
    }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    for (;;) {
        const auto comma = line.find(',', pos);
        out.push_back(line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
    return out;
}

inline Csv read_csv(const std::filesystem::path& path, const std::vector<std::string>& required) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path.string());
    Csv csv;
    std::string line;
    if (!std::getline(in, line)) throw CorruptFileError(path.string() + " is empty");
    csv.header = split_csv_line(line);
    for (const auto& r : required) {
        try {
            (void)csv.col(r);
        } catch (const CorruptFileError&) {
            throw CorruptFileError(path.string() + " has no column '" + r + "'");
        }
    }
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto row = split_csv_line(line);
        if (row.size() != csv.header.size()) {
            throw CorruptFileError(path.string() + " line " + std::to_string(lineno) + " has " +
                                   std::to_string(row.size()) + " fields, expected " + std::to_string(csv.header.size()));
        }
        csv.rows.push_back(std::move(row));
    }
    return csv;
}

inline double csv_number(const std::string& s, const std::string& where) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size()) {
        throw CorruptFileError("malformed number '" + s + "' in " + where);
    }
    return v;
}

inline long long csv_int(const std::string& s, const std::string& where) {
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size()) {
        throw CorruptFileError("malformed integer '" + s + "' in " + where);
    }
    return v;
}

inline std::ofstream open_plot(const std::filesystem::path& p) {
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot write " + p.string());
    return os;
}

struct SummaryFiles {
    std::vector<std::filesystem::path> written;
    long long latest_check = 0;
    std::size_t k_rows = 0;
};

// Reads stats.csv and stats_by_k.csv (pred_samples.csv and test.csv when
// present) from `dir`, prints the latest check's per-k table to `table`, and
// writes the plot data into `out_dir`.
inline SummaryFiles train_summary(const std::filesystem::path& dir, const std::filesystem::path& out_dir,
                                  std::ostream& table) {
    static const std::vector<std::string> kMetrics = {"loss",        "target_mean",    "target_min",
                                                      "target_max",  "k_max",          "solve_rate",
                                                      "path_cost_mean", "search_itrs_mean", "insts_generated"};
    static const std::vector<std::string> kByK = {"count", "solve_rate", "path_cost_mean", "search_itrs_mean",
                                                  "target_mean"};
    std::vector<std::string> stats_req{"check"};
    stats_req.insert(stats_req.end(), kMetrics.begin(), kMetrics.end());
    std::vector<std::string> byk_req{"check", "k"};
    byk_req.insert(byk_req.end(), kByK.begin(), kByK.end());

    const auto stats_path = dir / "stats.csv";
    const auto byk_path = dir / "stats_by_k.csv";
    const Csv stats = read_csv(stats_path, stats_req);
    const Csv byk = read_csv(byk_path, byk_req);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);

    SummaryFiles res;
    const std::size_t c_check = stats.col("check");
    for (const auto& row : stats.rows) {
        res.latest_check = std::max(res.latest_check, csv_int(row[c_check], stats_path.string()));
    }

    for (const auto& m : kMetrics) {
        const auto path = out_dir / ("plotdata_" + m + ".csv");
        auto os = open_plot(path);
        os << "check," << m << '\n';
        const std::size_t c = stats.col(m);
        for (const auto& row : stats.rows) {
            (void)csv_number(row[c], stats_path.string());
            os << row[c_check] << ',' << row[c] << '\n';
        }
        res.written.push_back(path);
    }

    // by-k series: one column per distinct k, blank where a check lacks that k
    const std::size_t b_check = byk.col("check");
    const std::size_t b_k = byk.col("k");
    std::map<long long, std::map<long long, const std::vector<std::string>*>> grid;  // check -> k -> row
    std::map<long long, bool> all_ks;
    for (const auto& row : byk.rows) {
        const auto check = csv_int(row[b_check], byk_path.string());
        const auto k = csv_int(row[b_k], byk_path.string());
        grid[check][k] = &row;
        all_ks[k] = true;
    }
    for (const auto& m : kByK) {
        const auto path = out_dir / ("plotdata_by_k_" + m + ".csv");
        auto os = open_plot(path);
        const std::size_t c = byk.col(m);
        os << "check";
        for (const auto& [k, unused] : all_ks) os << ",k" << k;
        os << '\n';
        for (const auto& [check, ks] : grid) {
            os << check;
            for (const auto& [k, unused] : all_ks) {
                os << ',';
                if (auto it = ks.find(k); it != ks.end()) os << (*it->second)[c];
            }
            os << '\n';
        }
        res.written.push_back(path);
    }

    const auto pred_path = dir / "pred_samples.csv";
    if (std::filesystem::exists(pred_path)) {
        const Csv pred = read_csv(pred_path, {"check", "k", "target", "pred"});
        const auto path = out_dir / "plotdata_pred_scatter.csv";
        auto os = open_plot(path);
        os << "k,target,pred\n";
        const std::size_t pc = pred.col("check"), pk = pred.col("k"), pt = pred.col("target"), pp = pred.col("pred");
        for (const auto& row : pred.rows) {
            if (csv_int(row[pc], pred_path.string()) != res.latest_check) continue;
            os << row[pk] << ',' << row[pt] << ',' << row[pp] << '\n';
        }
        res.written.push_back(path);
    }

    const auto test_path = dir / "test.csv";
    if (std::filesystem::exists(test_path)) {
        const Csv test = read_csv(test_path, {"check", "solve_rate", "path_cost_mean"});
        for (const std::string m : {"solve_rate", "path_cost_mean"}) {
            const auto path = out_dir / ("plotdata_test_" + m + ".csv");
            auto os = open_plot(path);
            os << "check," << m << '\n';
            for (const auto& row : test.rows) os << row[test.col("check")] << ',' << row[test.col(m)] << '\n';
            res.written.push_back(path);
        }
    }

    char buf[160];
    std::snprintf(buf, sizeof buf, "%6s %8s %11s %15s %17s %12s\n", "k", "count", "solve_rate", "path_cost_mean",
                  "search_itrs_mean", "target_mean");
    table << "update check " << res.latest_check << '\n' << buf;
    if (auto it = grid.find(res.latest_check); it != grid.end()) {
        for (const auto& [k, row] : it->second) {
            auto num = [&](const std::string& m) { return csv_number((*row)[byk.col(m)], byk_path.string()); };
            std::snprintf(buf, sizeof buf, "%6lld %8lld %11.3f %15.3f %17.3f %12.3f\n", k,
                          csv_int((*row)[byk.col("count")], byk_path.string()), num("solve_rate"),
                          num("path_cost_mean"), num("search_itrs_mean"), num("target_mean"));
            table << buf;
            ++res.k_rows;
        }
    }
    return res;
}

}  // namespace xube::app
