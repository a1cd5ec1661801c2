#pragma once

#include <algorithm>
#include <cstring>
#include <map>
#include <unordered_map>

#include "xube/nn/approximator.hpp"

namespace xube::nn {

// Exact lookup table keyed by the bit pattern of the encoded input. Unknown
// inputs evaluate to zero. A train step moves each touched entry toward the
// mean of its targets by the learning rate, so lr = 1 sets it exactly.
class TabularApprox final : public Approximator {
  public:
    using Table = std::unordered_map<std::string, std::vector<float>>;

    TabularApprox(std::size_t input_dim, std::size_t output_dim, double lr = 1.0)
        : in_(input_dim), out_(output_dim), lr_(lr), table_(std::make_shared<Table>()) {}

    [[nodiscard]] std::string kind() const override { return "table"; }
    [[nodiscard]] std::size_t input_dim() const override { return in_; }
    [[nodiscard]] std::size_t output_dim() const override { return out_; }
    [[nodiscard]] std::size_t size() const { return table_->size(); }
    [[nodiscard]] const Table& table() const { return *table_; }

    [[nodiscard]] Matrix forward(const Matrix& inputs) const override { return lookup(*table_, inputs); }

    double train_step(const Matrix& inputs, std::span<const float> targets, std::span<const int> actions) override {
        check_input(inputs);
        const std::size_t n = inputs.rows;
        const bool full = actions.empty() && out_ > 1;
        if (targets.size() != (full ? n * out_ : n)) throw ConfigError("target count does not match batch size");
        if (!actions.empty() && actions.size() != n) throw ConfigError("action mask length does not match batch size");
        if (n == 0) return 0.0;

        detach();
        // (key, output) -> (sum, count); ordered for a deterministic update order
        std::map<std::pair<std::string, std::size_t>, std::pair<double, std::size_t>> acc;
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::string k = key(inputs.row(i));
            auto it = table_->find(k);
            auto value_at = [&](std::size_t j) { return it == table_->end() ? 0.0 : static_cast<double>(it->second[j]); };
            if (full) {
                for (std::size_t j = 0; j < out_; ++j) {
                    const double err = static_cast<double>(targets[i * out_ + j]) - value_at(j);
                    loss += err * err;
                    auto& slot = acc[{k, j}];
                    slot.first += targets[i * out_ + j];
                    ++slot.second;
                }
            } else {
                const std::size_t j = actions.empty() ? 0 : static_cast<std::size_t>(actions[i]);
                if (j >= out_) throw ConfigError("action index out of range for table output");
                const double err = static_cast<double>(targets[i]) - value_at(j);
                loss += err * err;
                auto& slot = acc[{k, j}];
                slot.first += targets[i];
                ++slot.second;
            }
        }
        for (const auto& [kj, sc] : acc) {
            auto& values = (*table_)[kj.first];
            if (values.empty()) values.assign(out_, 0.0f);
            const double mean = sc.first / static_cast<double>(sc.second);
            const double cur = values[kj.second];
            values[kj.second] = lr_ == 1.0 ? static_cast<float>(mean) : static_cast<float>(cur + lr_ * (mean - cur));
        }
        return loss / static_cast<double>(n);
    }

    [[nodiscard]] std::shared_ptr<const Evaluator> snapshot() const override {
        return std::make_shared<Snapshot>(in_, out_, std::shared_ptr<const Table>(table_));
    }
    [[nodiscard]] std::unique_ptr<Approximator> clone() const override {
        auto copy = std::make_unique<TabularApprox>(in_, out_, lr_);
        copy->table_ = std::make_shared<Table>(*table_);
        return copy;
    }

    void set_learning_rate(double lr) override { lr_ = lr; }
    [[nodiscard]] double learning_rate() const override { return lr_; }

    void set_entry(std::span<const float> input, std::vector<float> values) {
        detach();
        (*table_)[key(input)] = std::move(values);
    }

    [[nodiscard]] nlohmann::json header() const override {
        return {{"kind", "table"}, {"input_dim", in_}, {"output_dim", out_}, {"lr", lr_}, {"entries", table_->size()}};
    }

    // Entries in key order: input floats then output floats.
    void write_payload(std::string& out) const override {
        std::vector<const Table::value_type*> entries;
        entries.reserve(table_->size());
        for (const auto& e : *table_) entries.push_back(&e);
        std::sort(entries.begin(), entries.end(), [](auto* a, auto* b) { return a->first < b->first; });
        for (const auto* e : entries) {
            out.append(e->first);
            out.append(reinterpret_cast<const char*>(e->second.data()), e->second.size() * sizeof(float));
        }
    }

    static std::string key(std::span<const float> row) {
        return std::string(reinterpret_cast<const char*>(row.data()), row.size() * sizeof(float));
    }

  private:
    class Snapshot final : public Evaluator {
      public:
        Snapshot(std::size_t in, std::size_t out, std::shared_ptr<const Table> t) : in_(in), out_(out), table_(std::move(t)) {}
        [[nodiscard]] std::size_t input_dim() const override { return in_; }
        [[nodiscard]] std::size_t output_dim() const override { return out_; }
        [[nodiscard]] Matrix forward(const Matrix& inputs) const override {
            check_input(inputs);
            return lookup_in(*table_, inputs, out_);
        }

      private:
        std::size_t in_;
        std::size_t out_;
        std::shared_ptr<const Table> table_;
    };

    static Matrix lookup_in(const Table& table, const Matrix& inputs, std::size_t out) {
        Matrix result(inputs.rows, out);
        for (std::size_t i = 0; i < inputs.rows; ++i) {
            auto it = table.find(key(inputs.row(i)));
            if (it != table.end()) std::copy(it->second.begin(), it->second.end(), result.row(i).begin());
        }
        return result;
    }

    [[nodiscard]] Matrix lookup(const Table& table, const Matrix& inputs) const {
        check_input(inputs);
        return lookup_in(table, inputs, out_);
    }

    // Copy-on-write so snapshots taken earlier never observe updates.
    void detach() {
        if (table_.use_count() > 1) table_ = std::make_shared<Table>(*table_);
    }

    std::size_t in_;
    std::size_t out_;
    double lr_;
    std::shared_ptr<Table> table_;
};

}  // namespace xube::nn
