#pragma once

// "name" or "name:key=value,key=value" as used by --domain and --arch.

#include <charconv>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>

#include "xube/common.hpp"

namespace xube::app {

class NamedArgs {
  public:
    static NamedArgs parse(std::string_view text) {
        NamedArgs out;
        out.text_ = std::string(text);
        const auto colon = text.find(':');
        out.name_ = std::string(text.substr(0, colon));
        if (out.name_.empty()) throw ParseError("missing name in '" + std::string(text) + "'");
        if (colon == std::string_view::npos) return out;
        std::string_view rest = text.substr(colon + 1);
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            const std::string_view item = rest.substr(0, comma);
            const auto eq = item.find('=');
            if (eq == std::string_view::npos || eq == 0) {
                throw ParseError("expected key=value, got '" + std::string(item) + "' in '" + std::string(text) + "'");
            }
            std::string key(item.substr(0, eq));
            if (out.kv_.count(key)) throw ParseError("duplicate key '" + key + "' in '" + std::string(text) + "'");
            out.kv_[key] = std::string(item.substr(eq + 1));
            if (comma == std::string_view::npos) break;
            rest = rest.substr(comma + 1);
        }
        return out;
    }

    [[nodiscard]] const std::string& name() const { return name_; }
    [[nodiscard]] const std::string& text() const { return text_; }
    [[nodiscard]] bool has(const std::string& key) const { return kv_.count(key) > 0; }

    std::string get(const std::string& key, const std::string& def) {
        used_.insert(key);
        auto it = kv_.find(key);
        return it == kv_.end() ? def : it->second;
    }

    std::int64_t get_int(const std::string& key, std::int64_t def) {
        used_.insert(key);
        auto it = kv_.find(key);
        if (it == kv_.end()) return def;
        std::int64_t v = 0;
        const auto& s = it->second;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) bad(key);
        return v;
    }

    double get_double(const std::string& key, double def) {
        used_.insert(key);
        auto it = kv_.find(key);
        if (it == kv_.end()) return def;
        double v = 0;
        const auto& s = it->second;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) bad(key);
        return v;
    }

    // Call after reading every key; leftovers are typos.
    void finish() const {
        for (const auto& [k, v] : kv_) {
            if (!used_.count(k)) throw ConfigError("unknown argument '" + k + "' for '" + name_ + "'");
        }
    }

  private:
    [[noreturn]] void bad(const std::string& key) const {
        throw ParseError("malformed value '" + kv_.at(key) + "' for '" + key + "' in '" + text_ + "'");
    }

    std::string text_;
    std::string name_;
    std::map<std::string, std::string> kv_;
    std::set<std::string> used_;
};

}  // namespace xube::app
