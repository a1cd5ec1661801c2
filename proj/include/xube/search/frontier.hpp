#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "xube/common.hpp"

namespace xube {

// Binary min-heap on (f, insertion order). Supports removal of a uniformly
// random entry, which std::priority_queue cannot do.
template <class Payload>
class Frontier {
  public:
    struct Entry {
        double f;
        std::uint64_t seq;
        Payload payload;
    };

    void push(double f, Payload p) {
        heap_.push_back({f, next_seq_++, std::move(p)});
        sift_up(heap_.size() - 1);
    }

    Entry pop_min() { return remove_at(0); }
    Entry pop_random(Rng& rng) { return remove_at(uniform_index(rng, heap_.size())); }

    [[nodiscard]] bool empty() const { return heap_.empty(); }
    [[nodiscard]] std::size_t size() const { return heap_.size(); }
    [[nodiscard]] const Entry& top() const { return heap_.front(); }
    [[nodiscard]] const std::vector<Entry>& entries() const { return heap_; }

  private:
    static bool less(const Entry& a, const Entry& b) { return a.f < b.f || (a.f == b.f && a.seq < b.seq); }

    Entry remove_at(std::size_t i) {
        Entry out = std::move(heap_[i]);
        if (i + 1 != heap_.size()) {
            heap_[i] = std::move(heap_.back());
            heap_.pop_back();
            if (i > 0 && less(heap_[i], heap_[(i - 1) / 2])) {
                sift_up(i);
            } else {
                sift_down(i);
            }
        } else {
            heap_.pop_back();
        }
        return out;
    }

    void sift_up(std::size_t i) {
        while (i > 0) {
            const std::size_t p = (i - 1) / 2;
            if (!less(heap_[i], heap_[p])) break;
            std::swap(heap_[i], heap_[p]);
            i = p;
        }
    }

    void sift_down(std::size_t i) {
        const std::size_t n = heap_.size();
        for (;;) {
            std::size_t m = i;
            const std::size_t l = 2 * i + 1;
            const std::size_t r = l + 1;
            if (l < n && less(heap_[l], heap_[m])) m = l;
            if (r < n && less(heap_[r], heap_[m])) m = r;
            if (m == i) return;
            std::swap(heap_[i], heap_[m]);
            i = m;
        }
    }

    std::vector<Entry> heap_;
    std::uint64_t next_seq_ = 0;
};

}  // namespace xube
