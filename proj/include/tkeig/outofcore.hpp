#pragma once

// Out-of-core SpMV over a mapped TKEV file. Each worker walks its row range
// in windows of at most budget / G bytes of mapped data; after a window is
// consumed its pages are dropped from the resident set, so the matrix never
// occupies more than the budget at once.

#include "tkeig/error.hpp"
#include "tkeig/io.hpp"
#include "tkeig/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>

namespace tkeig {

class MappedOperator {
public:
    MappedOperator(const MappedCsr& m, std::shared_ptr<const PartitionPlan> plan, std::size_t budget_bytes,
                   bool sample_rss = false);

    std::size_t num_rows() const noexcept { return m_->num_rows(); }
    std::size_t num_cols() const noexcept { return m_->num_cols(); }
    const std::shared_ptr<const PartitionPlan>& plan_ptr() const noexcept { return plan_; }
    std::size_t window_bytes() const noexcept { return window_bytes_; }

    // Largest sum of concurrently open windows, in page-rounded bytes.
    std::size_t peak_resident_bytes() const noexcept { return peak_.load(); }
    // Largest Rss of the mapping observed at window ends (sample_rss only).
    std::size_t peak_sampled_rss() const noexcept { return peak_rss_.load(); }

    // Partition product with values rounded to S, as an in-memory shard
    // would hold them.
    template <class A, class S>
    void apply(std::size_t part, std::span<const S> x, std::span<S> y) const
    {
        with_values([&](auto values) {
            stream<A>(plan_->begin(part), plan_->end(part), values, x, y,
                      [](auto v) { return static_cast<A>(static_cast<S>(v)); });
        });
    }

    // Full product with the stored values, no rounding to storage.
    template <class A>
    void apply_all(std::span<const A> x, std::span<A> y) const
    {
        with_values([&](auto values) {
            stream<A>(0, num_rows(), values, x, y, [](auto v) { return static_cast<A>(v); });
        });
    }

private:
    template <class Fn>
    void with_values(Fn&& fn) const
    {
        if (m_->header().value_type == ValueType::F64) {
            fn(m_->values_f64());
        } else {
            fn(m_->values_f32());
        }
    }

    std::size_t open_window(std::size_t bytes) const;
    void close_window(std::size_t bytes) const;

    // y[r - first] = sum over row r, for rows [first, last). A window ends
    // when either its entry or its row-offset share of the budget is used;
    // a row longer than a window is split and its sum carried over.
    template <class A, class V, class X, class Y, class Cast>
    void stream(std::size_t first, std::size_t last, std::span<const V> values, std::span<const X> x,
                std::span<Y> y, Cast&& cast) const
    {
        const auto offsets = m_->row_offsets();
        const auto cols = m_->col_indices();
        const std::size_t entry_cap =
            std::max<std::size_t>(1, window_bytes_ * 3 / 4 / (sizeof(index_t) + sizeof(V)));
        const std::size_t row_cap = std::max<std::size_t>(1, window_bytes_ / 4 / sizeof(offset_t) - 1);

        std::size_t r = first;
        offset_t k = offsets[first];
        const offset_t end_k = offsets[last];
        A acc{0};
        while (r < last) {
            const std::size_t row0 = r;
            const offset_t k0 = k;
            const offset_t wend = std::min<offset_t>(k + entry_cap, end_k);
            const std::size_t bytes = open_window((wend - k0) * (sizeof(index_t) + sizeof(V)) +
                                                  (std::min(row_cap, last - row0) + 1) * sizeof(offset_t));
            while (r < last && r - row0 < row_cap) {
                const offset_t hi = offsets[r + 1];
                const offset_t stop = std::min(hi, wend);
                for (; k < stop; ++k) {
                    acc += cast(values[k]) * static_cast<A>(x[cols[k]]);
                }
                if (k != hi) {
                    break;
                }
                y[r - first] = static_cast<Y>(acc);
                acc = A{0};
                ++r;
            }
            if (sample_rss_) {
                const auto rss = m_->resident_bytes();
                std::size_t seen = peak_rss_.load();
                while (rss > seen && !peak_rss_.compare_exchange_weak(seen, rss)) {
                }
            }
            m_->release(cols.data() + k0, (k - k0) * sizeof(index_t));
            m_->release(values.data() + k0, (k - k0) * sizeof(V));
            m_->release(offsets.data() + row0, (r - row0 + 1) * sizeof(offset_t));
            close_window(bytes);
        }
    }

    const MappedCsr* m_;
    std::shared_ptr<const PartitionPlan> plan_;
    std::size_t window_bytes_;
    bool sample_rss_;
    mutable std::atomic<std::size_t> open_{0};
    mutable std::atomic<std::size_t> peak_{0};
    mutable std::atomic<std::size_t> peak_rss_{0};
};

// solve_topk on a mapped file with at most budget_bytes of the matrix
// resident. The file must carry the symmetric flag. Pass sample_rss to
// record the mapping's measured resident set.
EigenResult solve_topk_mapped(const MappedCsr& m, const SolverConfig& cfg, std::size_t budget_bytes,
                              bool sample_rss = false);

} // namespace tkeig
