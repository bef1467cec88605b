#pragma once

#include "tkeig/kernels.hpp"
#include "tkeig/sparse.hpp"

#include <concepts>
#include <memory>
#include <span>
#include <vector>

namespace tkeig {

// What the Lanczos driver needs from a matrix: its shape, the partition plan
// and a per-partition SpMV. Implementations must make apply() safe to call
// concurrently for distinct partitions.
template <class Op>
concept PartitionedOperator = requires(const Op& op) {
    { op.num_rows() } -> std::convertible_to<std::size_t>;
    { op.num_cols() } -> std::convertible_to<std::size_t>;
    { op.plan_ptr() } -> std::convertible_to<std::shared_ptr<const PartitionPlan>>;
};

// In-memory partitions M_1..M_G, one shard per worker, values converted to V
// (the storage precision) when the shards are built.
template <class V>
class ShardedCsr {
public:
    ShardedCsr(const CsrView<double>& m, std::shared_ptr<const PartitionPlan> plan)
        : num_rows_(m.num_rows), num_cols_(m.num_cols), plan_(std::move(plan))
    {
        if (plan_->num_rows() != m.num_rows) {
            throw ContractViolation("partition plan does not cover the matrix rows");
        }
        shards_.resize(plan_->num_partitions);
        for (std::size_t j = 0; j < shards_.size(); ++j) {
            auto& s = shards_[j];
            const auto base = m.row_offsets[plan_->begin(j)];
            const auto last = m.row_offsets[plan_->end(j)];
            s.offsets.reserve(plan_->rows(j) + 1);
            for (std::size_t r = plan_->begin(j); r <= plan_->end(j); ++r) {
                s.offsets.push_back(m.row_offsets[r] - base);
            }
            s.cols.assign(m.col_indices.begin() + static_cast<std::ptrdiff_t>(base),
                          m.col_indices.begin() + static_cast<std::ptrdiff_t>(last));
            s.values.reserve(last - base);
            for (auto k = base; k < last; ++k) {
                s.values.push_back(static_cast<V>(m.values[k]));
            }
        }
    }

    std::size_t num_rows() const noexcept { return num_rows_; }
    std::size_t num_cols() const noexcept { return num_cols_; }
    const PartitionPlan& plan() const noexcept { return *plan_; }
    const std::shared_ptr<const PartitionPlan>& plan_ptr() const noexcept { return plan_; }

    template <class A, class S>
    void apply(std::size_t part, std::span<const S> x, std::span<S> y) const
    {
        const auto& s = shards_[part];
        kernels::spmv_rows<A, S, V>(s.offsets, s.cols, s.values, 0, s.offsets.size() - 1, x, y);
    }

private:
    struct Shard {
        std::vector<offset_t> offsets;
        std::vector<index_t> cols;
        std::vector<V> values;
    };

    std::size_t num_rows_;
    std::size_t num_cols_;
    std::shared_ptr<const PartitionPlan> plan_;
    std::vector<Shard> shards_;
};

} // namespace tkeig
