#pragma once

// Mixed-precision vector and SpMV kernels. Every kernel is parameterised by a
// storage type S (what vectors hold) and an accumulation type A (what the
// arithmetic runs in). Values are widened to A on read and rounded back to S
// exactly once, when an output element is written.

#include "tkeig/error.hpp"
#include "tkeig/sparse.hpp"

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace tkeig {

// A length-n vector split into the G row ranges of a PartitionPlan. Segment j
// is owned by worker j; segments are stored back to back so the full vector
// is also available as one span.
template <class S>
class PartitionedVector {
public:
    using value_type = S;

    PartitionedVector() = default;
    explicit PartitionedVector(std::shared_ptr<const PartitionPlan> plan)
        : plan_(std::move(plan)), data_(plan_->num_rows(), S{0})
    {
    }
    PartitionedVector(std::shared_ptr<const PartitionPlan> plan, std::vector<S> data)
        : plan_(std::move(plan)), data_(std::move(data))
    {
        if (data_.size() != plan_->num_rows()) {
            throw ContractViolation("vector length does not match partition plan");
        }
    }

    const PartitionPlan& plan() const noexcept { return *plan_; }
    const std::shared_ptr<const PartitionPlan>& plan_ptr() const noexcept { return plan_; }
    std::size_t size() const noexcept { return data_.size(); }
    std::size_t num_segments() const noexcept { return plan_ ? plan_->num_partitions : 0; }

    std::span<S> segment(std::size_t j) noexcept
    {
        return std::span<S>(data_).subspan(plan_->begin(j), plan_->rows(j));
    }
    std::span<const S> segment(std::size_t j) const noexcept
    {
        return std::span<const S>(data_).subspan(plan_->begin(j), plan_->rows(j));
    }
    std::span<S> data() noexcept { return data_; }
    std::span<const S> data() const noexcept { return data_; }

private:
    std::shared_ptr<const PartitionPlan> plan_;
    std::vector<S> data_;
};

template <class S>
bool same_layout(const PartitionedVector<S>& a, const PartitionedVector<S>& b) noexcept
{
    return a.plan_ptr() == b.plan_ptr() ||
           (a.plan_ptr() && b.plan_ptr() && a.plan().boundaries == b.plan().boundaries);
}

// One full-length copy of a vector per worker. SpMV on worker j reads only
// replica j, so the indirect column accesses never leave the worker.
template <class S>
class ReplicatedVector {
public:
    ReplicatedVector() = default;
    ReplicatedVector(std::size_t replicas, std::size_t length)
        : replicas_(replicas, std::vector<S>(length, S{0}))
    {
    }

    std::size_t num_replicas() const noexcept { return replicas_.size(); }
    std::size_t length() const noexcept { return replicas_.empty() ? 0 : replicas_[0].size(); }
    std::span<S> replica(std::size_t r) noexcept { return replicas_[r]; }
    std::span<const S> replica(std::size_t r) const noexcept { return replicas_[r]; }

private:
    std::vector<std::vector<S>> replicas_;
};

namespace kernels {

// Sequential accumulation in A over one segment.
template <class A, class S>
A dot_segment(std::span<const S> x, std::span<const S> y)
{
    if (x.size() != y.size()) {
        throw ContractViolation("dot: length mismatch");
    }
    A acc{0};
    for (std::size_t k = 0; k < x.size(); ++k) {
        acc += static_cast<A>(x[k]) * static_cast<A>(y[k]);
    }
    return acc;
}

// Fixed-shape pairwise tree over per-segment partials: the split point depends
// only on the number of partials, so the result is reproducible for a plan.
template <class A>
A tree_reduce(std::span<const A> partials)
{
    if (partials.empty()) {
        return A{0};
    }
    if (partials.size() == 1) {
        return partials[0];
    }
    const std::size_t mid = partials.size() / 2;
    return tree_reduce<A>(partials.first(mid)) + tree_reduce<A>(partials.subspan(mid));
}

template <class A, class S>
A dot(const PartitionedVector<S>& x, const PartitionedVector<S>& y)
{
    if (!same_layout(x, y)) {
        throw ContractViolation("dot: vectors use different partition plans");
    }
    std::vector<A> partials(x.num_segments());
    for (std::size_t j = 0; j < partials.size(); ++j) {
        partials[j] = dot_segment<A, S>(x.segment(j), y.segment(j));
    }
    return tree_reduce<A>(partials);
}

template <class A, class S>
A norm2(const PartitionedVector<S>& x)
{
    using std::sqrt;
    return sqrt(dot<A, S>(x, x));
}

// out = v_tmp - a * v_i - b * v_prev, elementwise.
template <class A, class S>
void axpby_combine_segment(std::span<S> out, std::span<const S> v_tmp, std::span<const S> v_i,
                           std::span<const S> v_prev, A a, A b)
{
    if (v_tmp.size() != out.size() || v_i.size() != out.size() || v_prev.size() != out.size()) {
        throw ContractViolation("axpby_combine: length mismatch");
    }
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = static_cast<S>(static_cast<A>(v_tmp[k]) - a * static_cast<A>(v_i[k]) -
                                b * static_cast<A>(v_prev[k]));
    }
}

template <class A, class S>
PartitionedVector<S> axpby_combine(const PartitionedVector<S>& v_tmp, const PartitionedVector<S>& v_i,
                                   const PartitionedVector<S>& v_prev, A a, A b)
{
    if (!same_layout(v_tmp, v_i) || !same_layout(v_tmp, v_prev)) {
        throw ContractViolation("axpby_combine: vectors use different partition plans");
    }
    PartitionedVector<S> out(v_tmp.plan_ptr());
    for (std::size_t j = 0; j < out.num_segments(); ++j) {
        axpby_combine_segment<A, S>(out.segment(j), v_tmp.segment(j), v_i.segment(j),
                                    v_prev.segment(j), a, b);
    }
    return out;
}

// out = in / divisor
template <class A, class S>
void scale_segment(std::span<S> out, std::span<const S> in, A divisor)
{
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = static_cast<S>(static_cast<A>(in[k]) / divisor);
    }
}

// dst = src - o * basis
template <class A, class S>
void subtract_projection_segment(std::span<S> dst, std::span<const S> src, std::span<const S> basis,
                                 A o)
{
    for (std::size_t k = 0; k < dst.size(); ++k) {
        dst[k] = static_cast<S>(static_cast<A>(src[k]) - o * static_cast<A>(basis[k]));
    }
}

// y[r - first_row] = sum_k values[k] * x[cols[k]] for rows [first_row,
// last_row). `offsets` is indexed by global row and addresses `cols`/`values`
// directly. Empty rows produce 0.
template <class A, class S, class V>
void spmv_rows(std::span<const offset_t> offsets, std::span<const index_t> cols,
               std::span<const V> values, std::size_t first_row, std::size_t last_row,
               std::span<const S> x, std::span<S> y)
{
    for (std::size_t r = first_row; r < last_row; ++r) {
        A acc{0};
        const auto hi = offsets[r + 1];
        for (auto k = offsets[r]; k < hi; ++k) {
            acc += static_cast<A>(values[k]) * static_cast<A>(x[cols[k]]);
        }
        y[r - first_row] = static_cast<S>(acc);
    }
}

// SpMV of partition `part` of m against the replica owned by that worker.
template <class A, class S, class V>
void spmv(const CsrView<V>& m, const PartitionPlan& plan, std::size_t part,
          std::span<const S> replica, std::span<S> out_segment)
{
    if (replica.size() != m.num_cols) {
        throw ContractViolation("spmv: replica length differs from matrix columns");
    }
    if (out_segment.size() != plan.rows(part)) {
        throw ContractViolation("spmv: output segment has wrong length");
    }
    spmv_rows<A, S, V>(m.row_offsets, m.col_indices, m.values, plan.begin(part), plan.end(part),
                       replica, out_segment);
}

} // namespace kernels
} // namespace tkeig
