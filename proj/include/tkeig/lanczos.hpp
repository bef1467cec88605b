#pragma once

// Partitioned Lanczos tridiagonalisation with G workers.
//
// Vector roles per iteration i (1-based in comments, 0-based in code):
//   v_cur  = v_i, the current Lanczos vector (also replicated for the SpMV)
//   v_prev = v_{i-1}
//   v_t    = SpMV output M v_i ("v_tmp")
//   v_n    = next unnormalised vector ("v_nxt"), whose norm is beta_{i+1}
//
// Only three places need a scalar from every worker: beta (norm of v_n),
// alpha (v_i . v_t) and, with reorthogonalisation, one projection
// coefficient per basis vector. Those are the reduction barriers recorded in
// the ledger. Everything else is segment-local.

#include "tkeig/error.hpp"
#include "tkeig/kernels.hpp"
#include "tkeig/operator.hpp"
#include "tkeig/precision.hpp"
#include "tkeig/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <span>
#include <vector>

namespace tkeig {

struct TridiagonalMatrix {
    std::vector<double> alpha; // diagonal, length k'
    std::vector<double> beta;  // off-diagonal, length k' - 1

    std::size_t order() const noexcept { return alpha.size(); }
};

template <class S>
struct KrylovBasis {
    std::vector<PartitionedVector<S>> vectors;

    std::size_t size() const noexcept { return vectors.size(); }
};

struct TransferRecord {
    std::size_t round = 0;
    std::size_t source_partition = 0;
    std::size_t destination_replica = 0;
    std::uint64_t bytes = 0;
};

struct IterationRecord {
    std::vector<TransferRecord> transfers;
    std::size_t reduction_barriers = 0;
    std::size_t replication_syncs = 0;

    std::uint64_t bytes() const noexcept;
};

struct TransferLedger {
    std::size_t workers = 0;
    std::vector<IterationRecord> iterations;

    std::uint64_t total_bytes() const noexcept;
    std::size_t total_reduction_barriers() const noexcept;
    // True if iteration `it` copied every (partition, replica) pair exactly once.
    bool covers_all_pairs_once(std::size_t it) const;
};

enum class ReorthScheme {
    // Projection buffers alternate between v_t and v_n by parity of j; one
    // reduction barrier per basis vector.
    Alternating,
    // All coefficients computed from the same vector, then subtracted
    // together; one reduction barrier per sweep.
    Classical,
};

struct LanczosConfig {
    std::size_t k = 8;          // eigencomponents wanted
    std::size_t iterations = 0; // Krylov dimension; 0 selects default_iterations()
    bool reorthogonalize = true;
    ReorthScheme reorth_scheme = ReorthScheme::Alternating;
    std::uint64_t seed = 0;
    std::vector<double> start;           // explicit v_1 (normalised here); empty = seeded
    std::optional<double> breakdown_tol; // relative; default depends on storage
    PrecisionConfig precision = PrecisionConfig::fdf();
    std::size_t workers = 1;
    ExecutionMode execution = ExecutionMode::Threaded;
};

// min(n, max(10 k, 64)): enough Krylov directions for the k largest-modulus
// Ritz values of typical sparse inputs to converge without restarting.
std::size_t default_iterations(std::size_t k, std::size_t n) noexcept;
std::size_t resolve_iterations(const LanczosConfig& cfg, std::size_t n) noexcept;
double resolve_breakdown_tol(const LanczosConfig& cfg) noexcept;
// Throws InvalidConfigError.
void validate(const LanczosConfig& cfg, std::size_t n);

enum class LanczosStatus { Completed, Breakdown };

// Per-partition kernel launches.
struct KernelCounters {
    std::size_t spmv = 0;
    std::size_t dot = 0;
    std::size_t combine = 0;
    std::size_t scale = 0;
    std::size_t projection = 0;
    std::size_t replica_copy = 0;
};

template <class S>
struct LanczosResult {
    TridiagonalMatrix tridiagonal;
    KrylovBasis<S> basis;
    TransferLedger ledger;
    LanczosStatus status = LanczosStatus::Completed;
    KernelCounters kernels;
    std::shared_ptr<const PartitionPlan> plan;
    // ||v_nxt|| after the last completed step (beta_{k'+1}); 0 on breakdown.
    double residual_norm = 0.0;
};

// Seeded uniform [-1, 1] entries, not yet normalised. Independent of the plan.
template <class S>
PartitionedVector<S> start_vector(std::shared_ptr<const PartitionPlan> plan, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<S> data(plan->num_rows());
    for (auto& x : data) {
        x = static_cast<S>(dist(rng));
    }
    return PartitionedVector<S>(std::move(plan), std::move(data));
}

// Round-robin replication: in round r worker j writes its segment of src into
// replica (j + r) mod G. Each worker performs its G copies back to back; the
// end of the phase is the only synchronisation. Appends one record per copy.
template <class S>
void replicate_round_robin(WorkerPool& pool, const PartitionedVector<S>& src,
                           ReplicatedVector<S>& dst, IterationRecord& record,
                           KernelCounters* counters = nullptr)
{
    const auto& plan = src.plan();
    const std::size_t g = plan.num_partitions;
    if (dst.num_replicas() != g || dst.length() != src.size() || pool.size() != g) {
        throw ContractViolation("replicate_round_robin: replica layout does not match plan");
    }
    pool.run([&](std::size_t j) {
        const auto seg = src.segment(j);
        for (std::size_t r = 0; r < g; ++r) {
            auto replica = dst.replica((j + r) % g);
            std::copy(seg.begin(), seg.end(), replica.begin() + static_cast<std::ptrdiff_t>(plan.begin(j)));
        }
    });
    for (std::size_t r = 0; r < g; ++r) {
        for (std::size_t j = 0; j < g; ++j) {
            record.transfers.push_back(
                {r, j, (j + r) % g, static_cast<std::uint64_t>(plan.rows(j) * sizeof(S))});
        }
    }
    ++record.replication_syncs;
    if (counters) {
        counters->replica_copy += g * g;
    }
}

struct SweepStats {
    std::size_t reduction_barriers = 0;
    std::size_t dot_kernels = 0;
    std::size_t projection_kernels = 0;
};

// Reorthogonalises against basis vectors v_1..v_i (i = basis.size()).
//
// Alternating scheme: on entry v_t holds the vector. For odd j the
// coefficient is taken from v_t and the projected result written to v_n; for
// even j the roles swap. Writing out of place keeps every step free of
// read/write overlap on a buffer. At j == i the buffers are synchronised
// (v_t <- v_n for odd i, v_n <- v_t for even i), so on exit both hold the
// orthogonalised vector.
//
// Classical scheme: all coefficients from v_t, v_n <- v_t - sum o_j v_j,
// then v_t <- v_n.
template <class A, class S>
SweepStats orthogonalize_sweep(WorkerPool& pool, std::span<const PartitionedVector<S>> basis,
                               PartitionedVector<S>& v_t, PartitionedVector<S>& v_n,
                               ReorthScheme scheme = ReorthScheme::Alternating)
{
    SweepStats stats;
    const std::size_t g = pool.size();
    const std::size_t i = basis.size();
    if (i == 0) {
        return stats;
    }
    if (v_t.num_segments() != g || !same_layout(v_t, v_n)) {
        throw ContractViolation("orthogonalize_sweep: buffer layout does not match pool");
    }
    std::vector<A> partials(g);

    if (scheme == ReorthScheme::Classical) {
        std::vector<std::vector<A>> per_worker(g, std::vector<A>(i));
        pool.run([&](std::size_t w) {
            for (std::size_t j = 0; j < i; ++j) {
                per_worker[w][j] = kernels::dot_segment<A, S>(basis[j].segment(w), v_t.segment(w));
            }
        });
        ++stats.reduction_barriers;
        stats.dot_kernels += g * i;
        std::vector<A> coeff(i);
        for (std::size_t j = 0; j < i; ++j) {
            for (std::size_t w = 0; w < g; ++w) {
                partials[w] = per_worker[w][j];
            }
            coeff[j] = kernels::tree_reduce<A>(partials);
        }
        pool.run([&](std::size_t w) {
            auto out = v_n.segment(w);
            const auto in = v_t.segment(w);
            for (std::size_t k = 0; k < out.size(); ++k) {
                A acc = static_cast<A>(in[k]);
                for (std::size_t j = 0; j < i; ++j) {
                    acc -= coeff[j] * static_cast<A>(basis[j].segment(w)[k]);
                }
                out[k] = static_cast<S>(acc);
            }
            std::copy(out.begin(), out.end(), v_t.segment(w).begin());
        });
        stats.projection_kernels += g * i;
        return stats;
    }

    // Alternating. 0-based j here: even index == odd 1-based j.
    auto source = [&](std::size_t j) -> PartitionedVector<S>& { return j % 2 == 0 ? v_t : v_n; };
    auto target = [&](std::size_t j) -> PartitionedVector<S>& { return j % 2 == 0 ? v_n : v_t; };
    A coeff{0};
    for (std::size_t j = 0; j < i; ++j) {
        // Fused: finish step j-1's projection, then the partial dot for step j.
        pool.run([&](std::size_t w) {
            if (j > 0) {
                kernels::subtract_projection_segment<A, S>(target(j - 1).segment(w),
                                                           std::as_const(source(j - 1)).segment(w),
                                                           basis[j - 1].segment(w), coeff);
            }
            partials[w] = kernels::dot_segment<A, S>(basis[j].segment(w),
                                                     std::as_const(source(j)).segment(w));
        });
        ++stats.reduction_barriers;
        stats.dot_kernels += g;
        stats.projection_kernels += j > 0 ? g : 0;
        coeff = kernels::tree_reduce<A>(partials);
    }
    pool.run([&](std::size_t w) {
        auto& out = target(i - 1);
        kernels::subtract_projection_segment<A, S>(out.segment(w), std::as_const(source(i - 1)).segment(w),
                                                   basis[i - 1].segment(w), coeff);
        auto& other = source(i - 1);
        const auto res = std::as_const(out).segment(w);
        std::copy(res.begin(), res.end(), other.segment(w).begin());
    });
    stats.projection_kernels += g;
    return stats;
}

// Runs up to resolve_iterations() Lanczos steps on a partitioned operator.
// Stops early (status Breakdown) when beta falls to breakdown_tol times the
// running scale max_j(|alpha_j| + beta_j); the basis then holds the
// invariant subspace found so far. Symmetry of the operator is the caller's
// responsibility.
template <class A, class S, PartitionedOperator Op>
LanczosResult<S> lanczos(const Op& op, const LanczosConfig& cfg)
{
    const auto plan = op.plan_ptr();
    const std::size_t n = op.num_rows();
    const std::size_t g = plan->num_partitions;
    validate(cfg, n);
    if (op.num_cols() != n) {
        throw ContractViolation("lanczos requires a square matrix");
    }
    if (cfg.workers != g) {
        throw InvalidConfigError("worker count differs from the number of partitions");
    }
    const std::size_t m = resolve_iterations(cfg, n);
    const A tol = static_cast<A>(resolve_breakdown_tol(cfg));

    WorkerPool pool(g, cfg.execution);
    LanczosResult<S> result;
    result.plan = plan;
    result.ledger.workers = g;
    auto& counters = result.kernels;
    auto& basis = result.basis.vectors;
    basis.reserve(m);

    PartitionedVector<S> v_prev(plan);
    PartitionedVector<S> v_cur(plan);
    PartitionedVector<S> v_t(plan);
    PartitionedVector<S> v_n = cfg.start.empty()
                                   ? start_vector<S>(plan, cfg.seed)
                                   : PartitionedVector<S>(plan, std::vector<S>(cfg.start.begin(), cfg.start.end()));
    ReplicatedVector<S> replica(g, n);
    std::vector<A> partials(g);

    auto reduce_norm = [&](IterationRecord& rec) {
        pool.run([&](std::size_t j) {
            partials[j] = kernels::dot_segment<A, S>(v_n.segment(j), v_n.segment(j));
        });
        counters.dot += g;
        ++rec.reduction_barriers;
        using std::sqrt;
        return sqrt(kernels::tree_reduce<A>(partials));
    };

    A beta{0};
    A scale{0};
    for (std::size_t i = 0; i < m; ++i) {
        IterationRecord rec;

        // beta_i = ||v_nxt||; for the first iteration this normalises v_1.
        const A norm = reduce_norm(rec);
        if (i == 0 && !(norm > A{0})) {
            throw InvalidConfigError("start vector has zero norm");
        }
        if (i > 0) {
            beta = norm;
            if (!(beta > tol * scale)) {
                result.status = LanczosStatus::Breakdown;
                break;
            }
        }
        std::swap(v_prev, v_cur);
        PartitionedVector<S> next_basis(plan);
        pool.run([&](std::size_t j) {
            kernels::scale_segment<A, S>(v_cur.segment(j), std::as_const(v_n).segment(j), norm);
            const auto seg = std::as_const(v_cur).segment(j);
            std::copy(seg.begin(), seg.end(), next_basis.segment(j).begin());
        });
        counters.scale += g;
        replicate_round_robin(pool, v_cur, replica, rec, &counters);

        // alpha_i = v_i . (M v_i)
        pool.run([&](std::size_t j) {
            op.template apply<A, S>(j, std::as_const(replica).replica(j), v_t.segment(j));
            partials[j] = kernels::dot_segment<A, S>(v_cur.segment(j), std::as_const(v_t).segment(j));
        });
        counters.spmv += g;
        counters.dot += g;
        ++rec.reduction_barriers;
        const A alpha = kernels::tree_reduce<A>(partials);

        basis.push_back(std::move(next_basis));
        result.tridiagonal.alpha.push_back(static_cast<double>(alpha));
        if (i > 0) {
            result.tridiagonal.beta.push_back(static_cast<double>(beta));
        }
        using std::abs;
        scale = std::max(scale, abs(alpha) + beta);

        // v_nxt = v_tmp - alpha v_i - beta v_{i-1}. With reorthogonalisation
        // the recurrence is written over v_t, which the sweep consumes.
        auto& recurrence_out = cfg.reorthogonalize ? v_t : v_n;
        pool.run([&](std::size_t j) {
            kernels::axpby_combine_segment<A, S>(recurrence_out.segment(j), std::as_const(v_t).segment(j),
                                                 std::as_const(v_cur).segment(j),
                                                 std::as_const(v_prev).segment(j), alpha, beta);
        });
        counters.combine += g;

        if (cfg.reorthogonalize) {
            const auto sweep = orthogonalize_sweep<A, S>(
                pool, std::span<const PartitionedVector<S>>(basis), v_t, v_n, cfg.reorth_scheme);
            rec.reduction_barriers += sweep.reduction_barriers;
            counters.dot += sweep.dot_kernels;
            counters.projection += sweep.projection_kernels;
        }
        result.ledger.iterations.push_back(std::move(rec));
    }
    if (result.status == LanczosStatus::Completed) {
        IterationRecord tail;
        result.residual_norm = static_cast<double>(reduce_norm(tail));
    }
    return result;
}

} // namespace tkeig
