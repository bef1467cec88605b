#pragma once

// Top-K pipeline: Lanczos on the sparse matrix, Jacobi on the tridiagonal
// matrix, then eigenvectors of M rebuilt from the Krylov basis.

#include "tkeig/jacobi.hpp"
#include "tkeig/kernels.hpp"
#include "tkeig/lanczos.hpp"
#include "tkeig/runtime.hpp"
#include "tkeig/sparse.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tkeig {

struct SolverConfig {
    LanczosConfig lanczos;
    std::optional<double> jacobi_tol; // default follows the Jacobi precision
    std::size_t jacobi_max_sweeps = 30;
    bool check_symmetry = true;
    // With the default Krylov dimension and reorthogonalisation, Lanczos is
    // rerun with twice the dimension (up to min(n, max_krylov_dimension))
    // until every wanted Ritz pair has residual bound
    // beta_{k'+1} |s_{k',c}| <= ritz_tol * |theta_1|. Without
    // reorthogonalisation the bound is not trustworthy and the dimension
    // stays fixed.
    bool adaptive = true;
    std::optional<double> ritz_tol; // default follows the storage precision
    std::size_t max_krylov_dimension = 640;
};

double default_ritz_tol(const PrecisionConfig& p) noexcept;

struct QualityMetrics {
    double mean_pairwise_angle_degrees = 90.0; // 90 when fewer than two vectors
    double l2_reconstruction_error = 0.0;      // mean of residuals
    std::vector<double> residuals;             // ||M v_i - lambda_i v_i||_2 per vector
};

struct LedgerSummary {
    std::size_t workers = 0;
    std::size_t iterations = 0;
    std::uint64_t bytes_per_iteration = 0; // of the first iteration
    std::uint64_t total_bytes = 0;
    std::size_t reduction_barriers = 0;
    std::size_t replication_syncs = 0;
};

LedgerSummary summarize(const TransferLedger& ledger);

struct Timings {
    double lanczos_ms = 0.0;
    double jacobi_ms = 0.0;
    double reconstruct_ms = 0.0;
    double metrics_ms = 0.0;
    double total_ms = 0.0;
};

struct EigenResult {
    std::vector<double> eigenvalues;               // |lambda| descending
    std::vector<std::vector<double>> eigenvectors; // entries are storage-precision values
    bool truncated = false;                        // Lanczos broke down
    LanczosStatus lanczos_status = LanczosStatus::Completed;
    bool jacobi_converged = true;
    std::size_t jacobi_sweeps = 0;
    std::size_t krylov_dimension = 0;
    std::size_t lanczos_restarts = 0;
    QualityMetrics metrics;
    TransferLedger ledger;
    KernelCounters kernels;
    PrecisionConfig precision;
    Timings timings;
    // Out-of-core runs only: accounted peak of open windows, and the
    // largest measured Rss of the mapping when sampling was requested.
    std::size_t peak_resident_bytes = 0;
    std::size_t sampled_resident_bytes = 0;
};

// Throws InvalidConfigError, ContractViolation (non-symmetric input when
// check_symmetry is set).
EigenResult solve_topk(const CsrMatrix& m, const SolverConfig& cfg);

// Metrics for arbitrary eigenpairs. Vectors are rounded to the storage type
// of `precision`; products and dots run in its accumulation type against the
// double-precision matrix.
QualityMetrics quality_metrics(const CsrMatrix& m, const std::vector<double>& eigenvalues,
                               const std::vector<std::vector<double>>& eigenvectors,
                               const PrecisionConfig& precision = PrecisionConfig::ddd());

struct OracleResult {
    std::vector<double> eigenvalues;
    std::vector<std::vector<double>> eigenvectors;
};

inline constexpr std::size_t kOracleMaxOrder = 2048;

// Dense Jacobi in double on the densified matrix, top-k by modulus. Refuses
// (InvalidConfigError) matrices larger than kOracleMaxOrder.
OracleResult dense_oracle(const CsrMatrix& m, std::size_t k);

// Maximum relative deviation of computed eigenvalues from the oracle's.
// Values closer than cluster_tol (relative) count as one eigenvalue, so a
// multiple eigenvalue found once by Lanczos is matched once. Returns +inf
// if the computed set misses an oracle eigenvalue it should contain.
double eigenvalue_deviation(const std::vector<double>& computed, const std::vector<double>& oracle,
                            double cluster_tol = 1e-6);

// Column c of the result = sum_j V(j, c) * basis_j for the first `count`
// columns of V, accumulated in A per partition and normalised, with the
// largest-magnitude entry made positive.
template <class A, class S, class J>
std::vector<PartitionedVector<S>> reconstruct_eigenvectors(WorkerPool& pool,
                                                           std::span<const PartitionedVector<S>> basis,
                                                           const DenseMatrix<J>& v, std::size_t count)
{
    const std::size_t kp = basis.size();
    if (v.order() != kp || count > kp) {
        throw ContractViolation("reconstruct_eigenvectors: basis has " + std::to_string(kp) +
                                " vectors but V has order " + std::to_string(v.order()));
    }
    std::vector<PartitionedVector<S>> out;
    if (kp == 0) {
        return out;
    }
    const auto plan = basis[0].plan_ptr();
    const std::size_t g = plan->num_partitions;
    if (pool.size() != g) {
        throw ContractViolation("reconstruct_eigenvectors: pool size differs from partitions");
    }
    std::vector<A> acc(plan->num_rows());
    std::vector<A> partial_norm(g);
    std::vector<std::pair<A, std::size_t>> partial_max(g);
    out.reserve(count);
    for (std::size_t c = 0; c < count; ++c) {
        pool.run([&](std::size_t w) {
            const std::size_t first = plan->begin(w);
            const std::size_t len = plan->rows(w);
            A* a = acc.data() + first;
            std::fill(a, a + len, A{0});
            for (std::size_t j = 0; j < kp; ++j) {
                const A coeff = static_cast<A>(v(j, c));
                const auto seg = basis[j].segment(w);
                for (std::size_t k = 0; k < len; ++k) {
                    a[k] += coeff * static_cast<A>(seg[k]);
                }
            }
            A sq{0};
            std::pair<A, std::size_t> best{A{-1}, first};
            for (std::size_t k = 0; k < len; ++k) {
                sq += a[k] * a[k];
                using std::abs;
                if (abs(a[k]) > best.first) {
                    best = {abs(a[k]), first + k};
                }
            }
            partial_norm[w] = sq;
            partial_max[w] = best;
        });
        using std::sqrt;
        A norm = sqrt(kernels::tree_reduce<A>(partial_norm));
        if (!(norm > A{0})) {
            norm = A{1};
        }
        std::size_t lead = partial_max[0].second;
        A lead_abs = partial_max[0].first;
        for (std::size_t w = 1; w < g; ++w) {
            if (partial_max[w].first > lead_abs) {
                lead_abs = partial_max[w].first;
                lead = partial_max[w].second;
            }
        }
        const A divisor = acc[lead] < A{0} ? -norm : norm;
        PartitionedVector<S> vec(plan);
        pool.run([&](std::size_t w) {
            auto seg = vec.segment(w);
            const A* a = acc.data() + plan->begin(w);
            for (std::size_t k = 0; k < seg.size(); ++k) {
                seg[k] = static_cast<S>(a[k] / divisor);
            }
        });
        out.push_back(std::move(vec));
    }
    return out;
}

// spmv(x, y) must compute the full product y = M x in A.
template <class A>
QualityMetrics quality_metrics_with(const std::function<void(std::span<const A>, std::span<A>)>& spmv,
                                    const std::vector<double>& eigenvalues,
                                    const std::vector<std::vector<A>>& vectors)
{
    QualityMetrics q;
    const std::size_t k = vectors.size();
    if (k == 0) {
        return q;
    }
    const std::size_t n = vectors[0].size();
    std::vector<A> y(n);
    A total_error{0};
    for (std::size_t i = 0; i < k; ++i) {
        spmv(vectors[i], y);
        const A lambda = static_cast<A>(eigenvalues[i]);
        A sq{0};
        for (std::size_t r = 0; r < n; ++r) {
            const A d = y[r] - lambda * vectors[i][r];
            sq += d * d;
        }
        using std::sqrt;
        const A res = sqrt(sq);
        q.residuals.push_back(static_cast<double>(res));
        total_error += res;
    }
    q.l2_reconstruction_error = static_cast<double>(total_error / static_cast<A>(k));

    if (k >= 2) {
        A angle_sum{0};
        std::size_t pairs = 0;
        const A rad_to_deg = static_cast<A>(180.0 / 3.14159265358979323846);
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = i + 1; j < k; ++j) {
                A d{0};
                for (std::size_t r = 0; r < n; ++r) {
                    d += vectors[i][r] * vectors[j][r];
                }
                using std::abs;
                using std::acos;
                const A c = std::min(abs(d), A{1});
                angle_sum += acos(c) * rad_to_deg;
                ++pairs;
            }
        }
        q.mean_pairwise_angle_degrees = static_cast<double>(angle_sum / static_cast<A>(pairs));
    }
    return q;
}

namespace detail {

inline double elapsed_ms(std::chrono::steady_clock::time_point since)
{
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

template <class J>
JacobiResult<J> ritz_decomposition(const TridiagonalMatrix& t, const SolverConfig& cfg)
{
    const std::size_t kp = t.order();
    DenseMatrix<J> tj(kp);
    for (std::size_t i = 0; i < kp; ++i) {
        tj(i, i) = static_cast<J>(t.alpha[i]);
        if (i + 1 < kp) {
            tj(i, i + 1) = static_cast<J>(t.beta[i]);
            tj(i + 1, i) = static_cast<J>(t.beta[i]);
        }
    }
    JacobiOptions<J> jopt;
    jopt.tol = cfg.jacobi_tol.value_or(default_jacobi_tol<J>());
    jopt.max_sweeps = cfg.jacobi_max_sweeps;
    return jacobi_eigen(tj, jopt);
}

// Residual bound of Ritz pair c is beta_{k'+1} times the last component of
// its eigenvector of T.
template <class J>
bool ritz_converged(const JacobiResult<J>& jac, double residual_norm, std::size_t k, double tol)
{
    const std::size_t kp = jac.eigenvalues.size();
    if (kp == 0) {
        return false;
    }
    const double scale = std::abs(static_cast<double>(jac.eigenvalues[0]));
    for (std::size_t c = 0; c < std::min(k, kp); ++c) {
        if (residual_norm * std::abs(static_cast<double>(jac.eigenvectors(kp - 1, c))) > tol * scale) {
            return false;
        }
    }
    return true;
}

// Lanczos (with restarts when adaptive), Jacobi on T, reconstruction and
// metrics. `metric_spmv` computes the full product with the original matrix
// in A.
template <class A, class S, class J, class Op>
void solve_with(const Op& op, const SolverConfig& cfg,
                const std::function<void(std::span<const A>, std::span<A>)>& metric_spmv, EigenResult& out)
{
    const std::size_t n = op.num_rows();
    auto lc = cfg.lanczos;
    const bool adaptive = cfg.adaptive && lc.iterations == 0 && lc.reorthogonalize;
    const std::size_t limit = std::min(n, std::max(cfg.max_krylov_dimension, resolve_iterations(lc, n)));
    const double tol = cfg.ritz_tol.value_or(default_ritz_tol(lc.precision));
    std::size_t m = resolve_iterations(lc, n);

    LanczosResult<S> lz;
    JacobiResult<J> jac;
    for (;;) {
        lc.iterations = m;
        auto clock = std::chrono::steady_clock::now();
        lz = lanczos<A, S>(op, lc);
        out.timings.lanczos_ms += elapsed_ms(clock);
        clock = std::chrono::steady_clock::now();
        jac = ritz_decomposition<J>(lz.tridiagonal, cfg);
        out.timings.jacobi_ms += elapsed_ms(clock);
        if (!adaptive || lz.status == LanczosStatus::Breakdown || m >= limit ||
            ritz_converged(jac, lz.residual_norm, lc.k, tol)) {
            break;
        }
        m = std::min(limit, 2 * m);
        ++out.lanczos_restarts;
    }

    const std::size_t kp = lz.tridiagonal.order();
    out.krylov_dimension = kp;
    out.lanczos_status = lz.status;
    out.truncated = lz.status == LanczosStatus::Breakdown;
    out.ledger = lz.ledger;
    out.kernels = lz.kernels;
    out.precision = cfg.lanczos.precision;
    out.jacobi_converged = jac.converged;
    out.jacobi_sweeps = jac.sweeps_used;

    auto clock = std::chrono::steady_clock::now();
    WorkerPool pool(lc.workers, lc.execution);
    const std::size_t count = std::min(lc.k, kp);
    const auto vecs = reconstruct_eigenvectors<A, S, J>(
        pool, std::span<const PartitionedVector<S>>(lz.basis.vectors), jac.eigenvectors, count);
    out.eigenvalues.assign(jac.eigenvalues.begin(), jac.eigenvalues.begin() + static_cast<std::ptrdiff_t>(count));
    out.eigenvectors.clear();
    for (const auto& v : vecs) {
        out.eigenvectors.emplace_back(v.data().begin(), v.data().end());
    }
    out.timings.reconstruct_ms = elapsed_ms(clock);

    clock = std::chrono::steady_clock::now();
    std::vector<std::vector<A>> wide;
    wide.reserve(vecs.size());
    for (const auto& v : vecs) {
        wide.emplace_back(v.data().begin(), v.data().end());
    }
    out.metrics = quality_metrics_with<A>(metric_spmv, out.eigenvalues, wide);
    out.timings.metrics_ms = elapsed_ms(clock);
}

// Dispatches on the precision triple and runs the whole pipeline.
// make_op(tag<S>) returns the partitioned operator for storage type S;
// make_metric_spmv(tag<A>) returns the full double-matrix product in A.
template <class MakeOp, class MakeMetric>
EigenResult run_pipeline(const SolverConfig& cfg, MakeOp&& make_op, MakeMetric&& make_metric_spmv)
{
    const auto start = std::chrono::steady_clock::now();
    EigenResult out;
    dispatch_storage_accumulate(cfg.lanczos.precision, [&](auto s_tag, auto a_tag) {
        using S = typename decltype(s_tag)::type;
        using A = typename decltype(a_tag)::type;
        decltype(auto) op = make_op(s_tag);
        const std::function<void(std::span<const A>, std::span<A>)> spmv = make_metric_spmv(a_tag);
        if (cfg.lanczos.precision.jacobi == Precision::Single) {
            solve_with<A, S, float>(op, cfg, spmv, out);
        } else {
            solve_with<A, S, double>(op, cfg, spmv, out);
        }
        if constexpr (requires { op.peak_resident_bytes(); }) {
            out.peak_resident_bytes = op.peak_resident_bytes();
        }
    });
    out.timings.total_ms = elapsed_ms(start);
    return out;
}

} // namespace detail

} // namespace tkeig
