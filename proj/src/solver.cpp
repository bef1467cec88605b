#include "tkeig/solver.hpp"

#include "tkeig/operator.hpp"

#include <limits>
#include <memory>

namespace tkeig {

double default_ritz_tol(const PrecisionConfig& p) noexcept
{
    return p.storage == Precision::Single ? 1e-6 : 1e-10;
}

LedgerSummary summarize(const TransferLedger& ledger)
{
    LedgerSummary s;
    s.workers = ledger.workers;
    s.iterations = ledger.iterations.size();
    s.bytes_per_iteration = ledger.iterations.empty() ? 0 : ledger.iterations.front().bytes();
    s.total_bytes = ledger.total_bytes();
    s.reduction_barriers = ledger.total_reduction_barriers();
    for (const auto& it : ledger.iterations) {
        s.replication_syncs += it.replication_syncs;
    }
    return s;
}

namespace {

template <class A>
std::function<void(std::span<const A>, std::span<A>)> full_spmv(const CsrMatrix& m)
{
    return [&m](std::span<const A> x, std::span<A> y) {
        kernels::spmv_rows<A, A, double>(m.row_offsets(), m.col_indices(), m.values(), 0, m.num_rows(), x,
                                         y);
    };
}

void require_square(const CsrMatrix& m, const char* who)
{
    if (m.num_rows() != m.num_cols()) {
        throw ContractViolation(std::string(who) + ": matrix is not square");
    }
}

} // namespace

EigenResult solve_topk(const CsrMatrix& m, const SolverConfig& cfg)
{
    require_square(m, "solve_topk");
    validate(cfg.lanczos, m.num_rows());
    if (cfg.check_symmetry && !is_symmetric(m)) {
        throw ContractViolation("solve_topk: matrix is not symmetric");
    }
    const auto plan = std::make_shared<const PartitionPlan>(partition_by_nnz(m, cfg.lanczos.workers));
    return detail::run_pipeline(
        cfg,
        [&](auto s_tag) {
            using S = typename decltype(s_tag)::type;
            return ShardedCsr<S>(m.view(), plan);
        },
        [&](auto a_tag) { return full_spmv<typename decltype(a_tag)::type>(m); });
}

QualityMetrics quality_metrics(const CsrMatrix& m, const std::vector<double>& eigenvalues,
                               const std::vector<std::vector<double>>& eigenvectors,
                               const PrecisionConfig& precision)
{
    require_square(m, "quality_metrics");
    if (eigenvalues.size() != eigenvectors.size()) {
        throw ContractViolation("quality_metrics: eigenvalue and eigenvector counts differ");
    }
    for (const auto& v : eigenvectors) {
        if (v.size() != m.num_rows()) {
            throw ContractViolation("quality_metrics: eigenvector length differs from matrix order");
        }
    }
    return dispatch_storage_accumulate(precision, [&](auto s_tag, auto a_tag) {
        using S = typename decltype(s_tag)::type;
        using A = typename decltype(a_tag)::type;
        std::vector<std::vector<A>> wide;
        for (const auto& v : eigenvectors) {
            auto& w = wide.emplace_back(v.size());
            for (std::size_t r = 0; r < v.size(); ++r) {
                w[r] = static_cast<A>(static_cast<S>(v[r]));
            }
        }
        return quality_metrics_with<A>(full_spmv<A>(m), eigenvalues, wide);
    });
}

OracleResult dense_oracle(const CsrMatrix& m, std::size_t k)
{
    require_square(m, "dense_oracle");
    const std::size_t n = m.num_rows();
    if (n > kOracleMaxOrder) {
        throw InvalidConfigError("dense_oracle: order " + std::to_string(n) + " exceeds " +
                                 std::to_string(kOracleMaxOrder));
    }
    if (k > n) {
        throw InvalidConfigError("dense_oracle: k exceeds the matrix order");
    }
    DenseMatrix<double> a(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (auto p = m.row_offsets()[r]; p < m.row_offsets()[r + 1]; ++p) {
            a(r, m.col_indices()[p]) = m.values()[p];
        }
    }
    JacobiOptions<double> opt;
    opt.tol = 1e-15;
    opt.max_sweeps = 60;
    const auto jac = jacobi_eigen(a, opt);

    OracleResult out;
    out.eigenvalues.assign(jac.eigenvalues.begin(), jac.eigenvalues.begin() + static_cast<std::ptrdiff_t>(k));
    for (std::size_t c = 0; c < k; ++c) {
        auto& v = out.eigenvectors.emplace_back(n);
        for (std::size_t r = 0; r < n; ++r) {
            v[r] = jac.eigenvectors(r, c);
        }
    }
    return out;
}

namespace {

bool close(double a, double b, double tol)
{
    return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

std::vector<double> distinct(const std::vector<double>& values, double tol)
{
    std::vector<double> reps;
    for (const double v : values) {
        if (std::none_of(reps.begin(), reps.end(), [&](double r) { return close(r, v, tol); })) {
            reps.push_back(v);
        }
    }
    return reps;
}

double nearest_deviation(double target, const std::vector<double>& pool, double scale)
{
    double best = std::numeric_limits<double>::infinity();
    for (const double p : pool) {
        best = std::min(best, std::abs(p - target));
    }
    const double denom = target != 0.0 ? std::abs(target) : scale;
    return denom > 0.0 ? best / denom : best;
}

} // namespace

double eigenvalue_deviation(const std::vector<double>& computed, const std::vector<double>& oracle,
                            double cluster_tol)
{
    const auto dc = distinct(computed, cluster_tol);
    const auto dor = distinct(oracle, cluster_tol);
    if (dc.empty() || dor.empty()) {
        return dc.empty() && dor.empty() ? 0.0 : std::numeric_limits<double>::infinity();
    }
    // Duplicated copies in `computed` may push the oracle's tail out of the
    // top-k; without duplicates every oracle eigenvalue must be present.
    if (dc.size() < dor.size() && dc.size() == computed.size()) {
        return std::numeric_limits<double>::infinity();
    }
    const std::size_t common = std::min(dc.size(), dor.size());
    const double scale = std::abs(dor.front());
    double worst = 0.0;
    for (std::size_t i = 0; i < common; ++i) {
        worst = std::max(worst, nearest_deviation(dor[i], dc, scale));
        worst = std::max(worst, nearest_deviation(dc[i], dor, scale));
    }
    return worst;
}

} // namespace tkeig
