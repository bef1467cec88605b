#include "tkeig/outofcore.hpp"

namespace tkeig {

MappedOperator::MappedOperator(const MappedCsr& m, std::shared_ptr<const PartitionPlan> plan,
                               std::size_t budget_bytes, bool sample_rss)
    : m_(&m), plan_(std::move(plan)), sample_rss_(sample_rss)
{
    if (plan_->num_rows() != m.num_rows()) {
        throw ContractViolation("partition plan does not cover the matrix rows");
    }
    const std::size_t page = page_size();
    // Every window may touch one partial page at each end of its three
    // array ranges; reserve those before splitting the rest.
    const std::size_t per_worker = budget_bytes / plan_->num_partitions;
    if (per_worker < 8 * page) {
        throw InvalidConfigError("resident budget of " + std::to_string(budget_bytes) +
                                 " bytes is too small for " + std::to_string(plan_->num_partitions) + " workers");
    }
    window_bytes_ = (per_worker - 6 * page) / page * page;
}

std::size_t MappedOperator::open_window(std::size_t bytes) const
{
    const std::size_t page = page_size();
    // Payload rounded up to pages plus the partial pages at the range ends.
    const std::size_t rounded = (bytes + page - 1) / page * page + 6 * page;
    const std::size_t now = open_.fetch_add(rounded) + rounded;
    std::size_t seen = peak_.load();
    while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
    }
    return rounded;
}

void MappedOperator::close_window(std::size_t bytes) const
{
    open_.fetch_sub(bytes);
}

EigenResult solve_topk_mapped(const MappedCsr& m, const SolverConfig& cfg, std::size_t budget_bytes,
                              bool sample_rss)
{
    if (m.num_rows() != m.num_cols()) {
        throw ContractViolation("solve_topk: matrix is not square");
    }
    validate(cfg.lanczos, m.num_rows());
    if (cfg.check_symmetry && !m.header().symmetric()) {
        throw ContractViolation("solve_topk: file is not flagged symmetric");
    }
    const auto plan = std::make_shared<const PartitionPlan>(partition_by_nnz(m.row_offsets(), cfg.lanczos.workers));
    m.release_all();
    const MappedOperator op(m, plan, budget_bytes, sample_rss);
    auto result = detail::run_pipeline(
        cfg, [&](auto) -> const MappedOperator& { return op; },
        [&](auto a_tag) {
            using A = typename decltype(a_tag)::type;
            return std::function<void(std::span<const A>, std::span<A>)>(
                [&op](std::span<const A> x, std::span<A> y) { op.template apply_all<A>(x, y); });
        });
    result.peak_resident_bytes = op.peak_resident_bytes();
    result.sampled_resident_bytes = op.peak_sampled_rss();
    return result;
}

} // namespace tkeig
