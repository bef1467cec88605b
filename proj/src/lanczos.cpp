#include "tkeig/lanczos.hpp"

#include <set>
#include <string>
#include <utility>

namespace tkeig {

std::uint64_t IterationRecord::bytes() const noexcept
{
    std::uint64_t total = 0;
    for (const auto& t : transfers) {
        total += t.bytes;
    }
    return total;
}

std::uint64_t TransferLedger::total_bytes() const noexcept
{
    std::uint64_t total = 0;
    for (const auto& it : iterations) {
        total += it.bytes();
    }
    return total;
}

std::size_t TransferLedger::total_reduction_barriers() const noexcept
{
    std::size_t total = 0;
    for (const auto& it : iterations) {
        total += it.reduction_barriers;
    }
    return total;
}

bool TransferLedger::covers_all_pairs_once(std::size_t it) const
{
    const auto& transfers = iterations.at(it).transfers;
    if (transfers.size() != workers * workers) {
        return false;
    }
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& t : transfers) {
        if (t.source_partition >= workers || t.destination_replica >= workers ||
            !seen.emplace(t.source_partition, t.destination_replica).second) {
            return false;
        }
    }
    return true;
}

std::size_t default_iterations(std::size_t k, std::size_t n) noexcept
{
    return std::min(n, std::max<std::size_t>(10 * k, 64));
}

std::size_t resolve_iterations(const LanczosConfig& cfg, std::size_t n) noexcept
{
    return cfg.iterations == 0 ? default_iterations(cfg.k, n) : std::min(cfg.iterations, n);
}

double resolve_breakdown_tol(const LanczosConfig& cfg) noexcept
{
    if (cfg.breakdown_tol) {
        return *cfg.breakdown_tol;
    }
    return cfg.precision.storage == Precision::Single ? 1e-5 : 1e-10;
}

void validate(const LanczosConfig& cfg, std::size_t n)
{
    if (cfg.k == 0 || cfg.k > n) {
        throw InvalidConfigError("k must satisfy 1 <= k <= n (k = " + std::to_string(cfg.k) +
                                 ", n = " + std::to_string(n) + ")");
    }
    if (cfg.iterations != 0 && cfg.iterations < cfg.k) {
        throw InvalidConfigError("Krylov dimension must be at least k");
    }
    if (!cfg.start.empty() && cfg.start.size() != n) {
        throw InvalidConfigError("start vector length differs from the matrix order");
    }
    if (cfg.breakdown_tol && !(*cfg.breakdown_tol > 0.0)) {
        throw InvalidConfigError("breakdown tolerance must be positive");
    }
    if (cfg.workers == 0 || cfg.workers > n) {
        throw InvalidConfigError("worker count must satisfy 1 <= G <= n");
    }
}

} // namespace tkeig
