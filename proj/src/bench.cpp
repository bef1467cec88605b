#include "tkeig/bench.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <ostream>

namespace tkeig {

std::vector<BenchRow> run_bench(const CsrMatrix& m, const SolverConfig& base,
                                const std::vector<PrecisionConfig>& configs, std::size_t repeat)
{
    std::vector<BenchRow> rows;
    for (const auto& precision : configs) {
        for (std::size_t run = 0; run < repeat; ++run) {
            SolverConfig cfg = base;
            cfg.lanczos.precision = precision;
            cfg.lanczos.seed = base.lanczos.seed + run;
            const auto r = solve_topk(m, cfg);
            rows.push_back({precision.name(), run, r.timings.total_ms - r.timings.metrics_ms,
                            r.metrics.l2_reconstruction_error, r.metrics.mean_pairwise_angle_degrees});
        }
    }
    return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows)
{
    out << "config,run,wall_ms,l2_error,mean_angle\n";
    const auto flags = out.flags();
    const auto precision = out.precision();
    for (const auto& r : rows) {
        out << r.config << ',' << r.run << ',' << std::fixed << std::setprecision(3) << r.wall_ms << ','
            << std::scientific << std::setprecision(6) << r.l2_error << ',' << std::fixed << std::setprecision(6)
            << r.mean_angle << '\n';
    }
    out.flags(flags);
    out.precision(precision);
}

std::vector<std::pair<std::string, double>> median_wall_ms(const std::vector<BenchRow>& rows)
{
    std::vector<std::string> order;
    std::map<std::string, std::vector<double>> walls;
    for (const auto& r : rows) {
        if (!walls.count(r.config)) {
            order.push_back(r.config);
        }
        walls[r.config].push_back(r.wall_ms);
    }
    std::vector<std::pair<std::string, double>> out;
    for (const auto& name : order) {
        auto w = walls[name];
        std::sort(w.begin(), w.end());
        const std::size_t h = w.size() / 2;
        out.emplace_back(name, w.size() % 2 ? w[h] : 0.5 * (w[h - 1] + w[h]));
    }
    return out;
}

} // namespace tkeig
