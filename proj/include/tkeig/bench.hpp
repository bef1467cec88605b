#pragma once

#include "tkeig/solver.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace tkeig {

// One solve. wall_ms covers Lanczos, Jacobi and reconstruction; metric
// evaluation is excluded so the column compares like with like.
struct BenchRow {
    std::string config;
    std::size_t run = 0;
    double wall_ms = 0.0;
    double l2_error = 0.0;
    double mean_angle = 0.0;
};

// For each config, `repeat` runs with seeds base.seed, base.seed + 1, ...
std::vector<BenchRow> run_bench(const CsrMatrix& m, const SolverConfig& base,
                                const std::vector<PrecisionConfig>& configs, std::size_t repeat);

// Header "config,run,wall_ms,l2_error,mean_angle" then one line per row.
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

// Median wall time per config, in the order configs first appear.
std::vector<std::pair<std::string, double>> median_wall_ms(const std::vector<BenchRow>& rows);

} // namespace tkeig
