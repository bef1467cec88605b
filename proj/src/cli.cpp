#include "tkeig/cli.hpp"

#include "tkeig/bench.hpp"
#include "tkeig/error.hpp"
#include "tkeig/generate.hpp"
#include "tkeig/io.hpp"
#include "tkeig/outofcore.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace tkeig {

namespace {

bool is_matrix_market(const std::filesystem::path& path)
{
    return path.extension() == ".mtx";
}

std::string fixed2(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string sci2(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

void print_stats(std::ostream& out, const MatrixStats& s, bool as_json)
{
    if (as_json) {
        nlohmann::json j;
        j["rows"] = s.rows;
        j["cols"] = s.cols;
        j["nonzeros"] = s.nonzeros;
        j["sparsity_percent"] = s.sparsity_percent;
        j["size_bytes"] = s.coo_size_bytes;
        j["size_gb"] = s.coo_size_gb();
        out << j.dump(2) << '\n';
        return;
    }
    out << "rows: " << s.rows << '\n'
        << "cols: " << s.cols << '\n'
        << "nonzeros: " << s.nonzeros << '\n'
        << "sparsity_percent: " << sci2(s.sparsity_percent) << '\n'
        << "size_gb: " << fixed2(s.coo_size_gb()) << '\n';
}

PrecisionConfig parse_precision(const std::string& name)
{
    return PrecisionConfig::parse(name);
}

struct SolveOptions {
    std::string matrix;
    std::size_t k = 8;
    std::string precision = "fdf";
    std::size_t workers = 1;
    std::string reorth = "on";
    std::uint64_t seed = 0;
    std::size_t iterations = 0;
    std::string mode = "threaded";
    bool symmetrize = false;
};

void add_solve_options(CLI::App* cmd, SolveOptions& o, bool with_precision = true)
{
    cmd->add_option("matrix", o.matrix, "Matrix Market (.mtx) or TKEV file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--k", o.k, "Number of eigenpairs")->check(CLI::PositiveNumber);
    if (with_precision) {
        cmd->add_option("--precision", o.precision, "Storage/accumulate/Jacobi precision: fff, fdf or ddd");
    }
    cmd->add_option("--workers", o.workers, "Worker count G")->envname("TKEIG_WORKERS")->check(CLI::PositiveNumber);
    cmd->add_option("--reorth", o.reorth, "Reorthogonalisation")->check(CLI::IsMember({"on", "off"}));
    cmd->add_option("--seed", o.seed, "Start vector seed");
    cmd->add_option("--iterations", o.iterations, "Krylov dimension (0 = default)");
    cmd->add_option("--mode", o.mode, "Worker execution")->check(CLI::IsMember({"threaded", "sequential"}));
    cmd->add_flag("--symmetrize", o.symmetrize, "Use (M + M^T) / 2");
}

SolverConfig make_config(const SolveOptions& o)
{
    SolverConfig cfg;
    cfg.lanczos.k = o.k;
    cfg.lanczos.precision = parse_precision(o.precision);
    cfg.lanczos.workers = o.workers;
    cfg.lanczos.reorthogonalize = o.reorth == "on";
    cfg.lanczos.seed = o.seed;
    cfg.lanczos.iterations = o.iterations;
    cfg.lanczos.execution = o.mode == "sequential" ? ExecutionMode::Sequential : ExecutionMode::Threaded;
    return cfg;
}

CsrMatrix load_for_solve(const SolveOptions& o)
{
    auto m = load_matrix(o.matrix);
    return o.symmetrize ? symmetrize(m) : m;
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream f(path);
    if (!f) {
        throw Error("cannot write " + path);
    }
    f << text;
    if (!f) {
        throw Error("write failed: " + path);
    }
}

} // namespace

CsrMatrix load_matrix(const std::filesystem::path& path)
{
    if (is_matrix_market(path)) {
        return coo_to_csr(parse_matrix_market(path));
    }
    return read_binary(path);
}

std::string result_json(const EigenResult& r, std::size_t workers, bool with_vectors)
{
    nlohmann::json j;
    j["eigenvalues"] = r.eigenvalues;
    if (with_vectors) {
        j["eigenvectors"] = r.eigenvectors;
    }
    j["truncated"] = r.truncated;
    j["lanczos_status"] = r.lanczos_status == LanczosStatus::Completed ? "completed" : "breakdown";
    j["jacobi"] = {{"converged", r.jacobi_converged}, {"sweeps", r.jacobi_sweeps}};
    j["krylov_dimension"] = r.krylov_dimension;
    j["lanczos_restarts"] = r.lanczos_restarts;
    j["precision"] = r.precision.name();
    j["workers"] = workers;
    j["metrics"] = {{"mean_pairwise_angle_degrees", r.metrics.mean_pairwise_angle_degrees},
                    {"l2_reconstruction_error", r.metrics.l2_reconstruction_error},
                    {"residuals", r.metrics.residuals}};
    const auto s = summarize(r.ledger);
    j["ledger"] = {{"workers", s.workers},
                   {"iterations", s.iterations},
                   {"bytes_per_iteration", s.bytes_per_iteration},
                   {"total_bytes", s.total_bytes},
                   {"reduction_barriers", s.reduction_barriers},
                   {"replication_syncs", s.replication_syncs}};
    j["timings_ms"] = {{"lanczos", r.timings.lanczos_ms},
                       {"jacobi", r.timings.jacobi_ms},
                       {"reconstruct", r.timings.reconstruct_ms},
                       {"metrics", r.timings.metrics_ms},
                       {"total", r.timings.total_ms}};
    if (r.peak_resident_bytes) {
        j["peak_resident_bytes"] = r.peak_resident_bytes;
    }
    return j.dump(2);
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Top-K sparse symmetric eigensolver", "tkeig"};
    app.require_subcommand(1);

    // stats
    auto* stats = app.add_subcommand("stats", "Matrix statistics (size in GB of 32-bit COO)");
    std::string stats_path;
    std::size_t stats_rows = 0;
    std::size_t stats_cols = 0;
    std::size_t stats_nnz = 0;
    bool stats_json = false;
    stats->add_option("matrix", stats_path, "Matrix file")->check(CLI::ExistingFile);
    auto* rows_opt = stats->add_option("--rows", stats_rows, "Row count, instead of a file");
    stats->add_option("--cols", stats_cols, "Column count (default: rows)");
    auto* nnz_opt = stats->add_option("--nnz", stats_nnz, "Nonzero count, instead of a file");
    stats->add_flag("--json", stats_json, "JSON output");

    // solve
    auto* solve = app.add_subcommand("solve", "Top-K eigenpairs");
    SolveOptions solve_opt;
    add_solve_options(solve, solve_opt);
    std::string solve_out;
    double max_resident_mb = 0.0;
    bool with_vectors = false;
    solve->add_option("--out", solve_out, "Write the JSON result here as well");
    solve->add_option("--max-resident-mb", max_resident_mb,
                      "Stream a TKEV file with at most this many MB of it resident")
        ->check(CLI::PositiveNumber);
    solve->add_flag("--vectors", with_vectors, "Include eigenvectors in the JSON");

    // bench
    auto* bench = app.add_subcommand("bench", "Repeated solves, CSV per run");
    SolveOptions bench_opt;
    add_solve_options(bench, bench_opt, false);
    std::vector<std::string> bench_precisions;
    std::size_t repeat = 20;
    std::string bench_out;
    bench->add_option("--precision", bench_precisions, "Configurations to run (default fff fdf ddd)")
        ->delimiter(',');
    bench->add_option("--repeat", repeat, "Runs per configuration")->check(CLI::PositiveNumber);
    bench->add_option("--out", bench_out, "Write the CSV here instead of stdout");

    // verify
    auto* verify = app.add_subcommand("verify", "Compare against the dense oracle");
    SolveOptions verify_opt;
    verify_opt.precision = "ddd";
    add_solve_options(verify, verify_opt);
    double verify_tol = 0.0;
    verify->add_option("--tol", verify_tol, "Relative tolerance (default 1e-8 for double storage, 1e-3 otherwise)");

    // convert
    auto* convert = app.add_subcommand("convert", "Convert between .mtx and TKEV");
    std::string conv_in;
    std::string conv_out;
    bool conv_f32 = false;
    convert->add_option("input", conv_in, "Input file")->required()->check(CLI::ExistingFile);
    convert->add_option("output", conv_out, "Output file (.mtx or TKEV)")->required();
    convert->add_flag("--f32", conv_f32, "Store TKEV values as f32");

    // generate
    auto* generate = app.add_subcommand("generate", "Write a synthetic symmetric matrix");
    std::string gen_kind = "random";
    std::size_t gen_n = 1000;
    double gen_density = 0.01;
    double gen_spread = 1e7;
    double gen_coupling = 0.1;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    generate->add_option("--kind", gen_kind, "random, ill or large")->check(CLI::IsMember({"random", "ill", "large"}));
    generate->add_option("--n", gen_n, "Order")->check(CLI::PositiveNumber);
    generate->add_option("--density", gen_density, "Fraction of stored entries (random, ill)");
    generate->add_option("--spread", gen_spread, "Diagonal scaling range (ill)");
    generate->add_option("--coupling", gen_coupling, "Off-diagonal strength (ill)");
    generate->add_option("--seed", gen_seed, "Seed");
    generate->add_option("--out", gen_out, "Output file (.mtx or TKEV)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*stats) {
            if (!stats_path.empty()) {
                if (is_matrix_market(stats_path)) {
                    print_stats(out, matrix_stats(parse_matrix_market(stats_path)), stats_json);
                } else {
                    const auto h = read_binary_header(stats_path);
                    print_stats(out, matrix_stats(h.num_rows, h.num_cols, h.nnz), stats_json);
                }
            } else if (rows_opt->count() && nnz_opt->count()) {
                print_stats(out, matrix_stats(stats_rows, stats_cols ? stats_cols : stats_rows, stats_nnz),
                            stats_json);
            } else {
                err << "stats: give a matrix file or both --rows and --nnz\n";
                return 2;
            }
            return 0;
        }

        if (*solve) {
            const auto cfg = make_config(solve_opt);
            EigenResult r;
            if (max_resident_mb > 0.0) {
                if (is_matrix_market(solve_opt.matrix) || solve_opt.symmetrize) {
                    err << "solve: --max-resident-mb needs a TKEV file (see `convert`) and no --symmetrize\n";
                    return 2;
                }
                const auto mapped = map_binary(solve_opt.matrix);
                r = solve_topk_mapped(mapped, cfg, static_cast<std::size_t>(max_resident_mb * 1024 * 1024));
            } else {
                r = solve_topk(load_for_solve(solve_opt), cfg);
            }
            const auto text = result_json(r, cfg.lanczos.workers, with_vectors);
            out << text << '\n';
            if (!solve_out.empty()) {
                write_text(solve_out, text + "\n");
            }
            return 0;
        }

        if (*bench) {
            const auto m = load_for_solve(bench_opt);
            std::vector<PrecisionConfig> configs;
            if (bench_precisions.empty()) {
                bench_precisions = {"fff", "fdf", "ddd"};
            }
            for (const auto& p : bench_precisions) {
                configs.push_back(parse_precision(p));
            }
            const auto rows = run_bench(m, make_config(bench_opt), configs, repeat);
            if (bench_out.empty()) {
                write_bench_csv(out, rows);
            } else {
                std::ostringstream csv;
                write_bench_csv(csv, rows);
                write_text(bench_out, csv.str());
            }
            return 0;
        }

        if (*verify) {
            const auto m = load_for_solve(verify_opt);
            const auto cfg = make_config(verify_opt);
            const double tol = verify_tol > 0.0 ? verify_tol
                                                : (cfg.lanczos.precision.storage == Precision::Double ? 1e-8 : 1e-3);
            const auto r = solve_topk(m, cfg);
            const auto oracle = dense_oracle(m, std::min(cfg.lanczos.k, m.num_rows()));
            const double dev = eigenvalue_deviation(r.eigenvalues, oracle.eigenvalues, tol);
            out << "max relative deviation: " << dev << '\n';
            out << (dev <= tol ? "ok" : "FAILED") << " (tolerance " << tol << ")\n";
            return dev <= tol ? 0 : 1;
        }

        if (*convert) {
            const auto m = load_matrix(conv_in);
            if (is_matrix_market(conv_out)) {
                write_matrix_market(std::filesystem::path(conv_out), m);
            } else {
                write_binary(conv_out, m, conv_f32 ? ValueType::F32 : ValueType::F64);
            }
            return 0;
        }

        if (*generate) {
            CsrMatrix m;
            if (gen_kind == "random") {
                m = random_symmetric(gen_n, gen_density, gen_seed);
            } else if (gen_kind == "ill") {
                m = ill_conditioned(gen_n, gen_spread, gen_coupling, gen_density, gen_seed);
            } else {
                m = synthetic_large(gen_n, gen_seed);
            }
            if (is_matrix_market(gen_out)) {
                write_matrix_market(std::filesystem::path(gen_out), m);
            } else {
                write_binary(gen_out, m);
            }
            return 0;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace tkeig
