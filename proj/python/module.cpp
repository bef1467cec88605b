#include "tkeig/cli.hpp"
#include "tkeig/error.hpp"
#include "tkeig/generate.hpp"
#include "tkeig/io.hpp"
#include "tkeig/jacobi.hpp"
#include "tkeig/solver.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace tkeig;

namespace {

py::dict solve(const CsrMatrix& m, std::size_t k, const std::string& precision, std::size_t workers, bool reorth,
               std::uint64_t seed, std::size_t iterations, bool sequential, bool check_symmetry)
{
    SolverConfig cfg;
    cfg.lanczos.k = k;
    cfg.lanczos.precision = PrecisionConfig::parse(precision);
    cfg.lanczos.workers = workers;
    cfg.lanczos.reorthogonalize = reorth;
    cfg.lanczos.seed = seed;
    cfg.lanczos.iterations = iterations;
    cfg.lanczos.execution = sequential ? ExecutionMode::Sequential : ExecutionMode::Threaded;
    cfg.check_symmetry = check_symmetry;
    EigenResult r;
    {
        py::gil_scoped_release release;
        r = solve_topk(m, cfg);
    }
    py::dict d;
    d["eigenvalues"] = r.eigenvalues;
    d["eigenvectors"] = r.eigenvectors;
    d["truncated"] = r.truncated;
    d["jacobi_converged"] = r.jacobi_converged;
    d["jacobi_sweeps"] = r.jacobi_sweeps;
    d["krylov_dimension"] = r.krylov_dimension;
    d["lanczos_restarts"] = r.lanczos_restarts;
    d["mean_pairwise_angle_degrees"] = r.metrics.mean_pairwise_angle_degrees;
    d["l2_reconstruction_error"] = r.metrics.l2_reconstruction_error;
    d["residuals"] = r.metrics.residuals;
    std::vector<std::size_t> barriers;
    std::vector<std::uint64_t> bytes;
    for (const auto& it : r.ledger.iterations) {
        barriers.push_back(it.reduction_barriers);
        bytes.push_back(it.bytes());
    }
    d["barriers_per_iteration"] = barriers;
    d["bytes_per_iteration"] = bytes;
    d["total_ms"] = r.timings.total_ms;
    return d;
}

py::dict stats_dict(const MatrixStats& s)
{
    py::dict d;
    d["rows"] = s.rows;
    d["cols"] = s.cols;
    d["nonzeros"] = s.nonzeros;
    d["sparsity_percent"] = s.sparsity_percent;
    d["size_bytes"] = s.coo_size_bytes;
    d["size_gb"] = s.coo_size_gb();
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Top-K sparse symmetric eigensolver";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<StructuralError>(m, "StructuralError", base.ptr());
    py::register_exception<InvalidPartitionError>(m, "InvalidPartitionError", base.ptr());
    py::register_exception<InvalidConfigError>(m, "InvalidConfigError", base.ptr());
    py::register_exception<ContractViolation>(m, "ContractViolation", base.ptr());
    py::register_exception<FormatError>(m, "FormatError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());

    py::class_<CsrMatrix>(m, "CsrMatrix")
        .def(py::init<std::size_t, std::size_t, std::vector<offset_t>, std::vector<index_t>, std::vector<double>>(),
             py::arg("num_rows"), py::arg("num_cols"), py::arg("row_offsets"), py::arg("col_indices"),
             py::arg("values"))
        .def_static(
            "from_coo",
            [](std::size_t rows, std::size_t cols, const std::vector<index_t>& r, const std::vector<index_t>& c,
               const std::vector<double>& v) {
                if (r.size() != c.size() || r.size() != v.size()) {
                    throw StructuralError("from_coo: row, column and value arrays differ in length");
                }
                CooMatrix coo{rows, cols, {}};
                for (std::size_t i = 0; i < r.size(); ++i) {
                    coo.entries.push_back({r[i], c[i], v[i]});
                }
                return coo_to_csr(coo);
            },
            py::arg("num_rows"), py::arg("num_cols"), py::arg("rows"), py::arg("cols"), py::arg("values"))
        .def_property_readonly("num_rows", &CsrMatrix::num_rows)
        .def_property_readonly("num_cols", &CsrMatrix::num_cols)
        .def_property_readonly("nnz", &CsrMatrix::nnz)
        .def_property_readonly("row_offsets", [](const CsrMatrix& a) {
            return std::vector<offset_t>(a.row_offsets().begin(), a.row_offsets().end());
        })
        .def_property_readonly("col_indices", [](const CsrMatrix& a) {
            return std::vector<index_t>(a.col_indices().begin(), a.col_indices().end());
        })
        .def_property_readonly("values", [](const CsrMatrix& a) {
            return std::vector<double>(a.values().begin(), a.values().end());
        })
        .def("is_symmetric", [](const CsrMatrix& a) { return is_symmetric(a); })
        .def("__eq__", [](const CsrMatrix& a, const CsrMatrix& b) { return a == b; })
        .def("__repr__", [](const CsrMatrix& a) {
            return "<CsrMatrix " + std::to_string(a.num_rows()) + "x" + std::to_string(a.num_cols()) + ", nnz=" +
                   std::to_string(a.nnz()) + ">";
        });

    m.def("parse_matrix_market", [](const std::filesystem::path& p) { return coo_to_csr(parse_matrix_market(p)); },
          py::arg("path"));
    m.def("load_matrix", &load_matrix, py::arg("path"));
    m.def(
        "write_binary",
        [](const std::filesystem::path& p, const CsrMatrix& a, bool f32) {
            write_binary(p, a, f32 ? ValueType::F32 : ValueType::F64);
        },
        py::arg("path"), py::arg("matrix"), py::arg("f32") = false);
    m.def("read_binary", &read_binary, py::arg("path"));
    m.def(
        "write_matrix_market",
        [](const std::filesystem::path& p, const CsrMatrix& a) { write_matrix_market(p, a); }, py::arg("path"),
        py::arg("matrix"));

    m.def(
        "matrix_stats",
        [](std::size_t rows, std::size_t cols, std::size_t nnz) { return stats_dict(matrix_stats(rows, cols, nnz)); },
        py::arg("rows"), py::arg("cols"), py::arg("nnz"));
    m.def(
        "partition_by_nnz",
        [](const CsrMatrix& a, std::size_t g) { return partition_by_nnz(a, g).boundaries; }, py::arg("matrix"),
        py::arg("workers"));

    m.def("solve_topk", &solve, py::arg("matrix"), py::arg("k") = 8, py::arg("precision") = "fdf",
          py::arg("workers") = 1, py::arg("reorth") = true, py::arg("seed") = 0, py::arg("iterations") = 0,
          py::arg("sequential") = false, py::arg("check_symmetry") = true);
    m.def(
        "dense_oracle",
        [](const CsrMatrix& a, std::size_t k) {
            auto r = dense_oracle(a, k);
            return py::make_tuple(r.eigenvalues, r.eigenvectors);
        },
        py::arg("matrix"), py::arg("k"));
    m.def("eigenvalue_deviation", &eigenvalue_deviation, py::arg("computed"), py::arg("oracle"),
          py::arg("cluster_tol") = 1e-6);
    m.def(
        "jacobi_eigen",
        [](const std::vector<std::vector<double>>& rows, double tol, std::size_t max_sweeps) {
            DenseMatrix<double> a(rows.size());
            for (std::size_t r = 0; r < rows.size(); ++r) {
                if (rows[r].size() != rows.size()) {
                    throw ContractViolation("jacobi_eigen: matrix must be square");
                }
                for (std::size_t c = 0; c < rows.size(); ++c) {
                    a(r, c) = rows[r][c];
                }
            }
            const auto res = jacobi_eigen(a, JacobiOptions<double>{tol, max_sweeps, {}});
            std::vector<std::vector<double>> vectors(rows.size(), std::vector<double>(rows.size()));
            for (std::size_t c = 0; c < rows.size(); ++c) {
                for (std::size_t r = 0; r < rows.size(); ++r) {
                    vectors[c][r] = res.eigenvectors(r, c);
                }
            }
            py::dict d;
            d["eigenvalues"] = res.eigenvalues;
            d["eigenvectors"] = vectors;
            d["sweeps"] = res.sweeps_used;
            d["converged"] = res.converged;
            return d;
        },
        py::arg("matrix"), py::arg("tol") = 1e-10, py::arg("max_sweeps") = 30);
    m.def("random_symmetric", &random_symmetric, py::arg("n"), py::arg("density"), py::arg("seed") = 0,
          py::arg("norm_one") = py::none());
    m.def("ill_conditioned", &ill_conditioned, py::arg("n"), py::arg("spread"), py::arg("coupling") = 0.1,
          py::arg("density") = 0.02, py::arg("seed") = 0);
}
