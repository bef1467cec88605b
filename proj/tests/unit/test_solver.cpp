#include "support.hpp"

#include "tkeig/error.hpp"
#include "tkeig/generate.hpp"
#include "tkeig/solver.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <memory>

using namespace tkeig;

namespace {

SolverConfig config(std::size_t k, PrecisionConfig p = PrecisionConfig::ddd(), std::size_t g = 1)
{
    SolverConfig cfg;
    cfg.lanczos.k = k;
    cfg.lanczos.precision = p;
    cfg.lanczos.workers = g;
    return cfg;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b)
{
    double d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d = std::max(d, std::abs(a[i] - b[i]));
    }
    return d;
}

} // namespace

TEST_CASE("diag(5, 4, 3, 2, 1), K = 2")
{
    const auto r = solve_topk(test::diagonal({5, 4, 3, 2, 1}), config(2));
    REQUIRE(r.eigenvalues.size() == 2);
    CHECK(r.eigenvalues[0] == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(r.eigenvalues[1] == doctest::Approx(4.0).epsilon(1e-12));
    REQUIRE(r.eigenvectors.size() == 2);
    CHECK(max_abs_diff(r.eigenvectors[0], {1, 0, 0, 0, 0}) < 1e-10);
    CHECK(max_abs_diff(r.eigenvectors[1], {0, 1, 0, 0, 0}) < 1e-10);
    CHECK(r.metrics.l2_reconstruction_error < 1e-10);
    CHECK(r.metrics.mean_pairwise_angle_degrees == doctest::Approx(90.0));
}

TEST_CASE("[[2, 1], [1, 2]], K = 2")
{
    const auto m = coo_to_csr({2, 2, {{0, 0, 2.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 2.0}}});
    for (auto p : {PrecisionConfig::ddd(), PrecisionConfig::fdf(), PrecisionConfig::fff()}) {
        const auto r = solve_topk(m, config(2, p));
        const double tol = p.storage == Precision::Double ? 1e-12 : 1e-6;
        REQUIRE(r.eigenvalues.size() == 2);
        CHECK(std::abs(r.eigenvalues[0] - 3.0) < tol * 3);
        CHECK(std::abs(r.eigenvalues[1] - 1.0) < tol * 3);
        const double h = 1 / std::sqrt(2.0);
        CHECK(max_abs_diff(r.eigenvectors[0], {h, h}) < tol * 10);
    }
}

TEST_CASE("random 300 x 300 at 2% density matches the dense oracle")
{
    const auto m = random_symmetric(300, 0.02, 1);
    const auto oracle = test::eigen_oracle(test::dense(m));
    const auto r = solve_topk(m, config(10));
    REQUIRE(r.eigenvalues.size() == 10);
    for (std::size_t i = 0; i < 10; ++i) {
        CHECK(test::relative_error(r.eigenvalues[i], oracle.values[i]) <= 1e-8);
        // Eigenvectors agree up to sign.
        Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(r.eigenvectors[i].data(), 300);
        CHECK(std::abs(v.dot(oracle.vectors.col(static_cast<Eigen::Index>(i)))) == doctest::Approx(1.0).epsilon(1e-8));
    }
    CHECK(r.jacobi_converged);
    CHECK_FALSE(r.truncated);
    CHECK(r.metrics.l2_reconstruction_error < 1e-8);
    CHECK(r.metrics.mean_pairwise_angle_degrees > 89.999999);
}

TEST_CASE("non-symmetric input and bad shapes are rejected")
{
    const auto a = coo_to_csr({2, 2, {{0, 1, 1.0}}});
    CHECK_THROWS_AS(solve_topk(a, config(1)), ContractViolation);
    const auto rect = coo_to_csr({2, 3, {{0, 1, 1.0}}});
    CHECK_THROWS_AS(solve_topk(rect, config(1)), ContractViolation);
    CHECK_THROWS_AS(solve_topk(test::diagonal({1, 2}), config(3)), InvalidConfigError);
}

TEST_CASE("reconstruction of unit vectors with identity V")
{
    const std::size_t n = 6;
    const auto plan = std::make_shared<const PartitionPlan>(
        partition_by_rows(std::vector<offset_t>(n + 1, 0), 2));
    std::vector<PartitionedVector<double>> basis;
    for (std::size_t j = 0; j < 3; ++j) {
        std::vector<double> e(n, 0.0);
        e[j] = 1.0;
        basis.emplace_back(plan, e);
    }
    WorkerPool pool(2, ExecutionMode::Threaded);
    const auto out = reconstruct_eigenvectors<double, double, double>(
        pool, std::span<const PartitionedVector<double>>(basis), DenseMatrix<double>::identity(3), 3);
    REQUIRE(out.size() == 3);
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(std::vector<double>(out[j].data().begin(), out[j].data().end()) ==
              std::vector<double>(basis[j].data().begin(), basis[j].data().end()));
    }

    // A mixing column is normalised and its sign fixed.
    DenseMatrix<double> v(3);
    v(0, 0) = -3;
    v(1, 0) = 4;
    const auto mixed = reconstruct_eigenvectors<double, double, double>(
        pool, std::span<const PartitionedVector<double>>(basis), v, 1);
    CHECK(mixed[0].data()[0] == doctest::Approx(-0.6));
    CHECK(mixed[0].data()[1] == doctest::Approx(0.8));

    CHECK_THROWS_AS((reconstruct_eigenvectors<double, double, double>(
                        pool, std::span<const PartitionedVector<double>>(basis), DenseMatrix<double>::identity(2), 2)),
                    ContractViolation);
}

TEST_CASE("quality metrics examples")
{
    const auto m = test::diagonal({2, 1});
    const auto exact = quality_metrics(m, {2, 1}, {{1, 0}, {0, 1}});
    CHECK(exact.l2_reconstruction_error == 0.0);
    CHECK(exact.mean_pairwise_angle_degrees == doctest::Approx(90.0));

    const auto parallel = quality_metrics(m, {2, 2}, {{1, 0}, {1, 0}});
    CHECK(parallel.mean_pairwise_angle_degrees == doctest::Approx(0.0));

    // ||M v - lambda v|| for v = e1, lambda = 1.5 is 0.5.
    const auto off = quality_metrics(m, {1.5}, {{1, 0}});
    CHECK(off.residuals == std::vector<double>{0.5});
    CHECK(off.mean_pairwise_angle_degrees == 90.0);

    const double s = std::sqrt(0.5);
    const auto diag45 = quality_metrics(m, {2, 1}, {{1, 0}, {s, s}});
    CHECK(diag45.mean_pairwise_angle_degrees == doctest::Approx(45.0));
}

TEST_CASE("dense oracle")
{
    const auto o = dense_oracle(test::diagonal({1, -7, 3}), 2);
    REQUIRE(o.eigenvalues.size() == 2);
    CHECK(o.eigenvalues[0] == doctest::Approx(-7));
    CHECK(o.eigenvalues[1] == doctest::Approx(3));
    CHECK(max_abs_diff(o.eigenvectors[0], {0, 1, 0}) == 0.0);

    const auto m = random_symmetric(80, 0.1, 4);
    const auto mine = dense_oracle(m, 80);
    const auto ref = test::eigen_oracle(test::dense(m));
    for (std::size_t i = 0; i < 80; ++i) {
        CHECK(std::abs(mine.eigenvalues[i] - ref.values[i]) < 1e-13 * std::abs(ref.values[0]));
    }
    CHECK_THROWS_AS(dense_oracle(test::diagonal(std::vector<double>(kOracleMaxOrder + 1, 1.0)), 1),
                    InvalidConfigError);
}

TEST_CASE("eigenvalue deviation and multiplicities")
{
    CHECK(eigenvalue_deviation({5, 4}, {5, 4}) == 0.0);
    CHECK(eigenvalue_deviation({5.5}, {5}) == doctest::Approx(0.1));
    // A double eigenvalue found once still matches.
    CHECK(eigenvalue_deviation({3, 1}, {3, 3, 1}) < 1e-15);
    // Missing a distinct eigenvalue is infinite deviation.
    CHECK(eigenvalue_deviation({3}, {3, 2}) == std::numeric_limits<double>::infinity());
}

TEST_CASE("sign convention, seed determinism and worker invariance")
{
    const auto m = random_symmetric(200, 0.03, 9);
    const auto base = solve_topk(m, config(6));
    for (const auto& v : base.eigenvectors) {
        std::size_t arg = 0;
        for (std::size_t i = 1; i < v.size(); ++i) {
            if (std::abs(v[i]) > std::abs(v[arg])) {
                arg = i;
            }
        }
        CHECK(v[arg] > 0);
    }
    const auto again = solve_topk(m, config(6));
    CHECK(again.eigenvalues == base.eigenvalues);
    CHECK(again.eigenvectors == base.eigenvectors);

    for (std::size_t g : {2, 4, 8}) {
        const auto r = solve_topk(m, config(6, PrecisionConfig::ddd(), g));
        for (std::size_t i = 0; i < 6; ++i) {
            CHECK(test::relative_error(r.eigenvalues[i], base.eigenvalues[i]) <= 1e-9);
        }
        const auto s = summarize(r.ledger);
        CHECK(s.workers == g);
        CHECK(s.bytes_per_iteration == g * 200 * sizeof(double));
    }
}

TEST_CASE("breakdown reports a truncated result")
{
    // Three distinct eigenvalues: the Krylov space has dimension 3.
    const auto m = test::diagonal({4, 4, 2, 2, 1, 1});
    const auto r = solve_topk(m, config(5));
    CHECK(r.truncated);
    CHECK(r.krylov_dimension == 3);
    CHECK(r.eigenvalues.size() == 3);
    CHECK(r.eigenvalues[0] == doctest::Approx(4));
    CHECK(r.eigenvalues[2] == doctest::Approx(1));
}

TEST_CASE("Krylov dimension grows until the wanted Ritz pairs converge")
{
    const auto m = random_symmetric(2000, 0.01, 3);
    const auto oracle = test::eigen_oracle(test::dense(m));
    auto cfg = config(8);
    const auto r = solve_topk(m, cfg);
    CHECK(r.lanczos_restarts > 0);
    CHECK(r.krylov_dimension > default_iterations(8, 2000));
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(test::relative_error(r.eigenvalues[i], oracle.values[i]) <= 1e-8);
    }

    // A fixed dimension is honoured as given.
    cfg.lanczos.iterations = 64;
    const auto fixed = solve_topk(m, cfg);
    CHECK(fixed.lanczos_restarts == 0);
    CHECK(fixed.krylov_dimension == 64);
}

TEST_CASE("single accumulation loses accuracy on an ill-conditioned 500 x 500 matrix")
{
    const auto m = ill_conditioned(500, 1e6, 0.5, 0.01, 3);
    CHECK(is_symmetric(m, 0.0));
    const auto fdf = solve_topk(m, config(8, PrecisionConfig::fdf()));
    const auto fff = solve_topk(m, config(8, PrecisionConfig::fff()));
    CHECK(fff.metrics.l2_reconstruction_error > fdf.metrics.l2_reconstruction_error);
}

TEST_CASE("random orthogonal mixing of an orthonormal basis stays orthonormal in single precision")
{
    const std::size_t n = 300, kp = 12;
    const auto plan = std::make_shared<const PartitionPlan>(
        partition_by_rows(std::vector<offset_t>(n + 1, 0), 3));
    Eigen::MatrixXd q(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(kp));
    for (std::size_t c = 0; c < kp; ++c) {
        const auto v = test::random_vector(n, 50 + c);
        q.col(static_cast<Eigen::Index>(c)) = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(n));
    }
    const Eigen::MatrixXd basis_m = Eigen::HouseholderQR<Eigen::MatrixXd>(q).householderQ() *
                                    Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(kp));
    const auto r = test::random_vector(kp * kp, 77);
    const Eigen::MatrixXd mix = Eigen::HouseholderQR<Eigen::MatrixXd>(
                                    Eigen::Map<const Eigen::MatrixXd>(r.data(), static_cast<Eigen::Index>(kp),
                                                                      static_cast<Eigen::Index>(kp)))
                                    .householderQ();

    std::vector<PartitionedVector<float>> basis;
    for (std::size_t c = 0; c < kp; ++c) {
        std::vector<float> col(n);
        for (std::size_t i = 0; i < n; ++i) {
            col[i] = static_cast<float>(basis_m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)));
        }
        basis.emplace_back(plan, col);
    }
    DenseMatrix<float> v(kp);
    for (std::size_t i = 0; i < kp; ++i) {
        for (std::size_t j = 0; j < kp; ++j) {
            v(i, j) = static_cast<float>(mix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        }
    }
    WorkerPool pool(3, ExecutionMode::Threaded);
    const auto out = reconstruct_eigenvectors<float, float, float>(
        pool, std::span<const PartitionedVector<float>>(basis), v, kp);
    const Eigen::MatrixXd want = basis_m * mix;
    for (std::size_t a = 0; a < kp; ++a) {
        for (std::size_t b = 0; b < kp; ++b) {
            double d = 0;
            for (std::size_t i = 0; i < n; ++i) {
                d += static_cast<double>(out[a].data()[i]) * out[b].data()[i];
            }
            CHECK(std::abs(d - (a == b ? 1.0 : 0.0)) < 1e-6);
        }
        // Dense product oracle, up to the sign convention.
        double dot = 0;
        for (std::size_t i = 0; i < n; ++i) {
            dot += out[a].data()[i] * want(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a));
        }
        CHECK(std::abs(dot) == doctest::Approx(1.0).epsilon(1e-6));
    }
}
