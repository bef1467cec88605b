#pragma once

// Shared helpers for the tests: dense views of sparse matrices and oracles
// built on Eigen, which shares no code with the library.

#include "tkeig/sparse.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace tkeig::test {

inline Eigen::MatrixXd dense(const CsrMatrix& m)
{
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.num_rows()),
                                              static_cast<Eigen::Index>(m.num_cols()));
    for (std::size_t r = 0; r < m.num_rows(); ++r) {
        for (auto k = m.row_offsets()[r]; k < m.row_offsets()[r + 1]; ++k) {
            d(static_cast<Eigen::Index>(r), m.col_indices()[k]) += m.values()[k];
        }
    }
    return d;
}

inline CsrMatrix from_dense(const Eigen::MatrixXd& d)
{
    CooMatrix coo{static_cast<std::size_t>(d.rows()), static_cast<std::size_t>(d.cols()), {}};
    for (Eigen::Index r = 0; r < d.rows(); ++r) {
        for (Eigen::Index c = 0; c < d.cols(); ++c) {
            if (d(r, c) != 0.0) {
                coo.entries.push_back({static_cast<index_t>(r), static_cast<index_t>(c), d(r, c)});
            }
        }
    }
    return coo_to_csr(coo);
}

inline CsrMatrix diagonal(const std::vector<double>& d)
{
    CooMatrix coo{d.size(), d.size(), {}};
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] != 0.0) {
            coo.entries.push_back({static_cast<index_t>(i), static_cast<index_t>(i), d[i]});
        }
    }
    return coo_to_csr(coo);
}

// Eigen's self-adjoint solver, sorted by |lambda| descending, ties by value
// descending.
struct EigenOracle {
    std::vector<double> values;
    Eigen::MatrixXd vectors; // columns
};

inline EigenOracle eigen_oracle(const Eigen::MatrixXd& a)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    const auto& ev = es.eigenvalues();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(ev.size()));
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        order[static_cast<std::size_t>(i)] = i;
    }
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
        if (std::abs(ev(x)) != std::abs(ev(y))) {
            return std::abs(ev(x)) > std::abs(ev(y));
        }
        return ev(x) > ev(y);
    });
    EigenOracle out;
    out.vectors.resize(a.rows(), a.cols());
    for (std::size_t i = 0; i < order.size(); ++i) {
        out.values.push_back(ev(order[i]));
        out.vectors.col(static_cast<Eigen::Index>(i)) = es.eigenvectors().col(order[i]);
    }
    return out;
}

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) {
        x = dist(rng);
    }
    return v;
}

inline double relative_error(double got, double want)
{
    return want == 0.0 ? std::abs(got) : std::abs(got - want) / std::abs(want);
}

} // namespace tkeig::test
