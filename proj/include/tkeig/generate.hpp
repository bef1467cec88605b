#pragma once

// Deterministic synthetic matrices for tests, benchmarks and the CLI.

#include "tkeig/sparse.hpp"

#include <cstdint>
#include <optional>

namespace tkeig {

// Symmetric n x n matrix with about density * n^2 stored entries. Entries
// are uniform in [-1, 1]; each diagonal entry is present with the same
// probability. If norm_one_target is set the matrix is rescaled so that
// ||M||_1 equals it.
CsrMatrix random_symmetric(std::size_t n, double density, std::uint64_t seed,
                           std::optional<double> norm_one_target = std::nullopt);

// D^(1/2) (I + c R) D^(1/2) with d_i log-spaced over [1, spread] and R a
// random symmetric sparse matrix scaled so that ||R||_2 <= ||R||_1 <= 1.
// For c < 1 the result is positive definite with condition number between
// spread (1 - c) / (1 + c) and spread (1 + c) / (1 - c).
CsrMatrix ill_conditioned(std::size_t n, double spread, double coupling, double density, std::uint64_t seed);

// Large symmetric matrix with exactly 10 n stored entries (n even):
// a full diagonal plus 4 or 5 off-diagonal pairs per row at distinct
// circulant offsets. A few diagonal spikes give well separated dominant
// eigenvalues.
CsrMatrix synthetic_large(std::size_t n, std::uint64_t seed);

} // namespace tkeig
