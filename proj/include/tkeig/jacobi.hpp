#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace tkeig {

// Square row-major dense matrix.
template <class T>
class DenseMatrix {
public:
    DenseMatrix() = default;
    explicit DenseMatrix(std::size_t order) : order_(order), values_(order * order, T{0}) {}

    static DenseMatrix identity(std::size_t order)
    {
        DenseMatrix m(order);
        for (std::size_t i = 0; i < order; ++i) {
            m(i, i) = T{1};
        }
        return m;
    }

    std::size_t order() const noexcept { return order_; }
    T& operator()(std::size_t r, std::size_t c) noexcept { return values_[r * order_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const noexcept { return values_[r * order_ + c]; }
    const std::vector<T>& values() const noexcept { return values_; }

private:
    std::size_t order_ = 0;
    std::vector<T> values_;
};

template <class T>
using DenseSymMatrix = DenseMatrix<T>;

template <class T>
struct JacobiOptions {
    double tol = 1e-10;           // relative: stop when off(A) <= tol * ||A||_F
    std::size_t max_sweeps = 30;
    // Called after every rotation with the current matrix. Test hook.
    std::function<void(const DenseMatrix<T>&)> on_rotation;
};

template <class T>
struct JacobiResult {
    std::vector<T> eigenvalues;   // sorted by |lambda| descending, ties by value descending
    DenseMatrix<T> eigenvectors;  // column c pairs with eigenvalues[c]
    std::size_t sweeps_used = 0;
    bool converged = false;
    std::vector<double> off_history; // off(A) before the first sweep and after each sweep
};

// Default tolerance for the Jacobi precision.
template <class T>
constexpr double default_jacobi_tol() noexcept
{
    return sizeof(T) == sizeof(float) ? 1e-6 : 1e-10;
}

// sqrt of the sum of squared off-diagonal entries.
template <class T>
double off_norm(const DenseMatrix<T>& a);
template <class T>
double frobenius_norm(const DenseMatrix<T>& a);

// Cyclic-by-row Jacobi. Each eigenvector's largest-magnitude entry is made
// positive. Throws ContractViolation when the input is not symmetric to
// within one ulp per entry. Non-convergence is reported through
// `converged`, with the best-effort decomposition still returned.
template <class T>
JacobiResult<T> jacobi_eigen(const DenseSymMatrix<T>& t, const JacobiOptions<T>& options = {});

// Permutation ordering eigenvalues by |lambda| descending, ties broken by
// value descending.
template <class T>
std::vector<std::size_t> modulus_order(const std::vector<T>& eigenvalues);

} // namespace tkeig
