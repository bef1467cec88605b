#include "tkeig/jacobi.hpp"

#include "tkeig/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tkeig {

template <class T>
double off_norm(const DenseMatrix<T>& a)
{
    double sum = 0.0;
    for (std::size_t r = 0; r < a.order(); ++r) {
        for (std::size_t c = 0; c < a.order(); ++c) {
            if (r != c) {
                const double v = a(r, c);
                sum += v * v;
            }
        }
    }
    return std::sqrt(sum);
}

template <class T>
double frobenius_norm(const DenseMatrix<T>& a)
{
    double sum = 0.0;
    for (const T v : a.values()) {
        sum += static_cast<double>(v) * static_cast<double>(v);
    }
    return std::sqrt(sum);
}

template <class T>
std::vector<std::size_t> modulus_order(const std::vector<T>& eigenvalues)
{
    std::vector<std::size_t> order(eigenvalues.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const T ma = std::abs(eigenvalues[a]);
        const T mb = std::abs(eigenvalues[b]);
        if (ma != mb) {
            return ma > mb;
        }
        return eigenvalues[a] > eigenvalues[b];
    });
    return order;
}

namespace {

template <class T>
void check_symmetric(const DenseMatrix<T>& a)
{
    for (std::size_t r = 0; r < a.order(); ++r) {
        for (std::size_t c = r + 1; c < a.order(); ++c) {
            const T x = a(r, c);
            const T y = a(c, r);
            const T big = std::max(std::abs(x), std::abs(y));
            const T ulp = std::nextafter(big, std::numeric_limits<T>::infinity()) - big;
            if (std::abs(x - y) > ulp) {
                throw ContractViolation("jacobi_eigen: matrix is not symmetric");
            }
        }
    }
}

// Rotation in the (p, q) plane zeroing a(p, q). `vt` holds eigenvectors as
// rows so both updates walk contiguous memory.
template <class T>
void rotate(DenseMatrix<T>& a, DenseMatrix<T>& vt, std::size_t p, std::size_t q)
{
    const T apq = a(p, q);
    const T theta = (a(q, q) - a(p, p)) / (T{2} * apq);
    T t;
    if (std::abs(theta) > T{1} / std::sqrt(std::numeric_limits<T>::epsilon())) {
        t = T{1} / (T{2} * theta); // theta^2 would lose everything but the leading term
    } else {
        t = (theta >= T{0} ? T{1} : T{-1}) / (std::abs(theta) + std::sqrt(theta * theta + T{1}));
    }
    const T c = T{1} / std::sqrt(t * t + T{1});
    const T s = t * c;

    const std::size_t n = a.order();
    for (std::size_t r = 0; r < n; ++r) {
        if (r == p || r == q) {
            continue;
        }
        const T arp = a(p, r);
        const T arq = a(q, r);
        const T new_p = c * arp - s * arq;
        const T new_q = s * arp + c * arq;
        a(p, r) = new_p;
        a(r, p) = new_p;
        a(q, r) = new_q;
        a(r, q) = new_q;
    }
    a(p, p) -= t * apq;
    a(q, q) += t * apq;
    a(p, q) = T{0};
    a(q, p) = T{0};

    T* vp = &vt(p, 0);
    T* vq = &vt(q, 0);
    for (std::size_t r = 0; r < n; ++r) {
        const T x = vp[r];
        const T y = vq[r];
        vp[r] = c * x - s * y;
        vq[r] = s * x + c * y;
    }
}

} // namespace

template <class T>
JacobiResult<T> jacobi_eigen(const DenseSymMatrix<T>& t, const JacobiOptions<T>& options)
{
    if (!(options.tol > 0.0)) {
        throw InvalidConfigError("jacobi_eigen: tolerance must be positive");
    }
    check_symmetric(t);

    const std::size_t n = t.order();
    DenseMatrix<T> a = t;
    DenseMatrix<T> vt = DenseMatrix<T>::identity(n);
    JacobiResult<T> result;

    const double threshold = options.tol * frobenius_norm(a);
    double off = off_norm(a);
    result.off_history.push_back(off);
    while (!(off <= threshold) && result.sweeps_used < options.max_sweeps) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a(p, q) == T{0}) {
                    continue;
                }
                rotate(a, vt, p, q);
                if (options.on_rotation) {
                    options.on_rotation(a);
                }
            }
        }
        ++result.sweeps_used;
        off = off_norm(a);
        result.off_history.push_back(off);
    }
    result.converged = off <= threshold;

    std::vector<T> diag(n);
    for (std::size_t i = 0; i < n; ++i) {
        diag[i] = a(i, i);
    }
    const auto order = modulus_order(diag);
    result.eigenvalues.resize(n);
    result.eigenvectors = DenseMatrix<T>(n);
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t src = order[c];
        result.eigenvalues[c] = diag[src];
        std::size_t lead = 0;
        for (std::size_t r = 1; r < n; ++r) {
            if (std::abs(vt(src, r)) > std::abs(vt(src, lead))) {
                lead = r;
            }
        }
        const T sign = vt(src, lead) < T{0} ? T{-1} : T{1};
        for (std::size_t r = 0; r < n; ++r) {
            result.eigenvectors(r, c) = sign * vt(src, r);
        }
    }
    return result;
}

template double off_norm(const DenseMatrix<float>&);
template double off_norm(const DenseMatrix<double>&);
template double frobenius_norm(const DenseMatrix<float>&);
template double frobenius_norm(const DenseMatrix<double>&);
template std::vector<std::size_t> modulus_order(const std::vector<float>&);
template std::vector<std::size_t> modulus_order(const std::vector<double>&);
template JacobiResult<float> jacobi_eigen(const DenseSymMatrix<float>&, const JacobiOptions<float>&);
template JacobiResult<double> jacobi_eigen(const DenseSymMatrix<double>&,
                                           const JacobiOptions<double>&);

} // namespace tkeig
