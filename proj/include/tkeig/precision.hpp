#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <type_traits>

namespace tkeig {

enum class Precision : unsigned char { Single, Double };

constexpr std::size_t byte_width(Precision p) noexcept { return p == Precision::Single ? 4 : 8; }

// Three-letter configuration: storage of vectors and matrix values, the
// accumulation type used inside every Lanczos kernel, and the type the
// Jacobi phase runs in. "fdf" is single storage, double accumulation,
// single Jacobi.
struct PrecisionConfig {
    Precision storage = Precision::Double;
    Precision accumulate = Precision::Double;
    Precision jacobi = Precision::Double;

    std::string name() const; // lower-case, e.g. "fdf"

    static PrecisionConfig parse(std::string_view name); // case-insensitive
    static PrecisionConfig fff() { return {Precision::Single, Precision::Single, Precision::Single}; }
    static PrecisionConfig fdf() { return {Precision::Single, Precision::Double, Precision::Single}; }
    static PrecisionConfig ddd() { return {Precision::Double, Precision::Double, Precision::Double}; }

    friend bool operator==(const PrecisionConfig&, const PrecisionConfig&) = default;
};

// Maps Precision to the C++ floating type.
template <Precision P>
using real_t = std::conditional_t<P == Precision::Single, float, double>;

// Calls fn(tag<S>{}, tag<A>{}) with the storage/accumulate types selected by
// cfg. The Jacobi type is dispatched separately.
template <class T>
struct type_tag {
    using type = T;
};

template <class Fn>
decltype(auto) dispatch_storage_accumulate(const PrecisionConfig& cfg, Fn&& fn)
{
    if (cfg.storage == Precision::Single) {
        if (cfg.accumulate == Precision::Single) {
            return fn(type_tag<float>{}, type_tag<float>{});
        }
        return fn(type_tag<float>{}, type_tag<double>{});
    }
    if (cfg.accumulate == Precision::Single) {
        return fn(type_tag<double>{}, type_tag<float>{});
    }
    return fn(type_tag<double>{}, type_tag<double>{});
}

} // namespace tkeig
