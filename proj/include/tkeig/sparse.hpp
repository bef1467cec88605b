#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tkeig {

// Storage-format integer types. Column indices are 32-bit on disk and in
// memory; row offsets are 64-bit so nnz can exceed 2^32.
using index_t = std::uint32_t;
using offset_t = std::uint64_t;

struct CooEntry {
    index_t row = 0;
    index_t col = 0;
    double value = 0.0;

    friend bool operator==(const CooEntry&, const CooEntry&) = default;
};

struct CooMatrix {
    std::size_t num_rows = 0;
    std::size_t num_cols = 0;
    std::vector<CooEntry> entries;
};

// Throws StructuralError if any entry lies outside the declared shape or the
// shape does not fit 32-bit indices.
void validate(const CooMatrix& m);

// Sorts entries by (row, col) and sums duplicate coordinates.
CooMatrix normalized(CooMatrix m);

// Non-owning CSR arrays. Offsets are absolute into `col_indices`/`values`.
template <class V>
struct CsrView {
    std::size_t num_rows = 0;
    std::size_t num_cols = 0;
    std::span<const offset_t> row_offsets;
    std::span<const index_t> col_indices;
    std::span<const V> values;

    std::size_t nnz() const noexcept { return col_indices.size(); }
    std::size_t row_nnz(std::size_t r) const noexcept
    {
        return static_cast<std::size_t>(row_offsets[r + 1] - row_offsets[r]);
    }
};

// Owning CSR matrix with double values. Construction validates the CSR
// invariants: offsets start at 0, are non-decreasing and end at nnz; columns
// are in range and strictly increasing within each row.
class CsrMatrix {
public:
    CsrMatrix() : row_offsets_(1, 0) {}
    CsrMatrix(std::size_t num_rows, std::size_t num_cols, std::vector<offset_t> row_offsets,
              std::vector<index_t> col_indices, std::vector<double> values);

    std::size_t num_rows() const noexcept { return num_rows_; }
    std::size_t num_cols() const noexcept { return num_cols_; }
    std::size_t nnz() const noexcept { return col_indices_.size(); }

    std::span<const offset_t> row_offsets() const noexcept { return row_offsets_; }
    std::span<const index_t> col_indices() const noexcept { return col_indices_; }
    std::span<const double> values() const noexcept { return values_; }

    CsrView<double> view() const noexcept
    {
        return {num_rows_, num_cols_, row_offsets_, col_indices_, values_};
    }

    friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;

private:
    std::size_t num_rows_ = 0;
    std::size_t num_cols_ = 0;
    std::vector<offset_t> row_offsets_;
    std::vector<index_t> col_indices_;
    std::vector<double> values_;
};

// Duplicate coordinates are summed; columns end up sorted within each row.
CsrMatrix coo_to_csr(const CooMatrix& m);
CooMatrix csr_to_coo(const CsrMatrix& m);

// Symmetry check on structure and values: every (r, c, v) must have a
// matching (c, r, v') with |v - v'| <= rel_tol * max(|v|, |v'|).
bool is_symmetric(const CsrView<double>& m, double rel_tol = 0.0);
inline bool is_symmetric(const CsrMatrix& m, double rel_tol = 0.0)
{
    return is_symmetric(m.view(), rel_tol);
}

// (M + M^T) / 2. Requires a square matrix.
CsrMatrix symmetrize(const CsrMatrix& m);

// Max absolute column sum.
double norm_one(const CsrMatrix& m);

struct PartitionPlan {
    std::size_t num_partitions = 0;
    std::vector<std::size_t> boundaries;        // G + 1 row indices
    std::vector<std::size_t> nnz_per_partition; // G loads

    std::size_t num_rows() const noexcept { return boundaries.empty() ? 0 : boundaries.back(); }
    std::size_t begin(std::size_t part) const noexcept { return boundaries[part]; }
    std::size_t end(std::size_t part) const noexcept { return boundaries[part + 1]; }
    std::size_t rows(std::size_t part) const noexcept { return end(part) - begin(part); }
    std::size_t max_load() const noexcept;

    friend bool operator==(const PartitionPlan&, const PartitionPlan&) = default;
};

// Contiguous row ranges minimising the heaviest partition's nnz. Among the
// optimal splits, boundaries are chosen as early as possible.
PartitionPlan partition_by_nnz(std::span<const offset_t> row_offsets, std::size_t g);
inline PartitionPlan partition_by_nnz(const CsrMatrix& m, std::size_t g)
{
    return partition_by_nnz(m.row_offsets(), g);
}

// Row-count split (first num_rows % g partitions get one extra row). Used as
// the naive baseline for balance comparisons.
PartitionPlan partition_by_rows(std::span<const offset_t> row_offsets, std::size_t g);

struct MatrixStats {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t nonzeros = 0;
    double sparsity_percent = 0.0;
    std::size_t coo_size_bytes = 0; // 32-bit row, 32-bit col, 32-bit value

    double coo_size_gb() const noexcept { return static_cast<double>(coo_size_bytes) / 1e9; }
};

inline constexpr std::size_t kCooEntryBytes = 4 + 4 + 4;

MatrixStats matrix_stats(std::size_t rows, std::size_t cols, std::size_t nnz);
MatrixStats matrix_stats(const CooMatrix& m);

} // namespace tkeig
