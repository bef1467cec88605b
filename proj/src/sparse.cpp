#include "tkeig/sparse.hpp"

#include "tkeig/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace tkeig {

namespace {

constexpr std::size_t kMaxDim = std::numeric_limits<index_t>::max();

void check_dims(std::size_t rows, std::size_t cols)
{
    if (rows > kMaxDim || cols > kMaxDim) {
        throw StructuralError("matrix dimensions exceed 32-bit index range");
    }
}

} // namespace

void validate(const CooMatrix& m)
{
    check_dims(m.num_rows, m.num_cols);
    for (const auto& e : m.entries) {
        if (e.row >= m.num_rows || e.col >= m.num_cols) {
            throw StructuralError("entry (" + std::to_string(e.row) + ", " + std::to_string(e.col) +
                                  ") outside " + std::to_string(m.num_rows) + "x" +
                                  std::to_string(m.num_cols) + " matrix");
        }
    }
}

CooMatrix normalized(CooMatrix m)
{
    validate(m);
    auto& es = m.entries;
    std::sort(es.begin(), es.end(), [](const CooEntry& a, const CooEntry& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::size_t out = 0;
    for (std::size_t i = 0; i < es.size(); ++i) {
        if (out > 0 && es[out - 1].row == es[i].row && es[out - 1].col == es[i].col) {
            es[out - 1].value += es[i].value;
        } else {
            es[out++] = es[i];
        }
    }
    es.resize(out);
    return m;
}

CsrMatrix::CsrMatrix(std::size_t num_rows, std::size_t num_cols, std::vector<offset_t> row_offsets,
                     std::vector<index_t> col_indices, std::vector<double> values)
    : num_rows_(num_rows), num_cols_(num_cols), row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)), values_(std::move(values))
{
    check_dims(num_rows_, num_cols_);
    if (row_offsets_.size() != num_rows_ + 1) {
        throw StructuralError("row_offsets must have num_rows + 1 entries");
    }
    if (col_indices_.size() != values_.size()) {
        throw StructuralError("col_indices and values differ in length");
    }
    if (row_offsets_.front() != 0 || row_offsets_.back() != col_indices_.size()) {
        throw StructuralError("row_offsets must start at 0 and end at nnz");
    }
    for (std::size_t r = 0; r < num_rows_; ++r) {
        const auto lo = row_offsets_[r];
        const auto hi = row_offsets_[r + 1];
        if (hi < lo) {
            throw StructuralError("row_offsets decrease at row " + std::to_string(r));
        }
        for (auto k = lo; k < hi; ++k) {
            if (col_indices_[k] >= num_cols_) {
                throw StructuralError("column index out of range in row " + std::to_string(r));
            }
            if (k > lo && col_indices_[k] <= col_indices_[k - 1]) {
                throw StructuralError("columns not strictly increasing in row " +
                                      std::to_string(r));
            }
        }
    }
}

CsrMatrix coo_to_csr(const CooMatrix& m)
{
    validate(m);
    const std::size_t n = m.num_rows;

    // Counting sort by row, then sort + merge columns within each row.
    std::vector<offset_t> counts(n + 1, 0);
    for (const auto& e : m.entries) {
        ++counts[e.row + 1];
    }
    std::partial_sum(counts.begin(), counts.end(), counts.begin());
    std::vector<std::pair<index_t, double>> bucket(m.entries.size());
    {
        std::vector<offset_t> cursor(counts.begin(), counts.end() - 1);
        for (const auto& e : m.entries) {
            bucket[cursor[e.row]++] = {e.col, e.value};
        }
    }

    std::vector<offset_t> offsets(n + 1, 0);
    std::vector<index_t> cols;
    std::vector<double> vals;
    cols.reserve(bucket.size());
    vals.reserve(bucket.size());
    for (std::size_t r = 0; r < n; ++r) {
        auto first = bucket.begin() + static_cast<std::ptrdiff_t>(counts[r]);
        auto last = bucket.begin() + static_cast<std::ptrdiff_t>(counts[r + 1]);
        std::stable_sort(first, last,
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        for (auto it = first; it != last; ++it) {
            if (it != first && it->first == cols.back()) {
                vals.back() += it->second;
            } else {
                cols.push_back(it->first);
                vals.push_back(it->second);
            }
        }
        offsets[r + 1] = cols.size();
    }
    return CsrMatrix(m.num_rows, m.num_cols, std::move(offsets), std::move(cols), std::move(vals));
}

CooMatrix csr_to_coo(const CsrMatrix& m)
{
    CooMatrix out{m.num_rows(), m.num_cols(), {}};
    out.entries.reserve(m.nnz());
    const auto offsets = m.row_offsets();
    const auto cols = m.col_indices();
    const auto vals = m.values();
    for (std::size_t r = 0; r < m.num_rows(); ++r) {
        for (auto k = offsets[r]; k < offsets[r + 1]; ++k) {
            out.entries.push_back({static_cast<index_t>(r), cols[k], vals[k]});
        }
    }
    return out;
}

bool is_symmetric(const CsrView<double>& m, double rel_tol)
{
    if (m.num_rows != m.num_cols) {
        return false;
    }
    for (std::size_t r = 0; r < m.num_rows; ++r) {
        for (auto k = m.row_offsets[r]; k < m.row_offsets[r + 1]; ++k) {
            const std::size_t c = m.col_indices[k];
            const double v = m.values[k];
            const auto first = m.col_indices.begin() + static_cast<std::ptrdiff_t>(m.row_offsets[c]);
            const auto last =
                m.col_indices.begin() + static_cast<std::ptrdiff_t>(m.row_offsets[c + 1]);
            const auto it = std::lower_bound(first, last, static_cast<index_t>(r));
            double mirror = 0.0;
            if (it != last && *it == r) {
                mirror = m.values[static_cast<std::size_t>(it - m.col_indices.begin())];
            } else if (v == 0.0) {
                continue; // explicit zero without a partner
            } else {
                return false;
            }
            if (std::abs(v - mirror) > rel_tol * std::max(std::abs(v), std::abs(mirror))) {
                return false;
            }
        }
    }
    return true;
}

CsrMatrix symmetrize(const CsrMatrix& m)
{
    if (m.num_rows() != m.num_cols()) {
        throw ContractViolation("symmetrize requires a square matrix");
    }
    CooMatrix coo{m.num_rows(), m.num_cols(), {}};
    coo.entries.reserve(2 * m.nnz());
    const auto offsets = m.row_offsets();
    for (std::size_t r = 0; r < m.num_rows(); ++r) {
        for (auto k = offsets[r]; k < offsets[r + 1]; ++k) {
            const auto c = m.col_indices()[k];
            const double half = 0.5 * m.values()[k];
            coo.entries.push_back({static_cast<index_t>(r), c, half});
            coo.entries.push_back({c, static_cast<index_t>(r), half});
        }
    }
    return coo_to_csr(coo);
}

double norm_one(const CsrMatrix& m)
{
    std::vector<double> col_sums(m.num_cols(), 0.0);
    for (std::size_t k = 0; k < m.nnz(); ++k) {
        col_sums[m.col_indices()[k]] += std::abs(m.values()[k]);
    }
    return col_sums.empty() ? 0.0 : *std::max_element(col_sums.begin(), col_sums.end());
}

std::size_t PartitionPlan::max_load() const noexcept
{
    return nnz_per_partition.empty()
               ? 0
               : *std::max_element(nnz_per_partition.begin(), nnz_per_partition.end());
}

namespace {

void check_partition_count(std::size_t rows, std::size_t g)
{
    if (g == 0 || g > rows) {
        throw InvalidPartitionError("cannot split " + std::to_string(rows) + " rows into " +
                                    std::to_string(g) + " non-empty partitions");
    }
}

PartitionPlan make_plan(std::span<const offset_t> offsets, std::vector<std::size_t> boundaries)
{
    PartitionPlan plan;
    plan.num_partitions = boundaries.size() - 1;
    plan.nnz_per_partition.resize(plan.num_partitions);
    for (std::size_t j = 0; j < plan.num_partitions; ++j) {
        plan.nnz_per_partition[j] =
            static_cast<std::size_t>(offsets[boundaries[j + 1]] - offsets[boundaries[j]]);
    }
    plan.boundaries = std::move(boundaries);
    return plan;
}

} // namespace

PartitionPlan partition_by_nnz(std::span<const offset_t> offsets, std::size_t g)
{
    const std::size_t n = offsets.empty() ? 0 : offsets.size() - 1;
    check_partition_count(n, g);
    auto load = [&](std::size_t lo, std::size_t hi) { return offsets[hi] - offsets[lo]; };

    offset_t heaviest_row = 0;
    for (std::size_t r = 0; r < n; ++r) {
        heaviest_row = std::max(heaviest_row, load(r, r + 1));
    }

    // Greedy packing gives the fewest contiguous parts with load <= cap.
    auto parts_needed = [&](offset_t cap) {
        std::size_t parts = 1;
        std::size_t start = 0;
        for (std::size_t r = 0; r < n; ++r) {
            if (load(start, r + 1) > cap) {
                ++parts;
                start = r;
            }
        }
        return parts;
    };

    offset_t lo = heaviest_row;
    offset_t hi = offsets[n];
    while (lo < hi) {
        const offset_t mid = lo + (hi - lo) / 2;
        if (parts_needed(mid) <= g) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    const offset_t cap = lo;

    // suffix_parts[r]: fewest parts covering rows [r, n) under cap. next(r) is
    // monotone in r, so a single two-pointer pass from the right suffices.
    std::vector<std::size_t> suffix_parts(n + 1, 0);
    {
        std::size_t next = n;
        for (std::size_t r = n; r-- > 0;) {
            while (load(r, next) > cap) {
                --next;
            }
            suffix_parts[r] = 1 + suffix_parts[next];
        }
    }

    // Earliest boundaries: each cut is the smallest row such that the remainder
    // still fits into the remaining partitions (non-empty, under cap).
    std::vector<std::size_t> boundaries{0};
    for (std::size_t t = 1; t < g; ++t) {
        const std::size_t prev = boundaries.back();
        const std::size_t remaining = g - t;
        std::size_t r = prev + 1;
        while (suffix_parts[r] > remaining) {
            ++r;
        }
        boundaries.push_back(r);
    }
    boundaries.push_back(n);
    return make_plan(offsets, std::move(boundaries));
}

PartitionPlan partition_by_rows(std::span<const offset_t> offsets, std::size_t g)
{
    const std::size_t n = offsets.empty() ? 0 : offsets.size() - 1;
    check_partition_count(n, g);
    std::vector<std::size_t> boundaries{0};
    for (std::size_t j = 0; j < g; ++j) {
        boundaries.push_back(boundaries.back() + n / g + (j < n % g ? 1 : 0));
    }
    return make_plan(offsets, std::move(boundaries));
}

MatrixStats matrix_stats(std::size_t rows, std::size_t cols, std::size_t nnz)
{
    MatrixStats s;
    s.rows = rows;
    s.cols = cols;
    s.nonzeros = nnz;
    const double cells = static_cast<double>(rows) * static_cast<double>(cols);
    s.sparsity_percent = cells > 0 ? 100.0 * static_cast<double>(nnz) / cells : 0.0;
    s.coo_size_bytes = nnz * kCooEntryBytes;
    return s;
}

MatrixStats matrix_stats(const CooMatrix& m)
{
    return matrix_stats(m.num_rows, m.num_cols, m.entries.size());
}

} // namespace tkeig
