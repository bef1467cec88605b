#pragma once

// Matrix Market text files and the TKEV binary CSR format.
//
// TKEV layout, little-endian, 40-byte header:
//   0  char[4]  magic "TKEV"
//   4  u16      format version (1)
//   6  u8       flags: bit 0 symmetric, bit 1 columns sorted within rows
//   7  u8       value type: 1 = f32, 2 = f64
//   8  u8       index width in bits: 32
//   9  u8[7]    reserved, zero
//   16 u64      num_rows
//   24 u64      num_cols
//   32 u64      nnz
// followed by row_offsets u64[num_rows + 1], col_indices u32[nnz], zero
// padding to an 8-byte boundary, values[nnz].

#include "tkeig/sparse.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

namespace tkeig {

// Coordinate real/integer/pattern, general or symmetric. Symmetric files
// are expanded to both triangles; pattern entries get value 1.0.
// Throws ParseError (with line number) or StructuralError.
CooMatrix parse_matrix_market(const std::filesystem::path& path);
CooMatrix parse_matrix_market(std::istream& in);

// Writes "coordinate real general" with round-trippable values.
void write_matrix_market(const std::filesystem::path& path, const CsrMatrix& m);
void write_matrix_market(std::ostream& out, const CsrMatrix& m);

enum class ValueType : std::uint8_t { F32 = 1, F64 = 2 };

inline constexpr std::uint16_t kFormatVersion = 1;
inline constexpr std::size_t kHeaderBytes = 40;
inline constexpr std::uint8_t kFlagSymmetric = 1;
inline constexpr std::uint8_t kFlagSorted = 2;

struct BinaryHeader {
    std::uint16_t version = kFormatVersion;
    std::uint8_t flags = 0;
    ValueType value_type = ValueType::F64;
    std::uint8_t index_width = 32;
    std::uint64_t num_rows = 0;
    std::uint64_t num_cols = 0;
    std::uint64_t nnz = 0;

    bool symmetric() const noexcept { return (flags & kFlagSymmetric) != 0; }
    std::size_t value_bytes() const noexcept { return value_type == ValueType::F32 ? 4 : 8; }
    std::uint64_t offsets_position() const noexcept { return kHeaderBytes; }
    std::uint64_t columns_position() const noexcept { return kHeaderBytes + 8 * (num_rows + 1); }
    std::uint64_t values_position() const noexcept;
    std::uint64_t file_bytes() const noexcept;
};

// F32 rounds values; the symmetric flag is computed from the data.
void write_binary(const std::filesystem::path& path, const CsrMatrix& m, ValueType type = ValueType::F64);

// Throws FormatError on bad magic/version/codes, StructuralError when the
// file length does not match the header.
BinaryHeader read_binary_header(const std::filesystem::path& path);

// Reads the whole file into memory.
CsrMatrix read_binary(const std::filesystem::path& path);

// Read-only mapping of a TKEV file. The arrays are served straight from the
// mapping; nothing is copied.
class MappedCsr {
public:
    MappedCsr() = default;
    ~MappedCsr();
    MappedCsr(MappedCsr&& other) noexcept;
    MappedCsr& operator=(MappedCsr&& other) noexcept;
    MappedCsr(const MappedCsr&) = delete;
    MappedCsr& operator=(const MappedCsr&) = delete;

    const BinaryHeader& header() const noexcept { return header_; }
    std::size_t num_rows() const noexcept { return static_cast<std::size_t>(header_.num_rows); }
    std::size_t num_cols() const noexcept { return static_cast<std::size_t>(header_.num_cols); }
    std::size_t nnz() const noexcept { return static_cast<std::size_t>(header_.nnz); }
    std::size_t file_bytes() const noexcept { return size_; }

    std::span<const offset_t> row_offsets() const noexcept;
    std::span<const index_t> col_indices() const noexcept;
    std::span<const float> values_f32() const; // throws FormatError on type mismatch
    std::span<const double> values_f64() const;

    CsrMatrix to_csr() const;

    // Drops resident pages of [first, first + bytes) of the mapping (rounded
    // outward to pages). The data stays readable; it is faulted in again.
    void release(const void* first, std::size_t bytes) const noexcept;
    void release_all() const noexcept;
    // Resident set of this mapping as reported by /proc/self/smaps, 0 when
    // unavailable.
    std::size_t resident_bytes() const;

    friend MappedCsr map_binary(const std::filesystem::path& path, bool verify);

private:
    void unmap() noexcept;

    BinaryHeader header_;
    const std::byte* base_ = nullptr;
    std::size_t size_ = 0;
};

// Maps the file. With verify, every CSR invariant is checked by streaming
// through the arrays, releasing pages as it goes. Errors are raised before
// any array is handed out.
MappedCsr map_binary(const std::filesystem::path& path, bool verify = true);

std::size_t page_size() noexcept;

} // namespace tkeig
