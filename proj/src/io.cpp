#include "tkeig/io.hpp"

#include "tkeig/error.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string_view>
#include <utility>
#include <vector>

#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

static_assert(std::endian::native == std::endian::little, "TKEV files are read and written in host order");

namespace tkeig {

namespace {

std::string lower(std::string_view s)
{
    std::string out(s);
    for (auto& c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

std::vector<std::string_view> split_ws(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
        }
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
        }
        if (i > start) {
            out.push_back(line.substr(start, i - start));
        }
    }
    return out;
}

bool blank(std::string_view line)
{
    return std::all_of(line.begin(), line.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

std::uint64_t parse_count(std::string_view tok, std::size_t line_no, const char* what)
{
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec == std::errc::result_out_of_range) {
        throw StructuralError("line " + std::to_string(line_no) + ": " + what + " overflows 64 bits");
    }
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
        throw ParseError(line_no, std::string("invalid ") + what + " '" + std::string(tok) + "'");
    }
    return v;
}

double parse_value(std::string_view tok, std::size_t line_no)
{
    if (!tok.empty() && tok.front() == '+') {
        tok.remove_prefix(1);
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
        throw ParseError(line_no, "invalid value '" + std::string(tok) + "'");
    }
    return v;
}

} // namespace

CooMatrix parse_matrix_market(std::istream& in)
{
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) {
        throw ParseError(1, "empty file");
    }
    ++line_no;
    const auto banner = split_ws(line);
    if (banner.size() != 5 || lower(banner[0]) != "%%matrixmarket") {
        throw ParseError(line_no, "missing %%MatrixMarket header");
    }
    if (lower(banner[1]) != "matrix") {
        throw ParseError(line_no, "unsupported object '" + std::string(banner[1]) + "'");
    }
    if (lower(banner[2]) != "coordinate") {
        throw ParseError(line_no, "unsupported format '" + std::string(banner[2]) + "' (coordinate only)");
    }
    const std::string field = lower(banner[3]);
    if (field != "real" && field != "integer" && field != "pattern") {
        throw ParseError(line_no, "unsupported field '" + std::string(banner[3]) + "'");
    }
    const std::string symmetry = lower(banner[4]);
    if (symmetry != "general" && symmetry != "symmetric") {
        throw ParseError(line_no, "unsupported symmetry '" + std::string(banner[4]) + "'");
    }
    const bool pattern = field == "pattern";
    const bool symmetric = symmetry == "symmetric";

    std::vector<std::string_view> tok;
    bool have_size = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line) || line[line.find_first_not_of(" \t")] == '%') {
            continue;
        }
        tok = split_ws(line);
        have_size = true;
        break;
    }
    if (!have_size) {
        throw ParseError(line_no, "missing size line");
    }
    if (tok.size() != 3) {
        throw ParseError(line_no, "size line must hold rows, columns and entry count");
    }
    const auto rows = parse_count(tok[0], line_no, "row count");
    const auto cols = parse_count(tok[1], line_no, "column count");
    const auto declared = parse_count(tok[2], line_no, "entry count");
    constexpr std::uint64_t max_dim = std::numeric_limits<index_t>::max();
    if (rows > max_dim || cols > max_dim) {
        throw StructuralError("line " + std::to_string(line_no) + ": dimensions exceed 32-bit indices");
    }
    if (symmetric && rows != cols) {
        throw StructuralError("line " + std::to_string(line_no) + ": symmetric matrix must be square");
    }

    CooMatrix m;
    m.num_rows = static_cast<std::size_t>(rows);
    m.num_cols = static_cast<std::size_t>(cols);
    m.entries.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(declared, 1u << 26) * (symmetric ? 2 : 1)));
    const std::size_t want = pattern ? 2 : 3;
    std::uint64_t seen = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line) || line[line.find_first_not_of(" \t")] == '%') {
            continue;
        }
        if (seen == declared) {
            throw ParseError(line_no, "more entries than declared (" + std::to_string(declared) + ")");
        }
        tok = split_ws(line);
        if (tok.size() != want) {
            throw ParseError(line_no, "expected " + std::to_string(want) + " fields, found " +
                                          std::to_string(tok.size()));
        }
        const auto r = parse_count(tok[0], line_no, "row index");
        const auto c = parse_count(tok[1], line_no, "column index");
        if (r == 0 || c == 0 || r > rows || c > cols) {
            throw StructuralError("line " + std::to_string(line_no) + ": entry (" + std::to_string(r) + ", " +
                                  std::to_string(c) + ") outside " + std::to_string(rows) + "x" +
                                  std::to_string(cols));
        }
        const double v = pattern ? 1.0 : parse_value(tok[2], line_no);
        const auto ri = static_cast<index_t>(r - 1);
        const auto ci = static_cast<index_t>(c - 1);
        m.entries.push_back({ri, ci, v});
        if (symmetric && ri != ci) {
            m.entries.push_back({ci, ri, v});
        }
        ++seen;
    }
    if (seen != declared) {
        throw ParseError(line_no, "expected " + std::to_string(declared) + " entries, found " +
                                      std::to_string(seen));
    }
    return m;
}

CooMatrix parse_matrix_market(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    return parse_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const CsrMatrix& m)
{
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << m.num_rows() << ' ' << m.num_cols() << ' ' << m.nnz() << '\n';
    out << std::setprecision(17);
    const auto offsets = m.row_offsets();
    for (std::size_t r = 0; r < m.num_rows(); ++r) {
        for (auto k = offsets[r]; k < offsets[r + 1]; ++k) {
            out << r + 1 << ' ' << m.col_indices()[k] + 1 << ' ' << m.values()[k] << '\n';
        }
    }
}

void write_matrix_market(const std::filesystem::path& path, const CsrMatrix& m)
{
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    write_matrix_market(out, m);
    if (!out) {
        throw Error("write failed: " + path.string());
    }
}

// Binary format ------------------------------------------------------------

std::uint64_t BinaryHeader::values_position() const noexcept
{
    const std::uint64_t end_cols = columns_position() + 4 * nnz;
    return (end_cols + 7) / 8 * 8;
}

std::uint64_t BinaryHeader::file_bytes() const noexcept
{
    return values_position() + value_bytes() * nnz;
}

namespace {

constexpr char kMagic[4] = {'T', 'K', 'E', 'V'};

template <class T>
void put(std::byte* dst, T v)
{
    std::memcpy(dst, &v, sizeof(T));
}

template <class T>
T get(const std::byte* src)
{
    T v;
    std::memcpy(&v, src, sizeof(T));
    return v;
}

std::array<std::byte, kHeaderBytes> encode(const BinaryHeader& h)
{
    std::array<std::byte, kHeaderBytes> b{};
    std::memcpy(b.data(), kMagic, 4);
    put<std::uint16_t>(b.data() + 4, h.version);
    put<std::uint8_t>(b.data() + 6, h.flags);
    put<std::uint8_t>(b.data() + 7, static_cast<std::uint8_t>(h.value_type));
    put<std::uint8_t>(b.data() + 8, h.index_width);
    put<std::uint64_t>(b.data() + 16, h.num_rows);
    put<std::uint64_t>(b.data() + 24, h.num_cols);
    put<std::uint64_t>(b.data() + 32, h.nnz);
    return b;
}

BinaryHeader decode(const std::byte* b, std::size_t available)
{
    if (available < kHeaderBytes) {
        if (available >= 4 && std::memcmp(b, kMagic, 4) != 0) {
            throw FormatError("bad magic: not a TKEV file");
        }
        throw StructuralError("file shorter than the TKEV header");
    }
    if (std::memcmp(b, kMagic, 4) != 0) {
        throw FormatError("bad magic: not a TKEV file");
    }
    BinaryHeader h;
    h.version = get<std::uint16_t>(b + 4);
    if (h.version != kFormatVersion) {
        throw FormatError("unsupported TKEV version " + std::to_string(h.version));
    }
    h.flags = get<std::uint8_t>(b + 6);
    const auto vt = get<std::uint8_t>(b + 7);
    if (vt != 1 && vt != 2) {
        throw FormatError("unknown value type code " + std::to_string(vt));
    }
    h.value_type = static_cast<ValueType>(vt);
    h.index_width = get<std::uint8_t>(b + 8);
    if (h.index_width != 32) {
        throw FormatError("unsupported index width " + std::to_string(h.index_width));
    }
    h.num_rows = get<std::uint64_t>(b + 16);
    h.num_cols = get<std::uint64_t>(b + 24);
    h.nnz = get<std::uint64_t>(b + 32);
    constexpr std::uint64_t limit = std::uint64_t{1} << 56;
    if (h.num_rows > std::numeric_limits<index_t>::max() || h.num_cols > std::numeric_limits<index_t>::max() ||
        h.nnz > limit) {
        throw StructuralError("TKEV header dimensions out of range");
    }
    return h;
}

void check_length(const BinaryHeader& h, std::uint64_t actual)
{
    if (actual != h.file_bytes()) {
        throw StructuralError("TKEV file is " + std::to_string(actual) + " bytes, header implies " +
                              std::to_string(h.file_bytes()));
    }
}

template <class T>
void write_array(std::ofstream& out, std::span<const T> a)
{
    out.write(reinterpret_cast<const char*>(a.data()), static_cast<std::streamsize>(a.size_bytes()));
}

} // namespace

void write_binary(const std::filesystem::path& path, const CsrMatrix& m, ValueType type)
{
    BinaryHeader h;
    h.flags = kFlagSorted | (m.num_rows() == m.num_cols() && is_symmetric(m) ? kFlagSymmetric : 0);
    h.value_type = type;
    h.num_rows = m.num_rows();
    h.num_cols = m.num_cols();
    h.nnz = m.nnz();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    const auto header = encode(h);
    out.write(reinterpret_cast<const char*>(header.data()), header.size());
    write_array(out, m.row_offsets());
    write_array(out, m.col_indices());
    const std::uint64_t pad = h.values_position() - (h.columns_position() + 4 * h.nnz);
    const char zeros[8] = {};
    out.write(zeros, static_cast<std::streamsize>(pad));
    if (type == ValueType::F64) {
        write_array(out, m.values());
    } else {
        std::vector<float> narrow(m.values().begin(), m.values().end());
        write_array(out, std::span<const float>(narrow));
    }
    if (!out) {
        throw Error("write failed: " + path.string());
    }
}

BinaryHeader read_binary_header(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    std::array<std::byte, kHeaderBytes> b{};
    in.read(reinterpret_cast<char*>(b.data()), b.size());
    const auto h = decode(b.data(), static_cast<std::size_t>(in.gcount()));
    check_length(h, std::filesystem::file_size(path));
    return h;
}

CsrMatrix read_binary(const std::filesystem::path& path)
{
    return map_binary(path, false).to_csr();
}

// Mapping -------------------------------------------------------------------

std::size_t page_size() noexcept
{
    static const auto size = static_cast<std::size_t>(::sysconf(_SC_PAGESIZE));
    return size;
}

MappedCsr::~MappedCsr()
{
    unmap();
}

MappedCsr::MappedCsr(MappedCsr&& other) noexcept
    : header_(other.header_), base_(std::exchange(other.base_, nullptr)), size_(std::exchange(other.size_, 0))
{
}

MappedCsr& MappedCsr::operator=(MappedCsr&& other) noexcept
{
    if (this != &other) {
        unmap();
        header_ = other.header_;
        base_ = std::exchange(other.base_, nullptr);
        size_ = std::exchange(other.size_, 0);
    }
    return *this;
}

void MappedCsr::unmap() noexcept
{
    if (base_) {
        ::munmap(const_cast<std::byte*>(base_), size_);
        base_ = nullptr;
        size_ = 0;
    }
}

std::span<const offset_t> MappedCsr::row_offsets() const noexcept
{
    return {reinterpret_cast<const offset_t*>(base_ + header_.offsets_position()), num_rows() + 1};
}

std::span<const index_t> MappedCsr::col_indices() const noexcept
{
    return {reinterpret_cast<const index_t*>(base_ + header_.columns_position()), nnz()};
}

std::span<const float> MappedCsr::values_f32() const
{
    if (header_.value_type != ValueType::F32) {
        throw FormatError("TKEV values are not f32");
    }
    return {reinterpret_cast<const float*>(base_ + header_.values_position()), nnz()};
}

std::span<const double> MappedCsr::values_f64() const
{
    if (header_.value_type != ValueType::F64) {
        throw FormatError("TKEV values are not f64");
    }
    return {reinterpret_cast<const double*>(base_ + header_.values_position()), nnz()};
}

CsrMatrix MappedCsr::to_csr() const
{
    std::vector<offset_t> offsets(row_offsets().begin(), row_offsets().end());
    std::vector<index_t> cols(col_indices().begin(), col_indices().end());
    std::vector<double> values;
    if (header_.value_type == ValueType::F64) {
        values.assign(values_f64().begin(), values_f64().end());
    } else {
        values.assign(values_f32().begin(), values_f32().end());
    }
    return CsrMatrix(num_rows(), num_cols(), std::move(offsets), std::move(cols), std::move(values));
}

void MappedCsr::release(const void* first, std::size_t bytes) const noexcept
{
    if (!base_ || bytes == 0) {
        return;
    }
    const auto page = page_size();
    const auto lo_addr = reinterpret_cast<std::uintptr_t>(first);
    const auto base_addr = reinterpret_cast<std::uintptr_t>(base_);
    const auto lo = std::max(lo_addr / page * page, base_addr);
    const auto hi = std::min((lo_addr + bytes + page - 1) / page * page, base_addr + (size_ + page - 1) / page * page);
    if (hi > lo) {
        ::madvise(reinterpret_cast<void*>(lo), hi - lo, MADV_DONTNEED);
    }
}

void MappedCsr::release_all() const noexcept
{
    release(base_, size_);
}

std::size_t MappedCsr::resident_bytes() const
{
    if (!base_) {
        return 0;
    }
    std::ifstream smaps("/proc/self/smaps");
    if (!smaps) {
        return 0;
    }
    const auto target = reinterpret_cast<std::uintptr_t>(base_);
    std::string line;
    bool inside = false;
    while (std::getline(smaps, line)) {
        const auto dash = line.find('-');
        if (dash != std::string::npos && dash > 0 && std::isxdigit(static_cast<unsigned char>(line[0])) &&
            line.find(' ') > dash) {
            std::uintptr_t start = 0;
            std::from_chars(line.data(), line.data() + dash, start, 16);
            inside = start == target;
            continue;
        }
        if (inside && line.rfind("Rss:", 0) == 0) {
            std::istringstream fields(line.substr(4));
            std::size_t kb = 0;
            fields >> kb;
            return kb * 1024;
        }
    }
    return 0;
}

namespace {

// Walks [first, first + count) of an array in page-sized chunks of about
// `chunk` bytes, calling fn on each chunk and releasing it afterwards.
template <class T, class Fn>
void stream_array(const MappedCsr& m, std::span<const T> a, std::size_t chunk, Fn&& fn)
{
    const std::size_t per = std::max<std::size_t>(1, chunk / sizeof(T));
    for (std::size_t i = 0; i < a.size(); i += per) {
        const auto part = a.subspan(i, std::min(per, a.size() - i));
        fn(i, part);
        m.release(part.data(), part.size_bytes());
    }
}

void verify_mapping(const MappedCsr& m)
{
    constexpr std::size_t chunk = std::size_t{8} << 20;
    const auto offsets = m.row_offsets();
    if (offsets.front() != 0 || offsets.back() != m.nnz()) {
        throw StructuralError("TKEV row offsets must start at 0 and end at nnz");
    }
    offset_t prev = 0;
    stream_array(m, offsets, chunk, [&](std::size_t, std::span<const offset_t> part) {
        for (const auto o : part) {
            if (o < prev || o > m.nnz()) {
                throw StructuralError("TKEV row offsets are not non-decreasing");
            }
            prev = o;
        }
    });
    // Columns in range and strictly increasing within each row.
    std::size_t row = 0;
    index_t last = 0;
    stream_array(m, m.col_indices(), chunk, [&](std::size_t first, std::span<const index_t> part) {
        for (std::size_t i = 0; i < part.size(); ++i) {
            const std::size_t k = first + i;
            bool row_start = false;
            while (offsets[row + 1] <= k) {
                ++row;
                row_start = true;
            }
            row_start = row_start || k == offsets[row];
            if (part[i] >= m.num_cols()) {
                throw StructuralError("TKEV column index out of range in row " + std::to_string(row));
            }
            if (!row_start && part[i] <= last) {
                throw StructuralError("TKEV columns not strictly increasing in row " + std::to_string(row));
            }
            last = part[i];
        }
    });
    m.release_all();
}

} // namespace

MappedCsr map_binary(const std::filesystem::path& path, bool verify)
{
    const int fd = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
    if (fd < 0) {
        throw Error("cannot open " + path.string());
    }
    struct ::stat st {};
    if (::fstat(fd, &st) != 0) {
        ::close(fd);
        throw Error("cannot stat " + path.string());
    }
    const auto size = static_cast<std::size_t>(st.st_size);
    // Header checks go through read() so a bad file is rejected before
    // anything is mapped.
    std::array<std::byte, kHeaderBytes> head{};
    const auto got = ::pread(fd, head.data(), head.size(), 0);
    BinaryHeader h;
    try {
        h = decode(head.data(), got < 0 ? 0 : static_cast<std::size_t>(got));
        check_length(h, size);
    } catch (...) {
        ::close(fd);
        throw;
    }
    void* addr = ::mmap(nullptr, size, PROT_READ, MAP_PRIVATE, fd, 0);
    ::close(fd);
    if (addr == MAP_FAILED) {
        throw Error("mmap failed for " + path.string());
    }
    MappedCsr m;
    m.header_ = h;
    m.base_ = static_cast<const std::byte*>(addr);
    m.size_ = size;
    if (verify) {
        verify_mapping(m);
    }
    return m;
}

} // namespace tkeig
