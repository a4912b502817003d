#include "anchorattn/workload_io.hpp"

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace anchorattn {

namespace {

constexpr std::array<char, 4> kMagic = {'A', 'Q', 'K', 'V'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint8_t kDtypeF32 = 0;

void put_u32(std::ostream& os, std::uint32_t v) {
    const std::array<unsigned char, 4> b = {
        static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b.data()), b.size());
}

void put_u64(std::ostream& os, std::uint64_t v) {
    put_u32(os, static_cast<std::uint32_t>(v));
    put_u32(os, static_cast<std::uint32_t>(v >> 32));
}

bool get_u32(std::istream& is, std::uint32_t& v) {
    std::array<unsigned char, 4> b;
    if (!is.read(reinterpret_cast<char*>(b.data()), b.size())) return false;
    v = static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
        static_cast<std::uint32_t>(b[2]) << 16 |
        static_cast<std::uint32_t>(b[3]) << 24;
    return true;
}

bool get_u64(std::istream& is, std::uint64_t& v) {
    std::uint32_t lo = 0;
    std::uint32_t hi = 0;
    if (!get_u32(is, lo) || !get_u32(is, hi)) return false;
    v = static_cast<std::uint64_t>(hi) << 32 | lo;
    return true;
}

void put_f32_rows(std::ostream& os, const Matrix& m) {
    static_assert(sizeof(float) == 4);
    for (float x : m.data) {
        std::uint32_t bits;
        std::memcpy(&bits, &x, 4);
        put_u32(os, bits);
    }
}

bool get_f32_rows(std::istream& is, Matrix& m) {
    for (float& x : m.data) {
        std::uint32_t bits = 0;
        if (!get_u32(is, bits)) return false;
        std::memcpy(&x, &bits, 4);
    }
    return true;
}

}  // namespace

void write_workload(const std::string& path, const std::vector<HeadWorkload>& heads) {
    if (heads.empty()) {
        throw DecodeError(DecodeErrorKind::EmptyWorkload, "write_workload: empty workload");
    }
    const std::size_t n = heads.front().n;
    const std::size_t d = heads.front().d;
    for (const HeadWorkload& h : heads) {
        if (h.n != n || h.d != d) {
            throw DecodeError(DecodeErrorKind::ShapeMismatch,
                              "write_workload: heads must share (n, d)");
        }
    }

    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) {
        throw DecodeError(DecodeErrorKind::Io, "write_workload: cannot open " + path);
    }
    os.write(kMagic.data(), kMagic.size());
    put_u32(os, kVersion);
    put_u32(os, static_cast<std::uint32_t>(heads.size()));
    put_u64(os, n);
    put_u32(os, static_cast<std::uint32_t>(d));
    const std::array<char, 4> dtype_and_reserved = {static_cast<char>(kDtypeF32), 0, 0, 0};
    os.write(dtype_and_reserved.data(), dtype_and_reserved.size());
    for (const HeadWorkload& h : heads) {
        put_f32_rows(os, h.q);
        put_f32_rows(os, h.k);
        put_f32_rows(os, h.v);
    }
    if (!os) {
        throw DecodeError(DecodeErrorKind::Io, "write_workload: write failed for " + path);
    }
}

std::vector<HeadWorkload> read_workload(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw DecodeError(DecodeErrorKind::Io, "read_workload: cannot open " + path);
    }

    std::array<char, 4> magic = {};
    if (!is.read(magic.data(), magic.size())) {
        throw DecodeError(DecodeErrorKind::Truncated, "read_workload: truncated header");
    }
    if (magic != kMagic) {
        throw DecodeError(DecodeErrorKind::BadMagic, "read_workload: bad magic");
    }

    std::uint32_t version = 0;
    std::uint32_t head_count = 0;
    std::uint64_t n = 0;
    std::uint32_t d = 0;
    std::array<char, 4> dtype_and_reserved = {};
    if (!get_u32(is, version) || !get_u32(is, head_count) || !get_u64(is, n) ||
        !get_u32(is, d) ||
        !is.read(dtype_and_reserved.data(), dtype_and_reserved.size())) {
        throw DecodeError(DecodeErrorKind::Truncated, "read_workload: truncated header");
    }
    if (version != kVersion) {
        throw DecodeError(DecodeErrorKind::BadVersion,
                          "read_workload: version mismatch (got " +
                              std::to_string(version) + ")");
    }
    if (head_count == 0) {
        throw DecodeError(DecodeErrorKind::EmptyWorkload, "read_workload: empty workload");
    }
    if (n == 0 || d == 0) {
        throw DecodeError(DecodeErrorKind::ShapeMismatch,
                          "read_workload: shape mismatch, n and d must be >= 1");
    }
    if (dtype_and_reserved[0] != static_cast<char>(kDtypeF32)) {
        throw DecodeError(DecodeErrorKind::ShapeMismatch,
                          "read_workload: unsupported dtype");
    }

    std::vector<HeadWorkload> heads;
    heads.reserve(head_count);
    for (std::uint32_t h = 0; h < head_count; ++h) {
        Matrix q(n, d);
        Matrix k(n, d);
        Matrix v(n, d);
        if (!get_f32_rows(is, q) || !get_f32_rows(is, k) || !get_f32_rows(is, v)) {
            throw DecodeError(DecodeErrorKind::Truncated,
                              "read_workload: truncated payload at head " +
                                  std::to_string(h));
        }
        if (!q.all_finite() || !k.all_finite() || !v.all_finite()) {
            throw DecodeError(DecodeErrorKind::NonFinite,
                              "read_workload: non-finite value in head " +
                                  std::to_string(h));
        }
        heads.push_back(HeadWorkload::create(std::move(q), std::move(k), std::move(v)));
    }
    return heads;
}

}  // namespace anchorattn
