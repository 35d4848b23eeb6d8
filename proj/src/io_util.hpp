#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

#include "gait/errors.hpp"

namespace gait::detail {

// Shortest round-trip decimal for a double; stable across runs, which the
// byte-identical output contract relies on.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string digest_hex(std::uint64_t digest) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(digest));
    return buf;
}

inline void write_bytes(std::ostream& out, const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

inline void write_u8(std::ostream& out, std::uint8_t v) { write_bytes(out, &v, 1); }

inline void write_u16le(std::ostream& out, std::uint16_t v) {
    const std::uint8_t b[2] = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8)};
    write_bytes(out, b, 2);
}

inline void write_u32le(std::ostream& out, std::uint32_t v) {
    std::uint8_t b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    write_bytes(out, b, 4);
}

inline void write_u64le(std::ostream& out, std::uint64_t v) {
    std::uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    write_bytes(out, b, 8);
}

inline void write_f64le(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    write_u64le(out, bits);
}

inline void read_bytes(std::istream& in, void* p, std::size_t n, const char* what) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
        throw FormatError(std::string("truncated file while reading ") + what);
}

inline std::uint8_t read_u8(std::istream& in, const char* what) {
    std::uint8_t v;
    read_bytes(in, &v, 1, what);
    return v;
}

inline std::uint16_t read_u16le(std::istream& in, const char* what) {
    std::uint8_t b[2];
    read_bytes(in, b, 2, what);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

inline std::uint32_t read_u32le(std::istream& in, const char* what) {
    std::uint8_t b[4];
    read_bytes(in, b, 4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

inline std::uint64_t read_u64le(std::istream& in, const char* what) {
    std::uint8_t b[8];
    read_bytes(in, b, 8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

inline double read_f64le(std::istream& in, const char* what) {
    const std::uint64_t bits = read_u64le(in, what);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

inline std::ofstream open_out(const std::filesystem::path& file, bool binary = false) {
    std::ofstream out(file, binary ? std::ios::binary : std::ios::out);
    if (!out) throw IoError("cannot open for writing: " + file.string());
    return out;
}

inline std::ifstream open_in(const std::filesystem::path& file, bool binary = false) {
    std::ifstream in(file, binary ? std::ios::binary : std::ios::in);
    if (!in) throw IoError("cannot open for reading: " + file.string());
    return in;
}

}  // namespace gait::detail
