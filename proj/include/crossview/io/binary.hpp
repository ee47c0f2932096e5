#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "crossview/error.hpp"

namespace crossview::io {

// Little-endian scalar I/O, independent of host byte order.

inline void put_bytes(std::ostream& out, const void* data, std::size_t n) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

template <typename T>
void put_le(std::ostream& out, T value) {
    static_assert(std::is_integral_v<T>);
    unsigned char buf[sizeof(T)];
    using U = std::make_unsigned_t<T>;
    U u = static_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(u >> (8 * i));
    put_bytes(out, buf, sizeof(T));
}

inline void put_f32(std::ostream& out, float value) {
    std::uint32_t bits;
    std::memcpy(&bits, &value, 4);
    put_le(out, bits);
}

inline void put_f64(std::ostream& out, double value) {
    std::uint64_t bits;
    std::memcpy(&bits, &value, 8);
    put_le(out, bits);
}

inline void get_bytes(std::istream& in, void* data, std::size_t n, const char* what) {
    in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) {
        throw IoError(std::string("truncated file while reading ") + what);
    }
}

template <typename T>
T get_le(std::istream& in, const char* what) {
    static_assert(std::is_integral_v<T>);
    unsigned char buf[sizeof(T)];
    get_bytes(in, buf, sizeof(T), what);
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<U>(buf[i]) << (8 * i);
    return static_cast<T>(u);
}

inline float get_f32(std::istream& in, const char* what) {
    std::uint32_t bits = get_le<std::uint32_t>(in, what);
    float value;
    std::memcpy(&value, &bits, 4);
    return value;
}

inline double get_f64(std::istream& in, const char* what) {
    std::uint64_t bits = get_le<std::uint64_t>(in, what);
    double value;
    std::memcpy(&value, &bits, 8);
    return value;
}

}  // namespace crossview::io
