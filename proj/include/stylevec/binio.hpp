#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "stylevec/errors.hpp"

// Little-endian primitives shared by the checkpoint and vector-file formats.

namespace stylevec::binio {

inline void write_bytes(std::ostream& os, const void* p, size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

inline void write_u16(std::ostream& os, uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v & 0xFF),
                          static_cast<unsigned char>(v >> 8)};
    write_bytes(os, b, 2);
}

inline void write_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    write_bytes(os, b, 4);
}

inline void write_u64(std::ostream& os, uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    write_bytes(os, b, 8);
}

inline void write_i32(std::ostream& os, int32_t v) { write_u32(os, static_cast<uint32_t>(v)); }

inline void write_f32(std::ostream& os, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    write_u32(os, bits);
}

inline void read_bytes(std::istream& is, void* p, size_t n, const char* field) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<size_t>(is.gcount()) != n)
        throw TruncatedFile(std::string("truncated while reading ") + field);
}

inline uint8_t read_u8(std::istream& is, const char* field) {
    uint8_t b;
    read_bytes(is, &b, 1, field);
    return b;
}

inline uint16_t read_u16(std::istream& is, const char* field) {
    unsigned char b[2];
    read_bytes(is, b, 2, field);
    return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

inline uint32_t read_u32(std::istream& is, const char* field) {
    unsigned char b[4];
    read_bytes(is, b, 4, field);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
    return v;
}

inline uint64_t read_u64(std::istream& is, const char* field) {
    unsigned char b[8];
    read_bytes(is, b, 8, field);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return v;
}

inline int32_t read_i32(std::istream& is, const char* field) {
    return static_cast<int32_t>(read_u32(is, field));
}

inline float read_f32(std::istream& is, const char* field) {
    const uint32_t bits = read_u32(is, field);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

} // namespace stylevec::binio
