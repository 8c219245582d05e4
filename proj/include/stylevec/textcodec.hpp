#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "stylevec/errors.hpp"

namespace stylevec::textcodec {

/// Byte-level vocabulary: ids 0..255 are raw bytes, 256/257 are the
/// reserved begin/end markers inserted by the LM layer (never the codec).
inline constexpr int kBos = 256;
inline constexpr int kEos = 257;
inline constexpr int kVocabSize = 258;

using TokenSeq = std::vector<int>;

/// One token per byte. Any byte sequence encodes; no BOS/EOS are added.
inline TokenSeq encode(std::string_view text) {
    TokenSeq ids;
    ids.reserve(text.size());
    for (unsigned char c : text) ids.push_back(static_cast<int>(c));
    return ids;
}

namespace detail {

// Validates one UTF-8 sequence starting at bytes[i], returns its length or 0.
inline size_t utf8_seq_len(const std::string& bytes, size_t i) {
    const auto b0 = static_cast<unsigned char>(bytes[i]);
    if (b0 < 0x80) return 1;
    size_t len = 0;
    uint32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) { len = 2; cp = b0 & 0x1Fu; }
    else if ((b0 & 0xF0) == 0xE0) { len = 3; cp = b0 & 0x0Fu; }
    else if ((b0 & 0xF8) == 0xF0) { len = 4; cp = b0 & 0x07u; }
    else return 0;
    if (i + len > bytes.size()) return 0;
    for (size_t k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(bytes[i + k]);
        if ((b & 0xC0) != 0x80) return 0;
        cp = (cp << 6) | (b & 0x3Fu);
    }
    // reject overlong forms, surrogates, and out-of-range code points
    if (len == 2 && cp < 0x80) return 0;
    if (len == 3 && cp < 0x800) return 0;
    if (len == 4 && cp < 0x10000) return 0;
    if (cp > 0x10FFFF) return 0;
    if (cp >= 0xD800 && cp <= 0xDFFF) return 0;
    return len;
}

// How many bytes the ill-formed sequence at bytes[i] spans: the lead byte
// plus any continuation bytes forming a valid prefix (the "maximal subpart"
// that replacement-decoding substitutes with a single U+FFFD).
inline size_t invalid_span_len(const std::string& bytes, size_t i) {
    const auto b0 = static_cast<unsigned char>(bytes[i]);
    auto cont = [&](size_t j, unsigned char lo, unsigned char hi) {
        if (j >= bytes.size()) return false;
        const auto b = static_cast<unsigned char>(bytes[j]);
        return b >= lo && b <= hi;
    };
    if (b0 == 0xE0) {
        return cont(i + 1, 0xA0, 0xBF) ? 2 : 1;
    } else if (b0 >= 0xE1 && b0 <= 0xEC) {
        return cont(i + 1, 0x80, 0xBF) ? 2 : 1;
    } else if (b0 == 0xED) {
        return cont(i + 1, 0x80, 0x9F) ? 2 : 1;
    } else if (b0 == 0xEE || b0 == 0xEF) {
        return cont(i + 1, 0x80, 0xBF) ? 2 : 1;
    } else if (b0 == 0xF0) {
        if (!cont(i + 1, 0x90, 0xBF)) return 1;
        return cont(i + 2, 0x80, 0xBF) ? 3 : 2;
    } else if (b0 >= 0xF1 && b0 <= 0xF3) {
        if (!cont(i + 1, 0x80, 0xBF)) return 1;
        return cont(i + 2, 0x80, 0xBF) ? 3 : 2;
    } else if (b0 == 0xF4) {
        if (!cont(i + 1, 0x80, 0x8F)) return 1;
        return cont(i + 2, 0x80, 0xBF) ? 3 : 2;
    }
    return 1; // stray continuation byte or byte that can never start a sequence
}

inline std::string collect_bytes(const TokenSeq& seq) {
    std::string bytes;
    bytes.reserve(seq.size());
    for (int id : seq) {
        if (id == kBos || id == kEos) continue; // markers are structural, skip
        if (id < 0 || id > 255)
            throw InvalidUtf8("decode: token id " + std::to_string(id) + " is not a byte");
        bytes.push_back(static_cast<char>(static_cast<unsigned char>(id)));
    }
    return bytes;
}

} // namespace detail

/// Byte-for-byte reconstruction. Throws InvalidUtf8 when the reconstructed
/// bytes are not valid UTF-8 (corrupted generation).
inline std::string decode(const TokenSeq& seq) {
    std::string bytes = detail::collect_bytes(seq);
    size_t i = 0;
    while (i < bytes.size()) {
        const size_t len = detail::utf8_seq_len(bytes, i);
        if (len == 0)
            throw InvalidUtf8("decode: invalid UTF-8 at byte offset " + std::to_string(i));
        i += len;
    }
    return bytes;
}

/// Like decode() but replaces invalid sequences with U+FFFD instead of
/// throwing. Used on generated text, which may contain stray bytes.
inline std::string decode_lossy(const TokenSeq& seq) {
    std::string bytes = detail::collect_bytes(seq);
    std::string out;
    out.reserve(bytes.size());
    size_t i = 0;
    while (i < bytes.size()) {
        const size_t len = detail::utf8_seq_len(bytes, i);
        if (len == 0) {
            out += "\xEF\xBF\xBD";
            i += detail::invalid_span_len(bytes, i);
        } else {
            out.append(bytes, i, len);
            i += len;
        }
    }
    return out;
}

} // namespace stylevec::textcodec
