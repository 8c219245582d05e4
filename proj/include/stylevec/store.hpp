#pragma once

// Persistence: the SVEC binary format for style vectors (O(D) per user) and
// JSONL dataset ingestion.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "stylevec/binio.hpp"
#include "stylevec/errors.hpp"
#include "stylevec/extract.hpp"

namespace stylevec {

// SVEC layout (little-endian), 16-byte header then payload:
//   magic "SVEC" (4) | version u16 | layer u16 | method u8 | reserved u8
//   | dim u32 | n_pairs u16 | values dim x f32 | user_id u16 len + bytes
// Total size: 16 + 4*dim + 2 + |user_id|. The creation timestamp is
// deliberately not stored so identical vectors serialize identically.
inline constexpr uint16_t kVectorFormatVersion = 1;

inline void save_vector(const StyleVector& style, const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    if (style.layer < 0 || style.layer > 0xffff)
        throw DataError("layer does not fit the format's u16 field");
    if (style.n_pairs < 0 || style.n_pairs > 0xffff)
        throw DataError("n_pairs does not fit the format's u16 field");
    if (style.user_id.size() > 0xffff)
        throw DataError("user_id longer than the format's u16 length prefix");

    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw IoError("cannot open " + tmp.string() + " for writing");
        binio::write_bytes(os, "SVEC", 4);
        binio::write_u16(os, kVectorFormatVersion);
        binio::write_u16(os, static_cast<uint16_t>(style.layer));
        os.put(static_cast<char>(static_cast<uint8_t>(style.method)));
        os.put(0); // reserved
        binio::write_u32(os, static_cast<uint32_t>(style.values.size()));
        binio::write_u16(os, static_cast<uint16_t>(style.n_pairs));
        for (float v : style.values) binio::write_f32(os, v);
        binio::write_u16(os, static_cast<uint16_t>(style.user_id.size()));
        binio::write_bytes(os, style.user_id.data(), style.user_id.size());
        os.flush();
        if (!os) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("rename " + tmp.string() + " -> " + path.string() +
                          ": " + ec.message());
}

inline StyleVector load_vector(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    char magic[4];
    binio::read_bytes(is, magic, 4, "magic");
    if (std::string_view(magic, 4) != "SVEC")
        throw BadMagic("bad magic in " + path.string() + " (want SVEC)");
    const uint16_t version = binio::read_u16(is, "version");
    if (version != kVectorFormatVersion)
        throw VersionUnsupported("vector file version " + std::to_string(version) +
                                 " unsupported (want " +
                                 std::to_string(kVectorFormatVersion) + ")");
    StyleVector sv;
    sv.layer = binio::read_u16(is, "layer");
    const uint8_t method = static_cast<uint8_t>(binio::read_u8(is, "method"));
    if (method > 2)
        throw DataError("unknown method byte " + std::to_string(method));
    sv.method = static_cast<ExtractMethod>(method);
    binio::read_u8(is, "reserved");
    const uint32_t dim = binio::read_u32(is, "dim");
    sv.n_pairs = binio::read_u16(is, "n_pairs");
    sv.values.resize(dim);
    for (uint32_t d = 0; d < dim; ++d) sv.values[d] = binio::read_f32(is, "values");
    const uint16_t id_len = binio::read_u16(is, "user_id length");
    sv.user_id.resize(id_len);
    if (id_len > 0) binio::read_bytes(is, sv.user_id.data(), id_len, "user_id");
    sv.created_at = std::chrono::system_clock::now();
    return sv;
}

// ---------------------------------------------------------------------------
// JSONL datasets
// ---------------------------------------------------------------------------

struct DatasetRecord {
    std::string user_id;
    std::vector<HistoryPair> history;
    std::string query;
    std::string reference; // empty when absent (unlabeled inference)
};

struct LineIssue {
    size_t line; // 1-based
    std::string reason;
};

struct Dataset {
    std::vector<DatasetRecord> records;
    std::vector<LineIssue> issues;
    size_t lines_total = 0;
};

/// One JSON object per line:
///   {"user_id": str, "history": [{"input": str, "output": str,
///    "neutral": str?}], "query": str, "reference": str?}
/// Malformed lines are reported with their line number and skipped; a file
/// yielding zero records is an error.
inline Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    Dataset ds;
    std::string line;
    size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ++ds.lines_total;
        try {
            const auto j = nlohmann::json::parse(line);
            DatasetRecord rec;
            rec.user_id = j.at("user_id").get<std::string>();
            rec.query = j.at("query").get<std::string>();
            if (j.contains("reference") && !j.at("reference").is_null())
                rec.reference = j.at("reference").get<std::string>();
            if (!j.at("history").is_array())
                throw DataError("history is not an array");
            for (const auto& h : j.at("history")) {
                HistoryPair p;
                p.input = h.at("input").get<std::string>();
                p.output = h.at("output").get<std::string>();
                if (h.contains("neutral") && !h.at("neutral").is_null())
                    p.neutral = h.at("neutral").get<std::string>();
                if (p.input.empty() || p.output.empty())
                    throw DataError("history item with empty input or output");
                rec.history.push_back(std::move(p));
            }
            if (rec.history.empty()) throw DataError("empty history");
            ds.records.push_back(std::move(rec));
        } catch (const nlohmann::json::exception& e) {
            ds.issues.push_back({line_no, e.what()});
        } catch (const DataError& e) {
            ds.issues.push_back({line_no, e.what()});
        }
    }
    if (ds.records.empty())
        throw AllLinesMalformed("no usable records in " + path.string() + " (" +
                                std::to_string(ds.issues.size()) + " bad lines)");
    return ds;
}

} // namespace stylevec
