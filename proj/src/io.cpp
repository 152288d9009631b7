#include "coreset/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "coreset/errors.hpp"
#include "coreset/rng.hpp"

namespace coreset {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};
constexpr std::uint16_t kFormatVersion = 1;
constexpr std::uint16_t kFlagLabels = 1u << 0;
constexpr std::uint16_t kFlagIds = 1u << 1;
constexpr std::size_t kHeaderBytes = 24;
constexpr std::size_t kChunkElems = 16384;

void put_u16(std::string& buf, std::uint16_t v) {
    buf.push_back(static_cast<char>(v & 0xFF));
    buf.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u32(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f32(std::string& buf, float v) {
    put_u32(buf, std::bit_cast<std::uint32_t>(v));
}

void flush_chunk(std::ostream& out, std::string& buf) {
    if (buf.empty()) return;
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw DataError("save_embeddings: sink write failure");
    buf.clear();
}

// Reads exactly `want` bytes or throws FormatError::truncated at the offset
// where the stream ended. `offset` is advanced by the bytes consumed.
void read_exact(std::istream& in, char* dst, std::size_t want,
                std::uint64_t& offset, const std::string& what) {
    in.read(dst, static_cast<std::streamsize>(want));
    const auto got = static_cast<std::size_t>(in.gcount());
    offset += got;
    if (got != want) {
        throw FormatError(FormatError::Kind::truncated, offset,
                          "EMB1: truncated while reading " + what +
                              " at byte " + std::to_string(offset));
    }
}

std::uint16_t get_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) |
           (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) |
           (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

}  // namespace

std::uint64_t save_embeddings(const EmbeddingMatrix& matrix, std::ostream& out) {
    matrix.validate();
    std::uint16_t flags = 0;
    if (matrix.has_labels()) flags |= kFlagLabels;
    if (matrix.has_ids()) flags |= kFlagIds;

    std::string buf;
    buf.reserve(kChunkElems * 8);
    buf.append(kMagic, 4);
    put_u16(buf, kFormatVersion);
    put_u16(buf, flags);
    put_u64(buf, matrix.n);
    put_u32(buf, static_cast<std::uint32_t>(matrix.d));
    put_u32(buf, 0);  // reserved

    std::uint64_t total = kHeaderBytes;
    for (float v : matrix.values) {
        put_f32(buf, v);
        if (buf.size() >= kChunkElems * 4) flush_chunk(out, buf);
    }
    total += 4ull * matrix.values.size();
    for (std::uint32_t v : matrix.labels) {
        put_u32(buf, v);
        if (buf.size() >= kChunkElems * 4) flush_chunk(out, buf);
    }
    total += 4ull * matrix.labels.size();
    for (std::uint64_t v : matrix.ids) {
        put_u64(buf, v);
        if (buf.size() >= kChunkElems * 8) flush_chunk(out, buf);
    }
    total += 8ull * matrix.ids.size();
    flush_chunk(out, buf);
    out.flush();
    if (!out) throw DataError("save_embeddings: sink write failure");
    return total;
}

EmbeddingMatrix load_embeddings(std::istream& in) {
    std::uint64_t offset = 0;
    unsigned char header[kHeaderBytes];
    read_exact(in, reinterpret_cast<char*>(header), kHeaderBytes, offset, "header");

    if (std::memcmp(header, kMagic, 4) != 0) {
        throw FormatError(FormatError::Kind::bad_magic, 0,
                          "EMB1: bad magic at byte 0");
    }
    const std::uint16_t version = get_u16(header + 4);
    if (version != kFormatVersion) {
        throw FormatError(FormatError::Kind::bad_version, 4,
                          "EMB1: unsupported version " + std::to_string(version) +
                              " at byte 4");
    }
    const std::uint16_t flags = get_u16(header + 6);
    if ((flags & ~(kFlagLabels | kFlagIds)) != 0) {
        throw FormatError(FormatError::Kind::bad_header, 6,
                          "EMB1: unknown flag bits at byte 6");
    }
    const std::uint64_t n = get_u64(header + 8);
    const std::uint32_t d = get_u32(header + 16);
    const std::uint32_t reserved = get_u32(header + 20);
    if (d == 0) {
        throw FormatError(FormatError::Kind::bad_header, 16,
                          "EMB1: dimension must be >= 1 (byte 16)");
    }
    if (reserved != 0) {
        throw FormatError(FormatError::Kind::bad_header, 20,
                          "EMB1: nonzero reserved field at byte 20");
    }
    if (n != 0 && n > (UINT64_MAX / 4) / d) {
        throw FormatError(FormatError::Kind::bad_header, 8,
                          "EMB1: n*d overflows (byte 8)");
    }

    EmbeddingMatrix m;
    m.n = static_cast<std::size_t>(n);
    m.d = d;

    const std::uint64_t payload_elems = n * d;
    const std::uint64_t payload_bytes = payload_elems * 4;
    // Never trust the header for an up-front allocation: a corrupt n must
    // fail as `truncated` after one short read, not as a giant reserve.
    m.values.reserve(
        static_cast<std::size_t>(std::min<std::uint64_t>(payload_elems, kChunkElems)));
    {
        std::vector<unsigned char> chunk(kChunkElems * 4);
        std::uint64_t remaining = payload_elems;
        while (remaining > 0) {
            const std::size_t take =
                static_cast<std::size_t>(std::min<std::uint64_t>(remaining, kChunkElems));
            const std::uint64_t chunk_start = offset;
            in.read(reinterpret_cast<char*>(chunk.data()),
                    static_cast<std::streamsize>(take * 4));
            const auto got = static_cast<std::size_t>(in.gcount());
            offset += got;
            if (got != take * 4) {
                throw FormatError(
                    FormatError::Kind::truncated, offset,
                    "EMB1: truncated payload at byte " + std::to_string(offset) +
                        " (" + std::to_string(payload_bytes) + " payload bytes expected)");
            }
            for (std::size_t i = 0; i < take; ++i) {
                const float v = std::bit_cast<float>(get_u32(chunk.data() + i * 4));
                if (!std::isfinite(v)) {
                    throw FormatError(FormatError::Kind::non_finite,
                                      chunk_start + i * 4,
                                      "EMB1: non-finite value at byte " +
                                          std::to_string(chunk_start + i * 4));
                }
                m.values.push_back(v);
            }
            remaining -= take;
        }
    }

    if (flags & kFlagLabels) {
        m.labels.reserve(
            static_cast<std::size_t>(std::min<std::uint64_t>(n, kChunkElems)));
        std::vector<unsigned char> chunk(kChunkElems * 4);
        std::uint64_t remaining = n;
        while (remaining > 0) {
            const std::size_t take =
                static_cast<std::size_t>(std::min<std::uint64_t>(remaining, kChunkElems));
            read_exact(in, reinterpret_cast<char*>(chunk.data()), take * 4, offset,
                       "label block");
            for (std::size_t i = 0; i < take; ++i) {
                m.labels.push_back(get_u32(chunk.data() + i * 4));
            }
            remaining -= take;
        }
    }

    if (flags & kFlagIds) {
        const auto ids_hint =
            static_cast<std::size_t>(std::min<std::uint64_t>(n, kChunkElems));
        m.ids.reserve(ids_hint);
        std::unordered_set<std::uint64_t> seen;
        seen.reserve(ids_hint);
        std::vector<unsigned char> chunk(kChunkElems * 8);
        std::uint64_t remaining = n;
        while (remaining > 0) {
            const std::size_t take =
                static_cast<std::size_t>(std::min<std::uint64_t>(remaining, kChunkElems));
            const std::uint64_t chunk_start = offset;
            read_exact(in, reinterpret_cast<char*>(chunk.data()), take * 8, offset,
                       "id block");
            for (std::size_t i = 0; i < take; ++i) {
                const std::uint64_t id = get_u64(chunk.data() + i * 8);
                if (!seen.insert(id).second) {
                    throw FormatError(FormatError::Kind::duplicate_id,
                                      chunk_start + i * 8,
                                      "EMB1: duplicate id at byte " +
                                          std::to_string(chunk_start + i * 8));
                }
                m.ids.push_back(id);
            }
            remaining -= take;
        }
    }
    return m;
}

std::uint64_t save_embeddings_file(const EmbeddingMatrix& matrix,
                                   const std::filesystem::path& path) {
    std::uint64_t bytes = 0;
    atomic_write_file(path, [&](std::ostream& out) {
        bytes = save_embeddings(matrix, out);
    });
    return bytes;
}

EmbeddingMatrix load_embeddings_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return load_embeddings(in);
}

namespace {

std::vector<std::uint64_t> parse_u64_list(const std::string& text) {
    std::vector<std::uint64_t> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t next = text.find(',', pos);
        if (next == std::string::npos) next = text.size();
        out.push_back(std::stoull(text.substr(pos, next - pos)));
        pos = next + 1;
    }
    return out;
}

std::string join_u64_list(const std::vector<std::uint64_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out.push_back(',');
        out += std::to_string(v[i]);
    }
    return out;
}

}  // namespace

void save_selection(const Selection& selection, std::ostream& out) {
    const SelectionProvenance& p = selection.provenance;
    out << "# coreset selection v1\n";
    out << "# version=" << kVersion << "\n";
    out << "# epoch=" << p.epoch << "\n";
    out << "# rho=" << format_double(p.rho) << "\n";
    out << "# eta=" << format_double(p.eta) << "\n";
    out << "# seed=" << p.seed << "\n";
    char hashbuf[17];
    std::snprintf(hashbuf, sizeof hashbuf, "%016llx",
                  static_cast<unsigned long long>(p.source_hash));
    out << "# source_hash=" << hashbuf << "\n";
    if (p.config_hash != 0) {
        std::snprintf(hashbuf, sizeof hashbuf, "%016llx",
                      static_cast<unsigned long long>(p.config_hash));
        out << "# config_hash=" << hashbuf << "\n";
    }
    if (!p.cluster_sizes.empty()) {
        out << "# cluster_sizes=" << join_u64_list(p.cluster_sizes) << "\n";
    }
    if (!p.quotas.empty()) {
        out << "# quotas=" << join_u64_list(p.quotas) << "\n";
    }
    for (std::uint64_t idx : selection.indices.indices) {
        out << idx << "\n";
    }
    if (!out) throw DataError("save_selection: sink write failure");
}

Selection load_selection(std::istream& in) {
    Selection sel;
    std::string line;
    std::uint64_t lineno = 0;
    bool have_prev = false;
    std::uint64_t prev = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string body = line.substr(1);
            const std::size_t start = body.find_first_not_of(' ');
            if (start == std::string::npos) continue;
            body = body.substr(start);
            const std::size_t eq = body.find('=');
            if (eq == std::string::npos) continue;  // plain comment
            const std::string key = body.substr(0, eq);
            const std::string value = body.substr(eq + 1);
            try {
                if (key == "epoch") sel.provenance.epoch = std::stoull(value);
                else if (key == "rho") sel.provenance.rho = std::stod(value);
                else if (key == "eta") sel.provenance.eta = std::stod(value);
                else if (key == "seed") sel.provenance.seed = std::stoull(value);
                else if (key == "source_hash")
                    sel.provenance.source_hash = std::stoull(value, nullptr, 16);
                else if (key == "config_hash")
                    sel.provenance.config_hash = std::stoull(value, nullptr, 16);
                else if (key == "cluster_sizes")
                    sel.provenance.cluster_sizes = parse_u64_list(value);
                else if (key == "quotas")
                    sel.provenance.quotas = parse_u64_list(value);
                // Unknown keys are comments.
            } catch (const std::exception&) {
                throw FormatError(FormatError::Kind::bad_record, lineno,
                                  "selection: bad header value on line " +
                                      std::to_string(lineno));
            }
            continue;
        }
        std::uint64_t idx = 0;
        std::size_t consumed = 0;
        try {
            idx = std::stoull(line, &consumed);
        } catch (const std::exception&) {
            throw FormatError(FormatError::Kind::bad_record, lineno,
                              "selection: not an index on line " +
                                  std::to_string(lineno));
        }
        if (consumed != line.size()) {
            throw FormatError(FormatError::Kind::bad_record, lineno,
                              "selection: trailing characters on line " +
                                  std::to_string(lineno));
        }
        if (have_prev && idx <= prev) {
            throw FormatError(FormatError::Kind::bad_record, lineno,
                              "selection: indices not strictly ascending on line " +
                                  std::to_string(lineno));
        }
        sel.indices.indices.push_back(idx);
        prev = idx;
        have_prev = true;
    }
    return sel;
}

void save_selection_file(const Selection& selection,
                         const std::filesystem::path& path) {
    atomic_write_file(path, [&](std::ostream& out) { save_selection(selection, out); });
}

Selection load_selection_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return load_selection(in);
}

std::uint64_t matrix_content_hash(const EmbeddingMatrix& matrix) {
    std::ostringstream buf(std::ios::binary);
    save_embeddings(matrix, buf);
    const std::string bytes = buf.str();
    return fnv1a64(std::string_view(bytes.data(), bytes.size()));
}

void atomic_write_file(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& producer) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot open " + tmp.string() + " for writing");
        producer(out);
        out.flush();
        if (!out) throw DataError("write failure on " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

}  // namespace coreset
