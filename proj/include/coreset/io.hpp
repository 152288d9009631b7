#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>

#include "coreset/matrix.hpp"
#include "coreset/selection.hpp"

namespace coreset {

inline constexpr const char* kVersion = "0.1.0";

// EMB1 binary format, little-endian:
//   magic "EMB1" | version u16 = 1 | flags u16 | n u64 | d u32 | reserved u32
//   payload n*d f32 row-major | [labels n*u32] | [ids n*u64]
// flags bit 0: labels present, bit 1: ids present; other bits must be zero.
// The 24-byte header is fixed; load_embeddings is a bit-exact inverse of
// save_embeddings for every valid matrix.

// Writes `matrix` to `out` and returns the byte count. Throws DataError on
// invalid matrices or sink failure.
std::uint64_t save_embeddings(const EmbeddingMatrix& matrix, std::ostream& out);

// Parses EMB1 from `in`. Validates magic, version, flags, counts, payload
// length, finiteness and id uniqueness; throws FormatError with the failing
// byte offset. Trailing bytes after the declared content are left unread.
EmbeddingMatrix load_embeddings(std::istream& in);

std::uint64_t save_embeddings_file(const EmbeddingMatrix& matrix,
                                   const std::filesystem::path& path);
EmbeddingMatrix load_embeddings_file(const std::filesystem::path& path);

// Selection text format: '#'-prefixed "key=value" provenance header lines,
// then one decimal index per line, strictly ascending. Unknown '#' lines are
// comments. Blank lines are ignored.
void save_selection(const Selection& selection, std::ostream& out);
Selection load_selection(std::istream& in);

void save_selection_file(const Selection& selection,
                         const std::filesystem::path& path);
Selection load_selection_file(const std::filesystem::path& path);

// Content hash of a matrix (dims + payload + labels + ids), FNV-1a 64.
// Used as source_hash in Selection provenance.
std::uint64_t matrix_content_hash(const EmbeddingMatrix& matrix);

// Writes via `producer` into <path>.tmp, then renames onto `path`.
void atomic_write_file(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& producer);

// Fixed-notation double formatting used in all text artifacts: shortest
// round-trippable representation ("%.17g" trimmed), locale-independent.
std::string format_double(double value);

}  // namespace coreset
