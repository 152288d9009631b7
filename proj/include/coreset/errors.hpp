#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace coreset {

// Base of all library errors. The CLI maps these to exit codes:
// UsageError -> 1, DataError (and subclasses) -> 2, NumericError -> 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad inputs: malformed files, invalid configs, violated preconditions.
class DataError : public Error {
public:
    using Error::Error;
};

// Malformed EMB1 / Selection / manifest content. Carries the failure kind
// and the byte offset (or line number for text formats) where it was found.
class FormatError : public DataError {
public:
    enum class Kind {
        bad_magic,
        bad_version,
        bad_header,
        truncated,
        non_finite,
        duplicate_id,
        bad_record,
    };

    FormatError(Kind kind, std::uint64_t offset, const std::string& what)
        : DataError(what), kind_(kind), offset_(offset) {}

    Kind kind() const { return kind_; }
    std::uint64_t offset() const { return offset_; }

private:
    Kind kind_;
    std::uint64_t offset_;
};

// Numerical failure: collapsed embeddings, non-finite values produced at
// runtime, violated monotonicity guarantees.
class NumericError : public Error {
public:
    using Error::Error;
};

// Command-line misuse (unknown subcommand, missing flags).
class UsageError : public Error {
public:
    using Error::Error;
};

}  // namespace coreset
