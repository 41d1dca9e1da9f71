#pragma once

#include <stdexcept>
#include <string>

namespace microdepth {

// Contract violation: bad argument values, impossible sizes, out-of-range
// parameters. Maps to CLI exit code 1.
struct invalid_input : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Structurally valid input the operation cannot work with, e.g. a
// single-level image handed to Otsu thresholding.
struct degenerate_input : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Dataset-level inconsistency: ragged embedding lengths, missing labels,
// feature/model layout mismatch. Maps to CLI exit code 2.
struct invalid_dataset : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
    enum class Kind {
        MissingFile,
        BadHeader,
        UnsupportedFormat,
        UnsupportedDepth,
        IoFailure,
    };

    io_error(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}

    Kind kind;
};

} // namespace microdepth
