// mrctreg - MR-CT slice stack alignment and registration toolkit
// SPDX-License-Identifier: Apache-2.0

#ifndef MRCT_ERROR_HPP
#define MRCT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace mrct {

enum class ErrorCode {
    invalid_argument,
    io,
    format,
    dimension_mismatch,
    empty_roi,
    numeric,
    internal,
};

/// Exception carrying a machine-readable code alongside the message.
/// The C API maps these codes onto its status enum; the CLI maps them
/// onto exit codes (input errors -> 2, numeric failures -> 3).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& msg)
        : std::runtime_error(msg), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

const char* error_code_name(ErrorCode code);

}  // namespace mrct

#endif
