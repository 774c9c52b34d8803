// Copyright 2026-present the patchwise project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "patchwise/error.h"

namespace patchwise {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::kInvalidParameter: return "invalid_parameter";
        case ErrorCode::kDegenerateInput: return "degenerate_input";
        case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
        case ErrorCode::kBuildError: return "build_error";
        case ErrorCode::kNotFound: return "not_found";
        case ErrorCode::kBadMagic: return "bad_magic";
        case ErrorCode::kVersionMismatch: return "version_mismatch";
        case ErrorCode::kTruncated: return "truncated";
        case ErrorCode::kChecksumMismatch: return "checksum_mismatch";
        case ErrorCode::kParseError: return "parse_error";
        case ErrorCode::kIoError: return "io_error";
        case ErrorCode::kMissingQuery: return "missing_query";
    }
    return "unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::optional<std::uint64_t> offset)
    : std::runtime_error(message), code_(code), offset_(offset) {}

}  // namespace patchwise
