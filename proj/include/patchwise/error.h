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

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace patchwise {

enum class ErrorCode : std::uint8_t {
    kInvalidParameter,
    kDegenerateInput,
    kDimensionMismatch,
    kBuildError,
    kNotFound,
    kBadMagic,
    kVersionMismatch,
    kTruncated,
    kChecksumMismatch,
    kParseError,
    kIoError,
    kMissingQuery,
};

/// Stable machine-readable name, e.g. "bad_magic".
std::string_view error_code_name(ErrorCode code);

/// All library failures are reported through this exception. Parse failures
/// additionally carry the byte offset at which decoding stopped.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message,
          std::optional<std::uint64_t> offset = std::nullopt);

    ErrorCode code() const noexcept { return code_; }
    std::optional<std::uint64_t> offset() const noexcept { return offset_; }

private:
    ErrorCode code_;
    std::optional<std::uint64_t> offset_;
};

}  // namespace patchwise
