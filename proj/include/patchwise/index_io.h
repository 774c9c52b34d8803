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
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "patchwise/flat_index.h"
#include "patchwise/ivfpq_index.h"

namespace patchwise {

inline constexpr std::uint16_t kIndexFormatVersion = 1;

enum class IndexKind : std::uint8_t { kFlat = 0, kIvfPq = 1 };

using Index = std::variant<FlatIndex, IvfPqIndex>;

std::vector<std::uint8_t> encode_index(const FlatIndex& index);
std::vector<std::uint8_t> encode_index(const IvfPqIndex& index);
std::vector<std::uint8_t> encode_index(const Index& index);
Index decode_index(std::span<const std::uint8_t> bytes);

void write_index(const Index& index, const std::filesystem::path& path);
Index read_index(const std::filesystem::path& path);

}  // namespace patchwise
