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
#include <string>
#include <vector>

#include "patchwise/descriptor.h"
#include "patchwise/geometry.h"

namespace patchwise {

/// Patch id reserved for a descriptor embedded from a ground-truth crop. Such
/// entries feed PQ training pools but are never searched.
inline constexpr std::uint16_t kGtCropPatchId = 0xFFFF;

struct PatchEntry {
    std::uint16_t patch_id = 0;
    NormRect region;
    Descriptor descriptor;
    friend bool operator==(const PatchEntry&, const PatchEntry&) = default;
};

struct ImageRecord {
    std::string image_id;
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<PatchEntry> entries;
    friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

inline constexpr std::uint16_t kEmbeddingFormatVersion = 1;

/// Checks shared dimension, unique patch ids and field ranges. Returns the
/// common dimension, or 0 for an empty list.
std::size_t validate_records(std::span<const ImageRecord> records);

std::vector<std::uint8_t> encode_embeddings(std::span<const ImageRecord> records);
std::vector<ImageRecord> decode_embeddings(std::span<const std::uint8_t> bytes);

void write_embeddings(std::span<const ImageRecord> records, const std::filesystem::path& path);
std::vector<ImageRecord> read_embeddings(const std::filesystem::path& path);

struct GroundTruthPositive {
    std::string image_id;
    PixelBox bbox;
    int width = 0;
    int height = 0;
    friend bool operator==(const GroundTruthPositive&, const GroundTruthPositive&) = default;
};

struct GroundTruthQuery {
    std::string query_id;
    std::string descriptor_ref;
    std::vector<GroundTruthPositive> positives;
    friend bool operator==(const GroundTruthQuery&, const GroundTruthQuery&) = default;
};

std::string format_ground_truth(std::span<const GroundTruthQuery> queries);
std::vector<GroundTruthQuery> parse_ground_truth(std::string_view text);

void write_ground_truth(std::span<const GroundTruthQuery> queries, const std::filesystem::path& path);
std::vector<GroundTruthQuery> read_ground_truth(const std::filesystem::path& path);

}  // namespace patchwise
