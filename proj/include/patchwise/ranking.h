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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "patchwise/geometry.h"

namespace patchwise {

struct ImageInfo {
    std::string image_id;
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    friend bool operator==(const ImageInfo&, const ImageInfo&) = default;
};

struct RankedHit {
    std::string image_id;
    float score = 0.0F;
    std::uint16_t best_patch_id = 0;
    NormRect best_region;
    std::uint32_t rank = 0;
    friend bool operator==(const RankedHit&, const RankedHit&) = default;
};

struct RankedList {
    std::string query_id;
    std::vector<RankedHit> hits;
    friend bool operator==(const RankedList&, const RankedList&) = default;
};

/// Running per-image maximum. Equal scores keep the lower patch id.
struct ImageBest {
    bool seen = false;
    float score = 0.0F;
    std::uint16_t patch_id = 0;
    NormRect region;

    void offer(float s, std::uint16_t id, const NormRect& r) noexcept {
        if (!seen || s > score || (s == score && id < patch_id)) {
            seen = true;
            score = s;
            patch_id = id;
            region = r;
        }
    }
};

/// Orders the images that received at least one score by score descending,
/// then image id ascending, and keeps the first k.
RankedList rank_images(std::span<const ImageInfo> images, std::span<const ImageBest> best, std::size_t k,
                       std::string query_id);

}  // namespace patchwise
